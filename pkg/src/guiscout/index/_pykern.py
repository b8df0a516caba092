"""Pure-Python/numpy fallback for the hot kernels.

Same contracts as the compiled module (guiscout.index._ckern): greedy
best-first search over the layer-0 proximity graph, the diversity-aware
neighbor selection heuristic, and CRC32C. Distances are negated dot
products accumulated in float64 over float32-stored vectors.

The two backends may differ in the last ulp of a distance (numpy uses
pairwise summation, the compiled kernel a sequential loop); each backend
is individually deterministic.
"""

import heapq

import numpy as np

BACKEND_NAME = "python"

_CRC_POLY = 0x82F63B78  # Castagnoli, reflected


def _build_crc_table():
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ (_CRC_POLY if c & 1 else 0)
        table.append(c)
    return table


_CRC_TABLE = _build_crc_table()


def crc32c(data, crc=0):
    """CRC32C (Castagnoli) of `data`, continuing from `crc`."""
    c = crc ^ 0xFFFFFFFF
    table = _CRC_TABLE
    for b in bytes(data):
        c = table[(c ^ b) & 0xFF] ^ (c >> 8)
    return c ^ 0xFFFFFFFF


def search_layer0(vecs, adj0, deg0, n, query, entries, ef):
    """Best-first search over the layer-0 graph.

    vecs: (capacity, dim) float32, adj0: (capacity, 2M) int32,
    deg0: (capacity,) int32, entries: int32 ordinals, ef: beam width.
    Returns (ordinals int32, dists float64) sorted ascending by
    (dist, ordinal), at most ef items. dist = -dot(query, vec).
    """
    if n == 0 or len(entries) == 0:
        return np.empty(0, dtype=np.int32), np.empty(0, dtype=np.float64)
    q64 = query.astype(np.float64)
    visited = np.zeros(n, dtype=bool)

    eps = np.unique(np.asarray(entries, dtype=np.int32))
    visited[eps] = True
    dists = -(vecs[eps].astype(np.float64) @ q64)

    candidates = []  # min-heap of (dist, ord)
    best = []  # max-heap of (-dist, -ord), capped at ef
    for o, d in zip(eps.tolist(), dists.tolist()):
        heapq.heappush(candidates, (d, o))
        if len(best) < ef:
            heapq.heappush(best, (-d, -o))
        elif (d, o) < (-best[0][0], -best[0][1]):
            heapq.heapreplace(best, (-d, -o))

    while candidates:
        d_c, c = heapq.heappop(candidates)
        if len(best) >= ef and d_c > -best[0][0]:
            break
        neigh = adj0[c, : deg0[c]]
        fresh = neigh[~visited[neigh]]
        if fresh.size == 0:
            continue
        visited[fresh] = True
        d_fresh = -(vecs[fresh].astype(np.float64) @ q64)
        for o, d in zip(fresh.tolist(), d_fresh.tolist()):
            if len(best) < ef:
                heapq.heappush(candidates, (d, o))
                heapq.heappush(best, (-d, -o))
            elif (d, o) < (-best[0][0], -best[0][1]):
                heapq.heappush(candidates, (d, o))
                heapq.heapreplace(best, (-d, -o))

    out = sorted((-nd, -no) for nd, no in best)
    ords = np.array([o for _, o in out], dtype=np.int32)
    ds = np.array([d for d, _ in out], dtype=np.float64)
    return ords, ds


def select_heuristic(vecs, cand_ords, cand_dists, m):
    """Diversity-aware neighbor selection over sorted candidates.

    Keeps a candidate only if it is closer to the query than to every
    already-selected neighbor; pruned candidates backfill remaining
    slots. Candidates must be sorted ascending by (dist, ordinal).
    """
    cand_ords = np.asarray(cand_ords, dtype=np.int32)
    if cand_ords.shape[0] <= m:
        return cand_ords.copy()
    selected = []
    discarded = []
    for o, d in zip(cand_ords.tolist(), np.asarray(cand_dists).tolist()):
        if len(selected) >= m:
            break
        if not selected:
            selected.append(o)
            continue
        d_to_sel = -(vecs[selected].astype(np.float64) @ vecs[o].astype(np.float64))
        if d < d_to_sel.min():
            selected.append(o)
        else:
            discarded.append(o)
    for o in discarded:
        if len(selected) >= m:
            break
        selected.append(o)
    return np.array(selected, dtype=np.int32)
