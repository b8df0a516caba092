"""Approximate top-k retrieval over a layered proximity graph.

Classic navigable-small-world construction: each node draws a level
from an exponential distribution (seeded PCG64, one draw per insert,
recorded in the file so reloaded indexes continue the same stream),
links to its closest diverse neighbors per layer, and queries descend
greedily from the top layer before a beam search at layer 0.

Layer 0 holds every node and dominates runtime, so its traversal and
the neighbor-selection heuristic run in the compiled kernel (with a
pure-Python twin); the sparse upper layers are plain Python. Tombstoned
nodes keep routing but are filtered from results; a revived id gets its
vector swapped in place and its outgoing edges rebuilt.
"""

from __future__ import annotations

import heapq
import math
from typing import List, Tuple

import numpy as np

from ..core import DEFAULT_SEED, Embedding, RankedHit
from . import kernel
from .base import BaseIndex, rank_hits

DEFAULT_M = 16
DEFAULT_EF_CONSTRUCTION = 200
DEFAULT_EF_SEARCH = 100


class HnswIndex(BaseIndex):
    kind = "hnsw"

    def __init__(
        self,
        dim: int,
        m: int = DEFAULT_M,
        ef_construction: int = DEFAULT_EF_CONSTRUCTION,
        ef_search: int = DEFAULT_EF_SEARCH,
        seed: int = DEFAULT_SEED,
    ):
        super().__init__(dim, seed)
        if m < 2:
            raise ValueError(f"m must be >= 2, got {m}")
        self.m = int(m)
        self.max0 = 2 * self.m  # degree cap at layer 0
        self.ef_construction = int(ef_construction)
        self.ef_search = int(ef_search)
        self._ml = 1.0 / math.log(self.m)  # level multiplier
        cap = self._vecs.shape[0]
        self._adj0 = np.zeros((cap, self.max0), dtype=np.int32)
        self._deg0 = np.zeros(cap, dtype=np.int32)
        self._levels: List[int] = []
        self._upper: dict[int, List[List[int]]] = {}  # ord -> lists for layers 1..level
        self._entry = -1
        self._max_level = -1
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._draws = 0

    # ------------------------------------------------------------ plumbing

    def _grow(self, need: int) -> None:
        cap = self._vecs.shape[0]
        super()._grow(need)
        new_cap = self._vecs.shape[0]
        if new_cap != cap:
            adj0 = np.zeros((new_cap, self.max0), dtype=np.int32)
            adj0[: self._n] = self._adj0[: self._n]
            deg0 = np.zeros(new_cap, dtype=np.int32)
            deg0[: self._n] = self._deg0[: self._n]
            self._adj0 = adj0
            self._deg0 = deg0

    def _draw_level(self) -> int:
        u = 1.0 - self._rng.random()  # (0, 1]; one draw per insert
        self._draws += 1
        return int(-math.log(u) * self._ml)

    def _neg_dists(self, ords, q64: np.ndarray) -> np.ndarray:
        return -(self._vecs[ords].astype(np.float64) @ q64)

    def _upper_neighbors(self, o: int, layer: int) -> List[int]:
        lists = self._upper.get(o)
        if lists is None or len(lists) < layer:
            return []
        return lists[layer - 1]

    # ----------------------------------------------------------- traversal

    def _greedy_upper(self, layer: int, start: int, q64: np.ndarray) -> int:
        cur = start
        cur_d = float(self._neg_dists([cur], q64)[0])
        while True:
            neigh = self._upper_neighbors(cur, layer)
            if not neigh:
                return cur
            ds = self._neg_dists(neigh, q64)
            best_d, best_o = min(zip(ds.tolist(), neigh))
            if (best_d, best_o) < (cur_d, cur):
                cur, cur_d = best_o, best_d
            else:
                return cur

    def _search_upper(
        self, layer: int, entries: List[int], q64: np.ndarray, ef: int
    ) -> List[Tuple[float, int]]:
        """Best-first search over a sparse upper layer (Python-side)."""
        eps = sorted(set(entries))
        visited = set(eps)
        dists = self._neg_dists(eps, q64)
        candidates: List[Tuple[float, int]] = []
        best: List[Tuple[float, int]] = []  # max-heap via (-d, -o)
        for o, d in zip(eps, dists.tolist()):
            heapq.heappush(candidates, (d, o))
            if len(best) < ef:
                heapq.heappush(best, (-d, -o))
            elif (d, o) < (-best[0][0], -best[0][1]):
                heapq.heapreplace(best, (-d, -o))
        while candidates:
            d_c, c = heapq.heappop(candidates)
            if len(best) >= ef and d_c > -best[0][0]:
                break
            fresh = [o for o in self._upper_neighbors(c, layer) if o not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            for o, d in zip(fresh, self._neg_dists(fresh, q64).tolist()):
                if len(best) < ef:
                    heapq.heappush(candidates, (d, o))
                    heapq.heappush(best, (-d, -o))
                elif (d, o) < (-best[0][0], -best[0][1]):
                    heapq.heappush(candidates, (d, o))
                    heapq.heapreplace(best, (-d, -o))
        return sorted((-nd, -no) for nd, no in best)

    def _search_layer0(self, entries: List[int], q32: np.ndarray, ef: int):
        return kernel.search_layer0(
            self._vecs,
            self._adj0,
            self._deg0,
            self._n,
            q32,
            np.asarray(entries, dtype=np.int32),
            ef,
        )

    # ------------------------------------------------------------- linking

    def _set_links(self, o: int, layer: int, targets: np.ndarray) -> None:
        if layer == 0:
            d = len(targets)
            self._adj0[o, :d] = targets
            self._deg0[o] = d
        else:
            self._upper[o][layer - 1] = [int(t) for t in targets]

    def _add_link(self, t: int, layer: int, o: int) -> None:
        """Backlink o into t's list at `layer`, pruning past the degree cap."""
        if layer == 0:
            cap = self.max0
            d = int(self._deg0[t])
            existing = self._adj0[t, :d]
            if o in existing:
                return
            if d < cap:
                self._adj0[t, d] = o
                self._deg0[t] = d + 1
                return
            neigh = existing.tolist() + [o]
        else:
            cap = self.m
            lst = self._upper[t][layer - 1]
            if o in lst:
                return
            if len(lst) < cap:
                lst.append(o)
                return
            neigh = lst + [o]
        t64 = self._vecs[t].astype(np.float64)
        ds = self._neg_dists(neigh, t64)
        order = sorted(zip(ds.tolist(), neigh))
        sel = kernel.select_heuristic(
            self._vecs,
            np.array([o2 for _, o2 in order], dtype=np.int32),
            np.array([d2 for d2, _ in order], dtype=np.float64),
            cap,
        )
        self._set_links(t, layer, sel)

    def _link_node(self, o: int, level: int, q32: np.ndarray, q64: np.ndarray) -> None:
        """Wire `o` into every layer up to `level` (insert and revive path)."""
        ep = self._greedy_descent(q64, stop_layer=level)
        eps = [ep]
        for layer in range(min(level, self._max_level), -1, -1):
            if layer == 0:
                cand_ords, cand_dists = self._search_layer0(eps, q32, self.ef_construction)
            else:
                pairs = self._search_upper(layer, eps, q64, self.ef_construction)
                cand_ords = np.array([o2 for _, o2 in pairs], dtype=np.int32)
                cand_dists = np.array([d2 for d2, _ in pairs], dtype=np.float64)
            keep = cand_ords != o
            cand_ords, cand_dists = cand_ords[keep], cand_dists[keep]
            if cand_ords.size == 0:
                continue
            sel = kernel.select_heuristic(self._vecs, cand_ords, cand_dists, self.m)
            self._set_links(o, layer, sel)
            for t in sel.tolist():
                self._add_link(t, layer, o)
            eps = cand_ords.tolist()

    def _greedy_descent(self, q64: np.ndarray, stop_layer: int) -> int:
        ep = self._entry
        for layer in range(self._max_level, stop_layer, -1):
            ep = self._greedy_upper(layer, ep, q64)
        return ep

    # ------------------------------------------------------------ core ops

    def _insert_new(self, record_id: str, vec32: np.ndarray) -> int:
        o = self._append_row(record_id, vec32)
        self._deg0[o] = 0
        level = self._draw_level()
        self._levels.append(level)
        if level >= 1:
            self._upper[o] = [[] for _ in range(level)]
        if self._entry < 0:
            self._entry = o
            self._max_level = level
            return o
        q32 = self._vecs[o]
        self._link_node(o, level, q32, q32.astype(np.float64))
        if level > self._max_level:
            self._entry = o
            self._max_level = level
        return o

    def _revive(self, ordinal: int, vec32: np.ndarray) -> None:
        self._vecs[ordinal] = vec32
        if self._entry == ordinal or self._n <= 1:
            return
        q32 = self._vecs[ordinal]
        self._link_node(ordinal, self._levels[ordinal], q32, q32.astype(np.float64))

    def search(self, q: Embedding, k: int) -> List[RankedHit]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        q32 = self._check_vec(q)
        if self._alive == 0 or self._entry < 0:
            return []
        ep = self._greedy_descent(q32.astype(np.float64), stop_layer=0)
        ords, dists = self._search_layer0([ep], q32, max(self.ef_search, k))
        scored = [
            (self._ids[o], -d)
            for o, d in zip(ords.tolist(), dists.tolist())
            if not self._tomb[o]
        ]
        return rank_hits(scored, min(k, self._alive))

    # ---------------------------------------------------------- inspection

    def graph_stats(self) -> dict:
        """Degree bounds and layer-0 reachability (invariant checks)."""
        n = self._n
        max_deg0 = int(self._deg0[:n].max()) if n else 0
        max_upper = max(
            (len(lst) for lists in self._upper.values() for lst in lists),
            default=0,
        )
        reachable = 0
        if self._entry >= 0:
            seen = np.zeros(n, dtype=bool)
            stack = [self._entry]
            seen[self._entry] = True
            while stack:
                c = stack.pop()
                reachable += 1
                for nb in self._adj0[c, : self._deg0[c]].tolist():
                    if not seen[nb]:
                        seen[nb] = True
                        stack.append(nb)
        return {
            "nodes": n,
            "max_degree_layer0": max_deg0,
            "max_degree_upper": max_upper,
            "reachable_layer0": reachable,
            "max_level": self._max_level,
            "entry": self._entry,
        }

    def save(self, path) -> None:
        from . import io

        io.save_index(self, path)

    @classmethod
    def load(cls, path, expected_dim=None) -> "HnswIndex":
        from . import io

        idx = io.load_index(path, expected_dim=expected_dim)
        if not isinstance(idx, cls):
            raise TypeError(f"{path} holds a {idx.kind} index")
        return idx
