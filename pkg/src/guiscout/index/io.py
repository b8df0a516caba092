"""Binary index persistence.

Layout (all integers little-endian):

    magic "GSIX" | version u16 | kind u8 (0=flat, 1=hnsw) | dim u32 |
    count u64 | seed u64 | params u32-length-prefixed block |
    record table (per record: id length u16, id UTF-8, dim x f32) |
    [hnsw only] graph block, u32-length-prefixed |
    CRC32C u32 over all preceding bytes

Flat params are empty; hnsw params are M, ef_construction, ef_search
(u32 each). The hnsw graph block holds the entry ordinal (i64), max
level (i32), the count of level draws consumed (u64, so a reloaded
index continues the identical PCG64 stream), a tombstone bitmap
(LSB-first), then per node: level u16 and per layer degree u16 +
neighbor ordinals u32. Flat indexes compact on save: tombstoned rows
are dropped, which changes no search result.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from ..errors import CorruptFile, DimensionMismatch
from . import kernel

MAGIC = b"GSIX"
VERSION = 1
KIND_FLAT = 0
KIND_HNSW = 1

_HEADER = struct.Struct("<4sHBIQQ")


class _CrcWriter:
    def __init__(self, fh):
        self._fh = fh
        self.crc = 0

    def write(self, data: bytes) -> None:
        self._fh.write(data)
        self.crc = kernel.crc32c(data, self.crc)


def save_index(index, path) -> None:
    from .flat import FlatIndex
    from .hnsw import HnswIndex

    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        w = _CrcWriter(fh)
        if isinstance(index, HnswIndex):
            _write_hnsw(w, index)
        elif isinstance(index, FlatIndex):
            _write_flat(w, index)
        else:
            raise TypeError(f"cannot save index of type {type(index).__name__}")
        fh.write(struct.pack("<I", w.crc))
    os.replace(tmp, path)


def _write_record(w: _CrcWriter, record_id: str, vec32: np.ndarray) -> None:
    rid = record_id.encode("utf-8")
    w.write(struct.pack("<H", len(rid)))
    w.write(rid)
    w.write(vec32.astype("<f4").tobytes())


def _write_flat(w: _CrcWriter, index) -> None:
    alive = [(o, index._ids[o]) for o in range(index._n) if not index._tomb[o]]
    w.write(_HEADER.pack(MAGIC, VERSION, KIND_FLAT, index.dim, len(alive), index.seed))
    w.write(struct.pack("<I", 0))  # empty params block
    for o, rid in alive:
        _write_record(w, rid, index._vecs[o])


def _write_hnsw(w: _CrcWriter, index) -> None:
    n = index._n
    w.write(_HEADER.pack(MAGIC, VERSION, KIND_HNSW, index.dim, n, index.seed))
    params = struct.pack("<III", index.m, index.ef_construction, index.ef_search)
    w.write(struct.pack("<I", len(params)))
    w.write(params)
    for o in range(n):
        _write_record(w, index._ids[o], index._vecs[o])

    graph = bytearray()
    graph += struct.pack("<qiQ", index._entry, index._max_level, index._draws)
    bitmap = bytearray((n + 7) // 8)
    for o in range(n):
        if index._tomb[o]:
            bitmap[o >> 3] |= 1 << (o & 7)
    graph += bitmap
    for o in range(n):
        level = index._levels[o]
        graph += struct.pack("<H", level)
        deg0 = int(index._deg0[o])
        graph += struct.pack("<H", deg0)
        graph += index._adj0[o, :deg0].astype("<i4").tobytes()
        for layer in range(1, level + 1):
            neigh = index._upper[o][layer - 1]
            graph += struct.pack("<H", len(neigh))
            graph += np.asarray(neigh, dtype="<i4").tobytes()
    w.write(struct.pack("<I", len(graph)))
    w.write(bytes(graph))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CorruptFile("unexpected end of index file")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def load_index(path, expected_dim=None):
    from .flat import FlatIndex
    from .hnsw import HnswIndex

    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise
    if len(data) < _HEADER.size + 8:
        raise CorruptFile(f"{path}: too short to be an index file")
    body, stored = data[:-4], struct.unpack("<I", data[-4:])[0]
    if kernel.crc32c(body) != stored:
        raise CorruptFile(f"{path}: checksum mismatch")

    r = _Reader(body)
    magic, version, kind, dim, count, seed = r.unpack("<4sHBIQQ")
    if magic != MAGIC:
        raise CorruptFile(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CorruptFile(f"{path}: unsupported format version {version}")
    if kind not in (KIND_FLAT, KIND_HNSW):
        raise CorruptFile(f"{path}: unknown index kind {kind}")
    if expected_dim is not None and dim != expected_dim:
        raise DimensionMismatch(f"{path}: index dim {dim}, expected {expected_dim}")

    try:
        (params_len,) = r.unpack("<I")
        params = r.take(params_len)

        ids = []
        vecs = np.empty((count, dim), dtype=np.float32)
        for i in range(count):
            (id_len,) = r.unpack("<H")
            ids.append(r.take(id_len).decode("utf-8"))
            vecs[i] = np.frombuffer(r.take(4 * dim), dtype="<f4")

        if kind == KIND_FLAT:
            index = FlatIndex(dim, seed=seed)
            _bulk_rows(index, ids, vecs)
            return index

        m, efc, efs = struct.unpack("<III", params)
        index = HnswIndex(dim, m=m, ef_construction=efc, ef_search=efs, seed=seed)
        _bulk_rows(index, ids, vecs)
        (graph_len,) = r.unpack("<I")
        g = _Reader(r.take(graph_len))
        entry, max_level, draws = g.unpack("<qiQ")
        bitmap = g.take((count + 7) // 8)
        alive = 0
        for o in range(count):
            dead = bool(bitmap[o >> 3] & (1 << (o & 7)))
            index._tomb[o] = dead
            if not dead:
                alive += 1
        index._alive = alive
        for o in range(count):
            (level,) = g.unpack("<H")
            index._levels.append(level)
            (deg0,) = g.unpack("<H")
            index._adj0[o, :deg0] = np.frombuffer(g.take(4 * deg0), dtype="<i4")
            index._deg0[o] = deg0
            if level >= 1:
                lists = []
                for _ in range(level):
                    (deg,) = g.unpack("<H")
                    lists.append(np.frombuffer(g.take(4 * deg), dtype="<i4").tolist())
                index._upper[o] = lists
        index._entry = entry
        index._max_level = max_level
        for _ in range(draws):  # fast-forward the level-draw stream
            index._rng.random()
        index._draws = draws
        return index
    except (struct.error, UnicodeDecodeError, ValueError) as exc:
        raise CorruptFile(f"{path}: malformed index body ({exc})") from exc


def _bulk_rows(index, ids, vecs: np.ndarray) -> None:
    n = len(ids)
    index._grow(max(n, 1))
    index._vecs[:n] = vecs
    index._ids = list(ids)
    index._ord = {rid: o for o, rid in enumerate(ids)}
    if len(index._ord) != n:
        raise CorruptFile("duplicate record ids in index file")
    index._n = n
    index._alive = n
