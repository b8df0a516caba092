"""Shared storage and ranking machinery for the vector indexes.

Vectors are quantized to float32 at insert (the on-disk precision, so
persistence round-trips are bit-lossless); all similarity scores are
float64 accumulations over those float32 values, clamped to [-1, 1].
Deletion is tombstone-based: tombstoned ids are never returned but stay
in storage until compaction (flat indexes compact on save).
"""

from __future__ import annotations

import threading
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..core import Embedding, RankedHit
from ..errors import DimensionMismatch, DuplicateId, NotFound

_INITIAL_CAPACITY = 64


def clamp_score(s: float) -> float:
    """f32 quantization can push |dot| marginally past 1; clamp for RankedHit."""
    return 1.0 if s > 1.0 else (-1.0 if s < -1.0 else s)


def rank_hits(scored: Sequence[Tuple[str, float]], k: int) -> List[RankedHit]:
    """Order by (-score, record_id), truncate to k, assign ranks 1..len."""
    ordered = sorted(scored, key=lambda t: (-t[1], t[0]))[:k]
    return [
        RankedHit(record_id=rid, score=clamp_score(s), rank=i + 1)
        for i, (rid, s) in enumerate(ordered)
    ]


class BaseIndex:
    """Id/vector storage with tombstones; subclasses add search structure.

    Writes are serialized by an internal lock (single-writer contract);
    searches read numpy arrays without locking.
    """

    kind = "base"

    def __init__(self, dim: int, seed: int):
        if dim < 1:
            raise DimensionMismatch(f"dim must be >= 1, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)
        self._ids: List[str] = []
        self._ord: dict[str, int] = {}
        self._vecs = np.zeros((_INITIAL_CAPACITY, dim), dtype=np.float32)
        self._tomb = np.zeros(_INITIAL_CAPACITY, dtype=bool)
        self._n = 0
        self._alive = 0
        self._write_lock = threading.Lock()

    # ---------------------------------------------------------- sizing

    def __len__(self) -> int:
        return self._alive

    @property
    def size(self) -> int:
        """Number of live (non-tombstoned) entries."""
        return self._alive

    @property
    def total(self) -> int:
        """Number of stored rows including tombstones."""
        return self._n

    def __contains__(self, record_id: str) -> bool:
        o = self._ord.get(record_id)
        return o is not None and not self._tomb[o]

    def is_tombstoned(self, record_id: str) -> bool:
        o = self._ord.get(record_id)
        return o is not None and bool(self._tomb[o])

    # --------------------------------------------------------- storage

    def _grow(self, need: int) -> None:
        cap = self._vecs.shape[0]
        if need <= cap:
            return
        new_cap = max(need, cap * 2)
        vecs = np.zeros((new_cap, self.dim), dtype=np.float32)
        vecs[: self._n] = self._vecs[: self._n]
        tomb = np.zeros(new_cap, dtype=bool)
        tomb[: self._n] = self._tomb[: self._n]
        self._vecs = vecs
        self._tomb = tomb

    def _check_vec(self, e: Embedding) -> np.ndarray:
        if e.dim != self.dim:
            raise DimensionMismatch(f"index dim {self.dim}, embedding dim {e.dim}")
        return e.values.astype(np.float32)

    def _append_row(self, record_id: str, vec32: np.ndarray) -> int:
        self._grow(self._n + 1)
        o = self._n
        self._vecs[o] = vec32
        self._ids.append(record_id)
        self._ord[record_id] = o
        self._n += 1
        self._alive += 1
        return o

    # ------------------------------------------------------ public ops

    def insert(self, record_id: str, e: Embedding) -> None:
        """Add (or revive) a record. DuplicateId if the id is live."""
        vec32 = self._check_vec(e)
        with self._write_lock:
            o = self._ord.get(record_id)
            if o is not None:
                if not self._tomb[o]:
                    raise DuplicateId(record_id)
                self._revive(o, vec32)
                self._tomb[o] = False
                self._alive += 1
                return
            self._insert_new(record_id, vec32)

    def remove(self, record_id: str) -> None:
        """Tombstone a record; idempotent for already-dead ids."""
        o = self._ord.get(record_id)
        if o is None:
            raise NotFound(f"record {record_id!r} not in index")
        with self._write_lock:
            if not self._tomb[o]:
                self._tomb[o] = True
                self._alive -= 1

    def vector(self, record_id: str) -> np.ndarray:
        o = self._ord.get(record_id)
        if o is None or self._tomb[o]:
            raise NotFound(f"record {record_id!r} not in index")
        return self._vecs[o].copy()

    def entries(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Live (record_id, float32 vector) pairs in insertion order."""
        for o in range(self._n):
            if not self._tomb[o]:
                yield self._ids[o], self._vecs[o].copy()

    def alive_ids(self) -> List[str]:
        return [self._ids[o] for o in range(self._n) if not self._tomb[o]]

    def score_ids(self, q: Embedding, record_ids: Sequence[str]) -> List[float]:
        """Exact f64 scores for specific live ids (filtered-search fallback)."""
        q32 = self._check_vec(q)
        q64 = q32.astype(np.float64)
        ords = []
        for rid in record_ids:
            o = self._ord.get(rid)
            if o is None or self._tomb[o]:
                raise NotFound(f"record {rid!r} not in index")
            ords.append(o)
        if not ords:
            return []
        s = self._vecs[ords].astype(np.float64) @ q64
        return [clamp_score(float(x)) for x in s]

    def best_match(self, e: Embedding) -> Optional[Tuple[str, float]]:
        """Most similar live entry by exact scan, ties by ascending id.

        f32 prescan plus f64 rescore of everything within 1e-3 of the
        top; used by ingest-time deduplication.
        """
        if self._alive == 0:
            return None
        q32 = self._check_vec(e)
        s32 = self._vecs[: self._n] @ q32
        s32[self._tomb[: self._n]] = -4.0
        top = float(s32.max())
        cand = np.nonzero(s32 >= top - 1e-3)[0]
        s64 = self._vecs[cand].astype(np.float64) @ q32.astype(np.float64)
        best = min(zip(cand.tolist(), s64.tolist()), key=lambda t: (-t[1], self._ids[t[0]]))
        return self._ids[best[0]], clamp_score(best[1])

    # ----------------------------------------------------- subclass API

    def _insert_new(self, record_id: str, vec32: np.ndarray) -> int:
        raise NotImplementedError

    def _revive(self, ordinal: int, vec32: np.ndarray) -> None:
        """Replace a tombstoned row's vector; subclass refreshes structure."""
        raise NotImplementedError

    def search(self, q: Embedding, k: int) -> List[RankedHit]:
        raise NotImplementedError
