"""Exact top-k retrieval by full scan; the ground truth the ANN index
is measured against.

The scan runs as one float32 BLAS matvec; every entry whose f32 score
lands within 1e-3 of the k-th largest (comfortably above the f32
accumulation error bound at any practical dim) is re-scored in float64
before the final (-score, id) ordering, so results are exact with
respect to the documented f64-over-f32 scoring semantics, including
tie order under mass duplicates.
"""

from __future__ import annotations

from typing import List

import numpy as np

from ..core import DEFAULT_SEED, Embedding, RankedHit
from .base import BaseIndex, rank_hits

_RESCORE_SLACK = 1e-3


class FlatIndex(BaseIndex):
    kind = "flat"

    def __init__(self, dim: int, seed: int = DEFAULT_SEED):
        super().__init__(dim, seed)

    def _insert_new(self, record_id: str, vec32: np.ndarray) -> int:
        return self._append_row(record_id, vec32)

    def _revive(self, ordinal: int, vec32: np.ndarray) -> None:
        self._vecs[ordinal] = vec32

    def search(self, q: Embedding, k: int) -> List[RankedHit]:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        q32 = self._check_vec(q)
        n, alive = self._n, self._alive
        if alive == 0:
            return []
        s32 = self._vecs[:n] @ q32
        s32[self._tomb[:n]] = -4.0  # below any true score; never re-scored
        kk = min(k, alive)
        threshold = np.partition(s32, n - kk)[n - kk]
        cand = np.nonzero(s32 >= threshold - _RESCORE_SLACK)[0]
        s64 = self._vecs[cand].astype(np.float64) @ q32.astype(np.float64)
        scored = [(self._ids[o], float(s)) for o, s in zip(cand.tolist(), s64.tolist())]
        return rank_hits(scored, kk)

    def save(self, path) -> None:
        from . import io

        io.save_index(self, path)

    @classmethod
    def load(cls, path, expected_dim=None) -> "FlatIndex":
        from . import io

        idx = io.load_index(path, expected_dim=expected_dim)
        if not isinstance(idx, cls):
            raise TypeError(f"{path} holds a {idx.kind} index")
        return idx
