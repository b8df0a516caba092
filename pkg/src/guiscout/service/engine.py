"""The live query engine behind the HTTP API.

Text-to-UI search with metadata filters, zero-shot classification,
and record/app lookup over one index generation. Filters are applied by
over-fetching from the index (the index itself stays filter-agnostic);
when the window is exhausted before k survivors are found, the engine
falls back to an exact scan of the filtered subset. Index swaps are
atomic by generation pointer; ingest never mutates a serving index.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core import DEFAULT_K, Embedding, Query, RankedHit, ScreenRecord, cosine
from ..embed.base import Embedder, ImageItem
from ..errors import (
    EmbedderUnavailable,
    EmptyLabelSet,
    EmptyQuery,
    HandshakeFailure,
    NotFound,
    UpstreamFailure,
    ValidationError,
)
from ..index.base import BaseIndex
from ..ingest.metastore import MetaStore, StoredRecord


@dataclass(frozen=True)
class SearchHit:
    hit: RankedHit
    record: ScreenRecord


@dataclass(frozen=True)
class ClassifyResult:
    label: str
    probs: List[float]
    similarities: List[float]


def softmax(scores: Sequence[float], scale: float = 1.0) -> np.ndarray:
    """Max-subtracted softmax; argmax is invariant under any scale > 0."""
    z = np.asarray(scores, dtype=np.float64) * scale
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def validate_labels(labels: Sequence[str]) -> List[str]:
    if len(labels) == 0:
        raise EmptyLabelSet("at least one label is required")
    clean = []
    for i, lab in enumerate(labels):
        if not lab or not lab.strip():
            raise ValidationError(f"label at index {i} is empty")
        clean.append(lab)
    if len(set(clean)) != len(clean):
        raise ValidationError("labels must be pairwise distinct")
    return clean


class SearchEngine:
    # over-fetch window multiplier for filtered searches
    FILTER_WINDOW = 4

    def __init__(
        self,
        index: BaseIndex,
        store: MetaStore,
        embedder: Embedder,
        default_k: int = DEFAULT_K,
    ):
        self._lock = threading.Lock()
        self.index = index
        self.store = store
        self.embedder = embedder
        self.default_k = default_k
        self.generation = 1

    def swap(self, index: BaseIndex, store: MetaStore) -> int:
        """Atomically switch to a new index generation."""
        with self._lock:
            self.index = index
            self.store = store
            self.generation += 1
            return self.generation

    # ----------------------------------------------------------- embedding

    def embed_query(self, text: str) -> Embedding:
        if not text or not text.strip():
            raise EmptyQuery("query text is empty after trim")
        try:
            return self.embedder.embed_text([text])[0]
        except (UpstreamFailure, HandshakeFailure) as exc:
            raise EmbedderUnavailable(str(exc)) from exc

    def embed_image(self, item: ImageItem) -> Embedding:
        try:
            return self.embedder.embed_image([item])[0]
        except (UpstreamFailure, HandshakeFailure) as exc:
            raise EmbedderUnavailable(str(exc)) from exc

    # -------------------------------------------------------------- search

    def text_search(self, query: Query, min_score: Optional[float] = None) -> List[SearchHit]:
        index, store = self.index, self.store
        e = self.embed_query(query.text)
        if index.size == 0:
            return []
        if not query.filters:
            hits = index.search(e, query.k)
        else:
            hits = self._filtered_search(index, store, e, query)
        if min_score is not None:
            hits = [h for h in hits if h.score >= min_score]
        out = []
        for i, h in enumerate(hits):
            out.append(
                SearchHit(
                    hit=RankedHit(record_id=h.record_id, score=h.score, rank=i + 1),
                    record=store.get(h.record_id).record,
                )
            )
        return out

    def _matches(self, store: MetaStore, record_id: str, filters) -> bool:
        rec = store.get(record_id).record
        for key, want in filters.items():
            have = rec.platform.value if key == "platform" else rec.category
            if have != want:
                return False
        return True

    def _filtered_search(
        self, index: BaseIndex, store: MetaStore, e: Embedding, query: Query
    ) -> List[RankedHit]:
        window = min(index.size, self.FILTER_WINDOW * query.k)
        cand = index.search(e, window)
        kept = [h for h in cand if self._matches(store, h.record_id, query.filters)]
        if len(kept) >= query.k or len(cand) >= index.size:
            return kept[: query.k]
        # window exhausted before k survivors: exact scan of the filtered subset
        ids = [rid for rid in index.alive_ids() if self._matches(store, rid, query.filters)]
        if not ids:
            return []
        scores = index.score_ids(e, ids)
        ordered = sorted(zip(ids, scores), key=lambda t: (-t[1], t[0]))[: query.k]
        return [
            RankedHit(record_id=rid, score=s, rank=i + 1)
            for i, (rid, s) in enumerate(ordered)
        ]

    # ------------------------------------------------------------ classify

    def classify(
        self, image: ImageItem, labels: Sequence[str], scale: float = 1.0
    ) -> ClassifyResult:
        """Zero-shot: pick the label whose text embedding is most similar."""
        labels = validate_labels(labels)
        if scale <= 0:
            raise ValidationError(f"scale must be > 0, got {scale}")
        img_e = self.embed_image(image)
        try:
            label_es = self.embedder.embed_text(labels)
        except (UpstreamFailure, HandshakeFailure) as exc:
            raise EmbedderUnavailable(str(exc)) from exc
        sims = [cosine(img_e, le) for le in label_es]
        probs = softmax(sims, scale=scale)
        best = int(np.argmax(np.asarray(sims)))  # stable: first max wins
        return ClassifyResult(
            label=labels[best],
            probs=[float(p) for p in probs],
            similarities=[float(s) for s in sims],
        )

    # -------------------------------------------------------------- lookup

    def get_record(self, record_id: str) -> StoredRecord:
        return self.store.get(record_id)

    def list_app(self, app_id: str) -> List[ScreenRecord]:
        records = self.store.list_app(app_id)
        if not records:
            raise NotFound(f"app {app_id!r} not in store")
        return records

    # -------------------------------------------------------------- health

    def health(self) -> dict:
        from ..index.kernel import BACKEND

        return {
            "generation": self.generation,
            "corpus_size": self.index.size,
            "index_kind": self.index.kind,
            "dim": self.index.dim,
            "backend": BACKEND,
            "embedder": self.embedder.descriptor.to_dict(),
        }
