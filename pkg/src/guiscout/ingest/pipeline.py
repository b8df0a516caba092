"""Repository ingestion: manifest -> embedded, deduplicated, indexed corpus.

Images are embedded in batches of 32; per-item failures (bad lines,
undecodable or missing images, duplicate ids) land in the report's
`failed` bucket instead of aborting, so a bad screenshot cannot kill a
multi-hour run. Near-duplicates (cosine >= threshold against an
already-ingested record, checked by exact scan) are skipped. Every
manifest line is accounted for in exactly one report bucket.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from ..core import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_DEDUP_THRESHOLD,
    DEFAULT_DIM,
    DEFAULT_SEED,
    ScreenRecord,
)
from ..embed.base import Embedder
from ..errors import DecodeFailure, DuplicateId, GuiscoutError, NotFound, UpstreamFailure
from ..index.base import BaseIndex
from ..index.flat import FlatIndex
from ..index.hnsw import HnswIndex
from .manifest import ManifestEntry, Tombstone, iter_manifest, resolve_image
from .metastore import MetaStore

INDEX_FILENAME = "index.gsix"


@dataclass
class IngestReport:
    total: int = 0
    ingested: int = 0
    skipped_duplicates: int = 0
    removed: int = 0  # applied tombstones (update runs only)
    failed: List[Tuple[str, str]] = field(default_factory=list)
    elapsed: float = 0.0

    def balances(self) -> bool:
        return (
            self.ingested + self.skipped_duplicates + self.removed + len(self.failed)
            == self.total
        )

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "ingested": self.ingested,
            "skipped_duplicates": self.skipped_duplicates,
            "removed": self.removed,
            "failed": [list(f) for f in self.failed],
            "elapsed_s": self.elapsed,
        }


def make_index(
    kind: str,
    dim: int = DEFAULT_DIM,
    seed: int = DEFAULT_SEED,
    m: int = 16,
    ef_construction: int = 200,
    ef_search: int = 100,
) -> BaseIndex:
    if kind == "flat":
        return FlatIndex(dim, seed=seed)
    if kind == "hnsw":
        return HnswIndex(
            dim, m=m, ef_construction=ef_construction, ef_search=ef_search, seed=seed
        )
    raise ValueError(f"unknown index kind {kind!r} (want flat or hnsw)")


def _entry_label(entry: ManifestEntry) -> str:
    if isinstance(entry.item, ScreenRecord):
        return entry.item.id
    if isinstance(entry.item, Tombstone):
        return entry.item.id
    return f"line {entry.line_no}"


def _embed_records(
    embedder: Embedder,
    pending: List[Tuple[ManifestEntry, Path]],
    report: IngestReport,
):
    """Embed one batch; yields (entry, embedding) for the decodable items."""
    paths = [str(p) for _, p in pending]
    try:
        embs = embedder.embed_image(paths)
        return list(zip([e for e, _ in pending], embs))
    except DecodeFailure as exc:
        bad = dict(exc.failures)
        good = [pair for i, pair in enumerate(pending) if i not in bad]
        for i, reason in sorted(bad.items()):
            report.failed.append((pending[i][0].item.id, reason))
        if not good:
            return []
        try:
            embs = embedder.embed_image([str(p) for _, p in good])
        except UpstreamFailure as exc2:
            for entry, _ in good:
                report.failed.append((entry.item.id, f"embedder failure: {exc2}"))
            return []
        return list(zip([e for e, _ in good], embs))
    except UpstreamFailure as exc:
        for entry, _ in pending:
            report.failed.append((entry.item.id, f"embedder failure: {exc}"))
        return []


def ingest(
    manifest_path,
    embedder: Embedder,
    out_dir,
    *,
    kind: str = "flat",
    dedup_threshold: float = DEFAULT_DEDUP_THRESHOLD,
    dedup: bool = True,
    batch_size: int = DEFAULT_BATCH_SIZE,
    seed: int = DEFAULT_SEED,
    m: int = 16,
    ef_construction: int = 200,
    ef_search: int = 100,
) -> Tuple[BaseIndex, MetaStore, IngestReport]:
    """Build an index and metadata store in out_dir from a manifest."""
    if not 0.0 < dedup_threshold <= 1.0:
        raise ValueError(f"dedup_threshold must be in (0, 1], got {dedup_threshold}")
    t0 = time.perf_counter()
    index = make_index(
        kind, dim=embedder.dim, seed=seed,
        m=m, ef_construction=ef_construction, ef_search=ef_search,
    )
    store = MetaStore(out_dir)
    report = IngestReport()

    batch: List[Tuple[ManifestEntry, Path]] = []

    def flush_batch():
        for entry, emb in _embed_records(embedder, batch, report):
            record = entry.item
            if dedup:
                match = index.best_match(emb)
                if match is not None and match[1] >= dedup_threshold:
                    report.skipped_duplicates += 1
                    continue
            try:
                index.insert(record.id, emb)
            except DuplicateId as exc:
                report.failed.append((record.id, str(exc)))
                continue
            store.append(record, resolve_image(manifest_path, record))
            report.ingested += 1
        batch.clear()

    for entry in iter_manifest(manifest_path, allow_tombstones=False):
        report.total += 1
        if entry.error is not None:
            report.failed.append((_entry_label(entry), str(entry.error)))
            continue
        batch.append((entry, resolve_image(manifest_path, entry.item)))
        if len(batch) >= batch_size:
            flush_batch()
    if batch:
        flush_batch()

    report.elapsed = time.perf_counter() - t0
    assert report.balances(), "ingest report does not balance"
    return index, store, report


def update(
    index: BaseIndex,
    store: MetaStore,
    delta_manifest_path,
    embedder: Embedder,
    *,
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> IngestReport:
    """Apply a delta manifest: additions, tombstones, re-adds.

    Additions must not collide with live ids; tombstoned ids become
    searchable again when re-added (with their fresh metadata).
    """
    t0 = time.perf_counter()
    report = IngestReport()
    batch: List[Tuple[ManifestEntry, Path]] = []

    def flush_batch():
        for entry, emb in _embed_records(embedder, batch, report):
            record = entry.item
            try:
                index.insert(record.id, emb)
            except DuplicateId as exc:
                report.failed.append((record.id, str(exc)))
                continue
            store.append(record, resolve_image(delta_manifest_path, record))
            report.ingested += 1
        batch.clear()

    for entry in iter_manifest(delta_manifest_path, allow_tombstones=True):
        report.total += 1
        if entry.error is not None:
            report.failed.append((_entry_label(entry), str(entry.error)))
            continue
        if isinstance(entry.item, Tombstone):
            flush_batch()  # keep line order effects (tombstone-then-readd)
            rid = entry.item.id
            try:
                index.remove(rid)
            except NotFound as exc:
                report.failed.append((rid, str(exc)))
                continue
            try:
                store.tombstone(rid)
            except NotFound:
                pass  # store may have never seen the id (index-only fixtures)
            report.removed += 1
            continue
        if entry.item.id in index:
            report.failed.append((entry.item.id, f"duplicate id {entry.item.id!r}"))
            continue
        batch.append((entry, resolve_image(delta_manifest_path, entry.item)))
        if len(batch) >= batch_size:
            flush_batch()
    if batch:
        flush_batch()

    report.elapsed = time.perf_counter() - t0
    assert report.balances(), "update report does not balance"
    return report
