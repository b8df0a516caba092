"""Latency benchmark: embed+search end-to-end and search-only, separately.

The split matters because production deployments bundle a GPU model
into the one number; here the embedding cost is the reference recipe's,
so the two phases are reported on their own. Percentiles are
nearest-rank over per-request wall times (a single sample yields equal
p50/p95/p99 by construction).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from .embed.base import Embedder
from .index.base import BaseIndex
from .index.kernel import BACKEND

RECOMMENDED_MIN_QUERIES = 30  # fewer runs, but percentiles get noisy


@dataclass
class OperationStats:
    count: int
    p50_ms: float
    p95_ms: float
    p99_ms: float
    mean_ms: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "p50_ms": self.p50_ms,
            "p95_ms": self.p95_ms,
            "p99_ms": self.p99_ms,
            "mean_ms": self.mean_ms,
        }


@dataclass
class BenchReport:
    corpus_size: int
    index_kind: str
    backend: str
    embedder: dict
    k: int
    repetitions: int
    parallel: int
    operations: Dict[str, OperationStats] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "corpus_size": self.corpus_size,
            "index_kind": self.index_kind,
            "backend": self.backend,
            "embedder": self.embedder,
            "k": self.k,
            "repetitions": self.repetitions,
            "parallel": self.parallel,
            "operations": {name: s.to_dict() for name, s in self.operations.items()},
        }


def percentile(sorted_ms: Sequence[float], q: float) -> float:
    """Nearest-rank percentile over a sorted sample."""
    if not sorted_ms:
        raise ValueError("no samples")
    rank = max(1, math.ceil(q / 100.0 * len(sorted_ms)))
    return sorted_ms[rank - 1]


def _stats(samples_ms: List[float]) -> OperationStats:
    s = sorted(samples_ms)
    return OperationStats(
        count=len(s),
        p50_ms=percentile(s, 50),
        p95_ms=percentile(s, 95),
        p99_ms=percentile(s, 99),
        mean_ms=sum(s) / len(s),
    )


def _timed_all(fn, items, parallel: int) -> List[float]:
    def timed(item) -> float:
        t0 = time.perf_counter()
        fn(item)
        return (time.perf_counter() - t0) * 1e3

    if parallel <= 1:
        return [timed(it) for it in items]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(timed, items))


def run_bench(
    index: BaseIndex,
    embedder: Embedder,
    queries: Sequence[str],
    *,
    k: int = 10,
    repetitions: int = 1,
    parallel: int = 1,
) -> BenchReport:
    if len(queries) == 0:
        raise ValueError("query set is empty")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    workload = list(queries) * repetitions

    # warm caches (pays the embedder's lazy projection-matrix build)
    warm = embedder.embed_text([queries[0]])[0]
    index.search(warm, k)

    def end_to_end(q: str) -> None:
        index.search(embedder.embed_text([q])[0], k)

    e2e_ms = _timed_all(end_to_end, workload, parallel)

    embedded = {q: embedder.embed_text([q])[0] for q in queries}
    search_ms = _timed_all(lambda q: index.search(embedded[q], k), workload, parallel)

    report = BenchReport(
        corpus_size=index.size,
        index_kind=index.kind,
        backend=BACKEND,
        embedder=embedder.descriptor.to_dict(),
        k=k,
        repetitions=repetitions,
        parallel=parallel,
    )
    report.operations["end_to_end"] = _stats(e2e_ms)
    report.operations["search_only"] = _stats(search_ms)
    return report
