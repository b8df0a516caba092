"""Operator entry point.

Subcommands: ingest, search, classify, bench, serve, generate
(refine | code | adjust | images). Exit codes: 0 success, 1 operational
failure, 2 usage error. Everything runs offline against the reference
embedder and the mock model endpoints; GUISCOUT_HOME sets the default
data directory.
"""

from __future__ import annotations

import base64
import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .core import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_DEDUP_THRESHOLD,
    DEFAULT_DIM,
    DEFAULT_K,
    DEFAULT_SEED,
    GenConfig,
    Query,
)
from .errors import GuiscoutError, IndexMissing, ValidationError
from .ingest.pipeline import INDEX_FILENAME

_INDEX_DIR_OPT = click.option(
    "--index-dir",
    default=lambda: os.environ.get("GUISCOUT_HOME", "./guiscout-data"),
    show_default="$GUISCOUT_HOME or ./guiscout-data",
    help="Directory holding index.gsix, records.log, sessions/.",
)


def _fail(exc: Exception) -> "click.ClickException":
    e = click.ClickException(f"{type(exc).__name__}: {exc}")
    e.exit_code = 1
    return e


def _load_index(index_dir: str):
    from .index import load_index

    path = Path(index_dir) / INDEX_FILENAME
    if not path.is_file():
        raise _fail(IndexMissing(f"no {INDEX_FILENAME} in {index_dir}"))
    try:
        return load_index(path)
    except GuiscoutError as exc:
        raise _fail(exc)


def _make_embedder(endpoint: str, dim: int, seed: int):
    from .embed import ReferenceEmbedder, attach_external

    if endpoint in ("", "reference"):
        return ReferenceEmbedder(dim=dim, seed=seed)
    try:
        return attach_external(endpoint, expected_dim=dim)
    except GuiscoutError as exc:
        raise _fail(exc)


def _parse_filters(pairs) -> dict:
    filters = {}
    for pair in pairs:
        if "=" not in pair:
            raise click.UsageError(f"--filter wants key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        filters[key] = value
    if filters:
        try:
            Query(text="probe", k=1, filters=filters)
        except ValidationError as exc:
            raise click.UsageError(str(exc))
    return filters


@click.group()
@click.version_option(version=__version__, prog_name="guiscout")
def main() -> None:
    """Text-to-UI design inspiration engine."""


# ------------------------------------------------------------------ ingest

@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@_INDEX_DIR_OPT
@click.option("--kind", type=click.Choice(["flat", "hnsw"]), default="flat",
              show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True)
@click.option("--dedup-threshold", type=float, default=DEFAULT_DEDUP_THRESHOLD,
              show_default=True)
@click.option("--dedup/--no-dedup", default=True, show_default=True)
@click.option("--batch", type=int, default=DEFAULT_BATCH_SIZE, show_default=True)
@click.option("--endpoint", default="reference", show_default=True,
              help="External embedder URL, or 'reference'.")
@click.option("--strict", is_flag=True,
              help="Exit nonzero when any manifest line fails.")
def ingest(manifest, index_dir, kind, seed, dim, dedup_threshold, dedup, batch,
           endpoint, strict):
    """Embed, deduplicate, and index a screenshot repository manifest."""
    from .ingest.pipeline import ingest as run_ingest

    embedder = _make_embedder(endpoint, dim, seed)
    out = Path(index_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        index, store, report = run_ingest(
            manifest, embedder, out,
            kind=kind, dedup_threshold=dedup_threshold, dedup=dedup,
            batch_size=batch, seed=seed,
        )
        index.save(out / INDEX_FILENAME)
        store.close()
    except GuiscoutError as exc:
        raise _fail(exc)
    click.echo(
        f"ingested={report.ingested} skipped_duplicates={report.skipped_duplicates} "
        f"failed={len(report.failed)} total={report.total} "
        f"elapsed={report.elapsed:.2f}s"
    )
    for rid, reason in report.failed:
        click.echo(f"  failed {rid}: {reason}", err=True)
    click.echo(f"index written to {out / INDEX_FILENAME}")
    if strict and report.failed:
        sys.exit(1)


# ------------------------------------------------------------------ search

@main.command()
@click.argument("query_text")
@_INDEX_DIR_OPT
@click.option("--k", type=int, default=DEFAULT_K, show_default=True)
@click.option("--filter", "filters", multiple=True, metavar="KEY=VALUE",
              help="Repeatable; platform or category.")
@click.option("--min-score", type=float, default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "lines"]),
              default="table", show_default=True)
@click.option("--endpoint", default="reference", show_default=True)
@click.option("--seed", type=int, default=None,
              help="Reference-embedder seed; defaults to the index's.")
def search(query_text, index_dir, k, filters, min_score, fmt, endpoint, seed):
    """Top-k text-to-UI retrieval against an ingested index."""
    from .ingest.metastore import MetaStore
    from .service.engine import SearchEngine

    filter_map = _parse_filters(filters)
    index = _load_index(index_dir)
    embedder = _make_embedder(endpoint, index.dim,
                              seed if seed is not None else index.seed)
    store = MetaStore(index_dir)
    engine = SearchEngine(index, store, embedder)
    try:
        hits = engine.text_search(
            Query(text=query_text, k=k, filters=filter_map or None),
            min_score=min_score,
        )
    except GuiscoutError as exc:
        raise _fail(exc)
    if fmt == "lines":
        for h in hits:
            click.echo(json.dumps({
                "rank": h.hit.rank, "score": h.hit.score, "id": h.hit.record_id,
                "record": h.record.to_dict(),
            }, ensure_ascii=False))
        return
    if not hits:
        click.echo("no results")
        return
    click.echo(f"{'rank':>4}  {'score':>8}  {'id':<20} {'app':<14} "
               f"{'platform':<8} caption")
    for h in hits:
        caption = h.record.caption
        if len(caption) > 48:
            caption = caption[:45] + "..."
        click.echo(
            f"{h.hit.rank:>4}  {h.hit.score:>8.4f}  {h.hit.record_id:<20} "
            f"{h.record.app_id:<14} {h.record.platform.value:<8} {caption}"
        )


# ---------------------------------------------------------------- classify

@main.command()
@click.argument("image", type=click.Path(exists=True, dir_okay=False))
@click.option("--label", "-l", "labels", multiple=True, required=True,
              help="Repeatable candidate label.")
@click.option("--dim", type=int, default=DEFAULT_DIM, show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--endpoint", default="reference", show_default=True)
def classify(image, labels, dim, seed, endpoint):
    """Zero-shot classification of a screenshot against label texts."""
    from .service.engine import validate_labels, softmax
    from .core import cosine

    embedder = _make_embedder(endpoint, dim, seed)
    try:
        clean = validate_labels(list(labels))
        img_e = embedder.embed_image([image])[0]
        sims = [cosine(img_e, le) for le in embedder.embed_text(clean)]
        probs = softmax(sims)
        best = max(range(len(clean)), key=lambda i: (sims[i], -i))
    except GuiscoutError as exc:
        raise _fail(exc)
    for lab, p, s in zip(clean, probs, sims):
        click.echo(f"{p:7.4f}  (sim {s:+.4f})  {lab}")
    click.echo(f"label: {clean[best]}")


# ------------------------------------------------------------------- bench

@main.command()
@_INDEX_DIR_OPT
@click.option("--queries", "queries_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="UTF-8 file, one query per line.")
@click.option("--repetitions", type=int, default=1, show_default=True)
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--parallel", type=int, default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the report as JSON.")
@click.option("--endpoint", default="reference", show_default=True)
@click.option("--seed", type=int, default=None)
def bench(index_dir, queries_path, repetitions, k, parallel, out_path, endpoint, seed):
    """Measure embed+search end-to-end and search-only latency percentiles."""
    from .bench import RECOMMENDED_MIN_QUERIES, run_bench

    queries = [
        line.strip()
        for line in Path(queries_path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    if not queries:
        raise click.UsageError(f"query file {queries_path} is empty")
    if len(queries) < RECOMMENDED_MIN_QUERIES:
        click.echo(
            f"warning: {len(queries)} queries (< {RECOMMENDED_MIN_QUERIES}); "
            "percentiles will be noisy",
            err=True,
        )
    index = _load_index(index_dir)
    embedder = _make_embedder(endpoint, index.dim,
                              seed if seed is not None else index.seed)
    try:
        report = run_bench(index, embedder, queries, k=k,
                           repetitions=repetitions, parallel=parallel)
    except (GuiscoutError, ValueError) as exc:
        raise _fail(exc)
    click.echo(f"corpus={report.corpus_size} kind={report.index_kind} "
               f"backend={report.backend} k={k} parallel={parallel}")
    for name, s in report.operations.items():
        click.echo(
            f"{name:>12}: n={s.count}  p50={s.p50_ms:.2f}ms  "
            f"p95={s.p95_ms:.2f}ms  p99={s.p99_ms:.2f}ms"
        )
    if out_path:
        Path(out_path).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        click.echo(f"report written to {out_path}")


# ------------------------------------------------------------------- serve

@main.command()
@_INDEX_DIR_OPT
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8188, show_default=True)
@click.option("--endpoint", default="reference", show_default=True,
              help="Embedder endpoint URL, or 'reference'.")
@click.option("--gen-endpoint", default=None,
              help="Chat/image model endpoint for /generate routes.")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Workbench static files to mount at /app.")
@click.option("--k", "default_k", type=int, default=DEFAULT_K, show_default=True)
def serve(index_dir, host, port, endpoint, gen_endpoint, ui_dir, default_k):
    """Run the search service over an ingested index."""
    import uvicorn

    from .ingest.metastore import MetaStore
    from .service.app import create_app
    from .service.engine import SearchEngine
    from .service.sessions import SessionStore

    index = _load_index(index_dir)
    embedder = _make_embedder(endpoint, index.dim, index.seed)
    store = MetaStore(index_dir)
    sessions = SessionStore(Path(index_dir) / "sessions")
    engine = SearchEngine(index, store, embedder, default_k=default_k)
    app = create_app(engine, sessions, gen_endpoint=gen_endpoint, ui_dir=ui_dir)
    click.echo(f"serving {index.size} screens on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


# ---------------------------------------------------------------- generate

@main.group()
def generate() -> None:
    """UI generation pipelines (refine | code | adjust | images)."""


def _write_provenance(out_dir: Path, provenance) -> Path:
    path = out_dir / "provenance.json"
    path.write_text(
        json.dumps([p.to_dict() for p in provenance], indent=2) + "\n",
        encoding="utf-8",
    )
    return path


_GEN_OPTS = [
    click.option("--endpoint", required=True, help="Chat/image model endpoint."),
    click.option("--temperature", type=float, default=0.7, show_default=True),
    click.option("--out-dir", type=click.Path(file_okay=False), default="./gen-out",
                 show_default=True),
]


def _gen_opts(fn):
    for opt in reversed(_GEN_OPTS):
        fn = opt(fn)
    return fn


@generate.command()
@click.argument("description")
@_gen_opts
def refine(description, endpoint, temperature, out_dir):
    """Refine a high-level description into detailed UI sections."""
    from .genkit import refine_description

    try:
        cfg = GenConfig(endpoint=endpoint, temperature=temperature)
        result = refine_description(description, cfg)
    except GuiscoutError as exc:
        raise _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sections.json").write_text(
        json.dumps([s.to_dict() for s in result.sections], indent=2) + "\n",
        encoding="utf-8",
    )
    _write_provenance(out, result.provenance)
    for s in result.sections:
        click.echo(f"- {s.name}")
    click.echo(f"wrote {out / 'sections.json'}")


@generate.command()
@click.option("--sections", "sections_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="sections.json from `generate refine`.")
@_gen_opts
def code(sections_path, endpoint, temperature, out_dir):
    """Generate an HTML document from refined sections."""
    from .genkit import UiSection, generate_ui_code

    try:
        data = json.loads(Path(sections_path).read_text(encoding="utf-8"))
        sections = [UiSection.from_dict(d) for d in data]
        cfg = GenConfig(endpoint=endpoint, temperature=temperature)
        artifact = generate_ui_code(sections, cfg)
    except (GuiscoutError, ValueError) as exc:
        raise _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ui.html").write_text(artifact.content, encoding="utf-8")
    _write_provenance(out, artifact.provenance)
    click.echo(f"wrote {out / 'ui.html'}")


@generate.command()
@click.option("--artifact", "artifact_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--provenance", "provenance_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--instruction", required=True)
@_gen_opts
def adjust(artifact_path, provenance_path, instruction, endpoint, temperature, out_dir):
    """Adjust generated HTML with an additional instruction."""
    from .genkit import adjust_ui_code, artifact_from_content

    try:
        prior = []
        if provenance_path:
            prior = json.loads(Path(provenance_path).read_text(encoding="utf-8"))
        artifact = artifact_from_content(
            Path(artifact_path).read_text(encoding="utf-8"), prior
        )
        cfg = GenConfig(endpoint=endpoint, temperature=temperature)
        adjusted = adjust_ui_code(artifact, instruction, cfg)
    except (GuiscoutError, ValueError) as exc:
        raise _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ui_adjusted.html").write_text(adjusted.content, encoding="utf-8")
    _write_provenance(out, adjusted.provenance)
    click.echo(f"wrote {out / 'ui_adjusted.html'}")


@generate.command()
@click.argument("description")
@click.option("-n", "count", type=int, default=1, show_default=True)
@click.option("--batch", type=int, default=1, show_default=True,
              help="Images per upstream round.")
@_gen_opts
def images(description, count, batch, endpoint, temperature, out_dir):
    """Generate UI inspiration images from a page description."""
    from .genkit import generate_ui_images

    try:
        cfg = GenConfig(endpoint=endpoint, temperature=temperature, batch_size=batch)
        artifacts = generate_ui_images(description, count, cfg)
    except GuiscoutError as exc:
        raise _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rounds = sorted({a.provenance[0].step for a in artifacts})
    for r in rounds:
        n_in_round = sum(1 for a in artifacts if a.provenance[0].step == r)
        click.echo(f"{r}: {n_in_round} image(s)", err=True)
    for i, a in enumerate(artifacts):
        (out / f"img_{i:03d}.png").write_bytes(a.content)
    steps = []
    seen = set()
    for a in artifacts:
        if id(a.provenance[0]) not in seen:
            seen.add(id(a.provenance[0]))
            steps.append(a.provenance[0])
    _write_provenance(out, steps)
    click.echo(f"wrote {len(artifacts)} image(s) to {out} in {len(rounds)} round(s)")


if __name__ == "__main__":
    main()
