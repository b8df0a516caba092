"""HTTP surface of the search service.

POST /search, POST /classify, GET /records/{id}, GET /apps/{app_id},
session/moodboard routes, GET /healthz, static screenshots under
/images/{id}, and (when a generation endpoint is configured) the
/generate/* proxy the workbench's generation panel drives. All bodies
are UTF-8 JSON; identical requests against the same corpus and seed
produce byte-identical responses.
"""

from __future__ import annotations

import base64
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from ..core import GenConfig, Query
from ..errors import (
    CorruptFile,
    DecodeFailure,
    DimensionMismatch,
    EmbedderUnavailable,
    EmptyLabelSet,
    EmptyQuery,
    EmptyReply,
    GuiscoutError,
    NotFound,
    UnknownRecord,
    UnknownSession,
    UnparseableReply,
    UpstreamFailure,
    ValidationError,
    ZeroVector,
)
from ..genkit import pipeline as genpipe
from .engine import SearchEngine
from .sessions import SessionStore

_STATUS = {
    ValidationError: 400,
    EmptyQuery: 400,
    EmptyLabelSet: 400,
    DecodeFailure: 400,
    ZeroVector: 400,
    DimensionMismatch: 400,
    NotFound: 404,
    UnknownSession: 404,
    UnknownRecord: 404,
    EmbedderUnavailable: 503,
    UpstreamFailure: 502,
    UnparseableReply: 502,
    EmptyReply: 502,
    CorruptFile: 500,
}


class SearchRequest(BaseModel):
    text: str
    k: Optional[int] = None
    filters: Optional[Dict[str, str]] = None
    min_score: Optional[float] = None


class ClassifyRequest(BaseModel):
    image_b64: str
    labels: List[str]


class SessionQueryRequest(BaseModel):
    text: str
    k: Optional[int] = None
    filters: Optional[Dict[str, str]] = None


class PinRequest(BaseModel):
    record_id: str


class RefineRequest(BaseModel):
    description: str
    temperature: float = 0.7


class CodeRequest(BaseModel):
    sections: List[dict]
    temperature: float = 0.7


class AdjustRequest(BaseModel):
    content: str
    instruction: str
    temperature: float = 0.7
    provenance: List[dict] = []


class ImagesRequest(BaseModel):
    description: str
    n: int = 1
    batch_size: int = 1
    temperature: float = 0.7


def create_app(
    engine: SearchEngine,
    sessions: SessionStore,
    *,
    gen_endpoint: Optional[str] = None,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="guiscout", docs_url=None, redoc_url=None)

    @app.exception_handler(GuiscoutError)
    async def _domain_error(request, exc: GuiscoutError):
        status = 500
        for cls, code in _STATUS.items():
            if isinstance(exc, cls):
                status = code
                break
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.on_event("shutdown")
    def _flush_sessions() -> None:
        sessions.flush()

    # ------------------------------------------------------------ search

    @app.post("/search")
    def search(req: SearchRequest):
        if not req.text or not req.text.strip():
            raise EmptyQuery("query text is empty after trim")
        query = Query(
            text=req.text,
            k=req.k if req.k is not None else engine.default_k,
            filters=req.filters or None,
        )
        hits = engine.text_search(query, min_score=req.min_score)
        return {
            "hits": [
                {
                    "id": h.hit.record_id,
                    "score": h.hit.score,
                    "rank": h.hit.rank,
                    "record": h.record.to_dict(),
                }
                for h in hits
            ]
        }

    @app.post("/classify")
    def classify(req: ClassifyRequest):
        try:
            raw = base64.b64decode(req.image_b64, validate=True)
        except Exception as exc:  # noqa: BLE001
            raise DecodeFailure([(0, f"invalid base64 image: {exc}")]) from exc
        result = engine.classify(raw, req.labels)
        return {
            "label": result.label,
            "probs": result.probs,
            "labels": list(req.labels),
            "similarities": result.similarities,
        }

    # ------------------------------------------------------------ lookup

    @app.get("/records/{record_id}")
    def get_record(record_id: str):
        return engine.get_record(record_id).record.to_dict()

    @app.get("/apps/{app_id}")
    def list_app(app_id: str):
        records = engine.list_app(app_id)
        return {"app_id": app_id, "records": [r.to_dict() for r in records]}

    @app.get("/images/{record_id}")
    def get_image(record_id: str):
        stored = engine.get_record(record_id)
        path = Path(stored.image_abspath)
        if not path.is_file():
            raise NotFound(f"image file for {record_id!r} is missing")
        return FileResponse(path)

    # ---------------------------------------------------------- sessions

    @app.post("/sessions", status_code=201)
    def create_session():
        return sessions.create().to_dict()

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        return sessions.get(sid).to_dict()

    @app.post("/sessions/{sid}/queries")
    def record_query(sid: str, req: SessionQueryRequest):
        if not req.text or not req.text.strip():
            raise EmptyQuery("query text is empty after trim")
        query = Query(
            text=req.text,
            k=req.k if req.k is not None else engine.default_k,
            filters=req.filters or None,
        )
        return sessions.record_query(sid, query).to_dict()

    @app.post("/sessions/{sid}/pins")
    def pin(sid: str, req: PinRequest):
        sessions.get(sid)
        if req.record_id not in engine.store:
            raise UnknownRecord(f"record {req.record_id!r} not in store")
        return sessions.pin(sid, req.record_id).to_dict()

    @app.delete("/sessions/{sid}/pins/{record_id}")
    def unpin(sid: str, record_id: str):
        return sessions.unpin(sid, record_id).to_dict()

    # ------------------------------------------------------------ health

    @app.get("/healthz")
    def healthz():
        return engine.health()

    # -------------------------------------------------------- generation

    def _gen_cfg(temperature: float, batch_size: int = 1) -> GenConfig:
        if gen_endpoint is None:
            raise EmbedderUnavailable(
                "no generation endpoint configured (start with --gen-endpoint)"
            )
        return GenConfig(
            endpoint=gen_endpoint, temperature=temperature, batch_size=batch_size
        )

    @app.post("/generate/refine")
    def gen_refine(req: RefineRequest):
        result = genpipe.refine_description(req.description, _gen_cfg(req.temperature))
        return {
            "sections": [s.to_dict() for s in result.sections],
            "provenance": [p.to_dict() for p in result.provenance],
        }

    @app.post("/generate/code")
    def gen_code(req: CodeRequest):
        sections = [genpipe.UiSection.from_dict(d) for d in req.sections]
        artifact = genpipe.generate_ui_code(sections, _gen_cfg(req.temperature))
        return {
            "artifact": {"kind": artifact.kind, "content": artifact.content},
            "provenance": [p.to_dict() for p in artifact.provenance],
        }

    @app.post("/generate/adjust")
    def gen_adjust(req: AdjustRequest):
        artifact = genpipe.artifact_from_content(req.content, req.provenance)
        adjusted = genpipe.adjust_ui_code(
            artifact, req.instruction, _gen_cfg(req.temperature)
        )
        return {
            "artifact": {"kind": adjusted.kind, "content": adjusted.content},
            "provenance": [p.to_dict() for p in adjusted.provenance],
        }

    @app.post("/generate/images")
    def gen_images(req: ImagesRequest):
        artifacts = genpipe.generate_ui_images(
            req.description, req.n, _gen_cfg(req.temperature, req.batch_size)
        )
        return {
            "images_b64": [
                base64.b64encode(a.content).decode("ascii") for a in artifacts
            ],
            "rounds": len({id(a.provenance[0]) for a in artifacts}),
        }

    # --------------------------------------------------------- workbench

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=ui_dir, html=True), name="workbench")

    return app
