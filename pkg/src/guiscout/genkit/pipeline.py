"""The three-step UI generation pipeline plus the diffusion adapter.

refine_description -> generate_ui_code -> adjust_ui_code compose into
one artifact whose provenance lists each step (prompt, raw reply,
settings, wall time) in order. Prompt templates live in versioned files
under templates/ and demand a machine-readable reply schema, so a
malformed model reply is a well-defined UnparseableReply. Temperature
is validated at GenConfig construction, before any upstream call.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import List, Optional, Sequence, Tuple, Union

from ..core import GenConfig
from ..errors import EmptyReply, UnparseableReply, UpstreamFailure, ValidationError
from .client import ChatClient, ImageClient

MAX_IMAGE_ROUNDS = 64

HTML_CODE = "html_code"
IMAGE = "image"


@dataclass(frozen=True)
class UiSection:
    name: str
    description: str
    code_example: str = ""

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise ValidationError("section name must be non-empty")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "code_example": self.code_example,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UiSection":
        return cls(
            name=d["name"],
            description=d.get("description", ""),
            code_example=d.get("code_example", ""),
        )


@dataclass(frozen=True)
class ProvenanceStep:
    step: str
    prompt: Tuple[dict, ...]
    raw_reply: str
    temperature: float
    batch_size: int
    endpoint: str
    elapsed_s: float

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "prompt": [dict(m) for m in self.prompt],
            "raw_reply": self.raw_reply,
            "temperature": self.temperature,
            "batch_size": self.batch_size,
            "endpoint": self.endpoint,
            "elapsed_s": self.elapsed_s,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProvenanceStep":
        return cls(
            step=d["step"],
            prompt=tuple(d.get("prompt", [])),
            raw_reply=d.get("raw_reply", ""),
            temperature=d.get("temperature", 0.0),
            batch_size=d.get("batch_size", 1),
            endpoint=d.get("endpoint", ""),
            elapsed_s=d.get("elapsed_s", 0.0),
        )


@dataclass(frozen=True)
class UiArtifact:
    kind: str  # html_code | image
    content: Union[str, bytes]
    provenance: Tuple[ProvenanceStep, ...]

    def __post_init__(self):
        if self.kind not in (HTML_CODE, IMAGE):
            raise ValidationError(f"unknown artifact kind {self.kind!r}")
        if not self.provenance:
            raise ValidationError("artifact provenance must be non-empty")
        if self.kind == HTML_CODE and (
            not isinstance(self.content, str) or not self.content.strip()
        ):
            raise ValidationError("html artifacts must carry non-empty text")


@dataclass(frozen=True)
class RefineResult:
    sections: Tuple[UiSection, ...]
    provenance: Tuple[ProvenanceStep, ...]


def _template(name: str) -> str:
    return resources.files("guiscout.genkit").joinpath(f"templates/{name}").read_text(
        encoding="utf-8"
    )


def _chat(cfg: GenConfig, client: Optional[ChatClient]) -> ChatClient:
    return client if client is not None else ChatClient(cfg.endpoint)


# ------------------------------------------------------- reply parsing

def parse_sections_block(reply: str) -> List[UiSection]:
    """Parse the fenced line-structured sections block out of a reply."""
    lines = reply.splitlines()
    start = None
    for i, line in enumerate(lines):
        if line.strip() == "```sections":
            start = i + 1
            break
    if start is None:
        raise UnparseableReply("reply has no ```sections block", raw=reply)
    end = None
    for i in range(start, len(lines)):
        if lines[i].strip() == "```":
            end = i
            break
    if end is None:
        raise UnparseableReply("sections block is not closed", raw=reply)

    sections = []
    chunk: List[str] = []
    for line in lines[start:end] + ["---"]:
        if line.strip() == "---":
            if any(s.strip() for s in chunk):
                sections.append(_parse_section_record(chunk, reply))
            chunk = []
        else:
            chunk.append(line)
    if not sections:
        raise UnparseableReply("sections block contains no records", raw=reply)
    return sections


def _parse_section_record(lines: List[str], raw: str) -> UiSection:
    name = None
    desc_lines: List[str] = []
    code_lines: List[str] = []
    mode = None
    for line in lines:
        stripped = line.strip()
        if stripped.startswith("name:"):
            name = stripped[len("name:"):].strip()
            mode = "name"
        elif stripped.startswith("description:"):
            desc_lines.append(stripped[len("description:"):].strip())
            mode = "desc"
        elif stripped == "code:" or stripped.startswith("code:"):
            tail = stripped[len("code:"):].strip()
            if tail:
                code_lines.append(tail)
            mode = "code"
        elif mode == "desc":
            desc_lines.append(stripped)
        elif mode == "code":
            code_lines.append(line)
    if not name:
        raise UnparseableReply("section record without a name", raw=raw)
    description = " ".join(d for d in desc_lines if d).strip()
    if not description:
        raise UnparseableReply(f"section {name!r} has no description", raw=raw)
    return UiSection(name=name, description=description,
                     code_example="\n".join(code_lines).strip())


def extract_html(reply: str) -> str:
    """Pull the fenced ```html block if present, else the raw reply."""
    lines = reply.splitlines()
    start = None
    for i, line in enumerate(lines):
        if line.strip() in ("```html", "```HTML"):
            start = i + 1
            break
    if start is not None:
        for j in range(start, len(lines)):
            if lines[j].strip() == "```":
                return "\n".join(lines[start:j]).strip()
    return reply.strip()


# -------------------------------------------------------- pipeline ops

def refine_description(
    high_level: str, cfg: GenConfig, *, client: Optional[ChatClient] = None
) -> RefineResult:
    """Expand a high-level description into named UI sections."""
    if not high_level or not high_level.strip():
        raise ValidationError("high-level description must be non-empty")
    prompt = [
        {"role": "system", "content": "You refine UI descriptions into sections."},
        {"role": "user", "content": _template("refine.txt").format(high_level=high_level)},
    ]
    reply, elapsed = _chat(cfg, client).complete(prompt, cfg.temperature)
    sections = parse_sections_block(reply)
    step = ProvenanceStep(
        step="refine", prompt=tuple(prompt), raw_reply=reply,
        temperature=cfg.temperature, batch_size=cfg.batch_size,
        endpoint=cfg.endpoint, elapsed_s=elapsed,
    )
    return RefineResult(sections=tuple(sections), provenance=(step,))


def render_sections(sections: Sequence[UiSection]) -> str:
    parts = []
    for s in sections:
        parts.append(f"## {s.name}\nDescription: {s.description}")
        if s.code_example:
            parts.append(f"Example:\n{s.code_example}")
    return "\n".join(parts)


def generate_ui_code(
    sections: Sequence[UiSection],
    cfg: GenConfig,
    *,
    client: Optional[ChatClient] = None,
    provenance: Sequence[ProvenanceStep] = (),
) -> UiArtifact:
    """Generate one HTML document from the detailed sections."""
    if len(sections) == 0:
        raise ValidationError("at least one section is required")
    prompt = [
        {"role": "system", "content": "You generate complete HTML documents."},
        {"role": "user", "content": _template("code.txt").format(
            sections=render_sections(sections))},
    ]
    reply, elapsed = _chat(cfg, client).complete(prompt, cfg.temperature)
    content = extract_html(reply)
    if not content:
        raise EmptyReply("model returned empty HTML")
    step = ProvenanceStep(
        step="code", prompt=tuple(prompt), raw_reply=reply,
        temperature=cfg.temperature, batch_size=cfg.batch_size,
        endpoint=cfg.endpoint, elapsed_s=elapsed,
    )
    return UiArtifact(kind=HTML_CODE, content=content,
                      provenance=tuple(provenance) + (step,))


def adjust_ui_code(
    artifact: UiArtifact,
    instruction: str,
    cfg: GenConfig,
    *,
    client: Optional[ChatClient] = None,
) -> UiArtifact:
    """Apply an adjustment instruction; provenance grows by one step."""
    if artifact.kind != HTML_CODE:
        raise ValidationError("can only adjust html_code artifacts")
    if not instruction or not instruction.strip():
        raise ValidationError("adjustment instruction must be non-empty")
    prompt = [
        {"role": "system", "content": "You adjust existing HTML documents."},
        {"role": "user", "content": _template("adjust.txt").format(
            instruction=instruction, code=artifact.content)},
    ]
    reply, elapsed = _chat(cfg, client).complete(prompt, cfg.temperature)
    content = extract_html(reply)
    if not content:
        raise EmptyReply("model returned empty HTML")
    step = ProvenanceStep(
        step="adjust", prompt=tuple(prompt), raw_reply=reply,
        temperature=cfg.temperature, batch_size=cfg.batch_size,
        endpoint=cfg.endpoint, elapsed_s=elapsed,
    )
    return UiArtifact(kind=HTML_CODE, content=content,
                      provenance=artifact.provenance + (step,))


def artifact_from_content(
    content: str, provenance_dicts: Sequence[dict] = ()
) -> UiArtifact:
    """Rebuild an html artifact from stored content + provenance dicts."""
    steps = tuple(ProvenanceStep.from_dict(d) for d in provenance_dicts)
    if not steps:
        steps = (ProvenanceStep(
            step="imported", prompt=(), raw_reply="", temperature=0.0,
            batch_size=1, endpoint="", elapsed_s=0.0,
        ),)
    return UiArtifact(kind=HTML_CODE, content=content, provenance=steps)


def generate_ui_images(
    page_description: str,
    n: int,
    cfg: GenConfig,
    *,
    client: Optional[ImageClient] = None,
    parallelism: int = 1,
    max_rounds: int = MAX_IMAGE_ROUNDS,
) -> List[UiArtifact]:
    """Generate n UI images in ceil(n / batch_size) upstream rounds.

    On a round failure the raised UpstreamFailure carries the artifacts
    of the rounds that completed (`partial`) and the failed round index.
    """
    if not page_description or not page_description.strip():
        raise ValidationError("page description must be non-empty")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rounds = math.ceil(n / cfg.batch_size)
    if rounds > max_rounds:
        raise ValidationError(
            f"{n} images at batch_size {cfg.batch_size} needs {rounds} rounds "
            f"(limit {max_rounds})"
        )
    img_client = client if client is not None else ImageClient(cfg.endpoint)
    sizes = [min(cfg.batch_size, n - r * cfg.batch_size) for r in range(rounds)]

    def run_round(r: int):
        return img_client.generate(page_description, sizes[r])

    results: List[Optional[Tuple[List[bytes], float]]] = [None] * rounds
    if parallelism <= 1 or rounds == 1:
        for r in range(rounds):
            try:
                results[r] = run_round(r)
            except UpstreamFailure as exc:
                partial = _collect_images(page_description, cfg, sizes, results)
                raise UpstreamFailure(
                    f"image round {r + 1}/{rounds} failed: {exc}",
                    partial=partial, round_index=r,
                ) from exc
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = {r: pool.submit(run_round, r) for r in range(rounds)}
            failed = None
            for r in range(rounds):  # deterministic re-ordering by round
                try:
                    results[r] = futures[r].result()
                except UpstreamFailure as exc:
                    if failed is None:
                        failed = (r, exc)
            if failed is not None:
                r, exc = failed
                partial = _collect_images(page_description, cfg, sizes, results)
                raise UpstreamFailure(
                    f"image round {r + 1}/{rounds} failed: {exc}",
                    partial=partial, round_index=r,
                ) from exc
    return _collect_images(page_description, cfg, sizes, results)


def _collect_images(description, cfg, sizes, results) -> List[UiArtifact]:
    artifacts = []
    for r, res in enumerate(results):
        if res is None:
            continue
        images, elapsed = res
        step = ProvenanceStep(
            step=f"images[round {r + 1}]",
            prompt=({"role": "user", "content": description},),
            raw_reply=f"{len(images)} image(s)",
            temperature=cfg.temperature, batch_size=cfg.batch_size,
            endpoint=cfg.endpoint, elapsed_s=elapsed,
        )
        for img in images:
            artifacts.append(UiArtifact(kind=IMAGE, content=img, provenance=(step,)))
    return artifacts
