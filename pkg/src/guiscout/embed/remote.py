"""HTTP adapter for an external embedding model process.

Wire protocol: GET /info -> {"name", "dim", "modality"}; POST /embed
{"modality": "text"|"image", "items": [...texts or base64 bytes...]}
-> {"vectors": [[...dim floats...], ...]}. Anything else is an
UpstreamFailure carrying the failed batch indices. Images travel as
base64 bytes so the model may run on another host.
"""

from __future__ import annotations

import base64
import io
import threading
from pathlib import Path
from typing import List, Sequence

import requests
from PIL import Image

from ..core import DEFAULT_BATCH_SIZE, Embedding, normalize
from ..errors import (
    DecodeFailure,
    DimensionMismatch,
    HandshakeFailure,
    UpstreamFailure,
    ZeroVector,
)
from .base import (
    MODALITIES,
    Embedder,
    EmbedderDescriptor,
    ImageItem,
    check_text_batch,
)


class RemoteEmbedder(Embedder):
    def __init__(
        self,
        endpoint: str,
        descriptor: EmbedderDescriptor,
        batch_size: int = DEFAULT_BATCH_SIZE,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self._descriptor = descriptor
        self._batch_size = batch_size
        self._timeout = timeout
        self._session = requests.Session()
        # wire calls are serialized; the interface stays reentrant
        self._lock = threading.Lock()

    @property
    def descriptor(self) -> EmbedderDescriptor:
        return self._descriptor

    def embed_text(self, batch: Sequence[str]) -> List[Embedding]:
        check_text_batch(batch)
        return self._embed_chunks("text", list(batch))

    def embed_image(self, batch: Sequence[ImageItem]) -> List[Embedding]:
        if len(batch) == 0:
            raise DecodeFailure([(0, "image batch is empty")])
        items, failures = [], []
        for i, item in enumerate(batch):
            try:
                items.append(base64.b64encode(_read_image_bytes(item)).decode("ascii"))
            except Exception as exc:  # noqa: BLE001 - reported per item
                failures.append((i, str(exc)))
        if failures:
            raise DecodeFailure(failures)
        return self._embed_chunks("image", items)

    def _embed_chunks(self, modality: str, items: List[str]) -> List[Embedding]:
        out: List[Embedding] = []
        for start in range(0, len(items), self._batch_size):
            chunk = items[start : start + self._batch_size]
            indices = list(range(start, start + len(chunk)))
            out.extend(self._call(modality, chunk, indices))
        return out

    def _call(self, modality: str, chunk: List[str], indices: List[int]) -> List[Embedding]:
        try:
            with self._lock:
                resp = self._session.post(
                    f"{self.endpoint}/embed",
                    json={"modality": modality, "items": chunk},
                    timeout=self._timeout,
                )
        except requests.RequestException as exc:
            raise UpstreamFailure(f"embed call failed: {exc}", indices=indices) from exc
        if resp.status_code != 200:
            raise UpstreamFailure(
                f"embed call returned HTTP {resp.status_code}", indices=indices
            )
        try:
            vectors = resp.json()["vectors"]
        except (ValueError, KeyError) as exc:
            raise UpstreamFailure(f"malformed embed reply: {exc}", indices=indices) from exc
        if not isinstance(vectors, list) or len(vectors) != len(chunk):
            raise UpstreamFailure(
                f"expected {len(chunk)} vectors, got "
                f"{len(vectors) if isinstance(vectors, list) else type(vectors).__name__}",
                indices=indices,
            )
        out = []
        for vec in vectors:
            try:
                out.append(normalize(vec, dim=self._descriptor.dim))
            except (DimensionMismatch, ZeroVector, ValueError) as exc:
                raise UpstreamFailure(f"bad vector in reply: {exc}", indices=indices) from exc
        return out


def _read_image_bytes(item: ImageItem) -> bytes:
    """Validate PNG/JPEG client-side, return the raw encoded bytes."""
    if isinstance(item, bytes):
        raw = item
    else:
        path = Path(item)
        if not path.is_file():
            raise FileNotFoundError(f"no such image file: {path}")
        raw = path.read_bytes()
    with Image.open(io.BytesIO(raw)) as img:
        if img.format not in ("PNG", "JPEG"):
            raise ValueError(f"unsupported format {img.format!r} (want PNG or JPEG)")
    return raw


def attach_external(
    endpoint: str,
    expected_dim: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    timeout: float = 10.0,
) -> RemoteEmbedder:
    """Handshake with an external embedder; returns the wired adapter.

    Raises HandshakeFailure when /info is unreachable or malformed and
    DimensionMismatch when the declared dim differs from expected_dim.
    """
    url = endpoint.rstrip("/")
    try:
        resp = requests.get(f"{url}/info", timeout=timeout)
    except requests.RequestException as exc:
        raise HandshakeFailure(f"embedder endpoint unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise HandshakeFailure(f"/info returned HTTP {resp.status_code}")
    try:
        info = resp.json()
        name = str(info["name"])
        dim = int(info["dim"])
        modality = str(info["modality"])
    except (ValueError, KeyError, TypeError) as exc:
        raise HandshakeFailure(f"malformed /info reply: {exc}") from exc
    if modality not in MODALITIES:
        raise HandshakeFailure(f"unknown modality {modality!r} in /info reply")
    if dim != expected_dim:
        raise DimensionMismatch(
            f"endpoint declares dim {dim}, repository expects {expected_dim}"
        )
    descriptor = EmbedderDescriptor(
        name=name, dim=dim, modality=modality, deterministic=bool(info.get("deterministic", False))
    )
    return RemoteEmbedder(url, descriptor, batch_size=batch_size, timeout=timeout)
