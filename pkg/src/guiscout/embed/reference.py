"""Deterministic reference embedder (the offline stand-in for a VLM).

Text recipe: lowercase, split into character 3-grams (whole text as a
single gram when shorter than 3), hash each gram with 64-bit FNV-1a
into 4096 buckets, count, project the 4096-dim count vector through a
seeded Gaussian matrix, L2-normalize.

Image recipe: decode (PNG/JPEG), grayscale, average-pool to 16x16,
map pixel means through (v - 127.5) / 127.5 into [-1, 1] (keeps a
uniformly black image away from the zero vector), flatten to 256 dims,
project through the image-side matrix of the same seeded family,
normalize.

Projection matrices come from numpy's Generator(PCG64(seed))
.standard_normal, shapes (4096, dim) and (256, dim), a fresh generator
per matrix; PCG64 is the named, widely implemented generator that makes
the whole recipe reproducible across implementations. Not semantically
meaningful; exists so every pipeline is exactly testable offline.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..core import DEFAULT_DIM, DEFAULT_SEED, Embedding, normalize
from ..errors import DecodeFailure
from .base import Embedder, EmbedderDescriptor, ImageItem, check_text_batch

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

TEXT_BUCKETS = 4096
IMAGE_GRID = 16  # 16x16 pooled cells -> 256 features
ALLOWED_FORMATS = ("PNG", "JPEG")


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def char_trigrams(text: str) -> List[str]:
    s = text.lower()
    if len(s) < 3:
        return [s]
    return [s[i : i + 3] for i in range(len(s) - 2)]


def pool_grayscale(gray: np.ndarray, grid: int = IMAGE_GRID) -> np.ndarray:
    """Average-pool an (H, W) grayscale array to grid x grid cell means.

    Cell bounds are floor(i*H/grid); empty cells (images smaller than
    the grid) clamp to a single nearest pixel.
    """
    h, w = gray.shape
    g = gray.astype(np.float64)
    out = np.empty((grid, grid), dtype=np.float64)
    for i in range(grid):
        r0, r1 = (i * h) // grid, ((i + 1) * h) // grid
        if r1 <= r0:
            r0 = min(r0, h - 1)
            r1 = r0 + 1
        for j in range(grid):
            c0, c1 = (j * w) // grid, ((j + 1) * w) // grid
            if c1 <= c0:
                c0 = min(c0, w - 1)
                c1 = c0 + 1
            out[i, j] = g[r0:r1, c0:c1].mean()
    return out.ravel()


class ReferenceEmbedder(Embedder):
    def __init__(self, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED):
        self._dim = int(dim)
        self._seed = int(seed)
        self._text_proj: Optional[np.ndarray] = None
        self._image_proj: Optional[np.ndarray] = None

    @property
    def descriptor(self) -> EmbedderDescriptor:
        return EmbedderDescriptor(
            name=f"reference-pcg64-seed{self._seed}",
            dim=self._dim,
            modality="multimodal",
            deterministic=True,
        )

    @property
    def seed(self) -> int:
        return self._seed

    def _text_matrix(self) -> np.ndarray:
        if self._text_proj is None:
            gen = np.random.Generator(np.random.PCG64(self._seed))
            self._text_proj = gen.standard_normal((TEXT_BUCKETS, self._dim))
        return self._text_proj

    def _image_matrix(self) -> np.ndarray:
        if self._image_proj is None:
            gen = np.random.Generator(np.random.PCG64(self._seed))
            self._image_proj = gen.standard_normal((IMAGE_GRID * IMAGE_GRID, self._dim))
        return self._image_proj

    # ------------------------------------------------------------- text

    def embed_text(self, batch: Sequence[str]) -> List[Embedding]:
        check_text_batch(batch)
        mat = self._text_matrix()
        out = []
        for text in batch:
            counts = np.zeros(TEXT_BUCKETS, dtype=np.float64)
            for gram in char_trigrams(text):
                counts[fnv1a64(gram.encode("utf-8")) % TEXT_BUCKETS] += 1.0
            out.append(normalize(counts @ mat, dim=self._dim))
        return out

    # ------------------------------------------------------------ image

    def embed_image(self, batch: Sequence[ImageItem]) -> List[Embedding]:
        if len(batch) == 0:
            raise DecodeFailure([(0, "image batch is empty")])
        grays, failures = [], []
        for i, item in enumerate(batch):
            try:
                grays.append(self._decode_gray(item))
            except Exception as exc:  # noqa: BLE001 - reported per item
                failures.append((i, str(exc)))
        if failures:
            raise DecodeFailure(failures)
        mat = self._image_matrix()
        out = []
        for gray in grays:
            pooled = (pool_grayscale(gray) - 127.5) / 127.5
            out.append(normalize(pooled @ mat, dim=self._dim))
        return out

    @staticmethod
    def _decode_gray(item: ImageItem) -> np.ndarray:
        if isinstance(item, bytes):
            img = Image.open(io.BytesIO(item))
        else:
            path = Path(item)
            if not path.is_file():
                raise FileNotFoundError(f"no such image file: {path}")
            img = Image.open(path)
        try:
            if img.format not in ALLOWED_FORMATS:
                raise UnidentifiedImageError(
                    f"unsupported format {img.format!r} (want PNG or JPEG)"
                )
            return np.asarray(img.convert("L"))
        finally:
            img.close()
