"""Domain types and the similarity primitives everything else shares.

Embeddings are unit-norm float64 vectors; similarity is cosine, realized
as a plain dot product because normalization is enforced at construction.
Indexes quantize to float32 at insert time (matching the on-disk format);
the float64 representation here keeps normalize() idempotent to 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, ValidationError, ZeroVector

# Repository-wide defaults. The embedding dimension is configurable and
# recorded in every persisted artifact; 512 is the repo default.
DEFAULT_DIM = 512
DEFAULT_SEED = 42
DEFAULT_K = 6
DEFAULT_BATCH_SIZE = 32
DEFAULT_DEDUP_THRESHOLD = 0.999
TEMPERATURE_MIN = 0.0
TEMPERATURE_MAX = 2.0

# Filters are restricted to these ScreenRecord fields.
FILTERABLE_FIELDS = ("platform", "category")


class Platform(str, Enum):
    IOS = "ios"
    ANDROID = "android"
    WEB = "web"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Embedding:
    """Unit-norm vector in the shared multimodal space.

    Construct via normalize(); direct construction validates the norm.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("embedding values must be a non-empty 1-D vector")
        norm = math.sqrt(float(v @ v))
        if abs(norm - 1.0) > 1e-6:
            raise ValidationError(f"embedding norm {norm!r} is not 1.0 within 1e-6")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


def normalize(values: Sequence[float], *, dim: Optional[int] = None) -> Embedding:
    """Scale `values` to unit L2 norm, preserving direction.

    Raises ZeroVector when the norm is below 1e-12 and DimensionMismatch
    when `dim` is given and the length differs.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ValidationError("expected a 1-D vector")
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"expected dim {dim}, got {v.shape[0]}")
    norm = math.sqrt(float(v @ v))
    if not math.isfinite(norm):
        raise ValidationError("vector contains non-finite values")
    if norm < 1e-12:
        raise ZeroVector("cannot normalize a zero vector")
    return Embedding(v / norm)


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two unit vectors (their dot product).

    Exactly symmetric: the summation order does not depend on argument
    order, and each product commutes.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    return float(a.values @ b.values)


@dataclass(frozen=True)
class ScreenRecord:
    """One screenshot: image reference, caption, and source-app metadata."""

    id: str
    app_id: str
    app_url: str
    caption: str
    image_path: str
    platform: Platform = Platform.UNKNOWN
    category: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("record id must be non-empty")
        if not self.app_id:
            raise ValidationError(f"record {self.id!r}: app_id must be non-empty")
        if not self.caption or not self.caption.strip():
            raise ValidationError(f"record {self.id!r}: caption must be non-empty")
        if not isinstance(self.platform, Platform):
            object.__setattr__(self, "platform", Platform(self.platform))

    def to_dict(self) -> dict:
        d = {
            "id": self.id,
            "app_id": self.app_id,
            "app_url": self.app_url,
            "caption": self.caption,
            "image_path": self.image_path,
            "platform": self.platform.value,
        }
        if self.category is not None:
            d["category"] = self.category
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScreenRecord":
        try:
            platform = Platform(d.get("platform", "unknown"))
        except ValueError:
            raise ValidationError(f"unknown platform {d.get('platform')!r}")
        return cls(
            id=str(d["id"]),
            app_id=str(d["app_id"]),
            app_url=str(d.get("app_url", "")),
            caption=str(d["caption"]),
            image_path=str(d["image_path"]),
            platform=platform,
            category=d.get("category"),
        )


@dataclass(frozen=True)
class Query:
    """A text query with result count and optional metadata filters."""

    text: str
    k: int = DEFAULT_K
    filters: Optional[Mapping[str, str]] = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError("query text must be non-empty")
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if self.filters:
            bad = set(self.filters) - set(FILTERABLE_FIELDS)
            if bad:
                raise ValidationError(
                    f"unsupported filter field(s) {sorted(bad)}; "
                    f"allowed: {list(FILTERABLE_FIELDS)}"
                )
            object.__setattr__(self, "filters", dict(self.filters))


@dataclass(frozen=True)
class RankedHit:
    """A scored search result; scores are non-increasing by rank."""

    record_id: str
    score: float
    rank: int

    def __post_init__(self):
        if not -1.0 <= self.score <= 1.0:
            raise ValidationError(f"score {self.score} outside [-1, 1]")
        if self.rank < 1:
            raise ValidationError(f"rank must be >= 1, got {self.rank}")


@dataclass(frozen=True)
class GenConfig:
    """Generation endpoint settings; temperature range follows the model APIs."""

    endpoint: str
    temperature: float = 1.0
    batch_size: int = 1

    def __post_init__(self):
        if not (TEMPERATURE_MIN <= self.temperature <= TEMPERATURE_MAX):
            raise ValidationError(
                f"temperature must be in [{TEMPERATURE_MIN}, {TEMPERATURE_MAX}], "
                f"got {self.temperature}"
            )
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
