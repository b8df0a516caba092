"""Embedder contract: anything that maps texts/images to unit vectors."""

from __future__ import annotations

import abc
from dataclasses import dataclass
from typing import List, Sequence, Union

from ..core import Embedding
from ..errors import EmptyInput, ValidationError

MODALITIES = ("text", "image", "multimodal")

# an image item is a file path or raw encoded bytes
ImageItem = Union[str, bytes]


@dataclass(frozen=True)
class EmbedderDescriptor:
    name: str
    dim: int
    modality: str
    deterministic: bool

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValidationError(f"modality must be one of {MODALITIES}")
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dim": self.dim,
            "modality": self.modality,
            "deterministic": self.deterministic,
        }


def check_text_batch(batch: Sequence[str]) -> None:
    if len(batch) == 0:
        raise EmptyInput("text batch is empty")
    for i, t in enumerate(batch):
        if not t or not t.strip():
            raise EmptyInput(f"text at index {i} is empty after trim")


class Embedder(abc.ABC):
    """Uniform boundary to a vision-language model.

    Implementations must be safe for concurrent calls and must return
    one unit-norm Embedding per input, order preserved.
    """

    @property
    @abc.abstractmethod
    def descriptor(self) -> EmbedderDescriptor: ...

    @property
    def dim(self) -> int:
        return self.descriptor.dim

    @abc.abstractmethod
    def embed_text(self, batch: Sequence[str]) -> List[Embedding]: ...

    @abc.abstractmethod
    def embed_image(self, batch: Sequence[ImageItem]) -> List[Embedding]: ...
