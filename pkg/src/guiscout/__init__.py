"""GUIScout: a text-to-UI design inspiration engine.

Ingests captioned app-screenshot repositories, indexes their embeddings
for fast top-k semantic retrieval and zero-shot classification, and
orchestrates LLM/diffusion UI-generation pipelines.
"""

__version__ = "0.1.0"

from .core import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_DEDUP_THRESHOLD,
    DEFAULT_DIM,
    DEFAULT_K,
    DEFAULT_SEED,
    Embedding,
    GenConfig,
    Platform,
    Query,
    RankedHit,
    ScreenRecord,
    cosine,
    normalize,
)

__all__ = [
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_DEDUP_THRESHOLD",
    "DEFAULT_DIM",
    "DEFAULT_K",
    "DEFAULT_SEED",
    "Embedding",
    "GenConfig",
    "Platform",
    "Query",
    "RankedHit",
    "ScreenRecord",
    "cosine",
    "normalize",
    "__version__",
]
