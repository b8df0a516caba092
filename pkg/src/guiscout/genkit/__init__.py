"""UI generation pipelines driving external chat/image model endpoints."""

from .client import ChatClient, ImageClient
from .mock_server import MockModelServer
from .pipeline import (
    ProvenanceStep,
    RefineResult,
    UiArtifact,
    UiSection,
    adjust_ui_code,
    artifact_from_content,
    generate_ui_code,
    generate_ui_images,
    refine_description,
)

__all__ = [
    "ChatClient",
    "ImageClient",
    "MockModelServer",
    "ProvenanceStep",
    "RefineResult",
    "UiArtifact",
    "UiSection",
    "adjust_ui_code",
    "artifact_from_content",
    "generate_ui_code",
    "generate_ui_images",
    "refine_description",
]
