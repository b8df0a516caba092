"""Embedder boundary: reference recipes, remote adapter, wire server."""

from .base import Embedder, EmbedderDescriptor
from .reference import ReferenceEmbedder
from .remote import RemoteEmbedder, attach_external
from .server import EmbedServer

__all__ = [
    "Embedder",
    "EmbedderDescriptor",
    "ReferenceEmbedder",
    "RemoteEmbedder",
    "attach_external",
    "EmbedServer",
]
