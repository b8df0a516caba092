"""Live query engine and its HTTP API."""

from .app import create_app
from .engine import ClassifyResult, SearchEngine, SearchHit, softmax
from .sessions import Session, SessionStore

__all__ = [
    "ClassifyResult",
    "SearchEngine",
    "SearchHit",
    "Session",
    "SessionStore",
    "create_app",
    "softmax",
]
