"""Vector storage and top-k retrieval: exact flat scan and HNSW graph."""

from .flat import FlatIndex
from .hnsw import HnswIndex
from .io import load_index, save_index
from .kernel import BACKEND

__all__ = ["FlatIndex", "HnswIndex", "load_index", "save_index", "BACKEND"]
