"""Screenshot repository ingestion: manifests, metadata store, pipeline."""

from .manifest import Tombstone, iter_manifest, parse_manifest, resolve_image
from .metastore import MetaStore, StoredRecord
from .pipeline import INDEX_FILENAME, IngestReport, ingest, make_index, update

__all__ = [
    "INDEX_FILENAME",
    "IngestReport",
    "MetaStore",
    "StoredRecord",
    "Tombstone",
    "ingest",
    "iter_manifest",
    "make_index",
    "parse_manifest",
    "resolve_image",
    "update",
]
