"""Line-delimited repository manifests.

One JSON object per line with keys id, app_id, app_url, caption,
image_path, platform, optional category; delta manifests may also carry
tombstone lines {"id": ..., "tombstone": true}. image_path resolves
relative to the manifest's directory.

parse_manifest() is strict and raises on the first problem; the
pipeline uses iter_manifest(), which reports problems per line so one
bad record cannot abort a long ingest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Union

from ..core import ScreenRecord
from ..errors import DuplicateId, MissingImage, ParseError, ValidationError


@dataclass(frozen=True)
class Tombstone:
    id: str


ManifestItem = Union[ScreenRecord, Tombstone]


@dataclass(frozen=True)
class ManifestEntry:
    """One manifest line: either a parsed item or the error it raised."""

    line_no: int
    item: Optional[ManifestItem]
    error: Optional[Exception]


def iter_manifest(path, *, allow_tombstones: bool = False) -> Iterator[ManifestEntry]:
    path = Path(path)
    seen: dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                yield ManifestEntry(line_no, None, ParseError(line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                yield ManifestEntry(line_no, None, ParseError(line_no, "line is not a JSON object"))
                continue
            if obj.get("tombstone"):
                rid = obj.get("id")
                if not rid:
                    yield ManifestEntry(line_no, None, ParseError(line_no, "tombstone without id"))
                elif not allow_tombstones:
                    yield ManifestEntry(
                        line_no, None,
                        ParseError(line_no, "tombstone line outside a delta manifest"),
                    )
                else:
                    yield ManifestEntry(line_no, Tombstone(str(rid)), None)
                continue
            try:
                record = ScreenRecord.from_dict(obj)
            except (ValidationError, KeyError, TypeError) as exc:
                reason = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
                yield ManifestEntry(line_no, None, ParseError(line_no, reason))
                continue
            if record.id in seen:
                yield ManifestEntry(
                    line_no, None, DuplicateId(record.id, seen[record.id], line_no)
                )
                continue
            seen[record.id] = line_no
            yield ManifestEntry(line_no, record, None)


def parse_manifest(path, *, check_images: bool = True) -> List[ScreenRecord]:
    """Strict parse: records in file order, or the first error raised."""
    base = Path(path).parent
    records = []
    for entry in iter_manifest(path, allow_tombstones=False):
        if entry.error is not None:
            raise entry.error
        assert isinstance(entry.item, ScreenRecord)
        if check_images and not (base / entry.item.image_path).is_file():
            raise MissingImage(entry.item.id, base / entry.item.image_path)
        records.append(entry.item)
    return records


def resolve_image(manifest_path, record: ScreenRecord) -> Path:
    return (Path(manifest_path).parent / record.image_path).resolve()
