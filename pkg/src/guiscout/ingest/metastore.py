"""Append-only metadata store: a record log plus an id -> offset table.

Co-located with the index file; no external database. Each log line is
{"record": {...}, "image": "<resolved absolute path>"} or
{"tombstone": "<id>"}. The offset table is rebuilt by a single scan on
open (last line per id wins), so the log is the only source of truth.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from ..core import ScreenRecord
from ..errors import NotFound

LOG_NAME = "records.log"


@dataclass(frozen=True)
class StoredRecord:
    record: ScreenRecord
    image_abspath: str


class MetaStore:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.path = self.directory / LOG_NAME
        self._offsets: Dict[str, int] = {}
        self._tombstoned: set[str] = set()
        self._apps: Dict[str, List[str]] = {}
        self._order: List[str] = []
        self._lock = threading.Lock()
        self.path.touch(exist_ok=True)
        self._scan()
        self._append_fh = open(self.path, "ab")

    def _scan(self) -> None:
        with open(self.path, "rb") as fh:
            offset = fh.tell()
            for raw in fh:
                line = raw.decode("utf-8").strip()
                if line:
                    obj = json.loads(line)
                    if "tombstone" in obj:
                        rid = obj["tombstone"]
                        self._tombstoned.add(rid)
                    else:
                        rec = obj["record"]
                        rid = rec["id"]
                        if rid not in self._offsets:
                            self._order.append(rid)
                            self._apps.setdefault(rec["app_id"], []).append(rid)
                        self._offsets[rid] = offset
                        self._tombstoned.discard(rid)
                offset = fh.tell()

    # -------------------------------------------------------------- write

    def _append_line(self, obj: dict) -> int:
        data = (json.dumps(obj, ensure_ascii=False) + "\n").encode("utf-8")
        offset = self._append_fh.tell()
        self._append_fh.write(data)
        self._append_fh.flush()
        return offset

    def append(self, record: ScreenRecord, image_abspath) -> None:
        with self._lock:
            offset = self._append_line(
                {"record": record.to_dict(), "image": str(image_abspath)}
            )
            if record.id not in self._offsets:
                self._order.append(record.id)
                self._apps.setdefault(record.app_id, []).append(record.id)
            self._offsets[record.id] = offset
            self._tombstoned.discard(record.id)

    def tombstone(self, record_id: str) -> None:
        with self._lock:
            if record_id not in self._offsets or record_id in self._tombstoned:
                raise NotFound(f"record {record_id!r} not in store")
            self._append_line({"tombstone": record_id})
            self._tombstoned.add(record_id)

    # --------------------------------------------------------------- read

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._offsets and record_id not in self._tombstoned

    def __len__(self) -> int:
        return len(self._offsets) - len(self._tombstoned)

    def get(self, record_id: str) -> StoredRecord:
        if record_id not in self:
            raise NotFound(f"record {record_id!r} not in store")
        with open(self.path, "rb") as fh:
            fh.seek(self._offsets[record_id])
            obj = json.loads(fh.readline().decode("utf-8"))
        return StoredRecord(
            record=ScreenRecord.from_dict(obj["record"]),
            image_abspath=obj.get("image", ""),
        )

    def ids(self) -> List[str]:
        """Live record ids in first-ingest order."""
        return [rid for rid in self._order if rid not in self._tombstoned]

    def list_app(self, app_id: str) -> List[ScreenRecord]:
        rids = [r for r in self._apps.get(app_id, []) if r not in self._tombstoned]
        return [self.get(rid).record for rid in rids]

    def app_ids(self) -> List[str]:
        return [a for a, rids in self._apps.items()
                if any(r not in self._tombstoned for r in rids)]

    def close(self) -> None:
        self._append_fh.close()

    def __enter__(self) -> "MetaStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
