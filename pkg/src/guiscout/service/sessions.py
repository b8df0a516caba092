"""Session and moodboard persistence for the iterative refinement loop.

Append-only event log with a periodic snapshot (every SNAPSHOT_EVERY
events, and on flush()); rehydration loads the snapshot then replays
the log tail, so sessions survive service restarts. Mutations serialize
per session id.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

from ..core import Query
from ..errors import UnknownSession

LOG_NAME = "sessions.log"
SNAPSHOT_NAME = "sessions.json"
SNAPSHOT_EVERY = 100


@dataclass
class Session:
    session_id: str
    history: List[Tuple[float, Query]] = field(default_factory=list)
    pins: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "history": [
                {"ts": ts, "text": q.text, "k": q.k, "filters": q.filters}
                for ts, q in self.history
            ],
            "pins": list(self.pins),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Session":
        s = cls(session_id=d["session_id"], pins=list(d.get("pins", [])))
        for h in d.get("history", []):
            s.history.append(
                (h["ts"], Query(text=h["text"], k=h["k"], filters=h.get("filters")))
            )
        return s


class SessionStore:
    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._log_path = self.directory / LOG_NAME
        self._snap_path = self.directory / SNAPSHOT_NAME
        self._sessions: Dict[str, Session] = {}
        self._locks: Dict[str, threading.Lock] = {}
        self._global = threading.Lock()
        self._events_since_snapshot = 0
        self._load()
        self._log_fh = open(self._log_path, "a", encoding="utf-8")

    # ------------------------------------------------------- persistence

    def _load(self) -> None:
        if self._snap_path.is_file():
            snap = json.loads(self._snap_path.read_text(encoding="utf-8"))
            for d in snap["sessions"]:
                s = Session.from_dict(d)
                self._sessions[s.session_id] = s
        if self._log_path.is_file():
            with open(self._log_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(json.loads(line))

    def _apply(self, ev: dict) -> None:
        op = ev["op"]
        if op == "create":
            self._sessions.setdefault(ev["sid"], Session(session_id=ev["sid"]))
            return
        s = self._sessions.get(ev["sid"])
        if s is None:
            return  # stale event for a session dropped from the snapshot
        if op == "query":
            s.history.append(
                (ev["ts"], Query(text=ev["text"], k=ev["k"], filters=ev.get("filters")))
            )
        elif op == "pin":
            if ev["rid"] not in s.pins:
                s.pins.append(ev["rid"])
        elif op == "unpin":
            if ev["rid"] in s.pins:
                s.pins.remove(ev["rid"])

    def _log(self, ev: dict) -> None:
        self._log_fh.write(json.dumps(ev, ensure_ascii=False) + "\n")
        self._log_fh.flush()
        self._events_since_snapshot += 1
        if self._events_since_snapshot >= SNAPSHOT_EVERY:
            self.snapshot()

    def snapshot(self) -> None:
        """Write the full state atomically and truncate the log."""
        tmp = self._snap_path.with_suffix(".json.tmp")
        payload = {"sessions": [s.to_dict() for s in self._sessions.values()]}
        tmp.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")
        os.replace(tmp, self._snap_path)
        self._log_fh.truncate(0)
        self._log_fh.seek(0)
        self._events_since_snapshot = 0

    def flush(self) -> None:
        with self._global:
            self.snapshot()

    def close(self) -> None:
        self.flush()
        self._log_fh.close()

    # -------------------------------------------------------------- ops

    def _lock_for(self, sid: str) -> threading.Lock:
        with self._global:
            return self._locks.setdefault(sid, threading.Lock())

    def _get(self, sid: str) -> Session:
        s = self._sessions.get(sid)
        if s is None:
            raise UnknownSession(f"session {sid!r} not found")
        return s

    def create(self) -> Session:
        sid = uuid.uuid4().hex
        with self._global:
            s = Session(session_id=sid)
            self._sessions[sid] = s
        self._log({"op": "create", "sid": sid})
        return s

    def get(self, sid: str) -> Session:
        return self._get(sid)

    def record_query(self, sid: str, query: Query) -> Session:
        with self._lock_for(sid):
            s = self._get(sid)
            ts = time.time()
            if s.history and ts <= s.history[-1][0]:
                ts = s.history[-1][0] + 1e-6  # keep history strictly ordered
            s.history.append((ts, query))
            self._log({
                "op": "query", "sid": sid, "ts": ts,
                "text": query.text, "k": query.k, "filters": query.filters,
            })
            return s

    def pin(self, sid: str, record_id: str) -> Session:
        """Append to the moodboard; re-pinning is a no-op."""
        with self._lock_for(sid):
            s = self._get(sid)
            if record_id not in s.pins:
                s.pins.append(record_id)
                self._log({"op": "pin", "sid": sid, "rid": record_id})
            return s

    def unpin(self, sid: str, record_id: str) -> Session:
        with self._lock_for(sid):
            s = self._get(sid)
            if record_id in s.pins:
                s.pins.remove(record_id)
                self._log({"op": "unpin", "sid": sid, "rid": record_id})
            return s
