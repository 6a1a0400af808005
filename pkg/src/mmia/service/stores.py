"""File-backed stores: review queue, task runs, idempotency ledger.

Everything is append-only JSONL with in-memory indexes rebuilt at startup;
state changes append a new event rather than editing history.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..errors import StateError


@dataclass
class ReviewQueueEntry:
    id: str
    kind: str  # candidate-axiom | audit-disagreement
    payload: dict
    status: str = "open"  # open | resolved
    resolution: dict | None = None
    enqueued_at: float = 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "payload": self.payload,
            "status": self.status,
            "resolution": self.resolution,
            "enqueued_at": self.enqueued_at,
        }


class ReviewQueueStore:
    def __init__(self, path: Path | None = None, clock: Callable[[], float] | None = None):
        self.path = path
        self.clock = clock or time.time
        self._entries: dict[str, ReviewQueueEntry] = {}
        self._lock = threading.Lock()
        self._counter = 0
        if path is not None and path.exists():
            with open(path, encoding="utf-8") as f:
                for line in f:
                    if not line.strip():
                        continue
                    event = json.loads(line)
                    self._apply(event)

    def _apply(self, event: dict) -> None:
        if event["event"] == "enqueue":
            e = event["entry"]
            self._entries[e["id"]] = ReviewQueueEntry(
                id=e["id"],
                kind=e["kind"],
                payload=e["payload"],
                status=e.get("status", "open"),
                resolution=e.get("resolution"),
                enqueued_at=e.get("enqueued_at", 0.0),
            )
            self._counter = max(self._counter, int(e["id"].split("-")[-1]))
        elif event["event"] == "resolve":
            entry = self._entries[event["id"]]
            entry.status = "resolved"
            entry.resolution = event["resolution"]

    def _persist(self, event: dict) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")

    def enqueue(self, kind: str, payload: dict) -> ReviewQueueEntry:
        with self._lock:
            self._counter += 1
            entry = ReviewQueueEntry(
                id=f"rq-{self._counter}",
                kind=kind,
                payload=payload,
                enqueued_at=self.clock(),
            )
            self._entries[entry.id] = entry
            self._persist({"event": "enqueue", "entry": entry.to_dict()})
            return entry

    def resolve(self, entry_id: str, resolution: dict) -> ReviewQueueEntry:
        with self._lock:
            entry = self._entries.get(entry_id)
            if entry is None:
                raise StateError(f"no review-queue entry {entry_id}")
            if entry.status == "resolved":
                raise StateError(f"review-queue entry {entry_id} is already resolved")
            entry.status = "resolved"
            entry.resolution = resolution
            self._persist({"event": "resolve", "id": entry_id, "resolution": resolution})
            return entry

    def get(self, entry_id: str) -> ReviewQueueEntry | None:
        return self._entries.get(entry_id)

    def entries(self, kind: str | None = None, status: str | None = None) -> list[ReviewQueueEntry]:
        out = [
            e
            for e in self._entries.values()
            if (kind is None or e.kind == kind) and (status is None or e.status == status)
        ]
        return sorted(out, key=lambda e: e.id)

    def resolved_count(self) -> int:
        return sum(1 for e in self._entries.values() if e.status == "resolved")


@dataclass
class RunStore:
    """Task logs and audit results, one JSON document per line."""

    directory: Path
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        self._tasks: dict[str, dict] = {}
        self._load()

    @property
    def tasks_path(self) -> Path:
        return self.directory / "tasks.jsonl"

    def _load(self) -> None:
        if self.tasks_path.exists():
            with open(self.tasks_path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        doc = json.loads(line)
                        self._tasks[doc["task_id"]] = doc

    def put_task(self, task_id: str, document: dict) -> None:
        document = {"task_id": task_id, **document}
        with self._lock:
            self._tasks[task_id] = document
            with open(self.tasks_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(document, sort_keys=True) + "\n")

    def get_task(self, task_id: str) -> dict | None:
        return self._tasks.get(task_id)

    def task_ids(self) -> list[str]:
        return sorted(self._tasks)
