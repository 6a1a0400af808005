"""Append-only per-task cost ledger."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path

from ..errors import LedgerError, PreconditionError

MODES = ("de-novo", "rag-match")


@dataclass(frozen=True)
class CostEntry:
    task_id: str
    mode: str
    tokens: int
    wall_time: float = 0.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise PreconditionError(f"unknown cost mode {self.mode!r}")
        if self.tokens < 0:
            raise PreconditionError("token count must be non-negative")

    def to_dict(self) -> dict:
        return {
            "schema": "cost_v1",
            "task_id": self.task_id,
            "mode": self.mode,
            "tokens": self.tokens,
            "wall_time": self.wall_time,
        }

    @staticmethod
    def from_dict(d: dict) -> "CostEntry":
        return CostEntry(d["task_id"], d["mode"], int(d["tokens"]), float(d.get("wall_time", 0.0)))


class CostLedger:
    def __init__(self, path: Path | None = None):
        self.path = path
        self._entries: list[CostEntry] = []
        self._ids: set[str] = set()
        self._lock = threading.Lock()
        if path is not None and path.exists():
            with open(path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        self._admit(CostEntry.from_dict(json.loads(line)), persist=False)

    def record(self, task_id: str, mode: str, tokens: int, wall_time: float = 0.0) -> CostEntry:
        """Append one completed task's cost; duplicate ids are rejected."""
        entry = CostEntry(task_id=task_id, mode=mode, tokens=tokens, wall_time=wall_time)
        self._admit(entry, persist=True)
        return entry

    def _admit(self, entry: CostEntry, persist: bool) -> None:
        with self._lock:
            if entry.task_id in self._ids:
                raise LedgerError(f"duplicate ledger entry for task {entry.task_id}")
            self._ids.add(entry.task_id)
            self._entries.append(entry)
            if persist and self.path is not None:
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")

    def entries(self, mode: str | None = None) -> list[CostEntry]:
        with self._lock:
            return [e for e in self._entries if mode is None or e.mode == mode]

    def total_tokens(self, mode: str | None = None) -> int:
        return sum(e.tokens for e in self.entries(mode))

    def average_tokens(self, mode: str | None = None) -> float | None:
        picked = self.entries(mode)
        if not picked:
            return None
        return self.total_tokens(mode) / len(picked)

    def __len__(self) -> int:
        return len(self._entries)
