"""Knowledge-base store: append-only JSONL with an in-memory index.

All mutations go through one lock (the serialized writer); readers see
consistent snapshots because records are replaced atomically, never edited
in place. Every lifecycle transition lands in a separate audit-trail file.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Callable, Iterable

from ..errors import ParseError, PreconditionError, StateError
from ..rules import parse_rule, print_rule
from .models import KINDS, Axiom, SourceSpan


# Stable id prefixes per scenario tag.
SCENARIO_PREFIX = {
    "drg": "DRG",
    "regulatory": "REG",
    "ehr": "EHR",
    "insurance": "INS",
    "generic": "GEN",
}


def scenario_prefix(scenario: str) -> str:
    return SCENARIO_PREFIX.get(scenario, scenario.upper())


class KnowledgeBase:
    def __init__(
        self,
        path: Path | None = None,
        audit_path: Path | None = None,
        clock: Callable[[], float] | None = None,
    ):
        self.path = path
        self.audit_path = audit_path
        self.clock = clock or time.time
        self._lock = threading.RLock()
        # id -> list of versions (ascending); latest version is current.
        self._records: dict[str, list[Axiom]] = {}
        self._counters: dict[tuple[str, str], int] = {}
        if path is not None and path.exists():
            self._load(path)

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def get(self, axiom_id: str, version: int | None = None) -> Axiom | None:
        versions = self._records.get(axiom_id)
        if not versions:
            return None
        if version is None:
            return versions[-1]
        for rec in versions:
            if rec.version == version:
                return rec
        return None

    def exists(self, axiom_id: str) -> bool:
        return axiom_id in self._records

    def all(self, status: str | None = None, kind: str | None = None) -> list[Axiom]:
        out = []
        for versions in self._records.values():
            for rec in versions:
                if status is not None and rec.status != status:
                    continue
                if kind is not None and rec.kind != kind:
                    continue
                out.append(rec)
        return sorted(out, key=lambda r: (r.id, r.version))

    def approved(self, kind: str | None = None) -> list[Axiom]:
        return self.all(status="approved", kind=kind)

    def approved_for_scenario(self, scenario: str, kind: str | None = None) -> list[Axiom]:
        prefix = scenario_prefix(scenario) + "-"
        return [r for r in self.approved(kind=kind) if r.id.startswith(prefix)]

    def audit_trail(self) -> list[dict]:
        if self.audit_path is None or not self.audit_path.exists():
            return []
        out = []
        with open(self.audit_path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    out.append(json.loads(line))
        return out

    # ------------------------------------------------------------------
    # Mutations (serialized)
    # ------------------------------------------------------------------

    def next_id(self, scenario: str, kind: str) -> str:
        letter = "A" if kind == "axiom" else "T"
        head = scenario_prefix(scenario)
        with self._lock:
            n = self._counters.get((head, kind), 0) + 1
            self._counters[(head, kind)] = n
            return f"{head}-{letter}{n}"

    def add(self, record: Axiom) -> Axiom:
        """Insert a new record (any status). Id must be new or a new version."""
        if record.kind not in KINDS:
            raise PreconditionError(f"unknown kind {record.kind!r}")
        with self._lock:
            versions = self._records.setdefault(record.id, [])
            if any(v.version == record.version for v in versions):
                raise StateError(f"{record.id} version {record.version} already exists")
            versions.append(record)
            versions.sort(key=lambda r: r.version)
            self._bump_counter(record.id)
            self._persist(record)
        return record

    def add_candidate(
        self,
        scenario: str,
        kind: str,
        rule_text: str,
        origin: str = "expert-authored",
        source: SourceSpan | None = None,
        tags: Iterable[str] = (),
        derived_from: Iterable[str] = (),
        template: str | None = None,
        note: str | None = None,
        status: str = "candidate",
    ) -> Axiom:
        record = Axiom(
            id=self.next_id(scenario, kind),
            kind=kind,
            rule_text=rule_text,
            status=status,
            origin=origin,
            source=source,
            tags=list(tags),
            derived_from=list(derived_from),
            template=template,
            note=note,
        )
        with self._lock:
            self._records.setdefault(record.id, []).append(record)
            self._persist(record)
            self._append_audit(record, "none", status, reviewer=None)
        return record

    def review_decision(self, axiom_id: str, decision: str, reviewer: str, new_rule_text: str | None = None) -> Axiom:
        """Apply approve / reject / edit to a candidate record.

        Approve and reject are terminal for the version; edit supersedes it
        with a version+1 candidate carrying the corrected rule text.
        """
        with self._lock:
            current = self.get(axiom_id)
            if current is None:
                raise StateError(f"no such record {axiom_id}")
            if current.status != "candidate":
                raise StateError(
                    f"{axiom_id} v{current.version} is {current.status}; only candidates accept decisions"
                )
            if decision in ("approve", "reject"):
                new_status = "approved" if decision == "approve" else "rejected"
                updated = Axiom(
                    **{**_fields(current), "status": new_status, "reviewer": reviewer, "reviewed_at": self.clock()}
                )
                self._replace(current, updated)
                self._append_audit(updated, "candidate", new_status, reviewer)
                return updated
            if decision == "edit":
                if not new_rule_text:
                    raise PreconditionError("edit decision requires new rule text")
                try:
                    canonical = print_rule(parse_rule(new_rule_text))
                except ParseError:
                    raise
                superseded = Axiom(**{**_fields(current), "status": "superseded"})
                self._replace(current, superseded)
                self._append_audit(superseded, "candidate", "superseded", reviewer)
                successor = Axiom(
                    **{
                        **_fields(current),
                        "rule_text": canonical,
                        "status": "candidate",
                        "version": current.version + 1,
                        "reviewer": None,
                        "reviewed_at": None,
                    }
                )
                self._records[axiom_id].append(successor)
                self._persist(successor)
                self._append_audit(successor, "none", "candidate", reviewer)
                return successor
            raise PreconditionError(f"unknown decision {decision!r}")

    # ------------------------------------------------------------------
    # Internals
    # ------------------------------------------------------------------

    def _replace(self, old: Axiom, new: Axiom) -> None:
        versions = self._records[old.id]
        versions[versions.index(old)] = new
        self._persist(new)

    def _bump_counter(self, axiom_id: str) -> None:
        # Keep the per-scenario counter ahead of any explicitly added id.
        head, _, tail = axiom_id.rpartition("-")
        if not head or len(tail) < 2 or tail[0] not in "AT":
            return
        try:
            n = int(tail[1:])
        except ValueError:
            return
        kind = "axiom" if tail[0] == "A" else "theorem"
        key = (head, kind)
        self._counters[key] = max(self._counters.get(key, 0), n)

    def _persist(self, record: Axiom) -> None:
        if self.path is None:
            return
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    def _append_audit(self, record: Axiom, old_status: str, new_status: str, reviewer: str | None) -> None:
        if self.audit_path is None:
            return
        entry = {
            "axiom_id": record.id,
            "version": record.version,
            "from": old_status,
            "to": new_status,
            "reviewer": reviewer,
            "ts": self.clock(),
        }
        with open(self.audit_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, sort_keys=True) + "\n")

    def _load(self, path: Path) -> None:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                record = Axiom.from_dict(json.loads(line))
                versions = self._records.setdefault(record.id, [])
                # Later lines supersede earlier states of the same version.
                versions[:] = [v for v in versions if v.version != record.version]
                versions.append(record)
                versions.sort(key=lambda r: r.version)
                self._bump_counter(record.id)


def _fields(record: Axiom) -> dict:
    return {
        "id": record.id,
        "kind": record.kind,
        "rule_text": record.rule_text,
        "status": record.status,
        "version": record.version,
        "origin": record.origin,
        "source": record.source,
        "reviewer": record.reviewer,
        "reviewed_at": record.reviewed_at,
        "tags": list(record.tags),
        "derived_from": list(record.derived_from),
        "template": record.template,
        "note": record.note,
    }
