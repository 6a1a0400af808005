"""Knowledge-base record types."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..rules import RuleExpr, parse_rule

KINDS = ("axiom", "theorem")
STATUSES = ("candidate", "approved", "rejected", "superseded")
ORIGINS = ("expert-authored", "llm-extracted", "llm-derived", "chain-promoted")


@dataclass(frozen=True)
class SourceSpan:
    document_id: str
    start: int
    end: int
    excerpt: str

    def to_dict(self) -> dict:
        return {
            "document_id": self.document_id,
            "span": [self.start, self.end],
            "excerpt": self.excerpt,
        }

    @staticmethod
    def from_dict(d: dict) -> "SourceSpan":
        return SourceSpan(d["document_id"], d["span"][0], d["span"][1], d["excerpt"])


@dataclass
class Axiom:
    """One knowledge-base record: a rule plus provenance and lifecycle state.

    ``rule_text`` is the canonical grammar text; unparseable extractions are
    kept as rejected records whose text never parses (``rule`` is None).
    Identity is (id, version); approved records are immutable and edits
    create a version+1 candidate.
    """

    id: str
    kind: str
    rule_text: str
    status: str = "candidate"
    version: int = 1
    origin: str = "expert-authored"
    source: SourceSpan | None = None
    reviewer: str | None = None
    reviewed_at: float | None = None
    tags: list[str] = field(default_factory=list)
    derived_from: list[str] = field(default_factory=list)
    template: str | None = None
    note: str | None = None

    _rule: RuleExpr | None = field(default=None, repr=False, compare=False)

    @property
    def rule(self) -> RuleExpr | None:
        if self._rule is None and self.rule_text:
            try:
                self._rule = parse_rule(self.rule_text)
            except Exception:
                return None
        return self._rule

    def to_dict(self) -> dict:
        return {
            "schema": "kb_v1",
            "id": self.id,
            "kind": self.kind,
            "rule_text": self.rule_text,
            "status": self.status,
            "version": self.version,
            "origin": self.origin,
            "source": self.source.to_dict() if self.source else None,
            "reviewer": self.reviewer,
            "reviewed_at": self.reviewed_at,
            "tags": list(self.tags),
            "derived_from": list(self.derived_from),
            "template": self.template,
            "note": self.note,
        }

    @staticmethod
    def from_dict(d: dict) -> "Axiom":
        return Axiom(
            id=d["id"],
            kind=d["kind"],
            rule_text=d["rule_text"],
            status=d["status"],
            version=int(d.get("version", 1)),
            origin=d.get("origin", "expert-authored"),
            source=SourceSpan.from_dict(d["source"]) if d.get("source") else None,
            reviewer=d.get("reviewer"),
            reviewed_at=d.get("reviewed_at"),
            tags=list(d.get("tags", [])),
            derived_from=list(d.get("derived_from", [])),
            template=d.get("template"),
            note=d.get("note"),
        )
