"""Benchmark case record."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import PreconditionError
from ..rules import FactSet


@dataclass
class BenchmarkCase:
    id: str
    scenario: str
    facts: FactSet
    documents: list[dict] = field(default_factory=list)  # optional narrative snippets
    gold_label: str = "correct"  # correct | erroneous
    injected_error: dict | None = None  # kind + parameters describing the mutation
    provenance: str = "generated"  # generated | hand-authored

    def __post_init__(self):
        if self.gold_label not in ("correct", "erroneous"):
            raise PreconditionError(f"unknown gold label {self.gold_label!r}")
        if (self.gold_label == "erroneous") != (self.injected_error is not None):
            raise PreconditionError("gold_label erroneous iff injected_error present")

    def to_dict(self) -> dict:
        return {
            "schema": "bench_v1",
            "id": self.id,
            "scenario": self.scenario,
            "facts": self.facts.to_dict(),
            "documents": list(self.documents),
            "gold_label": self.gold_label,
            "injected_error": self.injected_error,
            "provenance": self.provenance,
        }

    @staticmethod
    def from_dict(d: dict) -> "BenchmarkCase":
        if d.get("schema") != "bench_v1":
            raise PreconditionError(f"unsupported case schema {d.get('schema')!r}")
        return BenchmarkCase(
            id=d["id"],
            scenario=d["scenario"],
            facts=FactSet.from_dict(d["facts"]),
            documents=list(d.get("documents", [])),
            gold_label=d["gold_label"],
            injected_error=d.get("injected_error"),
            provenance=d.get("provenance", "generated"),
        )
