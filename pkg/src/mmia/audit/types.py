"""Audit report types."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import PreconditionError
from ..gateway import TokenUsage

ISSUE_KINDS = (
    "plan-mismatch",
    "missing-evidence",
    "logical-fallacy",
    "aggregation-gap",
    "dangling-citation",
)


@dataclass(frozen=True)
class AuditIssue:
    location: str  # "plan" | "step" | "aggregation"
    kind: str
    message: str
    step_index: int | None = None
    cited_rule: str | None = None

    def __post_init__(self):
        if self.kind not in ISSUE_KINDS:
            raise PreconditionError(f"unknown issue kind {self.kind!r}")
        if self.location not in ("plan", "step", "aggregation"):
            raise PreconditionError(f"unknown issue location {self.location!r}")
        if (self.location == "step") != (self.step_index is not None):
            raise PreconditionError("step issues need step_index; others must not set it")

    def to_dict(self) -> dict:
        return {
            "location": self.location,
            "kind": self.kind,
            "message": self.message,
            "step_index": self.step_index,
            "cited_rule": self.cited_rule,
        }

    @staticmethod
    def from_dict(d: dict) -> "AuditIssue":
        return AuditIssue(
            d["location"], d["kind"], d["message"], d.get("step_index"), d.get("cited_rule")
        )


@dataclass
class AuditReport:
    log_id: str
    issues: list[AuditIssue]
    verifier_id: str
    token_usage: TokenUsage = TokenUsage(0, 0)

    @property
    def verdict(self) -> str:
        # certification-passed if and only if no issues were found.
        return "certification-passed" if not self.issues else "error-flagged"

    @property
    def passed(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict:
        return {
            "schema": "audit_v1",
            "log_id": self.log_id,
            "verdict": self.verdict,
            "issues": [i.to_dict() for i in self.issues],
            "verifier_id": self.verifier_id,
            "token_usage": self.token_usage.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(d: dict) -> "AuditReport":
        if d.get("schema") != "audit_v1":
            raise PreconditionError(f"unsupported audit schema {d.get('schema')!r}")
        return AuditReport(
            log_id=d["log_id"],
            issues=[AuditIssue.from_dict(i) for i in d.get("issues", [])],
            verifier_id=d["verifier_id"],
            token_usage=TokenUsage.from_dict(d["token_usage"]),
        )


@dataclass
class ConsensusPolicy:
    n: int = 3
    rule: str = "unanimity"  # unanimity | majority
    diversity: list[tuple[str, str]] = field(default_factory=list)  # (prompt variant, backend id)

    def __post_init__(self):
        if self.n < 1:
            raise PreconditionError("consensus needs n >= 1")
        if self.rule not in ("unanimity", "majority"):
            raise PreconditionError(f"unknown consensus rule {self.rule!r}")
        if not self.diversity:
            self.diversity = [(f"v{i + 1}", "default") for i in range(self.n)]
        if len(self.diversity) != self.n:
            raise PreconditionError("diversity list length must equal n")
        if self.n > 1 and len(set(self.diversity)) != self.n:
            raise PreconditionError("diversity entries must be pairwise distinct")

    def to_dict(self) -> dict:
        return {"n": self.n, "rule": self.rule, "diversity": [list(d) for d in self.diversity]}

    @staticmethod
    def from_dict(d: dict) -> "ConsensusPolicy":
        return ConsensusPolicy(
            n=int(d.get("n", 3)),
            rule=d.get("rule", "unanimity"),
            diversity=[tuple(x) for x in d.get("diversity", [])],
        )


@dataclass
class ConsensusResult:
    reports: list[AuditReport]
    outcome: str  # certified | flagged | disagreement
    promoted_theorem_id: str | None = None

    def __post_init__(self):
        if self.outcome not in ("certified", "flagged", "disagreement"):
            raise PreconditionError(f"unknown consensus outcome {self.outcome!r}")
        if self.promoted_theorem_id is not None and self.outcome != "certified":
            raise PreconditionError("theorem promotion is only valid for certified outcomes")

    def to_dict(self) -> dict:
        return {
            "reports": [r.to_dict() for r in self.reports],
            "outcome": self.outcome,
            "promoted_theorem_id": self.promoted_theorem_id,
        }

    @staticmethod
    def from_dict(d: dict) -> "ConsensusResult":
        return ConsensusResult(
            reports=[AuditReport.from_dict(r) for r in d.get("reports", [])],
            outcome=d["outcome"],
            promoted_theorem_id=d.get("promoted_theorem_id"),
        )
