"""LLM-backed verifier: one reviewer query per check, mirroring the
deterministic verifier's walk. Backend failures abort with audit-error so
a chain is never certified by silence."""

from __future__ import annotations

from ..engine.types import ExecutionLog, Plan, ReasoningStep, TaskSpec
from ..errors import AuditError, MmiaError
from ..gateway import ChatRequest, TokenUsage, complete_json, render_prompt
from ..gateway.templates import AUDIT_VARIANT_PREFIXES
from ..kb.store import KnowledgeBase
from .types import AuditIssue, AuditReport

SYSTEM_AUDITOR = (
    "You are an impartial auditor reviewing a reasoning chain. Judge strictly on "
    "the recorded evidence; justify every verdict."
)


def _validate_ok(doc: dict) -> str | None:
    if not isinstance(doc.get("ok"), bool):
        return 'missing boolean "ok"'
    return None


def _validate_fallacy(doc: dict) -> str | None:
    if "fallacy" not in doc:
        return 'missing "fallacy" (null or a description)'
    if doc["fallacy"] is not None and not isinstance(doc["fallacy"], str):
        return '"fallacy" must be null or a string'
    return None


class LlmVerifier:
    def __init__(self, backend, variant: str = "v1"):
        if variant not in AUDIT_VARIANT_PREFIXES:
            raise AuditError(f"unknown audit prompt variant {variant!r}")
        self.backend = backend
        self.variant = variant
        self.verifier_id = f"llm:{variant}:{getattr(backend, 'backend_id', 'backend')}"
        self._usage = TokenUsage(0, 0)

    def _ask(self, template: str, bindings: dict[str, str], validate) -> dict:
        prefix = AUDIT_VARIANT_PREFIXES[self.variant]
        request = ChatRequest(
            role_tag="auditor",
            system_prompt=SYSTEM_AUDITOR,
            user_prompt=prefix + render_prompt(template, bindings),
            response_schema=template,
        )
        try:
            doc, usage = complete_json(self.backend, request, validate)
        except MmiaError as exc:
            raise AuditError(f"verifier backend failed during {template}: {exc.message}")
        self._usage = TokenUsage(
            self._usage.prompt_tokens + usage.prompt_tokens,
            self._usage.completion_tokens + usage.completion_tokens,
        )
        return doc

    def check_plan(self, task: TaskSpec, plan: Plan | None) -> list[AuditIssue]:
        if plan is None:
            return []
        rendered = "\n".join(
            f"{i}. {s.description} (outputs: {', '.join(s.outputs) or '-'})"
            for i, s in enumerate(plan.subtasks)
        )
        doc = self._ask(
            "audit-plan", {"description": task.description, "plan": rendered}, _validate_ok
        )
        if doc["ok"]:
            return []
        return [
            AuditIssue(
                location="plan",
                kind="plan-mismatch",
                message=f"plan does not align with the initial task: {doc.get('reason', '')}",
            )
        ]

    def check_step_evidence(self, step: ReasoningStep) -> list[AuditIssue]:
        evidence = "\n".join(
            f"- [{e.kind}] {e.target_id}: {e.excerpt}" for e in step.evidence
        ) or "(none cited)"
        doc = self._ask(
            "audit-evidence",
            {"claim": step.conclusion_text, "evidence": evidence},
            _validate_ok,
        )
        if doc["ok"]:
            return []
        return [
            AuditIssue(
                location="step",
                step_index=step.index,
                kind="missing-evidence",
                message=f"conclusion in step {step.index} lacks evidence support: {doc.get('reason', '')}",
            )
        ]

    def check_step_fallacy(self, previous: list[str], step: ReasoningStep) -> list[AuditIssue]:
        doc = self._ask(
            "audit-fallacy",
            {
                "previous": "\n".join(f"- {p}" for p in previous) or "(none)",
                "conclusion": step.conclusion_text,
            },
            _validate_fallacy,
        )
        if doc["fallacy"] is None:
            return []
        return [
            AuditIssue(
                location="step",
                step_index=step.index,
                kind="logical-fallacy",
                message=f"logical fallacy detected in step {step.index}: {doc['fallacy']}",
            )
        ]

    def check_aggregation(self, log: ExecutionLog) -> list[AuditIssue]:
        if log.final_answer is None:
            return []
        conclusions = [s.conclusion_text for s in log.flat_steps()]
        doc = self._ask(
            "audit-aggregation",
            {
                "conclusions": "\n".join(f"- {c}" for c in conclusions) or "(none)",
                "final": log.final_answer.text,
            },
            _validate_ok,
        )
        if doc["ok"]:
            return []
        return [
            AuditIssue(
                location="aggregation",
                kind="aggregation-gap",
                message=f"final answer cannot be derived from step conclusions: {doc.get('reason', '')}",
            )
        ]

    def verify_chain(self, log: ExecutionLog, kb: KnowledgeBase) -> AuditReport:
        self._usage = TokenUsage(0, 0)
        log_id = log.task.id
        if not log.complete:
            return AuditReport(
                log_id=log_id,
                issues=[
                    AuditIssue(
                        location="aggregation",
                        kind="aggregation-gap",
                        message=f"run incomplete, cannot certify: {log.error or 'no final answer'}",
                    )
                ],
                verifier_id=self.verifier_id,
            )
        steps = log.flat_steps()
        if not steps:
            return AuditReport(
                log_id=log_id,
                issues=[
                    AuditIssue(
                        location="aggregation",
                        kind="missing-evidence",
                        message="vacuous chain: no reasoning steps to certify",
                    )
                ],
                verifier_id=self.verifier_id,
            )
        issues: list[AuditIssue] = []
        issues.extend(self._plan_tree(log))
        previous: list[str] = []
        for step in steps:
            issues.extend(self.check_step_evidence(step))
            issues.extend(self.check_step_fallacy(previous, step))
            previous.append(step.conclusion_text)
        issues.extend(self.check_aggregation(log))
        return AuditReport(
            log_id=log_id, issues=issues, verifier_id=self.verifier_id, token_usage=self._usage
        )

    def _plan_tree(self, log: ExecutionLog) -> list[AuditIssue]:
        issues = []
        for child in log.children:
            issues.extend(self._plan_tree(child))
        issues.extend(self.check_plan(log.task, log.plan))
        return issues
