"""Operation-level entry points over a pluggable verifier.

Each function accepts either verifier flavor; the deterministic one is the
default everywhere reproducibility matters.
"""

from __future__ import annotations

from ..engine.types import ExecutionLog, Plan, ReasoningStep, TaskSpec
from ..kb.store import KnowledgeBase
from ..rules import FactSet
from .deterministic import DeterministicVerifier, _ChainState
from .types import AuditIssue, AuditReport


def verify_plan_logic(task: TaskSpec, plan: Plan | None, verifier) -> list[AuditIssue]:
    """Plan-vs-task alignment; vacuously ok for atomic logs (no plan)."""
    return verifier.check_plan(task, plan)


def verify_evidence_support(
    step: ReasoningStep,
    kb: KnowledgeBase,
    verifier,
    task: TaskSpec | None = None,
    prior_steps: list[ReasoningStep] | None = None,
) -> list[AuditIssue]:
    """Is every conclusion atom entailed by the cited evidence?"""
    if isinstance(verifier, DeterministicVerifier):
        root = task or TaskSpec(id="adhoc", description="ad hoc evidence check", facts=FactSet())
        state = _ChainState(root=root, facts=root.facts.copy())
        for prior in prior_steps or []:
            state.absorb(prior)
        return verifier.check_evidence(step, kb, state)
    return verifier.check_step_evidence(step)


def detect_fallacy(
    previous_steps: list[ReasoningStep],
    step: ReasoningStep,
    verifier,
    task: TaskSpec | None = None,
) -> list[AuditIssue]:
    """Contradictions with previous conclusions and non-sequitur citations."""
    if isinstance(verifier, DeterministicVerifier):
        root = task or TaskSpec(id="adhoc", description="ad hoc fallacy check", facts=FactSet())
        state = _ChainState(root=root, facts=root.facts.copy())
        for prior in previous_steps:
            state.absorb(prior)
        return verifier.check_fallacy(step, state)
    return verifier.check_step_fallacy([s.conclusion_text for s in previous_steps], step)


def verify_aggregation(log: ExecutionLog, verifier) -> list[AuditIssue]:
    """Can the final answer be derived from the step conclusions?"""
    return verifier.check_aggregation(log)


def verify_reasoning_chain(log: ExecutionLog, kb: KnowledgeBase, verifier) -> AuditReport:
    """Full chain audit: plan, per-step evidence and fallacy, aggregation."""
    return verifier.verify_chain(log, kb)
