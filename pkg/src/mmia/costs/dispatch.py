"""Dual-mode dispatch: try the cheap theorem-match path first, fall back
to full reasoning. A matched task still yields an auditable single-step
log grounded in the matched theorem's rule."""

from __future__ import annotations

import time

from ..audit import ConsensusPolicy, consensus_audit
from ..engine import EngineContext, ExecutionLog, execute_task
from ..engine.types import EvidenceRef, FinalAnswer, ReasoningStep, TaskSpec
from ..gateway import TokenUsage, count_tokens
from ..kb.store import KnowledgeBase
from ..retrieval import MatchResult, VectorIndex, match_theorem
from ..rules import eval_rule
from .ledger import CostLedger


def dispatch_mode(
    task: TaskSpec,
    kb: KnowledgeBase,
    index: VectorIndex,
    threshold: float,
    backend,
) -> tuple[str, MatchResult | None]:
    """Pick rag-match iff the theorem match succeeds; fallback is total."""
    match = match_theorem(task, kb, index, threshold, backend)
    if match.decision == "matched":
        return "rag-match", match
    return "de-novo", match


def execute_match(
    task: TaskSpec, match: MatchResult, kb: KnowledgeBase, context: EngineContext
) -> ExecutionLog | None:
    """Resolve a matched task as one evaluation step against the theorem.

    Forward-chains the scenario's approved rules so the theorem's rule is
    decidable, claims its verdict, and answers per the scenario composer.
    Returns None when the theorem turns out inapplicable; the caller then
    falls back to de novo reasoning.
    """
    from ..bench.packs import evaluate_case_facts  # local import to avoid cycles

    assert match.theorem_id is not None
    theorem = kb.get(match.theorem_id)
    if theorem is None or theorem.rule is None:
        return None
    working, _verdicts, derivations = evaluate_case_facts(task.facts, kb, task.scenario)
    verdict = eval_rule(theorem.rule, working)
    if verdict.outcome == "inapplicable":
        return None

    log = ExecutionLog(task=task, mode="rag-match", started=context.now())
    atoms = []
    evidence = [
        EvidenceRef(kind="theorem", target_id=theorem.id, excerpt=theorem.rule_text),
        EvidenceRef(kind="external-document", target_id=task.source_id or task.id, excerpt="case record"),
    ]
    cited: set[str] = set()
    for atom, rule_id in derivations:
        atoms.append(atom)
        if rule_id not in cited:
            rec = kb.get(rule_id)
            evidence.append(EvidenceRef(kind=rec.kind, target_id=rule_id, excerpt=rec.rule_text))
            cited.add(rule_id)
    atoms.append((theorem.id, "verdict", verdict.outcome))
    prompt = f"match task {task.id} against theorem {theorem.id}"
    conclusion = (
        f"Matched stored pattern {theorem.id} "
        f"(similarity {match.similarity:.3f}); rule evaluates {verdict.outcome}. "
        f"{match.justification}"
    ).strip()
    step = ReasoningStep(
        index=0,
        subtask_id=task.id,
        tool="kb-retrieval",
        prompt=prompt,
        evidence=evidence,
        conclusion_text=conclusion,
        atoms=atoms,
        raw_output=conclusion,
        token_usage=TokenUsage(
            match.usage.prompt_tokens + count_tokens(prompt),
            match.usage.completion_tokens + count_tokens(conclusion),
        ),
    )
    log.steps.append(step)
    answer_verdict = "erroneous" if verdict.outcome == "violated" else "correct"
    composer = context.composer_for(task.scenario)
    violations = [theorem.id] if verdict.outcome == "violated" else []
    text = composer(task, atoms, violations)
    log.final_answer = FinalAnswer(
        text=text, atoms=atoms + [("task", "adjudication", answer_verdict)], verdict=answer_verdict
    )
    log.finished = context.now()
    log.total_tokens = log.compute_total_tokens()
    return log


def run_dual_mode(
    tasks: list[TaskSpec],
    kb: KnowledgeBase,
    index: VectorIndex,
    threshold: float,
    context: EngineContext,
    ledger: CostLedger,
    policy: ConsensusPolicy | None = None,
    verifier_factory=None,
) -> list[dict]:
    """Run tasks through dispatch, audit each outcome, and fill the ledger."""
    policy = policy or ConsensusPolicy()
    records = []
    for task in tasks:
        t0 = time.monotonic()
        mode, match = dispatch_mode(task, kb, index, threshold, context.gateway)
        log = None
        if mode == "rag-match" and match is not None:
            log = execute_match(task, match, kb, context)
            if log is None:
                mode = "de-novo"
        if log is None:
            log = execute_task(task, context)
        match_tokens = match.usage.total if match is not None and mode == "de-novo" else 0
        consensus = None
        if log.complete:
            consensus = consensus_audit(log, kb, policy, verifier_factory=verifier_factory)
        wall = 0.0 if context.replay else time.monotonic() - t0
        tokens = log.cost_tokens() + match_tokens
        ledger.record(task.id, mode, tokens, wall)
        records.append(
            {
                "task_id": task.id,
                "mode": mode,
                "tokens": tokens,
                "match": match.to_brief() if match is not None else None,
                "adjudication": log.final_answer.verdict if log.final_answer else None,
                "audit_outcome": consensus.outcome if consensus else "not-audited",
                "complete": log.complete,
            }
        )
    return records
