"""Iterative auditing: n independent audits folded by a consensus rule.

Unanimous (or majority) agreement decides; anything else is a
disagreement that goes to the human-review queue. Certified chains may be
promoted into reusable theorems.
"""

from __future__ import annotations

import random
from typing import Callable

from ..engine.types import ExecutionLog
from ..kb.store import KnowledgeBase
from .deterministic import DeterministicVerifier
from .types import AuditReport, ConsensusPolicy, ConsensusResult


def default_verifier_factory(variant: str, backend_id: str):
    return DeterministicVerifier(variant=variant)


def consensus_audit(
    log: ExecutionLog,
    kb: KnowledgeBase,
    policy: ConsensusPolicy,
    verifier_factory: Callable[[str, str], object] | None = None,
    on_disagreement: Callable[[ExecutionLog, list[AuditReport]], None] | None = None,
    promoter: Callable[[ExecutionLog], str | None] | None = None,
) -> ConsensusResult:
    """Run the audit n times per the policy's diversity list and fold.

    Unanimity: certified iff all pass, flagged iff all flag, otherwise
    disagreement. Majority: strict majority decides; an exact split is a
    disagreement. Disagreements are handed to ``on_disagreement``;
    certified outcomes invoke ``promoter`` for theorem promotion.
    """
    factory = verifier_factory or default_verifier_factory
    reports: list[AuditReport] = []
    for variant, backend_id in policy.diversity:
        verifier = factory(variant, backend_id)
        reports.append(verifier.verify_chain(log, kb))

    passes = sum(1 for r in reports if r.passed)
    fails = len(reports) - passes
    if policy.rule == "unanimity":
        if passes == len(reports):
            outcome = "certified"
        elif fails == len(reports):
            outcome = "flagged"
        else:
            outcome = "disagreement"
    else:  # majority
        if passes > fails:
            outcome = "certified"
        elif fails > passes:
            outcome = "flagged"
        else:
            outcome = "disagreement"

    promoted: str | None = None
    if outcome == "disagreement" and on_disagreement is not None:
        on_disagreement(log, reports)
    if outcome == "certified" and promoter is not None:
        promoted = promoter(log)
    return ConsensusResult(reports=reports, outcome=outcome, promoted_theorem_id=promoted)


def promote_chain_theorem(
    log: ExecutionLog,
    kb: KnowledgeBase,
    template: str | None = None,
    auto_approve: bool = False,
) -> str | None:
    """Solidify a certified chain into a theorem record.

    The theorem reuses the chain's decisive rule (violated rules first) so a
    later match can be re-checked by evaluation, and stores the process
    template for vector matching. Returns the theorem id, or the existing
    one if an equivalent template is already stored; None when the chain
    cited no rules at all.
    """
    if log.final_answer is None:
        return None
    verdict_atoms = [(e, v) for (e, a, v) in log.final_answer.atoms if a == "verdict"]
    if not verdict_atoms:
        verdict_atoms = [
            (e, v) for s in log.flat_steps() for (e, a, v) in s.atoms if a == "verdict"
        ]
    if not verdict_atoms:
        return None
    violated = [e for e, v in verdict_atoms if v == "violated"]
    decisive = violated or [e for e, _ in verdict_atoms]
    primary = kb.get(decisive[0])
    if primary is None:
        return None
    template_text = template or log.task.description

    for existing in kb.all(kind="theorem"):
        if existing.template == template_text and existing.status in ("candidate", "approved"):
            return existing.id

    outcome = log.final_answer.verdict
    record = kb.add_candidate(
        scenario=log.task.scenario,
        kind="theorem",
        rule_text=primary.rule_text,
        origin="chain-promoted",
        derived_from=sorted(set(decisive)),
        template=template_text,
        note=f"promoted from certified chain {log.task.id}; outcome {outcome}",
    )
    if auto_approve:
        record = kb.review_decision(record.id, "approve", reviewer="auto:chain-promotion")
    return record.id


def simulate_consensus_error_rates(
    flip_p: float,
    n_trials: int,
    seed: int,
    n: int = 3,
    rule: str = "unanimity",
) -> dict:
    """Monte Carlo estimate of false-certification rates on a bad chain.

    Models a faulty verifier that independently flips its verdict with
    probability ``flip_p``. The chain under audit is truly flawed, so a
    flip means an erroneous pass. Returns empirical single-audit and
    consensus false-certification rates.
    """
    rng = random.Random(seed)
    single_false = 0
    consensus_false = 0
    for _ in range(n_trials):
        votes = [rng.random() < flip_p for _ in range(n)]  # True = erroneous pass
        single_false += 1 if votes[0] else 0
        passes = sum(votes)
        if rule == "unanimity":
            certified = passes == n
        else:
            certified = passes > n - passes
        consensus_false += 1 if certified else 0
    return {
        "trials": n_trials,
        "flip_p": flip_p,
        "single_rate": single_false / n_trials,
        "consensus_rate": consensus_false / n_trials,
    }
