"""Rule-grounded deterministic verifier.

Re-derives every claim in an execution log from first principles: verdict
claims are re-evaluated against the reconstructed fact state, derived facts
must follow from a cited rule, surfaced facts must exist in the task
record, and the final answer may only summarize what the steps concluded.
It never consults a backend, so it doubles as the reproducible audit
oracle. The checks run in chain order: plan, per-step evidence, per-step
fallacy scan, aggregation; all issues accumulate with no short-circuit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..engine.types import Atom3, EvidenceRef, ExecutionLog, Plan, ReasoningStep, TaskSpec
from ..gateway import TokenUsage
from ..kb.store import KnowledgeBase
from ..rules import And, Atom, Duration, FactSet, Implies, RuleExpr, Unless, eval_rule
from ..rules.evaluator import TRUE, _truth
from .types import AuditIssue, AuditReport


def _values_equal(a, b) -> bool:
    if isinstance(a, Duration) and isinstance(b, Duration):
        return a.hours == b.hours
    if isinstance(a, Duration) or isinstance(b, Duration):
        return False
    if isinstance(a, str) != isinstance(b, str):
        return False
    return a == b


def derivation_supports(rule: RuleExpr, facts: FactSet, atom: Atom3) -> bool:
    """Does the rule, under these facts, establish the claimed atom?

    True when the rule is an IF-THEN whose condition holds, whose UNLESS
    exception (if any) is definitely false, and whose consequence contains
    the claimed positive equality.
    """
    entity, attribute, value = atom
    if isinstance(rule, Unless):
        if _truth(rule.exception, facts, []) == TRUE:
            return False
        rule = rule.base
    if not isinstance(rule, Implies):
        return False
    try:
        if _truth(rule.condition, facts, []) != TRUE:
            return False
    except Exception:
        return False
    cons = rule.consequence
    if isinstance(cons, Unless):
        if _truth(cons.exception, facts, []) == TRUE:
            return False
        cons = cons.base
    parts = list(cons.items) if isinstance(cons, And) else [cons]
    for part in parts:
        if (
            isinstance(part, Atom)
            and part.comparator == "="
            and part.entity == entity
            and part.attribute == attribute
            and _values_equal(part.value, value)
        ):
            return True
    return False


@dataclass
class _ChainState:
    """Fact state reconstructed while walking the flattened chain."""

    root: TaskSpec
    facts: FactSet
    steps_by_index: dict[int, ReasoningStep] = field(default_factory=dict)
    # (entity, attribute) -> first asserted value, for contradiction checks.
    asserted: dict[tuple[str, str], list] = field(default_factory=dict)

    def absorb(self, step: ReasoningStep) -> None:
        self.steps_by_index[step.index] = step
        for e, a, v in step.atoms:
            if a == "verdict":
                key = (e, "verdict")
            else:
                key = (e, a)
                try:
                    if not self.facts.has(e, a) or a in self.facts.multi_valued:
                        self.facts.add(e, a, v)
                except Exception:
                    pass  # conflicting claim; the fallacy scan reports it
            self.asserted.setdefault(key, [])
            if not any(_values_equal(v, prev) for prev in self.asserted[key]):
                self.asserted[key].append(v)


class DeterministicVerifier:
    verifier_id = "deterministic:v1"

    def __init__(self, variant: str = "v1"):
        self.variant = variant
        self.verifier_id = f"deterministic:{variant}"

    # -- plan ----------------------------------------------------------

    def check_plan(self, task: TaskSpec, plan: Plan | None) -> list[AuditIssue]:
        """Goal coverage and data-flow order; atomic logs skip this check."""
        if plan is None:
            return []
        issues: list[AuditIssue] = []
        produced_all: set[str] = set()
        for sub in plan.subtasks:
            produced_all |= set(sub.outputs)
        for goal in task.goal_attrs:
            if goal not in produced_all:
                issues.append(
                    AuditIssue(
                        location="plan",
                        kind="plan-mismatch",
                        message=(
                            f"plan for {task.id} does not align with the task: goal "
                            f"attribute {goal!r} is not produced by any subtask"
                        ),
                    )
                )
        available = {a for (_, a, _) in task.facts.triples()}
        for i in plan.execution_order():
            sub = plan.subtasks[i]
            for needed in sub.inputs:
                if needed not in available:
                    issues.append(
                        AuditIssue(
                            location="plan",
                            kind="plan-mismatch",
                            message=(
                                f"subtask {sub.id} needs {needed!r} which no earlier "
                                "subtask produces and the task facts do not contain"
                            ),
                        )
                    )
            available |= set(sub.outputs)
        return issues

    # -- evidence ------------------------------------------------------

    def check_evidence(
        self, step: ReasoningStep, kb: KnowledgeBase, state: _ChainState
    ) -> list[AuditIssue]:
        issues: list[AuditIssue] = []
        post = state.facts.copy()
        for e, a, v in step.atoms:
            if a == "verdict":
                continue
            try:
                if not post.has(e, a) or a in post.multi_valued:
                    post.add(e, a, v)
            except Exception:
                pass

        cited_rules: dict[str, RuleExpr | None] = {}
        cited_steps: list[EvidenceRef] = []
        doc_cited = False
        for ref in step.evidence:
            if ref.kind in ("axiom", "theorem"):
                rec = kb.get(ref.target_id)
                if rec is None:
                    issues.append(
                        AuditIssue(
                            location="step",
                            step_index=step.index,
                            kind="dangling-citation",
                            message=f"cited {ref.kind} {ref.target_id!r} does not exist in the knowledge base",
                            cited_rule=ref.target_id,
                        )
                    )
                else:
                    cited_rules[ref.target_id] = rec.rule
            elif ref.kind == "prior-step":
                try:
                    target = int(ref.target_id)
                except ValueError:
                    target = -1
                if target < 0 or target >= step.index or target not in state.steps_by_index:
                    issues.append(
                        AuditIssue(
                            location="step",
                            step_index=step.index,
                            kind="dangling-citation",
                            message=f"prior-step citation {ref.target_id!r} does not name an earlier step",
                        )
                    )
                else:
                    cited_steps.append(ref)
            elif ref.kind == "external-document":
                root_ids = {state.root.id, state.root.source_id or state.root.id}
                if ref.target_id not in root_ids:
                    issues.append(
                        AuditIssue(
                            location="step",
                            step_index=step.index,
                            kind="dangling-citation",
                            message=f"external document {ref.target_id!r} is not attached to this task",
                        )
                    )
                else:
                    doc_cited = True
            # web-result refs resolve to the fixtures stub; nothing to check.

        for atom in step.atoms:
            entity, attribute, value = atom
            if attribute == "verdict":
                issues.extend(self._check_verdict_claim(step, entity, value, cited_rules, post))
            elif (entity, attribute) == ("task", "adjudication"):
                continue  # aggregation-level summary, checked there
            else:
                issues.extend(
                    self._check_fact_claim(step, atom, cited_rules, cited_steps, doc_cited, state, post)
                )
        return issues

    def _check_verdict_claim(
        self,
        step: ReasoningStep,
        rule_id: str,
        claimed: str,
        cited_rules: dict[str, RuleExpr | None],
        post: FactSet,
    ) -> list[AuditIssue]:
        if rule_id not in cited_rules:
            return [
                AuditIssue(
                    location="step",
                    step_index=step.index,
                    kind="missing-evidence",
                    message=f"step claims a verdict for {rule_id} without citing it",
                    cited_rule=rule_id,
                )
            ]
        rule = cited_rules[rule_id]
        if rule is None:
            return [
                AuditIssue(
                    location="step",
                    step_index=step.index,
                    kind="missing-evidence",
                    message=f"cited rule {rule_id} has no parseable rule text",
                    cited_rule=rule_id,
                )
            ]
        try:
            outcome = eval_rule(rule, post).outcome
        except Exception as exc:
            return [
                AuditIssue(
                    location="step",
                    step_index=step.index,
                    kind="missing-evidence",
                    message=f"rule {rule_id} cannot be evaluated against the chain facts: {exc}",
                    cited_rule=rule_id,
                )
            ]
        if outcome != claimed:
            return [
                AuditIssue(
                    location="step",
                    step_index=step.index,
                    kind="missing-evidence",
                    message=(
                        f"conclusion in step {step.index} lacks evidence support: claims "
                        f"{rule_id} is {claimed} but evaluation yields {outcome}"
                    ),
                    cited_rule=rule_id,
                )
            ]
        return []

    def _check_fact_claim(
        self,
        step: ReasoningStep,
        atom: Atom3,
        cited_rules: dict[str, RuleExpr | None],
        cited_steps: list[EvidenceRef],
        doc_cited: bool,
        state: _ChainState,
        post: FactSet,
    ) -> list[AuditIssue]:
        entity, attribute, value = atom
        # Supported by a cited rule derivation?
        for rule_id, rule in cited_rules.items():
            if rule is not None and derivation_supports(rule, post, atom):
                return []
        # Supported by the task record?
        if doc_cited:
            for e, a, v in state.root.facts.triples():
                if e == entity and a == attribute and _values_equal(v, value):
                    return []
        # Supported by a cited earlier step's conclusion?
        for ref in cited_steps:
            cited = state.steps_by_index[int(ref.target_id)]
            for e, a, v in cited.atoms:
                if e == entity and a == attribute and _values_equal(v, value):
                    return []
        pretty = f"{entity}.{attribute}" if entity else attribute
        # If a cited rule concludes about this attribute but did not fire,
        # name it: the claim contradicts the rule's own applicability.
        near_miss = None
        for rule_id, rule in cited_rules.items():
            if rule is not None and _mentions_in_consequence(rule, entity, attribute):
                near_miss = rule_id
                break
        if near_miss:
            message = (
                f"conclusion in step {step.index} lacks evidence support: cited rule "
                f"{near_miss} does not establish {pretty} = {value!r} because its "
                "condition is inconsistent with the recorded facts"
            )
        else:
            message = (
                f"conclusion in step {step.index} lacks evidence support: "
                f"{pretty} = {value!r} is not established by any cited source"
            )
        return [
            AuditIssue(
                location="step",
                step_index=step.index,
                kind="missing-evidence",
                message=message,
                cited_rule=near_miss,
            )
        ]

    # -- fallacy -------------------------------------------------------

    def check_fallacy(self, step: ReasoningStep, state: _ChainState) -> list[AuditIssue]:
        """Contradictions with earlier assertions and non-sequitur citations."""
        issues: list[AuditIssue] = []
        multi = state.facts.multi_valued
        seen_here: dict[tuple[str, str], list] = {}
        for e, a, v in step.atoms:
            key = (e, "verdict") if a == "verdict" else (e, a)
            if a != "verdict" and a in multi:
                continue
            prior = state.asserted.get(key, []) + seen_here.get(key, [])
            conflicting = [p for p in prior if not _values_equal(p, v)]
            if conflicting:
                pretty = f"{e}.{a}" if e else a
                issues.append(
                    AuditIssue(
                        location="step",
                        step_index=step.index,
                        kind="logical-fallacy",
                        message=(
                            f"logical fallacy detected in step {step.index}: contradiction, "
                            f"{pretty} asserted as {v!r} after {conflicting[0]!r}"
                        ),
                    )
                )
            seen_here.setdefault(key, []).append(v)
        for ref in step.evidence:
            if ref.kind != "prior-step" or not ref.excerpt:
                continue
            try:
                cited = state.steps_by_index.get(int(ref.target_id))
            except ValueError:
                cited = None
            if cited is None:
                continue  # dangling citation already reported by the evidence check
            rendered = {_render_atom(a) for a in cited.atoms}
            if ref.excerpt not in rendered and ref.excerpt not in cited.conclusion_text:
                issues.append(
                    AuditIssue(
                        location="step",
                        step_index=step.index,
                        kind="logical-fallacy",
                        message=(
                            f"logical fallacy detected in step {step.index}: non-sequitur, "
                            f"cites step {ref.target_id} for {ref.excerpt!r} which that step never concluded"
                        ),
                    )
                )
        return issues

    # -- aggregation ---------------------------------------------------

    def check_aggregation(self, log: ExecutionLog) -> list[AuditIssue]:
        """Final-answer atoms must trace to sub-results (or be the declared
        adjudication summary, which must agree with the recorded verdicts)."""
        if log.final_answer is None:
            return []
        if log.children:
            pool = [a for c in log.children if c.final_answer for a in c.final_answer.atoms]
        else:
            pool = [a for s in log.steps for a in s.atoms]
        issues: list[AuditIssue] = []
        violations = {e for (e, a, v) in pool if a == "verdict" and v == "violated"}
        for atom in log.final_answer.atoms:
            entity, attribute, value = atom
            if (entity, attribute) == ("task", "adjudication"):
                expected = "erroneous" if violations else "correct"
                if value != expected:
                    issues.append(
                        AuditIssue(
                            location="aggregation",
                            kind="aggregation-gap",
                            message=(
                                f"final adjudication {value!r} for {log.task.id} contradicts the "
                                f"step verdicts (expected {expected!r})"
                            ),
                        )
                    )
                continue
            if not any(
                e == entity and a == attribute and _values_equal(v, value) for (e, a, v) in pool
            ):
                pretty = f"{entity}.{attribute}" if entity else attribute
                issues.append(
                    AuditIssue(
                        location="aggregation",
                        kind="aggregation-gap",
                        message=(
                            f"final answer of {log.task.id} cannot be derived from step "
                            f"conclusions: atom {pretty} = {value!r} was never concluded"
                        ),
                    )
                )
        return issues

    # -- the whole chain -----------------------------------------------

    def verify_chain(self, log: ExecutionLog, kb: KnowledgeBase) -> AuditReport:
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
        issues.extend(self._plan_issues_tree(log))
        state = _ChainState(root=log.task, facts=log.task.facts.copy())
        for step in steps:
            issues.extend(self.check_evidence(step, kb, state))
            issues.extend(self.check_fallacy(step, state))
            state.absorb(step)
        issues.extend(self._aggregation_issues_tree(log))
        return AuditReport(
            log_id=log_id,
            issues=issues,
            verifier_id=self.verifier_id,
            token_usage=TokenUsage(0, 0),
        )

    def _plan_issues_tree(self, log: ExecutionLog) -> list[AuditIssue]:
        issues = []
        for child in log.children:  # children before parents
            issues.extend(self._plan_issues_tree(child))
        issues.extend(self.check_plan(log.task, log.plan))
        return issues

    def _aggregation_issues_tree(self, log: ExecutionLog) -> list[AuditIssue]:
        issues = []
        for child in log.children:
            issues.extend(self._aggregation_issues_tree(child))
        issues.extend(self.check_aggregation(log))
        return issues


def _render_atom(atom: Atom3) -> str:
    e, a, v = atom
    lhs = f"{e}.{a}" if e else a
    return f"{lhs} = {v!r}"


def _mentions_in_consequence(rule: RuleExpr, entity: str, attribute: str) -> bool:
    if isinstance(rule, Unless):
        rule = rule.base
    if not isinstance(rule, Implies):
        return False
    cons = rule.consequence
    if isinstance(cons, Unless):
        cons = cons.base
    parts = list(cons.items) if isinstance(cons, And) else [cons]
    return any(
        isinstance(p, Atom) and p.entity == entity and p.attribute == attribute for p in parts
    )
