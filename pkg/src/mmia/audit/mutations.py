"""Structural-mutation catalog for audit soundness checks.

Each mutation takes a certifying log and corrupts exactly one structural
property the verifier is supposed to guard; the mutated copy must flip to
error-flagged. Mutations never touch the input log (they work on a
serialized deep copy).
"""

from __future__ import annotations

from typing import Callable

from ..engine.types import EvidenceRef, ExecutionLog, Plan


def _clone(log: ExecutionLog) -> ExecutionLog:
    return ExecutionLog.from_dict(log.to_dict())


def mutate_dangle_citation(log: ExecutionLog) -> ExecutionLog | None:
    """Point the first rule citation at an id that does not exist."""
    mutant = _clone(log)
    for step in mutant.flat_steps():
        for i, ref in enumerate(step.evidence):
            if ref.kind in ("axiom", "theorem"):
                step.evidence[i] = EvidenceRef(ref.kind, "ZZZ-A99", ref.excerpt)
                return mutant
    return None


def mutate_drop_evidence(log: ExecutionLog) -> ExecutionLog | None:
    """Strip all evidence from the first step that makes claims."""
    mutant = _clone(log)
    for step in mutant.flat_steps():
        if step.atoms and step.evidence:
            step.evidence.clear()
            return mutant
    return None


def mutate_remove_fact(log: ExecutionLog) -> ExecutionLog | None:
    """Delete a task fact that some step's claim rests on."""
    mutant = _clone(log)
    cited_facts = []
    for step in mutant.flat_steps():
        has_doc = any(r.kind == "external-document" for r in step.evidence)
        if not has_doc:
            continue
        for e, a, v in step.atoms:
            if a != "verdict" and mutant.task.facts.has(e, a):
                cited_facts.append((e, a))
    if not cited_facts:
        return None
    entity, attribute = cited_facts[0]
    facts = mutant.task.facts
    facts._facts.pop((entity, attribute), None)
    _strip_fact_everywhere(mutant, entity, attribute)
    return mutant


def _strip_fact_everywhere(log: ExecutionLog, entity: str, attribute: str) -> None:
    log.task.facts._facts.pop((entity, attribute), None)
    for child in log.children:
        _strip_fact_everywhere(child, entity, attribute)


def mutate_contradict_atom(log: ExecutionLog) -> ExecutionLog | None:
    """Assert a conflicting value for a single-valued fact in the last step."""
    mutant = _clone(log)
    steps = mutant.flat_steps()
    multi = mutant.task.facts.multi_valued
    target = None
    for step in steps[:-1]:
        for e, a, v in step.atoms:
            if a != "verdict" and a not in multi and isinstance(v, str):
                target = (e, a, v)
                break
        if target:
            break
    if target is None or len(steps) < 2:
        return None
    e, a, v = target
    steps[-1].atoms.append((e, a, v + "-contradicted"))
    return mutant


def mutate_underived_final_atom(log: ExecutionLog) -> ExecutionLog | None:
    """Slip an atom into the final answer that no step ever concluded."""
    mutant = _clone(log)
    if mutant.final_answer is None:
        return None
    mutant.final_answer.atoms.append(("patient", "stable", "yes"))
    return mutant


def mutate_drop_plan_subtask(log: ExecutionLog) -> ExecutionLog | None:
    """Remove the plan subtask that produces a goal attribute."""
    mutant = _clone(log)
    plan = mutant.plan
    if plan is None or len(plan.subtasks) < 2:
        return None
    goals = set(mutant.task.goal_attrs)
    victim = None
    for i, sub in enumerate(plan.subtasks):
        if goals & set(sub.outputs):
            victim = i
            break
    if victim is None:
        # Fall back to a subtask whose output feeds another's input.
        consumed = {x for s in plan.subtasks for x in s.inputs}
        for i, sub in enumerate(plan.subtasks):
            if consumed & set(sub.outputs):
                victim = i
                break
    if victim is None:
        return None
    kept = [s for i, s in enumerate(plan.subtasks) if i != victim]
    remap = {old: new for new, old in enumerate(i for i in range(len(plan.subtasks)) if i != victim)}
    deps = [
        (remap[a], remap[b])
        for a, b in plan.dependencies
        if a != victim and b != victim
    ]
    mutant.plan = Plan(task_id=plan.task_id, subtasks=kept, dependencies=deps, rationale=plan.rationale)
    return mutant


def mutate_break_prior_step_ref(log: ExecutionLog) -> ExecutionLog | None:
    """Make a prior-step citation claim something that step never concluded."""
    mutant = _clone(log)
    for step in mutant.flat_steps():
        for i, ref in enumerate(step.evidence):
            if ref.kind == "prior-step":
                step.evidence[i] = EvidenceRef(
                    "prior-step", ref.target_id, "ghost.attribute = 'never-derived'"
                )
                return mutant
    return None


MUTATION_CATALOG: list[tuple[str, Callable[[ExecutionLog], ExecutionLog | None]]] = [
    ("dangle-citation", mutate_dangle_citation),
    ("drop-evidence", mutate_drop_evidence),
    ("remove-fact", mutate_remove_fact),
    ("contradict-atom", mutate_contradict_atom),
    ("underived-final-atom", mutate_underived_final_atom),
    ("drop-plan-subtask", mutate_drop_plan_subtask),
    ("break-prior-step-ref", mutate_break_prior_step_ref),
]


def apply_catalog(log: ExecutionLog) -> list[tuple[str, ExecutionLog | None]]:
    """Apply every catalog mutation to (a copy of) the log."""
    return [(name, fn(log)) for name, fn in MUTATION_CATALOG]
