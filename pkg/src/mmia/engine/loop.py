"""The core reasoning loop.

A task is first assessed for atomicity; atomic tasks run one tool step,
complex tasks are decomposed into a plan whose subtasks re-enter the loop
recursively. Sub-results are aggregated into a final answer. Budgets bound
both recursion depth and total steps, so execution always terminates.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from ..errors import ConfigurationError, IncompleteInputError, PreconditionError
from ..gateway import ChatRequest, Gateway, TokenUsage, complete_json, count_tokens, render_prompt
from ..kb.store import KnowledgeBase
from ..rules import FactSet, derivable_atoms, eval_rule
from ..rules.ast import atoms_of
from .types import (
    TOOLS,
    Atom3,
    AtomicityVerdict,
    Budget,
    EvidenceRef,
    ExecutionLog,
    FinalAnswer,
    Plan,
    ReasoningStep,
    TaskSpec,
    _has_cycle,
)

SYSTEM_PLANNER = (
    "You are the planning module of a verifiable reasoning engine. "
    "Assess task atomicity and decompose complex tasks into dependency-ordered sub-tasks."
)
SYSTEM_EXECUTOR = (
    "You are the execution module of a verifiable reasoning engine. "
    "Answer precisely and cite evidence for every claim."
)

# Composers turn sub-results into scenario-appropriate final-answer text.
Composer = Callable[[TaskSpec, list[Atom3], list[str]], str]


def default_composer(task: TaskSpec, atoms: list[Atom3], violations: list[str]) -> str:
    if violations:
        return f"Violations found: {', '.join(violations)}. Task outcome erroneous."
    return "All checks passed; no violations found."


@dataclass
class EngineContext:
    """Shared services and settings for one engine instance."""

    kb: KnowledgeBase
    gateway: Gateway
    replay: bool = False
    default_budget: Budget = field(default_factory=Budget)
    web_fixtures_dir: Path | None = None
    llm_aggregate: bool = False
    composers: dict[str, Composer] = field(default_factory=dict)

    def now(self) -> float:
        return 0.0 if self.replay else time.time()

    def composer_for(self, scenario: str) -> Composer:
        return self.composers.get(scenario, default_composer)


@dataclass
class _RunState:
    """Mutable bookkeeping for one root-task execution."""

    facts: FactSet
    steps_used: int = 0
    next_index: int = 0
    # Which step derived/surfaced each atom, for prior-step citations.
    atom_origin: dict[tuple[str, str, str], int] = field(default_factory=dict)


# ----------------------------------------------------------------------
# Atomicity
# ----------------------------------------------------------------------


def _validate_atomicity(doc: dict) -> str | None:
    if not isinstance(doc.get("atomic"), bool):
        return 'missing boolean "atomic"'
    if doc["atomic"]:
        if doc.get("tool") not in TOOLS:
            return f'atomic replies need "tool" from {list(TOOLS)}'
    elif doc.get("tool"):
        return 'non-atomic replies must not set "tool"'
    return None


def assess_atomicity(task: TaskSpec, backend, usage_sink: list | None = None) -> AtomicityVerdict:
    """Ask the backend whether the task is a single-tool unit of work."""
    request = ChatRequest(
        role_tag="planner",
        system_prompt=SYSTEM_PLANNER,
        user_prompt=render_prompt(
            "atomicity", {"description": task.description, "scenario": task.scenario}
        ),
        response_schema="atomicity_v1",
    )
    doc, usage = complete_json(backend, request, _validate_atomicity)
    if usage_sink is not None:
        usage_sink.append(usage)
    return AtomicityVerdict(
        atomic=doc["atomic"],
        tool=doc.get("tool") if doc["atomic"] else None,
        rationale=str(doc.get("rationale", "")),
    )


# ----------------------------------------------------------------------
# Planning
# ----------------------------------------------------------------------


def _validate_plan(doc: dict) -> str | None:
    subtasks = doc.get("subtasks")
    if not isinstance(subtasks, list) or not subtasks:
        return 'plan needs a non-empty "subtasks" list'
    for s in subtasks:
        if not isinstance(s, dict) or not str(s.get("description", "")).strip():
            return "every subtask needs a non-empty description"
    deps = doc.get("dependencies", [])
    if not isinstance(deps, list):
        return '"dependencies" must be a list of [from, to] pairs'
    n = len(subtasks)
    pairs = []
    for d in deps:
        if not (isinstance(d, list) and len(d) == 2):
            return "each dependency must be a [from, to] pair"
        a, b = d
        if not (isinstance(a, int) and isinstance(b, int) and 0 <= a < n and 0 <= b < n):
            return f"dependency {d} out of range for {n} subtasks"
        pairs.append((a, b))
    if _has_cycle(n, pairs):
        return "dependency graph has a cycle"
    return None


def plan_decompose(task: TaskSpec, backend, usage_sink: list | None = None) -> Plan:
    """Decompose a non-atomic task into an acyclic plan of subtasks."""
    request = ChatRequest(
        role_tag="planner",
        system_prompt=SYSTEM_PLANNER,
        user_prompt=render_prompt(
            "plan",
            {
                "description": task.description,
                "scenario": task.scenario,
                "fact_attrs": ", ".join(sorted({a for (_, a, _) in task.facts.triples()})) or "(none)",
            },
        ),
        response_schema="plan_v1",
    )
    doc, usage = complete_json(backend, request, _validate_plan)
    if usage_sink is not None:
        usage_sink.append(usage)
    subtasks = []
    child_budget = Budget(max(1, task.budget.max_depth - 1), task.budget.max_steps)
    for i, s in enumerate(doc["subtasks"]):
        subtasks.append(
            TaskSpec(
                id=f"{task.id}/s{i}",
                description=str(s["description"]),
                scenario=task.scenario,
                facts=task.facts,
                budget=child_budget,
                source_id=task.source_id or task.id,
                topics=[str(t) for t in s.get("topics", [])],
                inputs=[str(x) for x in s.get("inputs", [])],
                outputs=[str(x) for x in s.get("outputs", [])],
            )
        )
    return Plan(
        task_id=task.id,
        subtasks=subtasks,
        dependencies=[(int(a), int(b)) for a, b in doc.get("dependencies", [])],
        rationale=str(doc.get("rationale", "")),
    )


# ----------------------------------------------------------------------
# Atomic execution
# ----------------------------------------------------------------------


def execute_atomic(subtask: TaskSpec, tool: str, context: EngineContext, state: _RunState | None = None) -> ReasoningStep:
    """Run one tool step for an atomic (sub-)task."""
    if tool not in TOOLS:
        raise ConfigurationError(f"unknown tool {tool!r}")
    if state is None:
        state = _RunState(facts=subtask.facts.copy())
        _seed_atom_origins(state, subtask.facts)
    if tool == "kb-retrieval":
        step = _kb_retrieval_step(subtask, context, state)
    elif tool == "direct-query":
        step = _direct_query_step(subtask, context, state)
    else:
        step = _web_search_step(subtask, context, state)
    state.next_index += 1
    state.steps_used += 1
    return step


def _seed_atom_origins(state: _RunState, facts: FactSet) -> None:
    for e, a, v in facts.triples():
        state.atom_origin.setdefault((e, a, str(v)), -1)  # -1 = input fact


def _atom_text(atom: Atom3) -> str:
    e, a, v = atom
    lhs = f"{e}.{a}" if e else a
    return f"{lhs} = {v!r}"


def _kb_retrieval_step(subtask: TaskSpec, context: EngineContext, state: _RunState) -> ReasoningStep:
    """Retrieve scenario rules for the subtask's topics and evaluate them.

    Surfaces requested input facts, forward-chains derivations into the
    declared output attributes, and claims a verdict for every applicable
    rule. No backend call is made: conclusions here are rule-grounded.
    """
    prompt = render_prompt(
        "direct-query",
        {
            "description": subtask.description,
            "facts": "\n".join(_atom_text(t) for t in sorted(state.facts.triples(), key=str)) or "(none)",
        },
    )
    topics = set(subtask.topics)
    scope = set(subtask.inputs) | set(subtask.outputs)
    retrieved = []
    for a in context.kb.approved_for_scenario(subtask.scenario):
        if topics & set(a.tags):
            retrieved.append(a)
        elif not a.tags and a.rule is not None and scope & {x.attribute for x in atoms_of(a.rule)}:
            # Untagged rules (e.g. freshly approved extractions) are pulled
            # in when they speak about this subtask's declared attributes.
            retrieved.append(a)
    retrieved.sort(key=lambda a: a.id)

    evidence: list[EvidenceRef] = []
    atoms: list[Atom3] = []
    notes: list[str] = []
    cited: set[str] = set()
    prior_cited: set[int] = set()

    # Surface requested input facts from the original task facts.
    surfaced = [
        (e, a, v)
        for (e, a, v) in subtask.facts.triples()
        if a in set(subtask.outputs) and state.atom_origin.get((e, a, str(v))) == -1
    ]
    for e, a, v in surfaced:
        atoms.append((e, a, v))
        evidence.append(
            EvidenceRef(
                kind="external-document",
                target_id=subtask.source_id or subtask.id,
                excerpt=_atom_text((e, a, v)),
            )
        )
        notes.append(f"recorded {_atom_text((e, a, v))} from the case record")
        # Later steps cite this step, not the raw record, for surfaced facts.
        state.atom_origin[(e, a, str(v))] = state.next_index

    # Forward-chain derivations, then claim verdicts.
    outputs = set(subtask.outputs)
    changed = True
    derived: list[tuple[Atom3, str]] = []
    working = state.facts.copy()
    for e, a, v in surfaced:
        if not working.has(e, a) or a in working.multi_valued:
            working.add(e, a, v)
    while changed:
        changed = False
        for rule_rec in retrieved:
            rule = rule_rec.rule
            if rule is None:
                continue
            for e, a, v in derivable_atoms(rule, working):
                if a not in outputs:
                    continue
                working.add(e, a, v)
                derived.append(((e, a, v), rule_rec.id))
                changed = True
    for (e, a, v), rule_id in derived:
        atoms.append((e, a, v))
        if rule_id not in cited:
            rec = context.kb.get(rule_id)
            evidence.append(EvidenceRef(kind=rec.kind, target_id=rule_id, excerpt=rec.rule_text))
            cited.add(rule_id)
        notes.append(f"derived {_atom_text((e, a, v))} via {rule_id}")

    for rule_rec in retrieved:
        rule = rule_rec.rule
        if rule is None:
            continue
        verdict = eval_rule(rule, working)
        if verdict.outcome == "inapplicable":
            continue
        atoms.append((rule_rec.id, "verdict", verdict.outcome))
        if rule_rec.id not in cited:
            evidence.append(
                EvidenceRef(kind=rule_rec.kind, target_id=rule_rec.id, excerpt=rule_rec.rule_text)
            )
            cited.add(rule_rec.id)
        notes.append(f"rule {rule_rec.id} {verdict.outcome}")
        # Cite the steps that established the facts this verdict rests on.
        for entity, attrs in verdict.bindings.items():
            for attr in attrs:
                for value in working.get(entity, attr) or []:
                    origin = state.atom_origin.get((entity, attr, str(value)))
                    if (
                        origin is not None
                        and 0 <= origin < state.next_index
                        and origin not in prior_cited
                    ):
                        evidence.append(
                            EvidenceRef(
                                kind="prior-step",
                                target_id=str(origin),
                                excerpt=_atom_text((entity, attr, value)),
                            )
                        )
                        prior_cited.add(origin)

    if not retrieved and not surfaced:
        conclusion = "no evidence found"
    elif not notes:
        conclusion = f"No applicable rules for topics: {', '.join(sorted(topics)) or '(none)'}."
    else:
        conclusion = "; ".join(notes) + "."

    step = ReasoningStep(
        index=state.next_index,
        subtask_id=subtask.id,
        tool="kb-retrieval",
        prompt=prompt,
        evidence=evidence,
        conclusion_text=conclusion,
        atoms=atoms,
        raw_output=conclusion,
        token_usage=TokenUsage(count_tokens(prompt), count_tokens(conclusion)),
    )
    _absorb_step_atoms(state, step)
    return step


def _direct_query_step(subtask: TaskSpec, context: EngineContext, state: _RunState) -> ReasoningStep:
    prompt = render_prompt(
        "direct-query",
        {
            "description": subtask.description,
            "facts": "\n".join(_atom_text(t) for t in sorted(state.facts.triples(), key=str)) or "(none)",
        },
    )
    response = context.gateway.complete(
        ChatRequest(role_tag="executor", system_prompt=SYSTEM_EXECUTOR, user_prompt=prompt)
    )
    text = response.text
    atoms: list[Atom3] = []
    evidence: list[EvidenceRef] = []
    conclusion = text
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "text" in doc:
        conclusion = str(doc["text"])
        for triple in doc.get("atoms", []):
            if isinstance(triple, list) and len(triple) == 3:
                atoms.append((str(triple[0]), str(triple[1]), triple[2]))
        for ev in doc.get("evidence", []):
            if isinstance(ev, dict) and "kind" in ev and "target_id" in ev:
                evidence.append(
                    EvidenceRef(str(ev["kind"]), str(ev["target_id"]), str(ev.get("excerpt", "")))
                )
    step = ReasoningStep(
        index=state.next_index,
        subtask_id=subtask.id,
        tool="direct-query",
        prompt=prompt,
        evidence=evidence,
        conclusion_text=conclusion,
        atoms=atoms,
        raw_output=text,
        token_usage=response.usage,
    )
    _absorb_step_atoms(state, step)
    return step


def _web_search_step(subtask: TaskSpec, context: EngineContext, state: _RunState) -> ReasoningStep:
    """Web search is a stub that reads fixtures keyed by query hash."""
    query = subtask.description
    prompt = f"web-search: {query}"
    digest = hashlib.sha256(query.encode("utf-8")).hexdigest()[:16]
    fixture = None
    if context.web_fixtures_dir is not None:
        path = context.web_fixtures_dir / f"{digest}.json"
        if path.exists():
            fixture = json.loads(path.read_text(encoding="utf-8"))
    if fixture is None:
        conclusion, evidence = "no evidence found", []
    else:
        conclusion = str(fixture.get("text", ""))
        evidence = [
            EvidenceRef(kind="web-result", target_id=digest, excerpt=str(r))
            for r in fixture.get("results", [])
        ]
    step = ReasoningStep(
        index=state.next_index,
        subtask_id=subtask.id,
        tool="web-search",
        prompt=prompt,
        evidence=evidence,
        conclusion_text=conclusion,
        atoms=[],
        raw_output=conclusion,
        token_usage=TokenUsage(count_tokens(prompt), count_tokens(conclusion)),
    )
    return step


def _absorb_step_atoms(state: _RunState, step: ReasoningStep) -> None:
    """Merge a step's fact atoms into the working set and remember origins."""
    for e, a, v in step.atoms:
        if a == "verdict":
            continue
        key = (e, a, str(v))
        if key not in state.atom_origin:
            state.atom_origin[key] = step.index
        try:
            if not state.facts.has(e, a) or a in state.facts.multi_valued:
                state.facts.add(e, a, v)
        except Exception:
            pass  # conflicting claim; the auditor will flag the contradiction


# ----------------------------------------------------------------------
# Aggregation
# ----------------------------------------------------------------------


def _validate_aggregate(doc: dict) -> str | None:
    if not isinstance(doc.get("text"), str) or not doc["text"].strip():
        return 'missing non-empty "text"'
    if doc.get("verdict") not in ("correct", "erroneous", "none"):
        return 'verdict must be "correct", "erroneous", or "none"'
    return None


def aggregate(plan: Plan, sub_results: list[ExecutionLog], backend, context: EngineContext | None = None, task: TaskSpec | None = None, usage_sink: list | None = None) -> FinalAnswer:
    """Synthesize sub-results into the final answer.

    A single sub-result passes through unchanged. Otherwise the default
    composition is deterministic: union the sub-answers' atoms, derive the
    verdict from the presence of violated-rule claims, and render text via
    the scenario's composer. With ``llm_aggregate`` the draft goes to the
    backend, whose reply must keep every atom traceable.
    """
    incomplete = [r for r in sub_results if not r.complete]
    if incomplete:
        raise IncompleteInputError(
            f"cannot aggregate: sub-task {incomplete[0].task.id} did not complete"
        )
    if task is None:
        raise PreconditionError("aggregate needs the parent task")
    if len(sub_results) == 1:
        only = sub_results[0].final_answer
        assert only is not None
        return FinalAnswer(text=only.text, atoms=list(only.atoms), verdict=only.verdict)

    atoms: list[Atom3] = []
    seen: set[tuple[str, str, str]] = set()
    for r in sub_results:
        assert r.final_answer is not None
        for e, a, v in r.final_answer.atoms:
            key = (e, a, str(v))
            if key not in seen:
                seen.add(key)
                atoms.append((e, a, v))
    violations = sorted({e for (e, a, v) in atoms if a == "verdict" and v == "violated"})
    verdict = "erroneous" if violations else "correct"
    composer = (context.composer_for(task.scenario) if context else default_composer)
    text = composer(task, atoms, violations)
    answer = FinalAnswer(text=text, atoms=atoms + [("task", "adjudication", verdict)], verdict=verdict)

    if context is not None and context.llm_aggregate:
        conclusions = "\n".join(
            f"- {r.final_answer.text}" for r in sub_results if r.final_answer
        )
        request = ChatRequest(
            role_tag="executor",
            system_prompt=SYSTEM_EXECUTOR,
            user_prompt=render_prompt(
                "aggregate",
                {"description": task.description, "conclusions": conclusions, "draft": text},
            ),
            response_schema="aggregate_v1",
        )

        def _check(doc: dict) -> str | None:
            problem = _validate_aggregate(doc)
            if problem:
                return problem
            for triple in doc.get("atoms", []):
                if not (isinstance(triple, list) and len(triple) == 3):
                    return "atoms must be [entity, attribute, value] triples"
                if (str(triple[0]), str(triple[1]), str(triple[2])) not in seen and triple[1] != "adjudication":
                    return f"atom {triple} is not traceable to any sub-result"
            return None

        doc, usage = complete_json(backend, request, _check)
        if usage_sink is not None:
            usage_sink.append(usage)
        answer = FinalAnswer(
            text=str(doc["text"]),
            atoms=[(str(t[0]), str(t[1]), t[2]) for t in doc.get("atoms", [])]
            or answer.atoms,
            verdict=str(doc["verdict"]),
        )
    return answer


# ----------------------------------------------------------------------
# The recursive loop
# ----------------------------------------------------------------------


def execute_task(task: TaskSpec, context: EngineContext) -> ExecutionLog:
    """Run the full loop for a task and return its execution log."""
    state = _RunState(facts=task.facts.copy())
    _seed_atom_origins(state, task.facts)
    return _execute(task, context, state, level=1, limit=task.budget.max_depth)


def _execute(task: TaskSpec, context: EngineContext, state: _RunState, level: int, limit: int) -> ExecutionLog:
    log = ExecutionLog(task=task, started=context.now())
    frame_usage: list = []

    if state.steps_used >= task.budget.max_steps:
        return _fail(log, context, frame_usage, "budget-exhausted: step cap reached")

    forced = level >= limit and level > 1
    if forced:
        verdict = AtomicityVerdict(
            atomic=True, tool="direct-query", rationale="depth budget reached; forced atomic"
        )
    else:
        verdict = assess_atomicity(task, context.gateway, usage_sink=frame_usage)
    log.atomicity = verdict

    if verdict.atomic:
        assert verdict.tool is not None
        step = execute_atomic(task, verdict.tool, context, state)
        log.steps.append(step)
        log.final_answer = FinalAnswer(
            text=step.conclusion_text, atoms=list(step.atoms), verdict="none"
        )
        return _finish(log, context, frame_usage)

    if level >= limit:
        return _fail(
            log, context, frame_usage, "budget-exhausted: depth budget cannot accommodate decomposition"
        )

    plan = plan_decompose(task, context.gateway, usage_sink=frame_usage)
    log.plan = plan

    results_by_index: dict[int, ExecutionLog] = {}
    for i in plan.execution_order():
        child = _execute(plan.subtasks[i], context, state, level + 1, limit)
        results_by_index[i] = child
        if not child.complete:
            log.children = [results_by_index[j] for j in sorted(results_by_index)]
            return _fail(
                log, context, frame_usage, f"sub-task {plan.subtasks[i].id} failed: {child.error}"
            )
    log.children = [results_by_index[j] for j in sorted(results_by_index)]
    ordered_results = [results_by_index[i] for i in plan.execution_order()]
    log.final_answer = aggregate(
        plan, ordered_results, context.gateway, context, task, usage_sink=frame_usage
    )
    return _finish(log, context, frame_usage)


def _finish(log: ExecutionLog, context: EngineContext, frame_usage: list) -> ExecutionLog:
    log.finished = context.now()
    log.total_tokens = log.compute_total_tokens()
    log.overhead_tokens = sum(u.total for u in frame_usage)
    log.status = "completed"
    return log


def _fail(log: ExecutionLog, context: EngineContext, frame_usage: list, reason: str) -> ExecutionLog:
    log.finished = context.now()
    log.total_tokens = log.compute_total_tokens()
    log.overhead_tokens = sum(u.total for u in frame_usage)
    log.status = "failed"
    log.error = reason
    log.final_answer = None
    return log
