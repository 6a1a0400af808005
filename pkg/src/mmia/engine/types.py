"""Execution-trace types: task specs, plans, steps, and the log tree.

Logs serialize to canonical JSON (sorted keys, schema tag "log_v1") and a
run file stores one log per line as JSONL, so replays can be compared
byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import PreconditionError
from ..gateway import TokenUsage
from ..rules import FactSet
from ..rules.evaluator import FactValue, _value_from_json, _value_to_json

TOOLS = ("direct-query", "kb-retrieval", "web-search")
SCENARIOS = ("drg", "regulatory", "ehr", "insurance", "generic")


@dataclass(frozen=True)
class Budget:
    max_depth: int = 5
    max_steps: int = 64

    def __post_init__(self):
        if self.max_depth < 1:
            raise PreconditionError("budget depth must be >= 1")
        if self.max_steps < 1:
            raise PreconditionError("budget step cap must be >= 1")

    def to_dict(self) -> dict:
        return {"max_depth": self.max_depth, "max_steps": self.max_steps}

    @staticmethod
    def from_dict(d: dict) -> "Budget":
        return Budget(int(d["max_depth"]), int(d["max_steps"]))


@dataclass
class TaskSpec:
    id: str
    description: str
    scenario: str = "generic"
    facts: FactSet = field(default_factory=FactSet)
    budget: Budget = field(default_factory=Budget)
    source_id: str | None = None  # provenance id the facts came from (case/document)
    goal_attrs: list[str] = field(default_factory=list)
    # Planner-declared metadata on subtasks: retrieval topics and data flow.
    topics: list[str] = field(default_factory=list)
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.description.strip():
            raise PreconditionError("task description must be non-empty")
        if self.scenario not in SCENARIOS:
            raise PreconditionError(f"unknown scenario {self.scenario!r}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "scenario": self.scenario,
            "facts": self.facts.to_dict(),
            "budget": self.budget.to_dict(),
            "source_id": self.source_id,
            "goal_attrs": list(self.goal_attrs),
            "topics": list(self.topics),
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
        }

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            id=d["id"],
            description=d["description"],
            scenario=d.get("scenario", "generic"),
            facts=FactSet.from_dict(d.get("facts", {})),
            budget=Budget.from_dict(d["budget"]) if d.get("budget") else Budget(),
            source_id=d.get("source_id"),
            goal_attrs=list(d.get("goal_attrs", [])),
            topics=list(d.get("topics", [])),
            inputs=list(d.get("inputs", [])),
            outputs=list(d.get("outputs", [])),
        )


@dataclass(frozen=True)
class AtomicityVerdict:
    atomic: bool
    tool: str | None = None
    rationale: str = ""

    def __post_init__(self):
        if self.atomic and self.tool not in TOOLS:
            raise PreconditionError(f"atomic verdict needs a valid tool, got {self.tool!r}")
        if not self.atomic and self.tool is not None:
            raise PreconditionError("non-atomic verdict must not carry a tool")

    def to_dict(self) -> dict:
        return {"atomic": self.atomic, "tool": self.tool, "rationale": self.rationale}

    @staticmethod
    def from_dict(d: dict) -> "AtomicityVerdict":
        return AtomicityVerdict(bool(d["atomic"]), d.get("tool"), d.get("rationale", ""))


@dataclass
class Plan:
    task_id: str
    subtasks: list[TaskSpec]
    dependencies: list[tuple[int, int]] = field(default_factory=list)
    rationale: str = ""

    def __post_init__(self):
        if not self.subtasks:
            raise PreconditionError("plan must have at least one subtask")
        n = len(self.subtasks)
        for a, b in self.dependencies:
            if not (0 <= a < n and 0 <= b < n):
                raise PreconditionError(f"dependency ({a}, {b}) out of range for {n} subtasks")
        if _has_cycle(n, self.dependencies):
            raise PreconditionError("dependency graph has a cycle")

    def execution_order(self) -> list[int]:
        """Topological order; ties broken by subtask index."""
        n = len(self.subtasks)
        succs: dict[int, list[int]] = {i: [] for i in range(n)}
        indeg = [0] * n
        for a, b in self.dependencies:
            succs[a].append(b)
            indeg[b] += 1
        ready = sorted(i for i in range(n) if indeg[i] == 0)
        order: list[int] = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            for s in sorted(succs[node]):
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
            ready.sort()
        return order

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "subtasks": [s.to_dict() for s in self.subtasks],
            "dependencies": [list(d) for d in self.dependencies],
            "rationale": self.rationale,
        }

    @staticmethod
    def from_dict(d: dict) -> "Plan":
        return Plan(
            task_id=d["task_id"],
            subtasks=[TaskSpec.from_dict(s) for s in d["subtasks"]],
            dependencies=[(int(a), int(b)) for a, b in d.get("dependencies", [])],
            rationale=d.get("rationale", ""),
        )


def _has_cycle(n: int, edges: list[tuple[int, int]]) -> bool:
    succs: dict[int, list[int]] = {i: [] for i in range(n)}
    for a, b in edges:
        succs[a].append(b)
    state = [0] * n  # 0 unvisited, 1 in progress, 2 done
    stack: list[tuple[int, int]] = []
    for start in range(n):
        if state[start]:
            continue
        stack = [(start, 0)]
        state[start] = 1
        while stack:
            node, i = stack[-1]
            if i < len(succs[node]):
                stack[-1] = (node, i + 1)
                nxt = succs[node][i]
                if state[nxt] == 1:
                    return True
                if state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, 0))
            else:
                state[node] = 2
                stack.pop()
    return False


@dataclass(frozen=True)
class EvidenceRef:
    kind: str  # axiom | theorem | prior-step | external-document | web-result
    target_id: str
    excerpt: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "target_id": self.target_id, "excerpt": self.excerpt}

    @staticmethod
    def from_dict(d: dict) -> "EvidenceRef":
        return EvidenceRef(d["kind"], d["target_id"], d.get("excerpt", ""))


Atom3 = tuple[str, str, FactValue]


def _atoms_to_json(atoms: list[Atom3]) -> list:
    return [[e, a, _value_to_json(v)] for e, a, v in atoms]


def _atoms_from_json(raw: list) -> list[Atom3]:
    return [(e, a, _value_from_json(v)) for e, a, v in raw]


@dataclass
class ReasoningStep:
    index: int
    subtask_id: str
    tool: str
    prompt: str
    evidence: list[EvidenceRef]
    conclusion_text: str
    atoms: list[Atom3]  # structured conclusion: fact-set delta plus verdict claims
    raw_output: str
    token_usage: TokenUsage

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "subtask_id": self.subtask_id,
            "tool": self.tool,
            "prompt": self.prompt,
            "evidence": [e.to_dict() for e in self.evidence],
            "conclusion_text": self.conclusion_text,
            "atoms": _atoms_to_json(self.atoms),
            "raw_output": self.raw_output,
            "token_usage": self.token_usage.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "ReasoningStep":
        return ReasoningStep(
            index=int(d["index"]),
            subtask_id=d["subtask_id"],
            tool=d["tool"],
            prompt=d["prompt"],
            evidence=[EvidenceRef.from_dict(e) for e in d.get("evidence", [])],
            conclusion_text=d["conclusion_text"],
            atoms=_atoms_from_json(d.get("atoms", [])),
            raw_output=d.get("raw_output", ""),
            token_usage=TokenUsage.from_dict(d["token_usage"]),
        )


@dataclass
class FinalAnswer:
    text: str
    atoms: list[Atom3] = field(default_factory=list)
    verdict: str = "none"  # correct | erroneous | none

    def to_dict(self) -> dict:
        return {"text": self.text, "atoms": _atoms_to_json(self.atoms), "verdict": self.verdict}

    @staticmethod
    def from_dict(d: dict) -> "FinalAnswer":
        return FinalAnswer(d["text"], _atoms_from_json(d.get("atoms", [])), d.get("verdict", "none"))


@dataclass
class ExecutionLog:
    task: TaskSpec
    plan: Plan | None = None
    atomicity: AtomicityVerdict | None = None
    steps: list[ReasoningStep] = field(default_factory=list)
    children: list["ExecutionLog"] = field(default_factory=list)
    final_answer: FinalAnswer | None = None
    mode: str = "de-novo"  # de-novo | rag-match
    started: float = 0.0
    finished: float = 0.0
    total_tokens: int = 0
    # Planner/aggregator call tokens for this node, outside the step sum.
    overhead_tokens: int = 0
    status: str = "completed"  # completed | failed
    error: str | None = None

    @property
    def complete(self) -> bool:
        return self.status == "completed" and self.final_answer is not None

    def flat_steps(self) -> list[ReasoningStep]:
        """All steps across the tree, in execution order."""
        out: list[ReasoningStep] = []
        out.extend(self.steps)
        for child in self.children:
            out.extend(child.flat_steps())
        out.sort(key=lambda s: s.index)
        return out

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children), default=0)

    def compute_total_tokens(self) -> int:
        return sum(s.token_usage.total for s in self.steps) + sum(
            c.compute_total_tokens() for c in self.children
        )

    def cost_tokens(self) -> int:
        """Full task cost: step tokens plus planner/aggregator overhead."""
        return (
            self.compute_total_tokens()
            + self.overhead_tokens
            + sum(c.overhead_tokens_total() for c in self.children)
        )

    def overhead_tokens_total(self) -> int:
        return self.overhead_tokens + sum(c.overhead_tokens_total() for c in self.children)

    def to_dict(self) -> dict:
        return {
            "schema": "log_v1",
            "task": self.task.to_dict(),
            "plan": self.plan.to_dict() if self.plan else None,
            "atomicity": self.atomicity.to_dict() if self.atomicity else None,
            "steps": [s.to_dict() for s in self.steps],
            "children": [c.to_dict() for c in self.children],
            "final_answer": self.final_answer.to_dict() if self.final_answer else None,
            "mode": self.mode,
            "started": self.started,
            "finished": self.finished,
            "total_tokens": self.total_tokens,
            "overhead_tokens": self.overhead_tokens,
            "status": self.status,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_dict(d: dict) -> "ExecutionLog":
        if d.get("schema") != "log_v1":
            raise PreconditionError(f"unsupported log schema {d.get('schema')!r}")
        return ExecutionLog(
            task=TaskSpec.from_dict(d["task"]),
            plan=Plan.from_dict(d["plan"]) if d.get("plan") else None,
            atomicity=AtomicityVerdict.from_dict(d["atomicity"]) if d.get("atomicity") else None,
            steps=[ReasoningStep.from_dict(s) for s in d.get("steps", [])],
            children=[ExecutionLog.from_dict(c) for c in d.get("children", [])],
            final_answer=FinalAnswer.from_dict(d["final_answer"]) if d.get("final_answer") else None,
            mode=d.get("mode", "de-novo"),
            started=d.get("started", 0.0),
            finished=d.get("finished", 0.0),
            total_tokens=int(d.get("total_tokens", 0)),
            overhead_tokens=int(d.get("overhead_tokens", 0)),
            status=d.get("status", "completed"),
            error=d.get("error"),
        )

    @staticmethod
    def from_json(text: str) -> "ExecutionLog":
        return ExecutionLog.from_dict(json.loads(text))
