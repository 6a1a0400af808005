"""Theorem matching: abstract the task, search the template index, confirm
with one cheap judgment call. A failed match is not an error; the caller
falls back to full reasoning."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from ..errors import PreconditionError
from ..gateway import ChatRequest, TokenUsage, complete_json, render_prompt
from ..kb.store import KnowledgeBase
from .embedding import embed
from .index import VectorIndex

if TYPE_CHECKING:
    from ..engine.types import TaskSpec

# Placeholder vocabulary shared by all scenario packs.
PLACEHOLDERS = ("diagnosis", "procedure", "drug", "allergy", "clause", "duration")

_PLACEHOLDER_RE = re.compile(r"\{(" + "|".join(PLACEHOLDERS) + r")\}")

SYSTEM_ABSTRACTOR = (
    "You abstract concrete tasks into generic process templates so they can be "
    "matched against stored reasoning patterns."
)
SYSTEM_JUDGE = "You decide whether a task instance fits a stored reasoning pattern."


@dataclass
class ProcessTemplate:
    text: str
    bindings: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    usage: TokenUsage = TokenUsage(0, 0)

    def __post_init__(self):
        if not self.text.strip():
            raise PreconditionError("template text must be non-empty")


@dataclass
class MatchResult:
    decision: str  # matched | below-threshold
    theorem_id: str | None = None
    similarity: float = 0.0
    template: ProcessTemplate | None = None
    justification: str = ""
    usage: TokenUsage = TokenUsage(0, 0)

    def to_brief(self) -> dict:
        return {
            "decision": self.decision,
            "theorem_id": self.theorem_id,
            "similarity": round(self.similarity, 6),
        }


@dataclass
class JudgeResult:
    fits: bool
    justification: str
    usage: TokenUsage


def _validate_abstract(doc: dict) -> str | None:
    if not isinstance(doc.get("template"), str) or not doc["template"].strip():
        return 'missing non-empty "template"'
    if not isinstance(doc.get("bindings", {}), dict):
        return '"bindings" must be an object'
    return None


def abstract_task(task: "TaskSpec", backend) -> ProcessTemplate:
    """Abstract a concrete task description into a process template.

    A description already written in template form is returned unchanged.
    If the backend leaves a bound concrete value verbatim in the template, a
    placeholder-coverage warning is attached rather than failing the match.
    """
    if _PLACEHOLDER_RE.search(task.description):
        return ProcessTemplate(text=task.description)
    request = ChatRequest(
        role_tag="abstractor",
        system_prompt=SYSTEM_ABSTRACTOR,
        user_prompt=render_prompt(
            "abstract",
            {
                "description": task.description,
                "placeholders": ", ".join("{%s}" % p for p in PLACEHOLDERS),
            },
        ),
        response_schema="abstract_v1",
    )
    doc, usage = complete_json(backend, request, _validate_abstract)
    bindings = {str(k): str(v) for k, v in doc.get("bindings", {}).items()}
    warnings = [
        f"concrete value {v!r} for {{{k}}} still appears in the template"
        for k, v in bindings.items()
        if v and v.lower() in doc["template"].lower()
    ]
    return ProcessTemplate(text=doc["template"], bindings=bindings, warnings=warnings, usage=usage)


def _validate_judge(doc: dict) -> str | None:
    if not isinstance(doc.get("fits"), bool):
        return 'missing boolean "fits"'
    return None


def rapid_judge(task: "TaskSpec", theorem, backend) -> JudgeResult:
    """One backend call: does the task instance fit the theorem's pattern?"""
    if theorem.status != "approved":
        raise PreconditionError(f"theorem {theorem.id} is {theorem.status}, not approved")
    facts_lines = []
    for e, a, v in sorted(task.facts.triples(), key=lambda t: (t[0], t[1], str(t[2]))):
        lhs = f"{e}.{a}" if e else a
        facts_lines.append(f"{lhs} = {v}")
    request = ChatRequest(
        role_tag="judge",
        system_prompt=SYSTEM_JUDGE,
        user_prompt=render_prompt(
            "rapid-judge",
            {
                "description": task.description,
                "facts": "\n".join(facts_lines) or "(none)",
                "template": theorem.template or "(no template recorded)",
                "rule": theorem.rule_text,
            },
        ),
        response_schema="judge_v1",
    )
    doc, usage = complete_json(backend, request, _validate_judge)
    return JudgeResult(fits=bool(doc["fits"]), justification=str(doc.get("justification", "")), usage=usage)


def match_theorem(
    task: "TaskSpec",
    kb: KnowledgeBase,
    index: VectorIndex,
    threshold: float,
    backend,
) -> MatchResult:
    """Template-match the task against the approved-theorem index.

    matched requires BOTH similarity >= threshold (strict >=) and a
    confirming rapid judgment; anything else is below-threshold so the
    caller falls back to de novo reasoning. An empty index is simply
    below-threshold, not an error.
    """
    template = abstract_task(task, backend)
    usage = template.usage
    if len(index) == 0:
        return MatchResult(decision="below-threshold", template=template, usage=usage)
    hits = index.query_topk(embed(template.text), k=1)
    theorem_id, similarity = hits[0]
    theorem = kb.get(theorem_id)
    if theorem is None or theorem.status != "approved":
        return MatchResult(
            decision="below-threshold", similarity=similarity, template=template, usage=usage
        )
    if similarity < threshold:
        return MatchResult(
            decision="below-threshold",
            theorem_id=theorem_id,
            similarity=similarity,
            template=template,
            usage=usage,
        )
    judged = rapid_judge(task, theorem, backend)
    usage = TokenUsage(
        usage.prompt_tokens + judged.usage.prompt_tokens,
        usage.completion_tokens + judged.usage.completion_tokens,
    )
    if not judged.fits:
        return MatchResult(
            decision="below-threshold",
            theorem_id=theorem_id,
            similarity=similarity,
            template=template,
            justification=judged.justification,
            usage=usage,
        )
    return MatchResult(
        decision="matched",
        theorem_id=theorem_id,
        similarity=similarity,
        template=template,
        justification=judged.justification,
        usage=usage,
    )
