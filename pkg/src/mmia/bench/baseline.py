"""One-shot baseline: the same backend and the same rule base, but a single
prompt and a single reply instead of the plan-execute-audit loop."""

from __future__ import annotations

from ..gateway import ChatRequest, TokenUsage, complete_json, render_prompt
from ..kb.store import KnowledgeBase
from ..retrieval import embed
from .cases import BenchmarkCase
from .packs import render_facts

SYSTEM_BASELINE = "You review healthcare administration cases for errors in a single pass."

TOP_K = 5


def _validate_baseline(doc: dict) -> str | None:
    if not isinstance(doc.get("flag"), bool):
        return 'missing boolean "flag"'
    return None


def baseline_oneshot(case: BenchmarkCase, kb: KnowledgeBase, backend) -> tuple[bool, str, TokenUsage]:
    """Single prompt embedding the case and the top-k retrieved rules.

    Returns (flag, justification, token usage).
    """
    rules = kb.approved_for_scenario(case.scenario, kind="axiom")
    facts_text = render_facts(case.facts)
    if rules:
        query = embed(facts_text)
        scored = sorted(
            ((query.cosine(embed(r.rule_text)), r) for r in rules),
            key=lambda t: (-t[0], t[1].id),
        )
        picked = [r for _, r in scored[:TOP_K]]
    else:
        picked = []
    request = ChatRequest(
        role_tag="judge",
        system_prompt=SYSTEM_BASELINE,
        user_prompt=render_prompt(
            "baseline",
            {
                "axioms": "\n".join(f"{r.id}: {r.rule_text}" for r in picked) or "(none)",
                "facts": facts_text,
            },
        ),
        response_schema="baseline_v1",
    )
    doc, usage = complete_json(backend, request, _validate_baseline)
    return bool(doc["flag"]), str(doc.get("justification", "")), usage
