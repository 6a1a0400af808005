"""Prompt templates.

Placeholders use ``{name}`` form; rendering is plain deterministic
substitution. A placeholder without a binding raises template-error, so a
prompt can never silently go out with a hole in it.
"""

from __future__ import annotations

import re

from ..errors import TemplateError

TEMPLATES: dict[str, str] = {
    "atomicity": (
        "Decide whether the following task is atomic, meaning it can be completed "
        "by a single call to one of the tools: direct-query, kb-retrieval, web-search.\n"
        "Task: {description}\n"
        "Scenario: {scenario}\n"
        'Reply as JSON: {{"atomic": true|false, "tool": "<tool if atomic>", "rationale": "..."}}'
    ),
    "plan": (
        "Decompose the task into an ordered list of smaller sub-tasks with dependencies.\n"
        "Task: {description}\n"
        "Scenario: {scenario}\n"
        "Known fact attributes: {fact_attrs}\n"
        "Reply as JSON: {{\"subtasks\": [{{\"description\": \"...\", \"topics\": [\"...\"], "
        "\"inputs\": [\"...\"], \"outputs\": [\"...\"]}}], "
        "\"dependencies\": [[from_index, to_index]], \"rationale\": \"...\"}}"
    ),
    "direct-query": (
        "Answer the sub-task below. If you can state structured findings, reply as JSON "
        '{{"text": "...", "atoms": [[entity, attribute, value]], '
        '"evidence": [{{"kind": "...", "target_id": "...", "excerpt": "..."}}]}}; '
        "otherwise reply with plain text.\n"
        "Sub-task: {description}\n"
        "Known facts:\n{facts}"
    ),
    "aggregate": (
        "Synthesize the sub-task results below into one final answer for the task.\n"
        "Task: {description}\n"
        "Sub-task conclusions:\n{conclusions}\n"
        "Draft summary: {draft}\n"
        'Reply as JSON: {{"text": "...", "verdict": "correct|erroneous|none", '
        '"atoms": [[entity, attribute, value]]}}'
    ),
    "extract": (
        "Extract candidate rules from the document below. Express each rule in the "
        "engine's rule grammar (IF/THEN/UNLESS/AND/OR/NOT/FORBID/REQUIRE/CONTAINS/IN, "
        "atoms of the form entity.attribute comparator literal) and quote the exact "
        "source span it came from.\n"
        "Document id: {document_id}\n"
        "Document:\n{document}\n"
        'Reply as JSON: {{"candidates": [{{"rule_text": "...", "excerpt": "..."}}]}}'
    ),
    "derive": (
        "Derive new theorems that follow logically from the approved rules below. "
        "Cite the ids each theorem is derived from.\n"
        "Approved rules:\n{axioms}\n"
        'Reply as JSON: {{"theorems": [{{"rule_text": "...", "derived_from": ["..."], '
        '"rationale": "..."}}]}}'
    ),
    "abstract": (
        "Abstract the specific task below into a generic process template, replacing "
        "concrete entities with typed placeholders from: {placeholders}.\n"
        "Task: {description}\n"
        'Reply as JSON: {{"template": "...", "bindings": {{"placeholder": "value"}}}}'
    ),
    "rapid-judge": (
        "Does the current task instance fit the logical pattern of the stored theorem?\n"
        "Task: {description}\n"
        "Case facts:\n{facts}\n"
        "Theorem template: {template}\n"
        "Theorem rule: {rule}\n"
        'Reply as JSON: {{"fits": true|false, "justification": "..."}}'
    ),
    "baseline": (
        "You are reviewing a case for errors in a single pass. Relevant rules:\n{axioms}\n"
        "Case facts:\n{facts}\n"
        "Is the case erroneous? "
        'Reply as JSON: {{"flag": true|false, "justification": "..."}}'
    ),
    "generate-case": (
        "Write a short realistic narrative for the structured case below.\n"
        "Scenario: {scenario}\nFacts:\n{facts}"
    ),
    # Audit prompts, one per verification dimension.
    "audit-plan": (
        "Act as a reviewer. Does the decomposition plan logically address the initial "
        "task? Check that every goal is produced by some sub-task and that the "
        "dependency order is coherent.\n"
        "Task: {description}\nPlan:\n{plan}\n"
        'Reply as JSON: {{"ok": true|false, "reason": "..."}}'
    ),
    "audit-evidence": (
        "Act as a reviewer. Is every factual claim in the conclusion directly "
        "supported by the cited evidence, and is the cited source commensurate with "
        "the claim being made?\n"
        "Claim: {claim}\nEvidence:\n{evidence}\n"
        'Reply as JSON: {{"ok": true|false, "reason": "..."}}'
    ),
    "audit-fallacy": (
        "Act as a reviewer. Is the inference from the previous conclusions to the new "
        "conclusion valid? Are there any logical leaps, contradictions, or unsupported "
        "conclusions?\n"
        "Previous conclusions:\n{previous}\nNew conclusion: {conclusion}\n"
        'Reply as JSON: {{"fallacy": null | "description"}}'
    ),
    "audit-aggregation": (
        "Act as a reviewer. Can the final answer be logically derived from the step "
        "conclusions alone?\n"
        "Step conclusions:\n{conclusions}\nFinal answer: {final}\n"
        'Reply as JSON: {{"ok": true|false, "reason": "..."}}'
    ),
}

# Prompt variants give consensus audits diversity without sampling noise.
AUDIT_VARIANT_PREFIXES: dict[str, str] = {
    "v1": "",
    "v2": "Be strict: when in doubt, flag the issue rather than letting it pass.\n",
    "v3": "Focus on evidence sufficiency and cite the weakest link explicitly.\n",
}

_PLACEHOLDER = re.compile(r"(?<!\{)\{([a-z_][a-z0-9_]*)\}(?!\})")


def render_prompt(template_id: str, bindings: dict[str, str]) -> str:
    """Render a registered template, substituting every placeholder.

    Raises template-error for an unknown template or an unbound placeholder.
    """
    if template_id not in TEMPLATES:
        raise TemplateError(f"unknown template {template_id!r}")
    text = TEMPLATES[template_id]
    needed = set(_PLACEHOLDER.findall(text))
    missing = needed - set(bindings)
    if missing:
        raise TemplateError(
            f"template {template_id!r} missing bindings: {', '.join(sorted(missing))}"
        )
    out = _PLACEHOLDER.sub(lambda m: bindings[m.group(1)], text)
    return out.replace("{{", "{").replace("}}", "}")
