"""LLM-assisted rule extraction and theorem derivation.

Both operations only ever produce candidates; nothing becomes usable
knowledge until a reviewer approves it.
"""

from __future__ import annotations

import logging

from ..errors import ParseError, PreconditionError
from ..gateway import ChatRequest, complete_json, render_prompt
from ..rules import parse_rule, print_rule
from .models import Axiom, SourceSpan
from .store import KnowledgeBase

logger = logging.getLogger(__name__)

SYSTEM_EXTRACTOR = (
    "You convert regulatory and clinical prose into formal IF-THEN rules for a "
    "verification engine. Be precise and quote your sources."
)


def _validate_extraction(doc: dict) -> str | None:
    if not isinstance(doc.get("candidates"), list):
        return 'missing "candidates" list'
    for c in doc["candidates"]:
        if not isinstance(c, dict) or "rule_text" not in c or "excerpt" not in c:
            return 'each candidate needs "rule_text" and "excerpt"'
    return None


def extract_candidates(
    document: str,
    document_id: str,
    scenario: str,
    kb: KnowledgeBase,
    backend,
) -> list[Axiom]:
    """Extract candidate rules from a document into the review queue.

    Parseable extractions become candidates; unparseable ones are kept as
    rejected records with the parse failure as the reason, so reviewers can
    still see what the extractor attempted. Excerpts must occur verbatim in
    the document or the candidate is likewise rejected.
    """
    if not document.strip():
        raise PreconditionError("document is empty")
    request = ChatRequest(
        role_tag="extractor",
        system_prompt=SYSTEM_EXTRACTOR,
        user_prompt=render_prompt("extract", {"document_id": document_id, "document": document}),
        response_schema="extract_v1",
    )
    doc, _usage = complete_json(backend, request, _validate_extraction)
    out: list[Axiom] = []
    for cand in doc["candidates"]:
        rule_text = str(cand["rule_text"])
        excerpt = str(cand["excerpt"])
        start = document.find(excerpt)
        source = SourceSpan(document_id, start, start + len(excerpt), excerpt) if start >= 0 else None
        if start < 0:
            out.append(
                kb.add_candidate(
                    scenario, "axiom", rule_text, origin="llm-extracted",
                    status="rejected", note=f"excerpt not found verbatim in {document_id}",
                )
            )
            continue
        try:
            canonical = print_rule(parse_rule(rule_text))
        except ParseError as exc:
            out.append(
                kb.add_candidate(
                    scenario, "axiom", rule_text, origin="llm-extracted",
                    source=source, status="rejected", note=f"unparseable rule: {exc.message}",
                )
            )
            continue
        out.append(
            kb.add_candidate(
                scenario, "axiom", canonical, origin="llm-extracted", source=source
            )
        )
    return out


def _validate_derivation(doc: dict) -> str | None:
    if not isinstance(doc.get("theorems"), list):
        return 'missing "theorems" list'
    for t in doc["theorems"]:
        if not isinstance(t, dict) or "rule_text" not in t or not isinstance(t.get("derived_from"), list):
            return 'each theorem needs "rule_text" and a "derived_from" list'
    return None


def derive_theorems(scenario: str, kb: KnowledgeBase, backend) -> list[Axiom]:
    """Ask the backend to derive theorem candidates from approved axioms.

    A derivation citing any non-approved id is discarded with a warning:
    theorems may only stand on confirmed knowledge.
    """
    approved = kb.approved_for_scenario(scenario, kind="axiom")
    if not approved:
        raise PreconditionError(f"no approved axioms for scenario {scenario!r}")
    listing = "\n".join(f"{a.id}: {a.rule_text}" for a in approved)
    request = ChatRequest(
        role_tag="extractor",
        system_prompt=SYSTEM_EXTRACTOR,
        user_prompt=render_prompt("derive", {"axioms": listing}),
        response_schema="derive_v1",
    )
    doc, _usage = complete_json(backend, request, _validate_derivation)
    approved_ids = {a.id for a in approved}
    out: list[Axiom] = []
    for item in doc["theorems"]:
        cited = [str(x) for x in item["derived_from"]]
        bad = [c for c in cited if c not in approved_ids]
        if bad:
            logger.warning("discarding derived theorem citing non-approved ids: %s", ", ".join(bad))
            continue
        rule_text = str(item["rule_text"])
        try:
            canonical = print_rule(parse_rule(rule_text))
        except ParseError as exc:
            out.append(
                kb.add_candidate(
                    scenario, "theorem", rule_text, origin="llm-derived",
                    derived_from=cited, status="rejected",
                    note=f"unparseable rule: {exc.message}",
                )
            )
            continue
        out.append(
            kb.add_candidate(
                scenario, "theorem", canonical, origin="llm-derived",
                derived_from=cited, note=item.get("rationale"),
            )
        )
    return out
