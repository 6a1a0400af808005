"""Knowledge-base lifecycle, extraction, and derivation."""

import json

import pytest

from mmia.errors import ParseError, PreconditionError, StateError
from mmia.gateway import ScriptRule, ScriptedBackend, ScriptedScenario
from mmia.kb import KnowledgeBase, derive_theorems, extract_candidates


@pytest.fixture()
def kb(tmp_path):
    return KnowledgeBase(
        path=tmp_path / "kb.jsonl", audit_path=tmp_path / "kb_audit.jsonl", clock=lambda: 0.0
    )


def _candidate(kb, text='IF a.x = 1 THEN a.y = 2'):
    return kb.add_candidate("ehr", "axiom", text)


class TestLifecycle:
    def test_approve_happy_path(self, kb):
        record = _candidate(kb)
        approved = kb.review_decision(record.id, "approve", reviewer="dr-lee")
        assert approved.status == "approved"
        assert kb.approved()[0].id == record.id

    def test_double_approve_is_state_error(self, kb):
        record = _candidate(kb)
        kb.review_decision(record.id, "approve", reviewer="dr-lee")
        with pytest.raises(StateError):
            kb.review_decision(record.id, "approve", reviewer="dr-lee")

    def test_reject_then_approve_is_state_error(self, kb):
        record = _candidate(kb)
        kb.review_decision(record.id, "reject", reviewer="dr-lee")
        with pytest.raises(StateError):
            kb.review_decision(record.id, "approve", reviewer="dr-lee")

    def test_edit_supersedes_and_creates_new_version(self, kb):
        record = _candidate(kb)
        edited = kb.review_decision(
            record.id, "edit", reviewer="dr-lee", new_rule_text="IF a.x = 1 THEN a.y = 3"
        )
        assert edited.version == 2
        assert edited.status == "candidate"
        assert kb.get(record.id, version=1).status == "superseded"
        assert kb.get(record.id).version == 2

    def test_unparseable_edit_changes_nothing(self, kb):
        record = _candidate(kb)
        with pytest.raises(ParseError):
            kb.review_decision(record.id, "edit", reviewer="dr-lee", new_rule_text="IF THEN")
        assert kb.get(record.id).status == "candidate"
        assert kb.get(record.id).version == 1

    def test_audit_trail_length_equals_transitions(self, kb):
        record = _candidate(kb)  # none -> candidate
        kb.review_decision(record.id, "edit", reviewer="r", new_rule_text="a.x = 1")  # 2 events
        new = kb.get(record.id)
        kb.review_decision(new.id, "approve", reviewer="r")  # 1 event
        assert len(kb.audit_trail()) == 4

    def test_ids_are_stable_and_sequential(self, kb):
        a = kb.add_candidate("ehr", "axiom", "a.x = 1")
        b = kb.add_candidate("ehr", "axiom", "a.y = 2")
        t = kb.add_candidate("ehr", "theorem", "a.z = 3")
        assert (a.id, b.id, t.id) == ("EHR-A1", "EHR-A2", "EHR-T1")

    def test_reload_from_jsonl_preserves_state(self, kb, tmp_path):
        record = _candidate(kb)
        kb.review_decision(record.id, "approve", reviewer="dr-lee")
        reloaded = KnowledgeBase(path=tmp_path / "kb.jsonl")
        assert reloaded.get(record.id).status == "approved"
        assert reloaded.next_id("ehr", "axiom") == "EHR-A2"


EXTRACT_DOC = (
    "Basic documentation norms: after a patient is admitted, the initial "
    "progress note must be completed within 8 hours of admission."
)


def _extraction_backend(candidates):
    reply = json.dumps({"candidates": candidates})
    return ScriptedBackend(ScriptedScenario(rules=[ScriptRule(response=reply)]))


class TestExtraction:
    def test_extracts_parseable_candidate_with_source_span(self, kb):
        backend = _extraction_backend(
            [
                {
                    "rule_text": 'IF event = "admission" THEN note.initial_progress_hours <= 8',
                    "excerpt": "completed within 8 hours",
                }
            ]
        )
        out = extract_candidates(EXTRACT_DOC, "norms-doc", "ehr", kb, backend)
        assert len(out) == 1
        assert out[0].status == "candidate"
        assert out[0].origin == "llm-extracted"
        span = out[0].source
        assert EXTRACT_DOC[span.start : span.end] == "completed within 8 hours"

    def test_empty_document_rejected(self, kb):
        with pytest.raises(PreconditionError):
            extract_candidates("   ", "d", "ehr", kb, _extraction_backend([]))

    def test_malformed_rule_kept_as_rejected_record(self, kb):
        backend = _extraction_backend(
            [{"rule_text": "IF THEN", "excerpt": "completed within 8 hours"}]
        )
        out = extract_candidates(EXTRACT_DOC, "norms-doc", "ehr", kb, backend)
        assert out[0].status == "rejected"
        assert "unparseable" in out[0].note

    def test_excerpt_not_in_document_rejected(self, kb):
        backend = _extraction_backend(
            [{"rule_text": "a.x = 1", "excerpt": "text that is not there"}]
        )
        out = extract_candidates(EXTRACT_DOC, "norms-doc", "ehr", kb, backend)
        assert out[0].status == "rejected"


class TestDerivation:
    def _approved_kb(self, kb):
        a = kb.add_candidate("ehr", "axiom", 'IF p.drug = "a" THEN p.risk = "x"')
        b = kb.add_candidate("ehr", "axiom", 'IF p.drug = "b" THEN p.risk = "x"')
        kb.review_decision(a.id, "approve", reviewer="r")
        kb.review_decision(b.id, "approve", reviewer="r")
        return a, b

    def test_derived_theorem_enters_as_candidate(self, kb):
        a, b = self._approved_kb(kb)
        backend = ScriptedBackend(
            ScriptedScenario(
                rules=[
                    ScriptRule(
                        response=json.dumps(
                            {
                                "theorems": [
                                    {
                                        "rule_text": 'IF p.drug = "a" THEN FORBID p.second_drug = "b"',
                                        "derived_from": [a.id, b.id],
                                        "rationale": "both raise the same risk",
                                    }
                                ]
                            }
                        )
                    )
                ]
            )
        )
        out = derive_theorems("ehr", kb, backend)
        assert len(out) == 1
        assert out[0].kind == "theorem"
        assert out[0].status == "candidate"
        assert out[0].derived_from == [a.id, b.id]

    def test_requires_approved_axioms(self, kb):
        with pytest.raises(PreconditionError):
            derive_theorems("ehr", kb, _extraction_backend([]))

    def test_theorem_citing_unapproved_axiom_discarded(self, kb):
        a, _ = self._approved_kb(kb)
        rejected = kb.add_candidate("ehr", "axiom", "a.q = 1")
        kb.review_decision(rejected.id, "reject", reviewer="r")
        backend = ScriptedBackend(
            ScriptedScenario(
                rules=[
                    ScriptRule(
                        response=json.dumps(
                            {
                                "theorems": [
                                    {"rule_text": "a.x = 1", "derived_from": [rejected.id]}
                                ]
                            }
                        )
                    )
                ]
            )
        )
        assert derive_theorems("ehr", kb, backend) == []


class TestLifecycleProperties:
    def test_random_operation_sequences_preserve_safety(self, tmp_path):
        """No operation sequence moves approved->candidate or
        rejected->approved on the same version, decisions on non-candidates
        change nothing, and the audit trail grows by exactly one entry per
        transition (two for edits)."""
        import random as random_module

        rng = random_module.Random(4242)
        for trial in range(25):
            kb = KnowledgeBase(
                path=tmp_path / f"kb{trial}.jsonl",
                audit_path=tmp_path / f"trail{trial}.jsonl",
                clock=lambda: 0.0,
            )
            transitions = 0
            settled: dict[tuple[str, int], str] = {}  # terminal status per version
            for step in range(rng.randrange(3, 25)):
                op = rng.choice(("add", "approve", "reject", "edit"))
                records = kb.all()
                if op == "add" or not records:
                    kb.add_candidate("generic", "axiom", f"a.f{step} = {step}")
                    transitions += 1
                else:
                    target = rng.choice(records)
                    before = kb.get(target.id, version=target.version).status
                    try:
                        if op == "edit":
                            kb.review_decision(
                                target.id, "edit", reviewer="r", new_rule_text=f"a.g{step} = {step}"
                            )
                            transitions += 2  # superseded + new candidate version
                        else:
                            kb.review_decision(target.id, op, reviewer="r")
                            transitions += 1
                    except StateError:
                        after = kb.get(target.id, version=target.version).status
                        assert after == before  # rejected decisions change nothing
                # Terminal statuses never change once reached.
                for rec in kb.all():
                    key = (rec.id, rec.version)
                    if key in settled:
                        assert rec.status == settled[key], f"{key} left {settled[key]}"
                    elif rec.status in ("approved", "rejected", "superseded"):
                        settled[key] = rec.status
            assert len(kb.audit_trail()) == transitions
