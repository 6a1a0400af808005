"""Embeddings, exact top-k search, and theorem matching."""

import json
import math
import random

import numpy as np
import pytest

from mmia.engine import TaskSpec
from mmia.errors import IndexError_, PreconditionError
from mmia.gateway import ScriptRule, ScriptedBackend, ScriptedScenario
from mmia.kb import KnowledgeBase
from mmia.retrieval import Embedding, VectorIndex, abstract_task, embed, match_theorem, rapid_judge
from mmia.retrieval.embedding import EMBEDDER_ID


class TestEmbedding:
    def test_deterministic(self):
        t = "verify clinical logic consistency between {diagnosis} and {procedure}"
        assert embed(t) == embed(t)

    def test_unit_norm(self):
        v = np.asarray(embed("some template text").vector)
        assert abs(float(np.linalg.norm(v)) - 1.0) < 1e-9

    def test_self_similarity_is_one(self):
        e = embed("a template")
        assert abs(e.cosine(e) - 1.0) < 1e-9

    def test_one_word_difference_lowers_cosine(self):
        a = embed("verify clinical logic consistency between diagnosis and procedure")
        b = embed("verify clinical logic consistency between diagnosis and medication")
        assert a.cosine(b) < 1.0 - 1e-6

    def test_empty_text_rejected(self):
        with pytest.raises(PreconditionError):
            embed("   ")

    def test_short_text_still_embeds(self):
        assert abs(np.linalg.norm(embed("hi").vector) - 1.0) < 1e-9


def _random_unit(rng: random.Random, dim: int = 256) -> Embedding:
    v = [rng.gauss(0, 1) for _ in range(dim)]
    n = math.sqrt(sum(x * x for x in v))
    return Embedding(vector=tuple(x / n for x in v), embedder_id=EMBEDDER_ID)


def brute_force_topk(vectors: dict[str, Embedding], query: Embedding, k: int):
    scored = [
        (item_id, sum(a * b for a, b in zip(vec.vector, query.vector)))
        for item_id, vec in vectors.items()
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return [(i, pytest.approx(s, abs=1e-9)) for i, s in scored[:k]]


class TestIndex:
    def test_exact_hit(self):
        index = VectorIndex()
        e = embed("stored template")
        index.upsert("A", e)
        [(item, sim)] = index.query_topk(e, k=1)
        assert item == "A" and abs(sim - 1.0) < 1e-9

    def test_k_larger_than_index(self):
        index = VectorIndex()
        index.upsert("A", embed("one"))
        index.upsert("B", embed("two"))
        assert len(index.query_topk(embed("one"), k=10)) == 2

    def test_matches_brute_force_on_random_vectors(self):
        rng = random.Random(99)
        index = VectorIndex()
        vectors = {}
        for i in range(5):
            e = _random_unit(rng)
            vectors[f"id{i}"] = e
            index.upsert(f"id{i}", e)
        q = _random_unit(rng)
        got = index.query_topk(q, k=5)
        want = brute_force_topk(vectors, q, 5)
        assert [g[0] for g in got] == [w[0] for w in want]

    def test_tie_broken_by_ascending_id(self):
        index = VectorIndex()
        e = embed("identical")
        index.upsert("B", e)
        index.upsert("A", e)
        ranked = index.query_topk(e, k=2)
        assert [r[0] for r in ranked] == ["A", "B"]

    def test_upsert_replaces(self):
        index = VectorIndex()
        index.upsert("A", embed("old"))
        index.upsert("A", embed("brand new text"))
        [(_, sim)] = index.query_topk(embed("brand new text"), k=1)
        assert abs(sim - 1.0) < 1e-9

    def test_upsert_idempotent(self):
        index = VectorIndex()
        e1, e2 = embed("one"), embed("two")
        index.upsert("A", e1)
        index.upsert("B", e2)
        before = index.query_topk(e1, k=2)
        index.upsert("A", e1)
        assert index.query_topk(e1, k=2) == before

    def test_dimension_mismatch(self):
        index = VectorIndex(dimension=256)
        small = Embedding(vector=(1.0, 0.0), embedder_id=EMBEDDER_ID)
        with pytest.raises(IndexError_):
            index.upsert("A", small)

    def test_save_load_round_trip(self, tmp_path):
        index = VectorIndex()
        index.upsert("A", embed("alpha template"))
        index.upsert("B", embed("beta template"))
        path = tmp_path / "index.jsonl"
        index.save(path)
        loaded = VectorIndex.load(path)
        q = embed("alpha template")
        assert loaded.query_topk(q, k=2) == index.query_topk(q, k=2)


def _task(description, facts=None):
    from mmia.rules import FactSet

    return TaskSpec(id="t1", description=description, scenario="drg", facts=facts or FactSet())


def _abstract_backend(template, bindings=None):
    return ScriptedBackend(
        ScriptedScenario(
            rules=[
                ScriptRule(
                    role_tag="abstractor",
                    response=json.dumps({"template": template, "bindings": bindings or {}}),
                )
            ]
        )
    )


class TestAbstractTask:
    def test_template_form_is_fixpoint(self):
        t = _task("Verify clinical logic consistency between {diagnosis} and {procedure}")
        template = abstract_task(t, backend=None)
        assert template.text == t.description

    def test_backend_abstraction(self):
        t = _task("verify grouping for pneumonia patient with coronary bypass")
        template = abstract_task(
            t,
            _abstract_backend(
                "Verify clinical logic consistency between {diagnosis} and {procedure}",
                {"diagnosis": "pneumonia", "procedure": "coronary bypass"},
            ),
        )
        assert "{diagnosis}" in template.text
        assert template.warnings == []

    def test_leftover_concrete_value_warns(self):
        t = _task("verify grouping for pneumonia patient")
        template = abstract_task(
            t,
            _abstract_backend(
                "Verify grouping for pneumonia against {procedure}", {"diagnosis": "pneumonia"}
            ),
        )
        assert template.warnings


class TestMatching:
    def _kb_with_theorem(self, template):
        kb = KnowledgeBase(clock=lambda: 0.0)
        rec = kb.add_candidate(
            "drg",
            "theorem",
            'IF case.procedure IN ["36.0601"] THEN case.mdc = "F"',
            template=template,
        )
        kb.review_decision(rec.id, "approve", reviewer="r")
        return kb, kb.get(rec.id)

    def _judge_backend(self, fits, justification="because"):
        return ScriptedBackend(
            ScriptedScenario(
                rules=[
                    ScriptRule(
                        role_tag="judge",
                        response=json.dumps({"fits": fits, "justification": justification}),
                    )
                ]
            )
        )

    def test_match_after_theorem_stored(self):
        template = "Verify clinical logic consistency between {diagnosis} and {procedure}"
        kb, theorem = self._kb_with_theorem(template)
        index = VectorIndex()
        index.upsert(theorem.id, embed(template))
        task = _task(template)
        result = match_theorem(task, kb, index, 0.80, self._judge_backend(True))
        assert result.decision == "matched"
        assert result.theorem_id == theorem.id
        assert result.similarity >= 0.80

    def test_empty_index_is_below_threshold(self):
        kb = KnowledgeBase(clock=lambda: 0.0)
        result = match_theorem(_task("{diagnosis} check"), kb, VectorIndex(), 0.8, None)
        assert result.decision == "below-threshold"

    def test_strict_threshold_boundary(self):
        template = "Verify clinical logic consistency between {diagnosis} and {procedure}"
        kb, theorem = self._kb_with_theorem(template)
        index = VectorIndex()
        index.upsert(theorem.id, embed(template))
        task = _task(template)
        sim = embed(template).cosine(embed(template))  # 1.0
        result = match_theorem(task, kb, index, sim + 1e-6, self._judge_backend(True))
        assert result.decision == "below-threshold"
        # similarity exactly at the threshold passes (strict >=).
        result2 = match_theorem(task, kb, index, 1.0, self._judge_backend(True))
        assert result2.decision == "matched"

    def test_judge_does_not_fit_blocks_match(self):
        template = "Verify clinical logic consistency between {diagnosis} and {procedure}"
        kb, theorem = self._kb_with_theorem(template)
        index = VectorIndex()
        index.upsert(theorem.id, embed(template))
        result = match_theorem(_task(template), kb, index, 0.8, self._judge_backend(False))
        assert result.decision == "below-threshold"

    def test_rapid_judge_rejects_unapproved_theorem(self):
        kb = KnowledgeBase(clock=lambda: 0.0)
        rec = kb.add_candidate("drg", "theorem", "a.x = 1", template="t")
        with pytest.raises(PreconditionError):
            rapid_judge(_task("x"), rec, self._judge_backend(True))

    def test_matched_implies_conjunction(self):
        # matched requires similarity >= threshold AND a fitting judgment;
        # check both conjuncts on the result object.
        template = "Verify clinical logic consistency between {diagnosis} and {procedure}"
        kb, theorem = self._kb_with_theorem(template)
        index = VectorIndex()
        index.upsert(theorem.id, embed(template))
        result = match_theorem(_task(template), kb, index, 0.8, self._judge_backend(True))
        assert result.decision == "matched"
        assert result.similarity >= 0.8
        assert result.justification
