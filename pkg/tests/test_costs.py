"""Cost ledger, dual-mode dispatch, and phase simulation."""

import json
from fractions import Fraction

import pytest

from mmia.audit.consensus import promote_chain_theorem
from mmia.bench import generate_case, task_for_case
from mmia.bench.packs import PACKS
from mmia.costs import (
    CostLedger,
    PhaseSimConfig,
    dispatch_mode,
    execute_match,
    run_dual_mode,
    simulate_phases,
)
from mmia.errors import LedgerError, PreconditionError
from mmia.retrieval import VectorIndex, embed


class TestLedger:
    def test_record_then_sum(self, tmp_path):
        ledger = CostLedger(tmp_path / "ledger.jsonl")
        ledger.record("t1", "de-novo", 3500)
        assert ledger.total_tokens() == 3500

    def test_duplicate_id_rejected(self):
        ledger = CostLedger()
        ledger.record("t1", "de-novo", 100)
        with pytest.raises(LedgerError):
            ledger.record("t1", "rag-match", 100)

    def test_average_matches_brute_force_mean(self):
        ledger = CostLedger()
        for i in range(100):
            ledger.record(f"t{i}", "de-novo", 3500)
        assert ledger.average_tokens() == 3500
        raw = [e.tokens for e in ledger.entries()]
        assert ledger.average_tokens() == sum(raw) / len(raw)

    def test_empty_average_is_none(self):
        assert CostLedger().average_tokens() is None

    def test_persistence_round_trip(self, tmp_path):
        path = tmp_path / "ledger.jsonl"
        ledger = CostLedger(path)
        ledger.record("t1", "rag-match", 500, 0.25)
        reloaded = CostLedger(path)
        assert reloaded.entries()[0].tokens == 500
        with pytest.raises(LedgerError):
            reloaded.record("t1", "de-novo", 1)


def _mismatch_case(i: int):
    """A respiratory-diagnosis + circulatory-procedure case, the direction
    the promoted mismatch theorem covers."""
    from mmia.bench.cases import BenchmarkCase
    from mmia.bench.packs import E_DIAGNOSES, F_PROCEDURES, _drg_facts

    facts = _drg_facts(E_DIAGNOSES[i % len(E_DIAGNOSES)], F_PROCEDURES[i % len(F_PROCEDURES)], None, "EZ19")
    return BenchmarkCase(
        id=f"drg-m-{i:04d}",
        scenario="drg",
        facts=facts,
        gold_label="erroneous",
        injected_error={"kind": "diagnosis-procedure-mismatch"},
    )


def _seed_mismatch_theorem(kb, context):
    """Run one mismatch case de novo; the certified chain concluding the
    violation is promoted into the reusable theorem."""
    from mmia.engine import execute_task

    log = execute_task(task_for_case(_mismatch_case(9999)), context)
    assert log.final_answer.verdict == "erroneous"
    theorem_id = promote_chain_theorem(
        log, kb, template=PACKS["drg"].template_text, auto_approve=True
    )
    index = VectorIndex()
    index.upsert(theorem_id, embed(kb.get(theorem_id).template))
    return theorem_id, index


class TestDispatch:
    def test_empty_theorem_base_goes_de_novo(self, pack_kb, pack_context):
        task = task_for_case(generate_case("drg", "default", 5))
        mode, match = dispatch_mode(task, pack_kb, VectorIndex(), 0.8, pack_context.gateway)
        assert mode == "de-novo"

    def test_seeded_theorem_matches(self, pack_kb, pack_context):
        theorem_id, index = _seed_mismatch_theorem(pack_kb, pack_context)
        task = task_for_case(_mismatch_case(81))
        mode, match = dispatch_mode(task, pack_kb, index, 0.8, pack_context.gateway)
        assert mode == "rag-match"
        assert match.theorem_id == theorem_id
        assert match.similarity >= 0.8

    def test_judge_rejection_forces_de_novo(self, pack_kb, pack_context):
        from mmia.gateway import Gateway, ScriptRule, ScriptedBackend, ScriptedScenario

        theorem_id, index = _seed_mismatch_theorem(pack_kb, pack_context)
        rules = [
            ScriptRule(
                role_tag="abstractor",
                response=json.dumps({"template": PACKS["drg"].template_text, "bindings": {}}),
            ),
            ScriptRule(
                role_tag="judge",
                response=json.dumps({"fits": False, "justification": "different pattern"}),
            ),
        ]
        gateway = Gateway(ScriptedBackend(ScriptedScenario(rules=rules)))
        task = task_for_case(generate_case("drg", "default", 83))
        mode, _ = dispatch_mode(task, pack_kb, index, 0.8, gateway)
        assert mode == "de-novo"

    def test_matched_execution_produces_auditable_single_step_log(self, pack_kb, pack_context):
        from mmia.audit import ConsensusPolicy, consensus_audit

        _, index = _seed_mismatch_theorem(pack_kb, pack_context)
        task = task_for_case(_mismatch_case(85))
        mode, match = dispatch_mode(task, pack_kb, index, 0.8, pack_context.gateway)
        assert mode == "rag-match"
        log = execute_match(task, match, pack_kb, pack_context)
        assert log is not None
        assert log.mode == "rag-match"
        assert len(log.flat_steps()) == 1
        assert log.final_answer.verdict == "erroneous"
        result = consensus_audit(log, pack_kb, ConsensusPolicy())
        assert result.outcome == "certified"

    def test_dual_mode_cost_ordering(self, pack_kb, pack_context):
        _, index = _seed_mismatch_theorem(pack_kb, pack_context)
        tasks = [task_for_case(_mismatch_case(9100 + i)) for i in range(8)]
        for i in range(2):
            tasks.append(task_for_case(generate_case("ehr", "default", 9200 + i)))
        ledger = CostLedger()
        run_dual_mode(tasks, pack_kb, index, 0.8, pack_context, ledger)
        rag = [e.tokens for e in ledger.entries("rag-match")]
        denovo = [e.tokens for e in ledger.entries("de-novo")]
        assert rag and denovo
        assert max(rag) < min(denovo)


class TestPhaseSimulation:
    def test_exact_blend_3500_500_80pct(self):
        report = simulate_phases(
            PhaseSimConfig(denovo_tokens=3500, match_tokens=500, match_fraction=Fraction(4, 5))
        )
        assert report.mature_avg == 1100  # exact, zero tolerance
        assert report.relative_cost == Fraction(11, 35)
        assert report.to_dict()["relative_cost_pct"] == "31.4%"
        assert report.to_dict()["matched_relative_cost_pct"] == "14.3%"

    def test_fraction_zero_means_all_de_novo(self):
        report = simulate_phases(
            PhaseSimConfig(denovo_tokens=3500, match_tokens=500, match_fraction=Fraction(0))
        )
        assert report.mature_avg == 3500

    def test_fraction_one_means_all_matched(self):
        report = simulate_phases(
            PhaseSimConfig(denovo_tokens=3500, match_tokens=500, match_fraction=Fraction(1))
        )
        assert report.mature_avg == 500
        assert report.relative_cost == Fraction(1, 7)

    def test_invalid_config_rejected(self):
        with pytest.raises(PreconditionError):
            PhaseSimConfig(denovo_tokens=0, match_tokens=1, match_fraction=Fraction(1, 2))
        with pytest.raises(PreconditionError):
            PhaseSimConfig(denovo_tokens=10, match_tokens=1, match_fraction=Fraction(3, 2))

    def test_table_mentions_both_ratios(self):
        report = simulate_phases(
            PhaseSimConfig(denovo_tokens=3500, match_tokens=500, match_fraction=Fraction(4, 5))
        )
        table = report.to_table()
        assert "1100" in table
        assert "31.4%" in table
        assert "14.3%" in table
