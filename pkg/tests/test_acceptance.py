"""Acceptance suite.

One test per acceptance criterion, each pinned to its stated tolerance and
time budget and printing a [PASS] line (run with -s to see them live).
"""

import json
import math
import random
import time
from fractions import Fraction

import numpy as np
from click.testing import CliRunner

from mmia.audit import ConsensusPolicy, consensus_audit, simulate_consensus_error_rates
from mmia.audit.consensus import promote_chain_theorem
from mmia.audit.deterministic import DeterministicVerifier
from mmia.audit.mutations import MUTATION_CATALOG, apply_catalog
from mmia.bench import make_suite, run_benchmark, task_for_case
from mmia.bench.cases import BenchmarkCase
from mmia.bench.fixtures import CERTIFIED_FIXTURES, build_chain, build_fixture_kb
from mmia.bench.metrics import metrics_from_records
from mmia.bench.packs import (
    E_DIAGNOSES,
    F_PROCEDURES,
    PACKS,
    _drg_facts,
    combined_scenario,
    composers,
    pack_rules_text,
    read_rules_file,
)
from mmia.cli import main as cli_main
from mmia.costs import CostLedger, run_dual_mode
from mmia.engine import EngineContext, execute_task
from mmia.gateway import Gateway, ScriptedBackend
from mmia.retrieval import Embedding, VectorIndex, embed
from mmia.retrieval.embedding import EMBEDDER_ID
from mmia.rules import eval_rule, parse_rule, print_rule

from rulegen import all_assignments, facts_for_assignment, oracle_verdict, random_rule


def _pass(message: str) -> None:
    print(f"\n[PASS] {message}")


def _fresh_context():
    kb = build_fixture_kb()
    backend = ScriptedBackend(combined_scenario(list(PACKS.values())))
    context = EngineContext(
        kb=kb, gateway=Gateway(backend), replay=True, composers=composers()
    )
    return kb, context


class TestAcceptance:
    def test_01_phase_arithmetic_exact(self):
        """simulate-cost 3500/500/0.8 prints 1100 and 31.4%, in under 1 s."""
        t0 = time.monotonic()
        result = CliRunner().invoke(
            cli_main,
            ["simulate-cost", "--denovo", "3500", "--match", "500", "--fraction", "0.8"],
        )
        elapsed = time.monotonic() - t0
        assert result.exit_code == 0, result.output
        assert "1100" in result.output
        assert "31.4%" in result.output
        assert elapsed < 1.0, f"took {elapsed:.2f}s"
        _pass(f"phase arithmetic exact: 1100 tokens, 31.4% blended, {elapsed * 1000:.0f} ms")

    def test_02_structural_fault_detection_four_packs(self):
        """Recall 1.0 and FPR 0.0 over 4 x 40 offline cases, under 60 s."""
        t0 = time.monotonic()
        kb, context = _fresh_context()
        expected_errors = {"drg": 8, "regulatory": 8, "ehr": 10, "insurance": 12}
        all_records = []
        for scenario, expected in expected_errors.items():
            suite = make_suite(scenario, n=40, seed=1)
            assert sum(1 for c in suite if c.gold_label == "erroneous") == expected
            run = run_benchmark(suite, "mmia", kb, context, policy=ConsensusPolicy())
            assert run.metrics.errored == 0, f"{scenario}: errored cases"
            assert run.metrics.recall == 1.0, f"{scenario}: recall {run.metrics.recall}"
            assert run.metrics.false_positive_rate == 0.0, (
                f"{scenario}: fpr {run.metrics.false_positive_rate}"
            )
            all_records.extend(run.records)
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"
        _pass(
            f"structural-fault detection: 160 cases, recall 1.0, fpr 0.0 in {elapsed:.1f}s"
        )

    def test_03_rule_evaluator_truth_table_oracle(self):
        """1000 random rules, <=6 atoms: eval_rule matches enumeration."""
        t0 = time.monotonic()
        rng = random.Random(314159)
        outcomes = set()
        checked = 0
        for _ in range(1000):
            rule = random_rule(rng, max_atoms=6)
            for assignment in all_assignments(rule):
                facts = facts_for_assignment(rule, assignment)
                got = eval_rule(rule, facts).outcome
                want = oracle_verdict(rule, assignment)
                assert got == want, f"{print_rule(rule)} under {assignment}: {got} != {want}"
                outcomes.add(got)
                checked += 1
        assert outcomes == {"satisfied", "violated", "inapplicable"}
        elapsed = time.monotonic() - t0
        assert elapsed < 30.0, f"took {elapsed:.1f}s"
        _pass(
            f"evaluator oracle: 1000 rules, {checked} assignments, all 3 outcomes, {elapsed:.1f}s"
        )

    def test_04_parser_round_trip_and_pack_fixpoint(self):
        """parse(print(ast)) identity on 1000 ASTs; pack files are fixpoints."""
        rng = random.Random(271828)
        for _ in range(1000):
            rule = random_rule(rng, max_atoms=6)
            assert parse_rule(print_rule(rule)) == rule
        rule_lines = 0
        for scenario in PACKS:
            for declared_id, _tags, text in read_rules_file(pack_rules_text(scenario)):
                assert print_rule(parse_rule(text)) == text, f"{declared_id} is not canonical"
                rule_lines += 1
        _pass(f"parser round-trip: 1000 ASTs + {rule_lines} shipped rules, zero failures")

    def test_05_mutation_suite_full_catalog_flips(self):
        """Every catalog mutation flips each certified fixture to flagged."""
        kb = build_fixture_kb()
        verifier = DeterministicVerifier()
        mutants_checked = 0
        for name in CERTIFIED_FIXTURES:
            log, _ = build_chain(name, kb)
            assert verifier.verify_chain(log, kb).passed, f"{name} must certify before mutation"
            for mutation_name, mutant in apply_catalog(log):
                assert mutant is not None, f"{mutation_name} inapplicable to {name}"
                report = verifier.verify_chain(mutant, kb)
                assert report.verdict == "error-flagged", f"{mutation_name} on {name} not caught"
                mutants_checked += 1
        assert mutants_checked == len(CERTIFIED_FIXTURES) * len(MUTATION_CATALOG)
        _pass(
            f"mutation suite: {mutants_checked}/{mutants_checked} mutants flipped "
            f"({len(CERTIFIED_FIXTURES)} fixtures x {len(MUTATION_CATALOG)} mutations)"
        )

    def test_06_consensus_monte_carlo(self):
        """Unanimity-of-3 false certification under a p=0.1 flipping verifier."""
        t0 = time.monotonic()
        stats = simulate_consensus_error_rates(flip_p=0.1, n_trials=10_000, seed=20240601, n=3)
        bound = 0.001 + 3 * math.sqrt(0.001 / 10_000)
        assert stats["consensus_rate"] <= bound, stats
        assert stats["consensus_rate"] < stats["single_rate"], stats
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0
        _pass(
            "consensus Monte Carlo: consensus rate "
            f"{stats['consensus_rate']:.4f} <= {bound:.4f} and < single rate "
            f"{stats['single_rate']:.4f} ({elapsed:.1f}s)"
        )

    def test_07_retrieval_exactness_vs_brute_force(self):
        """query_topk equals full-scan ranking on 200 random indices."""
        rng = np.random.default_rng(7)
        py_rng = random.Random(7)
        checked = 0
        for trial in range(200):
            size = int(rng.integers(1, 501))
            mat = rng.normal(size=(size, 256))
            mat /= np.linalg.norm(mat, axis=1, keepdims=True)
            # Force ties: duplicate a random row under later ids.
            if size >= 3:
                mat[size - 1] = mat[0]
                mat[size - 2] = mat[0]
            ids = [f"v{j:04d}" for j in range(size)]
            index = VectorIndex()
            for j, row in enumerate(mat):
                index.upsert(ids[j], Embedding(vector=tuple(row.tolist()), embedder_id=EMBEDDER_ID))
            q = rng.normal(size=256)
            q /= np.linalg.norm(q)
            query = Embedding(vector=tuple(q.tolist()), embedder_id=EMBEDDER_ID)
            k = py_rng.randrange(1, size + 1)
            got = index.query_topk(query, k)
            # Independent full-scan ranking.
            sims = [(ids[j], float(np.dot(np.asarray(query.vector), mat[j]))) for j in range(size)]
            want = sorted(sims, key=lambda t: (-t[1], t[0]))[:k]
            assert [g[0] for g in got] == [w[0] for w in want], f"trial {trial}"
            for (gi, gs), (wi, ws) in zip(got, want):
                assert abs(gs - ws) < 1e-12
            checked += 1
        assert checked == 200
        _pass("retrieval exactness: 200 indices (sizes 1-500), ties by id, zero mismatches")

    def test_08_dual_mode_cost_ordering(self):
        """50 scripted tasks, 80% matchable: rag-match strictly cheaper."""
        kb, context = _fresh_context()
        # Seed the theorem base from one certified de novo mismatch chain.
        seed_case = BenchmarkCase(
            id="drg-seed-0001",
            scenario="drg",
            facts=_drg_facts(E_DIAGNOSES[0], F_PROCEDURES[0], None, "EZ19"),
            gold_label="erroneous",
            injected_error={"kind": "diagnosis-procedure-mismatch"},
        )
        seed_log = execute_task(task_for_case(seed_case), context)
        assert seed_log.final_answer.verdict == "erroneous"
        result = consensus_audit(
            seed_log,
            kb,
            ConsensusPolicy(),
            promoter=lambda lg: promote_chain_theorem(
                lg, kb, template=PACKS["drg"].template_text, auto_approve=True
            ),
        )
        assert result.outcome == "certified" and result.promoted_theorem_id
        index = VectorIndex()
        theorem = kb.get(result.promoted_theorem_id)
        index.upsert(theorem.id, embed(theorem.template))

        tasks = []
        for i in range(40):  # matchable: the direction the theorem covers
            case = BenchmarkCase(
                id=f"drg-dm-{i:04d}",
                scenario="drg",
                facts=_drg_facts(
                    E_DIAGNOSES[i % len(E_DIAGNOSES)],
                    F_PROCEDURES[i % len(F_PROCEDURES)],
                    None,
                    "EZ19",
                ),
                gold_label="erroneous",
                injected_error={"kind": "diagnosis-procedure-mismatch"},
            )
            tasks.append(task_for_case(case))
        from mmia.bench import generate_case

        for i in range(10):  # unmatchable: different scenario, de novo
            tasks.append(task_for_case(generate_case("ehr", "default", 52000 + i)))

        ledger = CostLedger()
        records = run_dual_mode(tasks, kb, index, 0.80, context, ledger)
        rag = ledger.entries("rag-match")
        denovo = ledger.entries("de-novo")
        assert len(rag) == 40 and len(denovo) == 10, (len(rag), len(denovo))
        assert max(e.tokens for e in rag) < min(e.tokens for e in denovo)
        assert all(r["audit_outcome"] == "certified" for r in records)
        # Blended average agrees exactly with an independent recount.
        total = sum(e.tokens for e in ledger.entries())
        blended = Fraction(total, len(ledger.entries()))
        recount = Fraction(
            sum(e.tokens for e in rag) + sum(e.tokens for e in denovo), len(rag) + len(denovo)
        )
        assert blended == recount
        avg_rag = ledger.average_tokens("rag-match")
        avg_dn = ledger.average_tokens("de-novo")
        _pass(
            f"dual-mode cost ordering: max matched {max(e.tokens for e in rag)} < "
            f"min de novo {min(e.tokens for e in denovo)} tokens "
            f"(averages {avg_rag:.0f} vs {avg_dn:.0f}); blended average exact"
        )

    def test_09_metric_formulas_against_recount(self):
        """compute_metrics agrees with a per-case recount; undefined stays undefined."""
        kb, context = _fresh_context()
        suite = make_suite("regulatory", n=20, seed=5)
        run = run_benchmark(suite, "mmia", kb, context)
        # Independent recount from the raw records.
        tp = sum(1 for r in run.records if r["gold_label"] == "erroneous" and r["flagged"])
        fn = sum(1 for r in run.records if r["gold_label"] == "erroneous" and not r["flagged"])
        fp = sum(1 for r in run.records if r["gold_label"] == "correct" and r["flagged"])
        tn = sum(1 for r in run.records if r["gold_label"] == "correct" and not r["flagged"])
        assert (run.matrix.tp, run.matrix.fn, run.matrix.fp, run.matrix.tn) == (tp, fn, fp, tn)
        assert run.metrics.recall == tp / (tp + fn)
        assert run.metrics.false_positive_rate == fp / (fp + tn)
        assert run.metrics.accuracy == (tp + tn) / (tp + tn + fp + fn)
        recount = metrics_from_records(run.records)
        assert recount.to_dict() == run.metrics.to_dict()

        # Zero-denominator direction: all-correct suite.
        from mmia.bench import generate_case

        clean = [generate_case("drg", "default", 61000 + i) for i in range(5)]
        clean_run = run_benchmark(clean, "mmia", kb, context)
        assert clean_run.metrics.recall is None
        assert clean_run.metrics.to_dict()["recall"] == "undefined"
        _pass("metric formulas: recount agreement and undefined on zero denominators")

    def test_10_replay_determinism_byte_identical(self, tmp_path):
        """Two replay runs of the same suite produce byte-identical files."""
        outputs = []
        for run_dir in ("run-a", "run-b"):
            kb, context = _fresh_context()
            suite = make_suite("ehr", n=15, seed=8)
            out = tmp_path / run_dir
            run_benchmark(suite, "mmia", kb, context, out_dir=out)
            outputs.append(out)
        for name in ("logs.jsonl", "audits.jsonl", "metrics.json", "results.jsonl"):
            a = (outputs[0] / name).read_bytes()
            b = (outputs[1] / name).read_bytes()
            assert a == b, f"{name} differs between replay runs"
        _pass("determinism: logs, audit reports, and metrics byte-identical across replays")
