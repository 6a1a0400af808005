"""CLI: commands, outputs, and exit codes."""

import json

import pytest
from click.testing import CliRunner

from mmia.bench.fixtures import build_chain, build_fixture_kb, fixture_case
from mmia.bench.packs import task_for_case
from mmia.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def config_file(tmp_path):
    path = tmp_path / "engine.conf"
    path.write_text(
        f"data_dir = {tmp_path / 'data'}\nbackend = scripted\nreplay = true\n", encoding="utf-8"
    )
    return str(path)


def _write_log(tmp_path, name):
    kb = build_fixture_kb()
    log, _ = build_chain(name, kb)
    path = tmp_path / f"{name}.jsonl"
    path.write_text(log.to_json() + "\n", encoding="utf-8")
    return path


class TestSimulateCost:
    def test_prints_1100(self, runner):
        result = runner.invoke(
            main, ["simulate-cost", "--denovo", "3500", "--match", "500", "--fraction", "0.8"]
        )
        assert result.exit_code == 0
        assert "1100" in result.output
        assert "31.4%" in result.output

    def test_writes_report_files(self, runner, tmp_path):
        out = tmp_path / "cost"
        result = runner.invoke(
            main,
            [
                "simulate-cost",
                "--denovo",
                "3500",
                "--match",
                "500",
                "--fraction",
                "4/5",
                "--out",
                str(out),
                "--plots",
            ],
        )
        assert result.exit_code == 0
        assert (out / "cost_phases.json").exists()
        assert (out / "cost_phases.png").exists()
        assert (out / "cost_phases.csv").exists()


class TestAuditCommand:
    def test_certified_fixture_exits_zero(self, runner, tmp_path, config_file):
        path = _write_log(tmp_path, "drg-correct")
        result = runner.invoke(main, ["audit", str(path), "--config", config_file])
        assert result.exit_code == 0, result.output
        assert "certified" in result.output

    def test_mismatch_fixture_exits_two(self, runner, tmp_path, config_file):
        path = _write_log(tmp_path, "drg-mismatch")
        result = runner.invoke(main, ["audit", str(path), "--config", config_file, "-v"])
        assert result.exit_code == 2, result.output
        assert "flagged" in result.output

    def test_replay_checks_serialization(self, runner, tmp_path, config_file):
        path = _write_log(tmp_path, "ins-approvable")
        result = runner.invoke(main, ["replay", str(path), "--config", config_file])
        assert result.exit_code == 0, result.output


class TestRunCommand:
    def test_run_task_file(self, runner, tmp_path, config_file):
        task = task_for_case(fixture_case("ehr-conflict"))
        task_path = tmp_path / "task.json"
        task_path.write_text(json.dumps(task.to_dict()), encoding="utf-8")
        result = runner.invoke(main, ["run", str(task_path), "--config", config_file])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["audit_outcome"] == "certified"
        assert body["final_answer"]["verdict"] == "erroneous"


class TestBenchCommands:
    def test_make_then_run(self, runner, tmp_path, config_file):
        suite_path = tmp_path / "drg.jsonl"
        made = runner.invoke(
            main, ["bench", "make", "drg", "--n", "10", "--seed", "2", "--out", str(suite_path)]
        )
        assert made.exit_code == 0, made.output
        out_dir = tmp_path / "results"
        ran = runner.invoke(
            main,
            [
                "bench",
                "run",
                str(suite_path),
                "--mode",
                "mmia",
                "--config",
                config_file,
                "--out",
                str(out_dir),
            ],
        )
        assert ran.exit_code == 0, ran.output
        assert "1.000" in ran.output  # recall
        assert (out_dir / "metrics.json").exists()
        assert (out_dir / "metrics.csv").exists()
        assert (out_dir / "metrics.png").exists()
        assert (out_dir / "results.jsonl").exists()

    def test_baseline_mode(self, runner, tmp_path, config_file):
        suite_path = tmp_path / "ehr.jsonl"
        runner.invoke(
            main, ["bench", "make", "ehr", "--n", "8", "--seed", "3", "--out", str(suite_path)]
        )
        ran = runner.invoke(
            main,
            ["bench", "run", str(suite_path), "--mode", "baseline", "--config", config_file, "--no-plots"],
        )
        assert ran.exit_code == 0, ran.output


class TestKbCommands:
    def test_list_and_approve(self, runner, tmp_path, config_file):
        listed = runner.invoke(main, ["kb", "list", "--status", "approved", "--config", config_file])
        assert listed.exit_code == 0
        assert "EHR-A1" in listed.output

    def test_ingest_then_approve(self, runner, tmp_path):
        # Dedicated config whose scripted scenario carries an extractor rule.
        scenario = {
            "schema": "scenario_v1",
            "name": "extract",
            "default": "",
            "rules": [
                {
                    "role_tag": "extractor",
                    "response": json.dumps(
                        {
                            "candidates": [
                                {
                                    "rule_text": "IF event = \"admission\" THEN note.initial_progress_hours <= 8",
                                    "excerpt": "within 8 hours",
                                }
                            ]
                        }
                    ),
                }
            ],
        }
        scenario_path = tmp_path / "scenario.json"
        scenario_path.write_text(json.dumps(scenario), encoding="utf-8")
        config_path = tmp_path / "engine.conf"
        config_path.write_text(
            f"data_dir = {tmp_path / 'data'}\nscenario_file = {scenario_path}\nreplay = true\n",
            encoding="utf-8",
        )
        doc = tmp_path / "norms.txt"
        doc.write_text("notes must be completed within 8 hours of admission", encoding="utf-8")
        runner = CliRunner()
        ingested = runner.invoke(
            main, ["kb", "ingest", str(doc), "--scenario", "generic", "--config", str(config_path)]
        )
        assert ingested.exit_code == 0, ingested.output
        assert "GEN-A1" in ingested.output
        approved = runner.invoke(
            main, ["kb", "approve", "GEN-A1", "--config", str(config_path)]
        )
        assert approved.exit_code == 0, approved.output
        assert "approved" in approved.output


class TestDisagreementExitCode:
    def test_llm_verifier_split_vote_exits_three(self, runner, tmp_path):
        """Consensus diversity through prompt variants: the strict variant
        flags while the others pass, so unanimity lands on disagreement."""
        scenario = {
            "schema": "scenario_v1",
            "name": "split-auditors",
            "default": "",
            "rules": [
                # The strict (v2) variant rejects evidence support.
                {
                    "role_tag": "auditor",
                    "regex": True,
                    "match": r"Be strict[\s\S]*directly supported by the cited evidence",
                    "response": json.dumps({"ok": False, "reason": "evidence too thin"}),
                },
                {
                    "role_tag": "auditor",
                    "match": "directly supported by the cited evidence",
                    "response": json.dumps({"ok": True, "reason": "fine"}),
                },
                {
                    "role_tag": "auditor",
                    "match": "decomposition plan logically address",
                    "response": json.dumps({"ok": True, "reason": "fine"}),
                },
                {
                    "role_tag": "auditor",
                    "match": "logical leaps",
                    "response": json.dumps({"fallacy": None}),
                },
                {
                    "role_tag": "auditor",
                    "match": "derived from the step conclusions",
                    "response": json.dumps({"ok": True, "reason": "fine"}),
                },
            ],
        }
        scenario_path = tmp_path / "auditors.json"
        scenario_path.write_text(json.dumps(scenario), encoding="utf-8")
        config_path = tmp_path / "engine.conf"
        config_path.write_text(
            f"data_dir = {tmp_path / 'data'}\nscenario_file = {scenario_path}\n"
            "verifier = llm\nreplay = true\n",
            encoding="utf-8",
        )
        log_path = _write_log(tmp_path, "ehr-clean")
        result = runner.invoke(main, ["audit", str(log_path), "--config", str(config_path)])
        assert result.exit_code == 3, result.output
        assert "disagreement" in result.output
