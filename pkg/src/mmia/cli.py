"""Command-line surface.

Exit codes: 0 success or certified, 2 flagged, 3 consensus disagreement,
1 operational error.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from .audit import consensus_audit
from .bench import BenchmarkCase, make_suite, run_benchmark
from .bench.packs import PACKS
from .costs import PhaseSimConfig, simulate_phases
from .engine import ExecutionLog, TaskSpec
from .errors import MmiaError
from .kb import extract_candidates
from .report import render_bench_report, render_cost_report
from .service.app import ServiceState, serve
from .service.config import load_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2
EXIT_DISAGREEMENT = 3


def _state(config_path: str | None) -> ServiceState:
    config = load_config(Path(config_path)) if config_path else load_config()
    return ServiceState(config)


def _fail(exc: MmiaError) -> None:
    click.echo(f"error [{exc.code}]: {exc.message}", err=True)
    sys.exit(EXIT_ERROR)


@click.group()
def main():
    """Verifiable reasoning engine: run tasks, audit chains, benchmark."""


@main.command("run")
@click.argument("task_file", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def run_cmd(task_file: Path, config_path: str | None):
    """Execute a task file (TaskSpec JSON) and audit the chain."""
    try:
        state = _state(config_path)
        task = TaskSpec.from_dict(json.loads(task_file.read_text(encoding="utf-8")))
        document = state.submit_task(task)
    except MmiaError as exc:
        _fail(exc)
        return
    click.echo(json.dumps(
        {
            "task_id": task.id,
            "status": document["status"],
            "mode": document["mode"],
            "audit_outcome": document["audit_outcome"],
            "final_answer": document["final_answer"],
        },
        indent=2,
        sort_keys=True,
    ))
    outcome = document["audit_outcome"]
    if document["status"] != "completed":
        sys.exit(EXIT_ERROR)
    sys.exit({"certified": EXIT_OK, "flagged": EXIT_FLAGGED, "disagreement": EXIT_DISAGREEMENT}.get(outcome, EXIT_ERROR))


def _audit_logs(log_file: Path, config_path: str | None, verbose: bool) -> int:
    state = _state(config_path)
    worst = EXIT_OK
    for line in log_file.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        log = ExecutionLog.from_json(line)
        result = consensus_audit(
            log, state.kb, state.policy, verifier_factory=state.verifier_factory
        )
        click.echo(f"{log.task.id}: {result.outcome}")
        if verbose:
            for report in result.reports:
                for issue in report.issues:
                    click.echo(f"  [{issue.kind}] {issue.message}")
        rank = {"certified": EXIT_OK, "flagged": EXIT_FLAGGED, "disagreement": EXIT_DISAGREEMENT}[
            result.outcome
        ]
        worst = max(worst, rank)
    return worst


@main.command("audit")
@click.argument("log_file", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("-v", "--verbose", is_flag=True)
def audit_cmd(log_file: Path, config_path: str | None, verbose: bool):
    """Audit stored execution logs (JSONL, one log per line)."""
    try:
        sys.exit(_audit_logs(log_file, config_path, verbose))
    except MmiaError as exc:
        _fail(exc)


@main.command("replay")
@click.argument("log_file", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def replay_cmd(log_file: Path, config_path: str | None):
    """Re-audit stored logs after checking serialization round-trips."""
    try:
        for line in log_file.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            log = ExecutionLog.from_json(line)
            if log.to_json() != line.strip():
                click.echo(f"{log.task.id}: serialization drift detected", err=True)
                sys.exit(EXIT_ERROR)
        sys.exit(_audit_logs(log_file, config_path, verbose=True))
    except MmiaError as exc:
        _fail(exc)


@main.group("bench")
def bench_group():
    """Benchmark suites."""


@bench_group.command("make")
@click.argument("scenario", type=click.Choice(sorted(PACKS)))
@click.option("--n", default=40, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True)
def bench_make_cmd(scenario: str, n: int, seed: int, out_path: Path):
    """Generate an offline suite file (JSONL of cases)."""
    try:
        suite = make_suite(scenario, n=n, seed=seed)
    except MmiaError as exc:
        _fail(exc)
        return
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        for case in suite:
            f.write(json.dumps(case.to_dict(), sort_keys=True) + "\n")
    erroneous = sum(1 for c in suite if c.gold_label == "erroneous")
    click.echo(f"wrote {len(suite)} cases ({erroneous} erroneous) to {out_path}")


@bench_group.command("run")
@click.argument("suite_file", type=click.Path(exists=True, path_type=Path))
@click.option("--mode", type=click.Choice(["mmia", "baseline"]), default="mmia", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None)
@click.option("--plots/--no-plots", default=True, show_default=True)
def bench_run_cmd(suite_file: Path, mode: str, config_path: str | None, out_dir: Path | None, plots: bool):
    """Run a suite file and print the metrics table."""
    try:
        state = _state(config_path)
        suite = [
            BenchmarkCase.from_dict(json.loads(line))
            for line in suite_file.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        out = out_dir or (state.config.data_dir / "bench" / f"{suite_file.stem}-{mode}")
        run = run_benchmark(
            suite,
            mode,
            state.kb,
            state.context,
            policy=state.policy,
            verifier_factory=state.verifier_factory,
            out_dir=out,
        )
    except MmiaError as exc:
        _fail(exc)
        return
    d = run.metrics.to_dict()
    click.echo(f"{'scope':12s} {'recall':>10s} {'fpr':>10s} {'accuracy':>10s}   matrix")

    def fmt(x):
        return f"{x:.3f}" if isinstance(x, (int, float)) else str(x)

    click.echo(
        f"{'overall':12s} {fmt(d['recall']):>10s} {fmt(d['false_positive_rate']):>10s} "
        f"{fmt(d['accuracy']):>10s}   {d['matrix']}"
    )
    for name, data in sorted(run.metrics.per_scenario.items()):
        click.echo(
            f"{name:12s} {fmt(data['recall']):>10s} {fmt(data['false_positive_rate']):>10s} "
            f"{fmt(data['accuracy']):>10s}   {data['matrix']}"
        )
    if run.metrics.errored:
        click.echo(f"errored cases excluded from matrix: {run.metrics.errored}")
    if plots:
        written = render_bench_report(run.metrics, out)
        click.echo("report files: " + ", ".join(str(p) for p in written))
    click.echo(f"results written to {out}")


@main.command("simulate-cost")
@click.option("--denovo", "denovo_tokens", type=int, required=True)
@click.option("--match", "match_tokens", type=int, required=True)
@click.option("--fraction", "match_fraction", type=str, required=True, help="match fraction, e.g. 0.8 or 4/5")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), default=None)
@click.option("--plots/--no-plots", default=False, show_default=True)
def simulate_cost_cmd(denovo_tokens: int, match_tokens: int, match_fraction: str, out_dir: Path | None, plots: bool):
    """Phase simulation: blended mature-phase token cost, exact arithmetic."""
    try:
        fraction = Fraction(match_fraction)
        report = simulate_phases(
            PhaseSimConfig(
                denovo_tokens=denovo_tokens, match_tokens=match_tokens, match_fraction=fraction
            )
        )
    except (MmiaError, ValueError, ZeroDivisionError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
        return
    click.echo(report.to_table())
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "cost_phases.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        if plots:
            written = render_cost_report(report, out_dir)
            click.echo("report files: " + ", ".join(str(p) for p in written))


@main.group("kb")
def kb_group():
    """Knowledge-base operations."""


@kb_group.command("ingest")
@click.argument("document", type=click.Path(exists=True, path_type=Path))
@click.option("--scenario", type=click.Choice(sorted(PACKS) + ["generic"]), required=True)
@click.option("--doc-id", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def kb_ingest_cmd(document: Path, scenario: str, doc_id: str | None, config_path: str | None):
    """Extract candidate rules from a document into the review queue."""
    try:
        state = _state(config_path)
        candidates = extract_candidates(
            document.read_text(encoding="utf-8"),
            doc_id or document.name,
            scenario,
            state.kb,
            state.gateway,
        )
        for cand in candidates:
            if cand.status == "candidate":
                state.queue.enqueue(
                    "candidate-axiom", {"axiom_id": cand.id, "rule_text": cand.rule_text}
                )
    except MmiaError as exc:
        _fail(exc)
        return
    for cand in candidates:
        click.echo(f"{cand.id} [{cand.status}] {cand.rule_text}" + (f"  # {cand.note}" if cand.note else ""))


@kb_group.command("list")
@click.option("--status", default=None)
@click.option("--kind", default=None)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def kb_list_cmd(status: str | None, kind: str | None, config_path: str | None):
    """List knowledge-base records."""
    try:
        state = _state(config_path)
    except MmiaError as exc:
        _fail(exc)
        return
    for record in state.kb.all(status=status, kind=kind):
        click.echo(f"{record.id} v{record.version} [{record.kind}/{record.status}] {record.rule_text}")


def _decide(axiom_id: str, decision: str, reviewer: str, config_path: str | None) -> None:
    try:
        state = _state(config_path)
        record = state.kb.review_decision(axiom_id, decision, reviewer=reviewer)
        for entry in state.queue.entries(kind="candidate-axiom", status="open"):
            if entry.payload.get("axiom_id") == axiom_id:
                state.queue.resolve(entry.id, {"decision": decision, "status": record.status})
    except MmiaError as exc:
        _fail(exc)
        return
    click.echo(f"{record.id} -> {record.status}")


@kb_group.command("approve")
@click.argument("axiom_id")
@click.option("--reviewer", default="cli")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def kb_approve_cmd(axiom_id: str, reviewer: str, config_path: str | None):
    """Approve a candidate record."""
    _decide(axiom_id, "approve", reviewer, config_path)


@kb_group.command("reject")
@click.argument("axiom_id")
@click.option("--reviewer", default="cli")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def kb_reject_cmd(axiom_id: str, reviewer: str, config_path: str | None):
    """Reject a candidate record."""
    _decide(axiom_id, "reject", reviewer, config_path)


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
def serve_cmd(config_path: str):
    """Start the HTTP service."""
    try:
        serve(load_config(Path(config_path)))
    except MmiaError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
