"""Benchmark harness.

Runs every case through the chosen mode, folds the outcomes into a
confusion matrix, and optionally persists per-case records, logs, audit
reports, and the metrics report as deterministic JSONL/JSON files. A case
that errors out is recorded and excluded from the matrix, never dropped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..audit import ConsensusPolicy, consensus_audit
from ..engine import EngineContext, execute_task
from ..errors import MmiaError, PreconditionError
from ..kb.store import KnowledgeBase
from .baseline import baseline_oneshot
from .cases import BenchmarkCase
from .metrics import ConfusionMatrix, MetricsReport, metrics_from_records
from .packs import task_for_case


@dataclass
class BenchmarkRun:
    mode: str
    matrix: ConfusionMatrix
    records: list[dict]
    metrics: MetricsReport
    logs_json: list[str] = field(default_factory=list)
    audits_json: list[str] = field(default_factory=list)


def run_benchmark(
    suite: list[BenchmarkCase],
    mode: str,
    kb: KnowledgeBase,
    context: EngineContext,
    policy: ConsensusPolicy | None = None,
    verifier_factory=None,
    out_dir: Path | None = None,
) -> BenchmarkRun:
    if not suite:
        raise PreconditionError("benchmark suite is empty")
    if mode not in ("mmia", "baseline"):
        raise PreconditionError(f"unknown benchmark mode {mode!r}")
    policy = policy or ConsensusPolicy()

    matrix = ConfusionMatrix()
    records: list[dict] = []
    logs_json: list[str] = []
    audits_json: list[str] = []

    for case in suite:
        record = {
            "case_id": case.id,
            "scenario": case.scenario,
            "gold_label": case.gold_label,
            "injected_error": case.injected_error,
            "mode": mode,
            "flagged": False,
            "errored": False,
            "error": None,
            "tokens": 0,
        }
        try:
            if mode == "mmia":
                task = task_for_case(case)
                log = execute_task(task, context)
                logs_json.append(log.to_json())
                record["log_id"] = task.id
                record["tokens"] = log.cost_tokens()
                if not log.complete:
                    record["errored"] = True
                    record["error"] = log.error
                else:
                    consensus = consensus_audit(log, kb, policy, verifier_factory=verifier_factory)
                    for rep in consensus.reports:
                        audits_json.append(rep.to_json())
                    record["audit_outcome"] = consensus.outcome
                    record["adjudication"] = log.final_answer.verdict
                    if consensus.outcome == "disagreement":
                        record["errored"] = True
                        record["error"] = "audit disagreement"
                    else:
                        record["flagged"] = (
                            consensus.outcome == "flagged"
                            or log.final_answer.verdict == "erroneous"
                        )
            else:
                flag, justification, usage = baseline_oneshot(case, kb, context.gateway)
                record["flagged"] = flag
                record["justification"] = justification
                record["tokens"] = usage.total
        except MmiaError as exc:
            record["errored"] = True
            record["error"] = f"{exc.code}: {exc.message}"
        if not record["errored"]:
            matrix = matrix.add(case.gold_label == "erroneous", record["flagged"])
        records.append(record)

    metrics = metrics_from_records(records)
    run = BenchmarkRun(
        mode=mode,
        matrix=matrix,
        records=records,
        metrics=metrics,
        logs_json=logs_json,
        audits_json=audits_json,
    )
    if out_dir is not None:
        persist_run(run, out_dir)
    return run


def persist_run(run: BenchmarkRun, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "results.jsonl", "w", encoding="utf-8") as f:
        for record in run.records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    with open(out_dir / "logs.jsonl", "w", encoding="utf-8") as f:
        for line in run.logs_json:
            f.write(line + "\n")
    with open(out_dir / "audits.jsonl", "w", encoding="utf-8") as f:
        for line in run.audits_json:
            f.write(line + "\n")
    with open(out_dir / "metrics.json", "w", encoding="utf-8") as f:
        json.dump(run.metrics.to_dict(), f, sort_keys=True, indent=2)
        f.write("\n")
