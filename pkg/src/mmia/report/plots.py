"""Figure + CSV rendering for benchmark and cost reports.

Each report path writes the delimited summary next to the figures so runs
can be diffed textually and eyeballed graphically.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from ..bench.metrics import MetricsReport
from ..costs.ledger import CostLedger
from ..costs.phases import PhaseReport

_BAR_COLORS = {"recall": "#2a6f97", "false_positive_rate": "#c44536", "accuracy": "#4c956c"}


def _metric_value(value) -> float | None:
    return None if value in (None, "undefined") else float(value)


def render_bench_report(report: MetricsReport, out_dir: Path, stem: str = "metrics") -> list[Path]:
    """Write metrics.csv and a per-scenario bar figure; returns paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / f"{stem}.csv"
    rows = [("scope", "recall", "false_positive_rate", "accuracy", "tp", "fp", "tn", "fn")]
    scopes = [("overall", report.to_dict())] + [
        (name, data) for name, data in sorted(report.per_scenario.items())
    ]
    for name, data in scopes:
        matrix = data["matrix"]
        rows.append(
            (
                name,
                data["recall"],
                data["false_positive_rate"],
                data["accuracy"],
                matrix["tp"],
                matrix["fp"],
                matrix["tn"],
                matrix["fn"],
            )
        )
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f).writerows(rows)
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    labels = [name for name, _ in scopes]
    x = range(len(labels))
    width = 0.27
    for offset, metric in zip((-width, 0, width), _BAR_COLORS):
        values = [_metric_value(data[metric]) for _, data in scopes]
        heights = [v if v is not None else 0.0 for v in values]
        bars = ax.bar(
            [xi + offset for xi in x],
            heights,
            width=width,
            label=metric.replace("_", " "),
            color=_BAR_COLORS[metric],
        )
        for bar, v in zip(bars, values):
            ax.annotate(
                "n/a" if v is None else f"{v:.2f}",
                (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                ha="center",
                va="bottom",
                fontsize=8,
            )
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.15)
    ax.set_ylabel("rate")
    ax.set_title("Benchmark metrics (positive class: erroneous case flagged)")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig_path = out_dir / f"{stem}.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written


def render_cost_report(report: PhaseReport, out_dir: Path, stem: str = "cost_phases") -> list[Path]:
    """Write the phase table (txt + csv) and a token bar figure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    txt_path = out_dir / f"{stem}.txt"
    txt_path.write_text(report.to_table() + "\n", encoding="utf-8")
    written.append(txt_path)

    d = report.to_dict()
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(("phase", "avg_tokens_per_task", "relative_cost"))
        writer.writerow(("initial", d["initial_avg_tokens"], "100.0%"))
        writer.writerow(
            ("mature_matched", report.config.match_tokens, d["matched_relative_cost_pct"])
        )
        writer.writerow(("mature_denovo", report.config.denovo_tokens, "100.0%"))
        writer.writerow(("mature_blended", d["mature_avg_tokens"], d["relative_cost_pct"]))
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(6.5, 4))
    labels = ["initial\n(de novo)", "mature\nmatched", "mature\nde novo", "mature\nblended"]
    values = [
        d["initial_avg_tokens"],
        report.config.match_tokens,
        report.config.denovo_tokens,
        d["mature_avg_tokens"],
    ]
    colors = ["#6c757d", "#4c956c", "#6c757d", "#2a6f97"]
    bars = ax.bar(labels, values, color=colors)
    for bar, v in zip(bars, values):
        ax.annotate(
            f"{v:,.0f}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center",
            va="bottom",
            fontsize=9,
        )
    ax.set_ylabel("avg tokens per task")
    ax.set_title("Token cost by operating phase")
    fig.tight_layout()
    fig_path = out_dir / f"{stem}.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written


def render_ledger_report(ledger: CostLedger, out_dir: Path, stem: str = "ledger") -> list[Path]:
    """Write per-mode ledger averages (csv) and a token histogram figure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(("mode", "tasks", "total_tokens", "avg_tokens"))
        for mode in ("de-novo", "rag-match"):
            entries = ledger.entries(mode)
            avg = ledger.average_tokens(mode)
            writer.writerow(
                (mode, len(entries), ledger.total_tokens(mode), "" if avg is None else f"{avg:.1f}")
            )
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(6.5, 4))
    for mode, color in (("de-novo", "#6c757d"), ("rag-match", "#4c956c")):
        tokens = [e.tokens for e in ledger.entries(mode)]
        if tokens:
            ax.hist(tokens, bins=20, alpha=0.75, label=f"{mode} (n={len(tokens)})", color=color)
    ax.set_xlabel("tokens per task")
    ax.set_ylabel("tasks")
    ax.set_title("Per-task token cost by mode")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig_path = out_dir / f"{stem}.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written
