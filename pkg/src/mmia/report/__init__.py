"""Report rendering: delimited summaries plus matplotlib figures."""

from .plots import render_bench_report, render_cost_report, render_ledger_report

__all__ = ["render_bench_report", "render_cost_report", "render_ledger_report"]
