"""Benchmark layer: scenario packs, synthetic case generation with error
injection, the one-shot baseline, the run harness, and metrics."""

from .cases import BenchmarkCase
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics
from .packs import PACKS, ScenarioPack, evaluate_case_facts, install_pack, task_for_case
from .generate import generate_case, inject_error, make_suite
from .baseline import baseline_oneshot
from .runner import BenchmarkRun, run_benchmark

__all__ = [
    "BenchmarkCase",
    "ConfusionMatrix",
    "MetricsReport",
    "compute_metrics",
    "PACKS",
    "ScenarioPack",
    "install_pack",
    "task_for_case",
    "evaluate_case_facts",
    "generate_case",
    "inject_error",
    "make_suite",
    "baseline_oneshot",
    "run_benchmark",
    "BenchmarkRun",
]
