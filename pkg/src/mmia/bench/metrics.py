"""Confusion matrix and metric formulas.

Positive class = "erroneous case flagged". A direction to keep straight:
recall is over gold-erroneous cases, the false positive rate is over
gold-correct ones. Zero-denominator metrics report as undefined, never 0
or 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ValidationError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValidationError("confusion-matrix counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def add(self, gold_erroneous: bool, flagged: bool) -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + (1 if gold_erroneous and flagged else 0),
            fp=self.fp + (1 if not gold_erroneous and flagged else 0),
            tn=self.tn + (1 if not gold_erroneous and not flagged else 0),
            fn=self.fn + (1 if gold_erroneous and not flagged else 0),
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}

    @staticmethod
    def from_dict(d: dict) -> "ConfusionMatrix":
        return ConfusionMatrix(int(d["tp"]), int(d["fp"]), int(d["tn"]), int(d["fn"]))


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def _fmt(x: float | None) -> str | float:
    return "undefined" if x is None else x


@dataclass
class MetricsReport:
    recall: float | None
    false_positive_rate: float | None
    accuracy: float | None
    matrix: ConfusionMatrix
    per_scenario: dict[str, dict] = field(default_factory=dict)
    errored: int = 0

    def to_dict(self) -> dict:
        return {
            "recall": _fmt(self.recall),
            "false_positive_rate": _fmt(self.false_positive_rate),
            "accuracy": _fmt(self.accuracy),
            "matrix": self.matrix.to_dict(),
            "per_scenario": self.per_scenario,
            "errored": self.errored,
        }


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Recall = TP/(TP+FN), FPR = FP/(FP+TN), accuracy = (TP+TN)/total."""
    return MetricsReport(
        recall=_ratio(cm.tp, cm.tp + cm.fn),
        false_positive_rate=_ratio(cm.fp, cm.fp + cm.tn),
        accuracy=_ratio(cm.tp + cm.tn, cm.total),
        matrix=cm,
    )


def metrics_from_records(records: list[dict]) -> MetricsReport:
    """Recount the matrix from raw per-case records, then apply the formulas.

    Errored cases are excluded from the matrix and reported separately.
    """
    cm = ConfusionMatrix()
    by_scenario: dict[str, ConfusionMatrix] = {}
    errored = 0
    for r in records:
        if r.get("errored"):
            errored += 1
            continue
        gold = r["gold_label"] == "erroneous"
        flagged = bool(r["flagged"])
        cm = cm.add(gold, flagged)
        s = r["scenario"]
        by_scenario[s] = by_scenario.get(s, ConfusionMatrix()).add(gold, flagged)
    report = compute_metrics(cm)
    report.errored = errored
    report.per_scenario = {
        s: {
            "recall": _fmt(_ratio(m.tp, m.tp + m.fn)),
            "false_positive_rate": _fmt(_ratio(m.fp, m.fp + m.tn)),
            "accuracy": _fmt(_ratio(m.tp + m.tn, m.total)),
            "matrix": m.to_dict(),
        }
        for s, m in sorted(by_scenario.items())
    }
    return report
