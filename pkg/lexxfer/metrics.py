"""
Binary classification metrics for the positive class, evaluation reports, and the
with / without pre-training delta reports.

Undefined values (a zero denominator, AUC of a single-class subset) are None and
serialise as null, never as 0.
"""

import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from lexxfer import constants as const
from lexxfer.errors import ConfigError, LexXferValueError
from lexxfer.utils import percentage_points, rows_to_csv

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

DEFAULT_THRESHOLD = 0.5
DELTA_CSV_HEADER = ("metric", "baseline", "treatment", "change")
EVAL_CSV_HEADER = ("name", "task", "dataset", "subset", "n", "threshold", *const.METRIC_NAMES)
COMPARISON_CSV_HEADER = ("model", "task", "train_size", "dataset", "f1_percent")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _check_inputs(scores: Sequence[float], labels: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if s.shape != y.shape or s.ndim != 1:
        raise LexXferValueError(
            f"Scores and labels must be equal length sequences, got {s.shape} and {y.shape}."
        )
    if s.size == 0:
        raise LexXferValueError("At least one scored example is required.")
    if np.any((y != 0) & (y != 1)):
        raise LexXferValueError("Labels must be 0 or 1.")
    return s, y


def confusion(
    scores: Sequence[float], labels: Sequence[int], threshold: float = DEFAULT_THRESHOLD
) -> ConfusionMatrix:
    """Counts of predictions against labels; a score at or above threshold predicts 1."""
    s, y = _check_inputs(scores, labels)
    predicted = s >= threshold
    positive = y == 1
    return ConfusionMatrix(
        tp=int(np.sum(predicted & positive)),
        fp=int(np.sum(predicted & ~positive)),
        fn=int(np.sum(~predicted & positive)),
        tn=int(np.sum(~predicted & ~positive)),
    )


def prf(cm: ConfusionMatrix) -> tuple[float | None, float | None, float | None]:
    """Precision, recall and F1; each is None when its denominator is zero."""
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else None
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation; 0 when any marginal is empty."""
    factors = (cm.tp + cm.fp, cm.tp + cm.fn, cm.tn + cm.fp, cm.tn + cm.fn)
    if any(f == 0 for f in factors):
        return 0.0
    value = (cm.tp * cm.tn - cm.fp * cm.fn) / math.sqrt(math.prod(factors))
    return min(1.0, max(-1.0, value))


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Area under the ROC curve as the Mann-Whitney statistic.

    Tied scores get their midrank, which makes this equal to the trapezoidal ROC area.
    """
    s, y = _check_inputs(scores, labels)
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise LexXferValueError("AUC needs both classes present.")
    ranks = rankdata(s, method="average")
    u = float(np.sum(ranks[y == 1])) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _metric_values(s: np.ndarray, y: np.ndarray, threshold: float) -> dict[str, float | None]:
    cm = confusion(s, y, threshold)
    precision, recall, f1 = prf(cm)
    has_both = 0 < int(np.sum(y)) < y.size
    return {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "mcc": mcc(cm),
        "auc": auc(s, y) if has_both else None,
    }


@dataclass(frozen=True)
class EvalReport:
    """
    Metrics of one model on one labelled test set.

    :param intervals: Optional bootstrap percentile intervals, metric name to
      [low, high] (or None when the metric was never defined in a resample).
    """

    task: str
    dataset: str
    subset: str
    precision: float | None
    recall: float | None
    f1: float | None
    mcc: float | None
    auc: float | None
    threshold: float
    n: int
    confusion: ConfusionMatrix = field(default_factory=ConfusionMatrix)
    model: str = const.MODEL_IDENTITY
    intervals: Mapping[str, tuple[float, float] | None] | None = None

    def metric(self, name: str) -> float | None:
        if name not in const.METRIC_NAMES:
            raise LexXferValueError(f"Unknown metric '{name}'.")
        return getattr(self, name)

    def to_dict(self) -> dict:
        content = {
            "task": self.task,
            "dataset": self.dataset,
            "subset": self.subset,
            "threshold": self.threshold,
            "n": self.n,
            "confusion": self.confusion.to_dict(),
            "model": self.model,
        }
        content.update({m: self.metric(m) for m in const.METRIC_NAMES})
        if self.intervals is not None:
            content["intervals"] = {
                k: None if v is None else list(v) for k, v in self.intervals.items()
            }
        return content

    def csv_row(self, name: str) -> tuple:
        return (
            name,
            self.task,
            self.dataset,
            self.subset,
            self.n,
            self.threshold,
            *(self.metric(m) for m in const.METRIC_NAMES),
        )


def eval_reports_to_csv(reports: Mapping[str, EvalReport]) -> str:
    return rows_to_csv(
        header=EVAL_CSV_HEADER, rows=(r.csv_row(name) for name, r in reports.items())
    )


def bootstrap_intervals(
    scores: Sequence[float],
    labels: Sequence[int],
    threshold: float = DEFAULT_THRESHOLD,
    iterations: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> dict[str, tuple[float, float] | None]:
    """
    Percentile intervals of each metric over resamples of the test examples.

    Resample b draws with replacement from a generator seeded with (seed, b).
    Resamples where a metric is undefined are left out of that metric's interval.
    """
    if iterations < 1:
        raise ConfigError(f"Confidence iterations must be >= 1, got {iterations}.")
    if not 0.0 < level < 1.0:
        raise ConfigError(f"Confidence level must be in (0, 1), got {level}.")
    s, y = _check_inputs(scores, labels)
    collected: dict[str, list[float]] = {m: [] for m in const.METRIC_NAMES}
    for b in range(iterations):
        idx = np.random.default_rng([seed, b]).integers(0, s.size, size=s.size)
        for name, value in _metric_values(s[idx], y[idx], threshold).items():
            if value is not None:
                collected[name].append(value)
    tail = (1.0 - level) / 2.0 * 100.0
    intervals: dict[str, tuple[float, float] | None] = {}
    for name, values in collected.items():
        if not values:
            intervals[name] = None
            continue
        lo, hi = np.percentile(values, [tail, 100.0 - tail])
        intervals[name] = (float(lo), float(hi))
    return intervals


def evaluate(
    scores: Sequence[float],
    labels: Sequence[int],
    task: str,
    dataset: str,
    subset: str = const.EvalSubset.ALL.value,
    threshold: float = DEFAULT_THRESHOLD,
    warnings: list[str] | None = None,
    confidence_iterations: int = 0,
    confidence_level: float = 0.95,
    seed: int = 0,
) -> EvalReport:
    """
    Score a test set.

    A subset with only one class gets an undefined AUC and a warning rather than an
    error, so an experiment can still report the other metrics.
    """
    if warnings is None:
        warnings = []
    s, y = _check_inputs(scores, labels)
    values = _metric_values(s, y, threshold)
    if values["auc"] is None:
        warnings.append(
            f"AUC is undefined for {dataset} {task} ({subset}): the test labels have one class."
        )
    for name in ("precision", "recall", "f1"):
        if values[name] is None:
            logger.debug("%s is undefined for %s %s (%s).", name, dataset, task, subset)
    intervals = None
    if confidence_iterations > 0:
        intervals = bootstrap_intervals(
            s, y, threshold, confidence_iterations, confidence_level, seed
        )
    return EvalReport(
        task=str(task),
        dataset=str(dataset),
        subset=str(subset),
        threshold=float(threshold),
        n=int(s.size),
        confusion=confusion(s, y, threshold),
        intervals=intervals,
        **values,
    )


@dataclass(frozen=True)
class DeltaReport:
    """
    Metric changes from a baseline to a treatment report, in percentage points.

    0.769 -> 0.866 is a change of +9.7.
    """

    name: str
    baseline: EvalReport
    treatment: EvalReport
    change: Mapping[str, float | None]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "baseline": self.baseline.to_dict(),
            "treatment": self.treatment.to_dict(),
            "change": dict(self.change),
        }

    def to_csv(self) -> str:
        rows = (
            (m, self.baseline.metric(m), self.treatment.metric(m), self.change[m])
            for m in const.METRIC_NAMES
        )
        return rows_to_csv(header=DELTA_CSV_HEADER, rows=rows)


def compare(baseline: EvalReport, treatment: EvalReport, name: str = "") -> DeltaReport:
    """treatment - baseline per metric; undefined on either side gives an undefined change."""
    if baseline.task != treatment.task:
        raise LexXferValueError(
            f"Cannot compare reports of different tasks: {baseline.task} and {treatment.task}."
        )
    if baseline.threshold != treatment.threshold:
        raise LexXferValueError(
            f"Cannot compare reports at different thresholds: "
            f"{baseline.threshold} and {treatment.threshold}."
        )
    change = {}
    for m in const.METRIC_NAMES:
        before, after = baseline.metric(m), treatment.metric(m)
        change[m] = None if before is None or after is None else percentage_points(after - before)
    return DeltaReport(name=name, baseline=baseline, treatment=treatment, change=change)


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    task: str
    train_size: int
    dataset: str
    f1_percent: float | None

    def csv_row(self) -> tuple:
        return (self.model, self.task, self.train_size, self.dataset, self.f1_percent)


def comparison_row(report: EvalReport, train_size: int) -> ComparisonRow:
    return ComparisonRow(
        model=report.model,
        task=report.task,
        train_size=train_size,
        dataset=report.dataset,
        f1_percent=percentage_points(report.f1),
    )


def format_comparison_table(rows: Iterable[ComparisonRow]) -> str:
    """F1 results laid out for side-by-side comparison with externally supplied figures."""
    return rows_to_csv(header=COMPARISON_CSV_HEADER, rows=(r.csv_row() for r in rows))
