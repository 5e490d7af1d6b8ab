"""Classification metrics and exploratory statistics."""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.core import Dataset
from src.errors import ArgumentError

PROBABILITY_TOL = 1e-6


def _ratio(numerator: float, denominator: float) -> float:
    """numerator / denominator, with 0/0 taken as 0."""
    return float(numerator / denominator) if denominator else 0.0


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """K x K counts; rows are true classes, columns predicted classes."""

    counts: np.ndarray

    @property
    def n(self) -> int:
        """Number of evaluated samples."""
        return int(self.counts.sum())

    @property
    def num_classes(self) -> int:
        return int(self.counts.shape[0])

    @property
    def support(self) -> np.ndarray:
        """True-class counts."""
        return self.counts.sum(axis=1)

    def to_frame(self, class_names: Optional[Sequence[str]] = None) -> pd.DataFrame:
        """Labelled table form, true classes down the side."""
        names = list(class_names) if class_names is not None else [str(i) for i in range(self.num_classes)]
        frame = pd.DataFrame(self.counts, columns=names)
        frame.insert(0, "true\\predicted", names)
        return frame


@dataclass(frozen=True)
class ClassBreakdown:
    """One-vs-rest counts of a single class."""

    class_index: int
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> float:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return _ratio(2 * p * r, p + r)

    def to_dict(self) -> Dict:
        """Convert to dictionary."""
        return {"class": self.class_index, "TP": self.tp, "FP": self.fp, "FN": self.fn, "TN": self.tn}


@dataclass(frozen=True, eq=False)
class MetricsReport:
    """Accuracy, support-weighted and macro precision/recall/F1, optional RMSE."""

    accuracy: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    precision_macro: float
    recall_macro: float
    f1_macro: float
    rmse: Optional[float]
    breakdowns: List[ClassBreakdown]
    confusion: ConfusionMatrix

    def to_dict(self, class_names: Optional[Sequence[str]] = None) -> Dict:
        """Convert to a JSON-ready dictionary.

        Args:
            class_names: Names for class indices, used in the per-class entries

        Returns:
            Dictionary with the scalar metrics, per-class rows and the confusion matrix
        """
        per_class = []
        for b in self.breakdowns:
            entry = b.to_dict()
            if class_names is not None:
                entry["name"] = class_names[b.class_index]
            entry.update(precision=b.precision, recall=b.recall, f1=b.f1, support=b.support)
            per_class.append(entry)
        return {
            "accuracy": self.accuracy,
            "precision_weighted": self.precision_weighted,
            "recall_weighted": self.recall_weighted,
            "f1_weighted": self.f1_weighted,
            "precision_macro": self.precision_macro,
            "recall_macro": self.recall_macro,
            "f1_macro": self.f1_macro,
            "rmse": self.rmse,
            "n": self.confusion.n,
            "per_class": per_class,
            "confusion_matrix": self.confusion.counts.tolist(),
        }


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], num_classes: int) -> ConfusionMatrix:
    """Count (true, predicted) pairs.

    Raises:
        ArgumentError: If the sequences differ in length, are empty, or hold an index outside [0, K)
    """
    t = np.asarray(y_true, dtype=np.int64).reshape(-1)
    p = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if t.shape != p.shape or t.shape[0] == 0:
        raise ArgumentError(f"Need equal, non-empty label sequences, got {t.shape[0]} and {p.shape[0]}")
    if num_classes < 1:
        raise ArgumentError("num_classes must be >= 1")
    for name, values in (("true", t), ("predicted", p)):
        if values.min() < 0 or values.max() >= num_classes:
            raise ArgumentError(f"A {name} label is outside [0, {num_classes})")

    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts)


def class_breakdown(cm: ConfusionMatrix, k: int) -> ClassBreakdown:
    """TP/FP/FN/TN of class k."""
    if not 0 <= k < cm.num_classes:
        raise ArgumentError(f"Class {k} is outside [0, {cm.num_classes})")
    tp = int(cm.counts[k, k])
    fp = int(cm.counts[:, k].sum()) - tp
    fn = int(cm.counts[k, :].sum()) - tp
    return ClassBreakdown(k, tp, fp, fn, cm.n - tp - fp - fn)


def metrics(cm: ConfusionMatrix, rmse: Optional[float] = None) -> MetricsReport:
    """Summarise a confusion matrix.

    Weighted averages use true-class support. Macro averages run over the
    classes that occur as a true or a predicted label.

    Args:
        cm: Confusion matrix with n >= 1
        rmse: Probability RMSE to carry in the report

    Returns:
        MetricsReport
    """
    n = cm.n
    if n < 1:
        raise ArgumentError("Confusion matrix is empty")
    breakdowns = [class_breakdown(cm, k) for k in range(cm.num_classes)]
    support = np.array([b.support for b in breakdowns], dtype=np.float64)
    precision = np.array([b.precision for b in breakdowns])
    recall = np.array([b.recall for b in breakdowns])
    f1 = np.array([b.f1 for b in breakdowns])

    present = np.array([b.support + b.fp > 0 for b in breakdowns])
    return MetricsReport(
        accuracy=float(np.trace(cm.counts)) / n,
        precision_weighted=float(support @ precision) / n,
        recall_weighted=float(support @ recall) / n,
        f1_weighted=float(support @ f1) / n,
        precision_macro=float(precision[present].mean()),
        recall_macro=float(recall[present].mean()),
        f1_macro=float(f1[present].mean()),
        rmse=rmse,
        breakdowns=breakdowns,
        confusion=cm,
    )


def rmse_proba(probabilities: np.ndarray, y_true: Sequence[int]) -> float:
    """Root mean squared distance between probability rows and one-hot truth.

    Raises:
        ArgumentError: If a row is not a probability distribution or shapes disagree
    """
    P = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(y_true, dtype=np.int64).reshape(-1)
    if P.ndim != 2 or P.shape[0] != y.shape[0] or P.shape[0] == 0:
        raise ArgumentError(f"Need an N x K probability matrix for {y.shape[0]} labels, got {P.shape}")
    if y.min() < 0 or y.max() >= P.shape[1]:
        raise ArgumentError(f"A label is outside [0, {P.shape[1]})")
    if not np.all(np.isfinite(P)) or np.any(P < 0):
        raise ArgumentError("Probabilities must be finite and non-negative")
    bad = np.flatnonzero(np.abs(P.sum(axis=1) - 1.0) > PROBABILITY_TOL)
    if bad.size:
        raise ArgumentError(f"Probability row {int(bad[0])} does not sum to 1")

    one_hot = np.eye(P.shape[1])[y]
    return float(np.sqrt(np.mean((P - one_hot) ** 2)))


def evaluate(
    y_true: Sequence[int],
    y_pred: Sequence[int],
    num_classes: int,
    probabilities: Optional[np.ndarray] = None,
) -> MetricsReport:
    """Confusion matrix, metrics and (when probabilities are given) RMSE in one call."""
    rmse = None if probabilities is None else rmse_proba(probabilities, y_true)
    return metrics(confusion_matrix(y_true, y_pred, num_classes), rmse)


def correlation_matrix(data: Dataset | np.ndarray) -> np.ndarray:
    """Pearson correlation between every pair of channels.

    Zero-variance channels correlate 0 with every other channel; the diagonal is always 1.

    Args:
        data: Dataset (its nine channels) or an N x d matrix, N >= 2

    Returns:
        Symmetric d x d matrix with entries in [-1, 1]
    """
    X = data.channels if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ArgumentError(f"Need at least two rows for a correlation matrix, got shape {X.shape}")

    constant = np.ptp(X, axis=0) == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.atleast_2d(np.corrcoef(X, rowvar=False))
    r[constant, :] = 0.0
    r[:, constant] = 0.0
    r = np.clip(np.nan_to_num(0.5 * (r + r.T), nan=0.0), -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return r


@dataclass(frozen=True, eq=False)
class Histogram:
    """Bin edges (n_bins + 1) and counts (n_bins)."""

    edges: np.ndarray
    counts: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        """One row per bin."""
        return pd.DataFrame({"bin_start": self.edges[:-1], "bin_end": self.edges[1:], "count": self.counts})


def histogram(values: Sequence[float], n_bins: int) -> Histogram:
    """Equal-width bins over [min, max]; the maximum falls in the last bin.

    Identical values give a single zero-width bin holding every value.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if n_bins < 1:
        raise ArgumentError(f"n_bins must be >= 1, got {n_bins}")
    if v.shape[0] == 0:
        raise ArgumentError("Cannot build a histogram of no values")
    if not np.all(np.isfinite(v)):
        raise ArgumentError("Histogram values must be finite")

    low, high = float(v.min()), float(v.max())
    if low == high:
        return Histogram(np.array([low, high]), np.array([v.shape[0]], dtype=np.int64))
    counts, edges = np.histogram(v, bins=n_bins, range=(low, high))
    return Histogram(edges, counts.astype(np.int64))
