"""Representativeness, classification quality, KS agreement and variability."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy import stats

if TYPE_CHECKING:
    from .classifier import PosteriorTable
    from .sampling import ClassPosteriorDistribution

KS_COEFFICIENT = 1.22  # 10% rejection level, large-sample approximation


class MetricError(Exception):
    pass


# ---------------------------------------------------------------- representativeness


def mid_mass(scores: np.ndarray) -> np.ndarray:
    """Midpoint of each member's slot in the cumulative normalized score mass.

    With equal scores this is (2r - 1) / 2m. Zero total mass falls back to
    equal weights.
    """
    scores = np.asarray(scores, dtype=np.float64)
    total = scores.sum()
    w = scores / total if total > 0 else np.full(len(scores), 1.0 / len(scores))
    return np.cumsum(w) - w / 2


def representativeness_index(dist: "ClassPosteriorDistribution", drawn) -> float:
    """Cramer-von Mises style agreement between the drawn evidence and its class.

    Members are weighted by their posterior score. For the j-th drawn member
    (ascending), F_j is its mid-mass position in the whole class and G_j its
    mid-mass position inside the evidence set; then

        RI = 1 - 12 n / (4 n^2 - 1) * sum_j (F_j - G_j)^2

    with n the evidence size. Drawing the whole class gives F = G and RI = 1;
    under equal scores G_j reduces to (2j - 1) / 2n.
    """
    indices = drawn.indices if hasattr(drawn, "indices") else tuple(drawn)
    if not indices:
        raise MetricError("representativeness index is undefined for an empty evidence set")
    rank = dist.rank_of()
    try:
        ranks = sorted(rank[i] - 1 for i in set(indices))
    except KeyError as exc:
        raise MetricError(f"record {exc.args[0]} is not a member of class {dist.label!r}") from None
    class_pos = dist.mid_mass[ranks]
    evidence_pos = mid_mass(dist.scores[ranks])
    n = len(ranks)
    return float(1.0 - 12.0 * n / (4.0 * n * n - 1.0) * np.sum((class_pos - evidence_pos) ** 2))


# ---------------------------------------------------------------- confusion & ratios


@dataclass(frozen=True)
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: np.ndarray  # rows: true class, columns: predicted class

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def normalized(self) -> np.ndarray:
        return self.counts / self.total

    def one_vs_rest(self, positive: str) -> tuple[int, int, int, int]:
        """(tp, fp, fn, tn) with ``positive`` against every other label."""
        k = self.labels.index(positive)
        c = self.counts
        tp = int(c[k, k])
        fp = int(c[:, k].sum() - tp)
        fn = int(c[k, :].sum() - tp)
        tn = int(c.sum() - tp - fp - fn)
        return tp, fp, fn, tn

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "counts": self.counts.astype(int).tolist(),
            "normalized": self.normalized().tolist(),
        }


def confusion_from_labels(predicted: Sequence[str], truth: Sequence[str], labels: Sequence[str]) -> ConfusionMatrix:
    if len(predicted) != len(truth):
        raise MetricError("predictions and truth differ in length")
    labels = tuple(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, t in zip(predicted, truth):
        if p not in pos or t not in pos:
            raise MetricError(f"label outside the confusion-matrix label set: {t!r}/{p!r}")
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(labels, counts)


def confusion(table: "PosteriorTable", truth: Sequence[str]) -> ConfusionMatrix:
    return confusion_from_labels(table.predicted, truth, table.labels)


METRIC_NAMES = ("accuracy", "precision", "recall", "specificity", "f1")


@dataclass(frozen=True)
class BinaryMetrics:
    """Undefined ratios (zero denominators) are NaN and listed in ``undefined``."""

    accuracy: float
    precision: float
    recall: float
    specificity: float
    f1: float
    undefined: frozenset = field(default_factory=frozenset)

    def to_dict(self) -> dict:
        out = {name: (None if name in self.undefined else getattr(self, name)) for name in METRIC_NAMES}
        out["undefined"] = sorted(self.undefined)
        return out


def _ratio(num: float, den: float) -> float:
    return num / den if den else math.nan


def binary_metrics(cm: ConfusionMatrix, positive: str) -> BinaryMetrics:
    tp, fp, fn, tn = cm.one_vs_rest(positive)
    accuracy = _ratio(tp + tn, tp + fp + fn + tn)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    f1 = _ratio(2 * precision * recall, precision + recall) if not (math.isnan(precision) or math.isnan(recall)) else math.nan
    values = dict(accuracy=accuracy, precision=precision, recall=recall, specificity=specificity, f1=f1)
    undefined = frozenset(k for k, v in values.items() if math.isnan(v))
    return BinaryMetrics(**values, undefined=undefined)


def macro_metrics(cm: ConfusionMatrix) -> BinaryMetrics:
    """One-vs-rest metrics averaged over labels; undefined entries are left out of each mean."""
    per = [binary_metrics(cm, lab) for lab in cm.labels]
    values = {}
    for name in METRIC_NAMES:
        col = [getattr(m, name) for m in per if name not in m.undefined]
        values[name] = float(np.mean(col)) if col else math.nan
    undefined = frozenset(k for k, v in values.items() if math.isnan(v))
    return BinaryMetrics(**values, undefined=undefined)


# ---------------------------------------------------------------- ROC


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # thresholds[i] produced point i + 1; point 0 is (0, 0)
    auc: float

    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_auc(scores: Sequence[float], truth: Sequence[bool]) -> RocCurve:
    """Threshold sweep over distinct scores (descending); equal scores form one step.

    ``truth`` holds True for positives. AUC by the trapezoid rule.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(truth, dtype=bool)
    if s.shape != y.shape:
        raise MetricError("scores and truth differ in length")
    n_pos, n_neg = int(y.sum()), int((~y).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("ROC needs at least one positive and one negative")
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last_of_group = np.r_[np.diff(s) != 0, True]
    tp = np.cumsum(y)[last_of_group]
    fp = np.cumsum(~y)[last_of_group]
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2))
    return RocCurve(fpr, tpr, s[last_of_group], auc)


def roc_auc_ovr(table: "PosteriorTable", truth: Sequence[str]) -> tuple[dict[str, RocCurve], float]:
    """Per-class one-vs-rest curves and their macro-average AUC.

    Classes with no positives or no negatives in ``truth`` are skipped.
    """
    truth = np.asarray(truth)
    curves = {}
    for lab in table.labels:
        y = truth == lab
        if y.all() or not y.any():
            continue
        curves[lab] = roc_auc(table.column(lab), y)
    if not curves:
        raise MetricError("ROC needs at least two classes present in truth")
    return curves, float(np.mean([c.auc for c in curves.values()]))


# ---------------------------------------------------------------- Kolmogorov-Smirnov


@dataclass(frozen=True)
class KsResult:
    d: float
    critical: float
    m: int

    @property
    def reject(self) -> bool:
        return self.d >= self.critical

    def to_dict(self) -> dict:
        return {"d": self.d, "critical": self.critical, "m": self.m, "reject": self.reject}


def ks_critical(m: int) -> float:
    if m < 1:
        raise MetricError("critical value needs m >= 1")
    return KS_COEFFICIENT / math.sqrt(m)


def ks_statistic(sample_a: Sequence[float], sample_b: Sequence[float], m: int | None = None) -> KsResult:
    """sup |ECDF_a - ECDF_b| over the merged support.

    ``m`` sizes the critical value 1.22 / sqrt(m); it defaults to the size of
    ``sample_b`` (pass the evidence set there).
    """
    a = np.sort(np.asarray(sample_a, dtype=np.float64))
    b = np.sort(np.asarray(sample_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise MetricError("KS statistic needs two non-empty samples")
    support = np.concatenate([a, b])
    fa = np.searchsorted(a, support, side="right") / a.size
    fb = np.searchsorted(b, support, side="right") / b.size
    m = b.size if m is None else int(m)
    return KsResult(float(np.max(np.abs(fa - fb))), ks_critical(m), m)


@dataclass(frozen=True)
class KsReport:
    per_attribute: dict[str, KsResult]

    @property
    def d(self) -> float:
        return max(r.d for r in self.per_attribute.values())

    def to_dict(self) -> dict:
        first = next(iter(self.per_attribute.values()))
        return {
            "d_max": self.d,
            "critical": first.critical,
            "m": first.m,
            "reject": self.d >= first.critical,
            "per_attribute": {k: v.to_dict() for k, v in self.per_attribute.items()},
        }


def ks_multivariate(a: np.ndarray, b: np.ndarray, names: Sequence[str], m: int | None = None) -> KsReport:
    a = np.asarray(a, dtype=np.float64).reshape(len(a), -1)
    b = np.asarray(b, dtype=np.float64).reshape(len(b), -1)
    if a.shape[1] != len(names) or b.shape[1] != len(names):
        raise MetricError("attribute count mismatch")
    return KsReport({name: ks_statistic(a[:, j], b[:, j], m) for j, name in enumerate(names)})


# ---------------------------------------------------------------- variability


@dataclass(frozen=True)
class VariabilityReport:
    minimum: float
    maximum: float
    standard_deviation: float
    interquartile_range: float
    skewness: float
    coefficient_of_variation: float
    undefined: frozenset = field(default_factory=frozenset)

    @property
    def range(self) -> tuple[float, float]:
        return (self.minimum, self.maximum)

    def to_dict(self) -> dict:
        def val(name):
            return None if name in self.undefined else getattr(self, name)

        return {
            "range": [self.minimum, self.maximum],
            "standard_deviation": self.standard_deviation,
            "interquartile_range": self.interquartile_range,
            "skewness": val("skewness"),
            "coefficient_of_variation": val("coefficient_of_variation"),
            "undefined": sorted(self.undefined),
        }


def quantile(values: Sequence[float], q: float) -> float:
    """Rank-midpoint quantile: order statistic i sits at (i - 0.5)/n, linear in between."""
    return float(np.quantile(np.asarray(values, dtype=np.float64), q, method="hazen"))


def variability(values: Sequence[float]) -> VariabilityReport:
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise MetricError("variability needs at least two values")
    constant = bool(np.all(x == x[0]))
    std = 0.0 if constant else float(np.std(x, ddof=1))
    iqr = quantile(x, 0.75) - quantile(x, 0.25)
    undefined = set()
    skew = math.nan
    if not constant and x.size >= 3:
        with np.errstate(invalid="ignore", divide="ignore"):
            skew = float(stats.skew(x, bias=False))
    if not math.isfinite(skew):
        # constant data, n < 3, or spread too small to resolve the moments
        skew = math.nan
        undefined.add("skewness")
    mean = float(x.mean())
    if mean == 0:
        cv = math.nan
        undefined.add("coefficient_of_variation")
    else:
        cv = std / mean
    return VariabilityReport(float(x.min()), float(x.max()), std, iqr, skew, cv, frozenset(undefined))
