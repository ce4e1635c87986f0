"""Calibration and discrimination summaries for out-of-fold probabilities.

PRESS (the Brier score on the sum scale), the cross-validated sum of
squared differences between two prediction vectors, the Q2 ratio built
from both, the binomial deviance, and the tie-aware c-index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .glm import PROB_EPS, OutcomeVector, PredictionVector

if TYPE_CHECKING:
    from .crossval import FoldPlan


@dataclass
class MetricsRow:
    """One report row: a method label with its five summary numbers."""

    label: str
    brier_sum: float
    brier_mean: float
    deviance: float
    q2: float
    c_index: float
    penalty: str = ""


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")


def _labels(y) -> np.ndarray:
    """Accept an OutcomeVector or a plain 0/1 array.

    Metrics are pure functions of label/probability vectors, and
    single-class vectors are legitimate inputs for calibration measures
    even though modeling outcomes require both classes.
    """
    if isinstance(y, OutcomeVector):
        return y.labels.astype(np.float64)
    arr = np.asarray(y)
    if arr.ndim != 1 or not np.all(np.isin(arr, (0, 1))):
        raise ValueError("labels must be a 1-D vector of 0s and 1s")
    return arr.astype(np.float64)


def null_probs_cv(y: OutcomeVector, plan: "FoldPlan") -> PredictionVector:
    """Cross-validated intercept-only predictions: training-fold prevalences.

    For a leave-one-out plan this is (sum(y) - y_i) / (n - 1). A
    single-class training partition is clipped into [1e-6, 1-1e-6].
    """
    labels = _labels(y)
    if plan.n != labels.size:
        raise ValueError(f"fold plan covers {plan.n} samples but y has {labels.size}")
    out = np.empty(y.n)
    for j in range(plan.J):
        out[plan.test_indices(j)] = labels[plan.train_indices(j)].mean()
    return PredictionVector(np.clip(out, PROB_EPS, 1.0 - PROB_EPS), method="null")


def press(y, p: PredictionVector) -> float:
    """Prediction sum of squares, sum_i (y_i - p_i)^2."""
    labels = _labels(y)
    _check_lengths(labels, p.values)
    resid = labels - p.values
    return float(np.sum(resid * resid))


def cvss(p: PredictionVector, q: PredictionVector) -> float:
    """Sum of squared differences between two prediction vectors."""
    _check_lengths(p.values, q.values)
    diff = p.values - q.values
    return float(np.sum(diff * diff))


def q2(y, p: PredictionVector, p0: PredictionVector) -> float:
    """CVSS(p, p0) / PRESS(y, p0), the cross-validatory R2 analogue."""
    denom = press(y, p0)
    if denom == 0.0:
        raise ValueError("PRESS(y, p0) is zero; Q2 undefined")
    return cvss(p, p0) / denom


def deviance(y, p: PredictionVector) -> float:
    """Binomial deviance, -2 * sum_i log(1 - |y_i - p_i|)."""
    labels = _labels(y)
    _check_lengths(labels, p.values)
    gap = np.abs(labels - p.values)
    return float(-2.0 * np.sum(np.log1p(-gap)))


def _midranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their group average."""
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    edges = np.r_[0, np.flatnonzero(xs[1:] != xs[:-1]) + 1, xs.size]
    avg = (edges[:-1] + edges[1:] + 1) / 2.0
    ranks = np.empty(x.size)
    ranks[order] = np.repeat(avg, np.diff(edges))
    return ranks


def c_index(y, p: PredictionVector) -> float:
    """Concordance over all case-control pairs, ties counted as 0.5.

    Rank-based O(n log n) evaluation; exactly equal to the double-sum
    definition, including tie handling.
    """
    labels = _labels(y)
    _check_lengths(labels, p.values)
    pos = labels == 1
    n1 = int(pos.sum())
    n2 = labels.size - n1
    if n1 == 0 or n2 == 0:
        raise ValueError("c-index needs both classes present")
    ranks = _midranks(p.values)
    concordant = float(np.sum(ranks[pos])) - n1 * (n1 + 1) / 2.0
    return concordant / (n1 * n2)


def metrics_row(
    label: str,
    y,
    p: PredictionVector,
    p0: PredictionVector,
    penalty: str = "",
) -> MetricsRow:
    """Assemble one report row from a single set of prediction vectors."""
    brier_sum = press(y, p)
    return MetricsRow(
        label=label,
        brier_sum=brier_sum,
        brier_mean=brier_sum / _labels(y).size,
        deviance=deviance(y, p),
        q2=q2(y, p, p0),
        c_index=c_index(y, p),
        penalty=penalty,
    )
