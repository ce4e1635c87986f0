"""Combination strategies for pairs of cross-validated prediction vectors.

Parallel routes treat both sources symmetrically: convex mixtures of the
two probability vectors, or a small logistic model fitted to their
logits inside an extra leave-one-out loop so the combined predictions
stay honest. The sequential route prioritizes one source by freezing its
logits as an offset while the second source is refitted with the full
penalized machinery. Recalibration of a single vector and the naive
feature-stacking baseline complete the set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .crossval import double_cv_predict
from .glm import (
    PROB_EPS,
    DesignMatrix,
    OffsetVector,
    OutcomeVector,
    PredictionVector,
    _clipped_probs,
    _log_likelihood,
    logit_clip,
)
from .metrics import deviance, press
from .parallel import ordered_map

_STABILIZER = 1e-8  # curvature guard on combiner-stage slopes, not the intercept


@dataclass
class CombinedPrediction:
    """Combined probabilities plus the method tag and its fitted parameters."""

    probs: PredictionVector
    method: str
    parameters: dict[str, Any]


def mix(p1: PredictionVector, p2: PredictionVector, w: float) -> CombinedPrediction:
    """Convex mixture w*p1 + (1-w)*p2; w = 0.5 is the plain average."""
    if p1.n != p2.n:
        raise ValueError(f"length mismatch: {p1.n} vs {p2.n}")
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"w must lie in [0, 1], got {w}")
    values = w * p1.values + (1.0 - w) * p2.values
    method = "average" if w == 0.5 else "mixture"
    return CombinedPrediction(
        probs=PredictionVector(values, method),
        method=method,
        parameters={"w": w},
    )


def search_mixture_weight(
    p1: PredictionVector,
    p2: PredictionVector,
    y: OutcomeVector,
    criterion: str = "deviance",
    grid_step: float = 0.01,
) -> tuple[float, CombinedPrediction]:
    """Grid-search the mixture weight on the given criterion.

    p1 and p2 are already out-of-fold, so the criterion is evaluated on
    all pairs; the weight itself is chosen in-sample and that optimism is
    flagged in the parameters rather than nested away. Ties break toward
    w = 0.5. The flat-maximum flag is set when the criterion at w = 0.5
    is within 5% of the searched minimum.
    """
    if p1.n != p2.n or p1.n != y.n:
        raise ValueError(f"length mismatch: {p1.n}, {p2.n}, {y.n}")
    if criterion not in ("deviance", "brier"):
        raise ValueError(f"criterion must be 'deviance' or 'brier', got {criterion!r}")
    steps = round(1.0 / grid_step)
    if steps < 1 or abs(steps * grid_step - 1.0) > 1e-9:
        raise ValueError(f"grid_step must divide 1 evenly, got {grid_step}")
    score = deviance if criterion == "deviance" else press

    ws = np.linspace(0.0, 1.0, steps + 1)
    crits = np.array(
        [
            score(y, PredictionVector(w * p1.values + (1.0 - w) * p2.values, "mixture"))
            for w in ws
        ]
    )
    ranked = sorted(range(ws.size), key=lambda i: (crits[i], abs(ws[i] - 0.5), ws[i]))
    best = ranked[0]
    w_star = float(ws[best])
    crit_half = float(score(y, mix(p1, p2, 0.5).probs))
    combined = mix(p1, p2, w_star)
    combined.parameters.update(
        {
            "criterion": criterion,
            "criterion_value": float(crits[best]),
            "criterion_at_half": crit_half,
            "selected_in_sample": True,
            "flat_maximum": crit_half <= 1.05 * float(crits[best]),
        }
    )
    return w_star, combined


# ------------------------------------------------------------------ #
# Leave-one-out logistic re-fitting on prediction logits
# ------------------------------------------------------------------ #


def _fit_logistic_ml(Z: np.ndarray, yarr: np.ndarray, max_iter: int = 100) -> tuple[float, np.ndarray]:
    """Maximum-likelihood logistic fit of y on raw covariates Z.

    Unpenalized by intent; a 1e-8 ridge on the slopes (never the
    intercept) keeps collinear or separated refits defined. Newton with
    step halving; raises on non-convergence.
    """
    n, k = Z.shape
    a = float(logit_clip(float(yarr.mean())))
    b = np.zeros(k)

    def objective(ai: float, bi: np.ndarray) -> float:
        probs = _clipped_probs(ai + Z @ bi)
        return _log_likelihood(yarr, probs) - _STABILIZER * float(np.sum(bi * bi))

    obj = objective(a, b)
    for _ in range(max_iter):
        p = _clipped_probs(a + Z @ b)
        w = p * (1.0 - p)
        g = np.concatenate(([np.sum(yarr - p)], Z.T @ (yarr - p) - 2.0 * _STABILIZER * b))
        h = np.empty((k + 1, k + 1))
        h[0, 0] = np.sum(w)
        h[0, 1:] = (Z * w[:, None]).sum(axis=0)
        h[1:, 0] = h[0, 1:]
        h[1:, 1:] = Z.T @ (Z * w[:, None]) + 2.0 * _STABILIZER * np.eye(k)
        try:
            step = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(h, g, rcond=None)[0]
        t = 1.0
        a_new, b_new = a + step[0], b + step[1:]
        obj_new = objective(a_new, b_new)
        while obj_new < obj - 1e-12 and t > 1e-10:
            t *= 0.5
            a_new, b_new = a + t * step[0], b + t * step[1:]
            obj_new = objective(a_new, b_new)
        delta = max(abs(a_new - a), float(np.max(np.abs(b_new - b))) if k else 0.0)
        a, b, obj_prev, obj = a_new, b_new, obj, obj_new
        if delta <= 1e-10 or abs(obj - obj_prev) <= 1e-12 * (abs(obj) + 1.0):
            return a, b
    raise RuntimeError("logistic refit did not converge")


def _loo_logit_refit(
    logits: np.ndarray, y: OutcomeVector, method: str
) -> CombinedPrediction:
    """Fit the combiner model on all pairs except i, predict pair i, for every i.

    Exactly-constant covariate columns are dropped per refit (slope 0);
    with no varying columns left the fit reduces to the closed-form
    leave-one-out prevalence.
    """
    n, k = logits.shape
    labels = y.labels.astype(np.float64)

    def run_one(i: int) -> tuple[float, float, np.ndarray]:
        rest = np.concatenate([np.arange(i), np.arange(i + 1, n)])
        Z, yr = logits[rest], labels[rest]
        keep = np.flatnonzero(~np.all(Z == Z[0:1, :], axis=0))
        beta = np.zeros(k)
        if keep.size == 0:
            prev = float(np.clip(yr.mean(), PROB_EPS, 1.0 - PROB_EPS))
            return prev, float(logit_clip(prev)), beta
        try:
            a, b = _fit_logistic_ml(Z[:, keep], yr)
        except RuntimeError as exc:
            raise RuntimeError(f"{exc} (left-out index {i})") from None
        beta[keep] = b
        pred = float(_clipped_probs(np.array([a + logits[i] @ beta]))[0])
        return pred, a, beta

    results = ordered_map(run_one, range(n))
    preds = np.array([r[0] for r in results])
    alphas = np.array([r[1] for r in results])
    betas = np.vstack([r[2] for r in results])
    parameters: dict[str, Any] = {"alpha": alphas}
    for j in range(k):
        parameters[f"beta{j + 1}"] = betas[:, j]
    return CombinedPrediction(
        probs=PredictionVector(preds, method),
        method=method,
        parameters=parameters,
    )


def stack_logistic_loo(
    p1: PredictionVector, p2: PredictionVector, y: OutcomeVector
) -> CombinedPrediction:
    """Model-based parallel combination on the two prediction logits."""
    if p1.n != p2.n or p1.n != y.n:
        raise ValueError(f"length mismatch: {p1.n}, {p2.n}, {y.n}")
    logits = np.column_stack([logit_clip(p1.values), logit_clip(p2.values)])
    return _loo_logit_refit(logits, y, method="model_based")


def recalibrate_loo(pk: PredictionVector, y: OutcomeVector) -> CombinedPrediction:
    """Intercept-and-slope recalibration of a single prediction vector."""
    if pk.n != y.n:
        raise ValueError(f"length mismatch: {pk.n} vs {y.n}")
    logits = logit_clip(pk.values).reshape(-1, 1)
    return _loo_logit_refit(logits, y, method="recalibrated")


def sequential_offset(
    p1: PredictionVector,
    X2: DesignMatrix,
    y: OutcomeVector,
    kind: str,
    *,
    outer_folds: int | None = None,
    inner_folds: int = 10,
    seed: int = 0,
    n_lambda: int = 15,
    min_ratio: float = 1e-2,
) -> CombinedPrediction:
    """Add a second source on top of frozen primary-source predictions.

    The primary logits enter as an offset (never refitted) in a
    penalized logistic regression on X2, run through the full nested
    machinery with each held-out sample predicted using its own offset.
    outer_folds=None gives the default leave-one-out outer loop; pass a
    fold count for the K-fold override on large n.
    """
    if p1.n != y.n or X2.n != y.n:
        raise ValueError(f"length mismatch: {p1.n}, {X2.n}, {y.n}")
    offs = OffsetVector(logit_clip(p1.values))
    loo = outer_folds is None
    result = double_cv_predict(
        X2,
        y,
        offs,
        kind,
        J=y.n if loo else outer_folds,
        K_inner=inner_folds,
        seed=seed,
        stratified=not loo,
        n_lambda=n_lambda,
        min_ratio=min_ratio,
    )
    return CombinedPrediction(
        probs=PredictionVector(result.oof_probs.values, "sequential"),
        method="sequential",
        parameters={
            "penalty_kind": kind,
            "outer": "loo" if loo else f"kfold({outer_folds})",
            "chosen_lambda": result.chosen_lambda,
        },
    )


def naive_stack(
    X1: DesignMatrix,
    X2: DesignMatrix,
    y: OutcomeVector,
    kind: str,
    *,
    outer_folds: int = 10,
    inner_folds: int = 10,
    seed: int = 0,
    n_lambda: int = 15,
    min_ratio: float = 1e-2,
) -> CombinedPrediction:
    """Single penalized fit on the column-concatenation of both sources."""
    if X1.sample_ids != X2.sample_ids:
        raise ValueError("X1 and X2 sample ids differ")
    names = tuple(f"x1:{nm}" for nm in X1.feature_names) + tuple(
        f"x2:{nm}" for nm in X2.feature_names
    )
    stacked = DesignMatrix(np.hstack([X1.values, X2.values]), names, X1.sample_ids)
    result = double_cv_predict(
        stacked,
        y,
        None,
        kind,
        J=outer_folds,
        K_inner=inner_folds,
        seed=seed,
        n_lambda=n_lambda,
        min_ratio=min_ratio,
    )
    return CombinedPrediction(
        probs=PredictionVector(result.oof_probs.values, "naive"),
        method="naive",
        parameters={"penalty_kind": kind, "chosen_lambda": result.chosen_lambda},
    )
