"""Stratified fold plans and double cross-validated out-of-fold prediction.

The outer loop holds out each fold in turn to measure honest predictive
performance; an inner cross-validated grid search on the remaining rows
picks the penalty weight. Standardization, grid construction and lambda
selection all see training rows only, so a held-out sample can never
influence the model that predicts it. Every fold derives its randomness
from (seed, fold index), which makes results independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glm import (
    DesignMatrix,
    OffsetVector,
    OutcomeVector,
    PenaltySpec,
    PredictionVector,
    fit_penalized_logistic,
    fit_penalized_path,
    lambda_grid,
    predict_proba,
    standardize,
)
from .metrics import deviance
from .parallel import ordered_map


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of n samples to J folds, reproducible from its seed."""

    fold_of: np.ndarray
    J: int
    seed: int
    stratified: bool

    def __post_init__(self) -> None:
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        object.__setattr__(self, "fold_of", fold_of)
        if fold_of.ndim != 1:
            raise ValueError("fold_of must be 1-D")
        counts = np.bincount(fold_of, minlength=self.J)
        if fold_of.size and (counts.size != self.J or np.any(counts == 0)):
            raise ValueError("every fold must be non-empty")

    @property
    def n(self) -> int:
        return self.fold_of.size

    def test_indices(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == j)

    def train_indices(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != j)


@dataclass
class DoubleCvResult:
    """Out-of-fold probabilities plus the per-fold selection bookkeeping."""

    oof_probs: PredictionVector
    chosen_lambda: np.ndarray
    inner_scores: list[list[tuple[float, float]]]
    penalty_kind: str
    plan: FoldPlan


def derive_seed(seed: int, *parts: int) -> int:
    """Stable child seed from a parent seed and integer context keys."""
    ss = np.random.SeedSequence([int(seed)] + [int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_folds(y: OutcomeVector, J: int, seed: int, stratified: bool = True) -> FoldPlan:
    """Seeded shuffled round-robin fold assignment, class-wise if stratified."""
    n = y.n
    if not 2 <= J <= n:
        raise ValueError(f"J must satisfy 2 <= J <= {n}, got {J}")
    rng = np.random.default_rng(int(seed))
    fold_of = np.empty(n, dtype=np.int64)
    if stratified:
        n1 = int(y.labels.sum())
        smallest = min(n1, n - n1)
        if J > smallest:
            raise ValueError(
                f"stratification infeasible: J={J} exceeds the smaller class size {smallest}"
            )
        for cls in (0, 1):
            idx = np.flatnonzero(y.labels == cls)
            perm = rng.permutation(idx)
            fold_of[perm] = np.arange(perm.size) % J
    else:
        perm = rng.permutation(n)
        fold_of[perm] = np.arange(n) % J
    return FoldPlan(fold_of=fold_of, J=J, seed=int(seed), stratified=stratified)


def select_lambda_inner(
    X_train: DesignMatrix,
    y_train: OutcomeVector,
    offset_train: OffsetVector | None,
    kind: str,
    grid: np.ndarray,
    K_inner: int,
    seed: int,
) -> tuple[float, list[tuple[float, float]]]:
    """Pick the grid value minimizing inner cross-validated deviance.

    Returns (lambda_star, score_table) where the table lists (lambda,
    deviance) for every grid point. Ties break toward the largest
    lambda. Raises if no grid point produced a single converged fit.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(grid) > 0.0):
        raise ValueError("lambda grid must be sorted descending")
    offs = offset_train if offset_train is not None else OffsetVector.zeros(y_train.n)
    plan = make_folds(y_train, K_inner, seed, stratified=True)

    oof = np.empty((grid.size, y_train.n))
    any_converged = np.zeros(grid.size, dtype=bool)
    for k in range(plan.J):
        tr, te = plan.train_indices(k), plan.test_indices(k)
        fits = fit_penalized_path(
            X_train.take_rows(tr),
            y_train.take_rows(tr),
            kind,
            grid,
            offset=offs.take_rows(tr),
        )
        X_te, offs_te = X_train.take_rows(te), offs.take_rows(te)
        for gi, fit in enumerate(fits):
            oof[gi, te] = predict_proba(fit, X_te, offs_te).values
            any_converged[gi] |= fit.converged
    if not any_converged.any():
        raise RuntimeError(
            f"no converged fits anywhere on the lambda grid "
            f"[{grid[-1]:.6g}, {grid[0]:.6g}]"
        )
    scores = [
        (float(lam), deviance(y_train, PredictionVector(oof[gi], method="inner_cv")))
        for gi, lam in enumerate(grid)
    ]
    devs = np.array([s[1] for s in scores])
    best = int(np.argmin(devs))  # first minimum = largest lambda on a descending grid
    return float(grid[best]), scores


def double_cv_predict(
    X: DesignMatrix,
    y: OutcomeVector,
    offset: OffsetVector | None,
    kind: str,
    J: int = 10,
    K_inner: int = 10,
    seed: int = 0,
    *,
    stratified: bool = True,
    n_lambda: int = 15,
    min_ratio: float = 1e-2,
    plan: FoldPlan | None = None,
) -> DoubleCvResult:
    """Out-of-fold probabilities from the full nested selection machinery.

    Per outer fold: standardize on training rows, rebuild the grid on
    training rows, select lambda by inner K-fold deviance, fit, and
    predict the held-out fold. A prebuilt plan may be passed to share
    folds across calls; it overrides J/stratified.
    """
    if X.sample_ids != y.sample_ids:
        raise ValueError("X and y sample ids differ")
    offs = offset if offset is not None else OffsetVector.zeros(y.n)
    if offs.n != y.n:
        raise ValueError(f"offset has {offs.n} values for {y.n} samples")
    if plan is None:
        plan = make_folds(y, J, seed, stratified=stratified)
    elif plan.n != y.n:
        raise ValueError(f"fold plan covers {plan.n} samples but data has {y.n}")

    def run_fold(j: int) -> tuple[np.ndarray, np.ndarray, float, list[tuple[float, float]]]:
        tr, te = plan.train_indices(j), plan.test_indices(j)
        X_tr, y_tr, o_tr = X.take_rows(tr), y.take_rows(tr), offs.take_rows(tr)
        Xs, _ = standardize(X_tr)
        grid = lambda_grid(Xs, y_tr, kind, n_values=n_lambda, min_ratio=min_ratio)
        lam, scores = select_lambda_inner(
            X_tr, y_tr, o_tr, kind, grid, K_inner, derive_seed(seed, j)
        )
        fit = fit_penalized_logistic(X_tr, y_tr, PenaltySpec(kind, lam), offset=o_tr)
        probs = predict_proba(fit, X.take_rows(te), offs.take_rows(te))
        return te, probs.values, lam, scores

    results = ordered_map(run_fold, range(plan.J))
    oof = np.empty(y.n)
    chosen = np.empty(plan.J)
    inner_scores: list[list[tuple[float, float]]] = []
    for j, (te, values, lam, scores) in enumerate(results):
        oof[te] = values
        chosen[j] = lam
        inner_scores.append(scores)
    return DoubleCvResult(
        oof_probs=PredictionVector(oof, method=f"double_cv[{kind}]"),
        chosen_lambda=chosen,
        inner_scores=inner_scores,
        penalty_kind=kind,
        plan=plan,
    )
