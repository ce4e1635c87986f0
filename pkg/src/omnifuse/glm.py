"""Penalized logistic regression with per-observation offsets.

This is the fitting core shared by every prediction route in the package.
Both penalties maximize the sum-scale penalized log-likelihood

    sum_i [ y_i*log(p_i) + (1 - y_i)*log(1 - p_i) ] - lam * pen(beta)

with logit(p_i) = intercept + offset_i + x_i @ beta, an unpenalized
intercept, and pen(beta) either sum(beta**2) (ridge) or sum(|beta|)
(lasso). Features are standardized internally so a single lambda is
comparable across features; the standardization stats live in the fit
result and are re-applied at prediction time. All functions are pure and
deterministic: identical inputs give bitwise-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

PROB_EPS = 1e-6
LOGIT_CAP = math.log((1.0 - PROB_EPS) / PROB_EPS)  # 13.81551...

_MAX_OUTER_ITER = 200
_OBJ_REL_TOL = 1e-8
_COEF_ABS_TOL = 1e-7
_CD_TOL = 1e-9
_CD_MAX_SWEEPS = 5000


# ------------------------------------------------------------------ #
# Domain types
# ------------------------------------------------------------------ #


@dataclass(frozen=True)
class DesignMatrix:
    """Dense n x p feature matrix with unique column names and row IDs.

    Entries must be finite. p == 0 is allowed so degenerate source
    concatenations (an empty second source) stay representable, and
    n == 1 so leave-one-out prediction slices do; fitting requires two
    classes in the outcome, which forces n >= 2 there.
    """

    values: np.ndarray
    feature_names: tuple[str, ...]
    sample_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError(f"design matrix must be 2-D, got shape {vals.shape}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        n, p = vals.shape
        if n < 1:
            raise ValueError(f"need at least 1 sample, got {n}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("design matrix contains non-finite entries")
        if len(self.feature_names) != p:
            raise ValueError(f"{len(self.feature_names)} feature names for {p} columns")
        if len(self.sample_ids) != n:
            raise ValueError(f"{len(self.sample_ids)} sample ids for {n} rows")
        if len(set(self.feature_names)) != p:
            raise ValueError("feature names are not unique")
        if len(set(self.sample_ids)) != n:
            raise ValueError("sample ids are not unique")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def take_rows(self, idx: np.ndarray) -> "DesignMatrix":
        idx = np.asarray(idx)
        return DesignMatrix(
            self.values[idx],
            self.feature_names,
            tuple(self.sample_ids[i] for i in idx),
        )


@dataclass(frozen=True)
class OutcomeVector:
    """Binary labels aligned with a design matrix by sample ID."""

    labels: np.ndarray
    sample_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        lab = np.asarray(self.labels)
        if lab.ndim != 1:
            raise ValueError("labels must be 1-D")
        if not np.all(np.isin(lab, (0, 1))):
            raise ValueError("labels must all be 0 or 1")
        lab = lab.astype(np.int64)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if len(self.sample_ids) != lab.size:
            raise ValueError(f"{len(self.sample_ids)} sample ids for {lab.size} labels")
        if len(set(self.sample_ids)) != lab.size:
            raise ValueError("sample ids are not unique")
        if lab.min() == lab.max():
            raise ValueError("outcome must contain at least one 0 and one 1")

    @property
    def n(self) -> int:
        return self.labels.size

    def take_rows(self, idx: np.ndarray) -> "OutcomeVector":
        idx = np.asarray(idx)
        return OutcomeVector(self.labels[idx], tuple(self.sample_ids[i] for i in idx))


@dataclass(frozen=True)
class OffsetVector:
    """Fixed additive term on the logit scale, one value per sample."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("offset must be 1-D")
        if not np.all(np.isfinite(vals)):
            raise ValueError("offset contains non-finite values")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, n: int) -> "OffsetVector":
        return cls(np.zeros(n))

    @property
    def n(self) -> int:
        return self.values.size

    def take_rows(self, idx: np.ndarray) -> "OffsetVector":
        return OffsetVector(self.values[np.asarray(idx)])


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty kind ('ridge' -> sum(beta^2), 'lasso' -> sum(|beta|)) and weight."""

    kind: str
    lam: float

    def __post_init__(self) -> None:
        if self.kind not in ("ridge", "lasso"):
            raise ValueError(f"penalty kind must be 'ridge' or 'lasso', got {self.kind!r}")
        lam = float(self.lam)
        if not (math.isfinite(lam) and lam >= 0.0):
            raise ValueError(f"lambda must be finite and >= 0, got {lam}")
        object.__setattr__(self, "lam", lam)


@dataclass(frozen=True)
class ColumnStats:
    """Per-feature (mean, sd) recorded at standardization time.

    sd == 0 marks a constant column; such columns transform to all-zero.
    """

    mean: np.ndarray
    sd: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        safe = np.where(self.sd > 0.0, self.sd, 1.0)
        out = (values - self.mean) / safe
        out[:, self.sd == 0.0] = 0.0
        return out


@dataclass(frozen=True)
class PredictionVector:
    """Class-1 probabilities in (0, 1), tagged with the producing method."""

    values: np.ndarray
    method: str

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1:
            raise ValueError("predictions must be 1-D")
        if vals.size and not (np.all(vals > 0.0) and np.all(vals < 1.0)):
            raise ValueError("predictions must lie strictly inside (0, 1)")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass
class FitResult:
    """One penalized logistic fit: coefficients live on the standardized scale."""

    intercept: float
    coefficients: np.ndarray
    penalty: PenaltySpec
    standardization: ColumnStats
    converged: bool
    iterations: int
    objective: float
    fit_intercept: bool = True


# ------------------------------------------------------------------ #
# Elementary numerics
# ------------------------------------------------------------------ #


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    out = np.empty_like(eta)
    pos = eta >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _clipped_probs(eta: np.ndarray) -> np.ndarray:
    return np.clip(_sigmoid(eta), PROB_EPS, 1.0 - PROB_EPS)


def _log_likelihood(y: np.ndarray, probs: np.ndarray) -> float:
    return float(np.sum(y * np.log(probs) + (1.0 - y) * np.log(1.0 - probs)))


def _penalty_value(kind: str, lam: float, beta: np.ndarray) -> float:
    if kind == "ridge":
        return lam * float(np.sum(beta * beta))
    return lam * float(np.sum(np.abs(beta)))


def logit_clip(p, eps: float = PROB_EPS):
    """log(p/(1-p)) with p first clipped into [eps, 1-eps].

    Keeps logits finite for boundary probabilities; accepts scalars or
    arrays and returns the matching shape.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must be in (0, 0.5), got {eps}")
    arr = np.asarray(p, dtype=np.float64)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    clipped = np.clip(arr, eps, 1.0 - eps)
    out = np.log(clipped / (1.0 - clipped))
    if np.isscalar(p) or arr.ndim == 0:
        return float(out)
    return out


# ------------------------------------------------------------------ #
# Standardization and the lambda grid
# ------------------------------------------------------------------ #


def standardize(X: DesignMatrix) -> tuple[DesignMatrix, ColumnStats]:
    """Center and scale each column to mean 0, sample sd 1 (divisor n-1).

    Constant columns come back as all-zero with sd recorded as 0; the
    returned stats retain the original (mean, sd) for re-application to
    new rows.
    """
    if X.n < 2:
        raise ValueError("standardization needs at least 2 rows")
    vals = X.values
    mean = vals.mean(axis=0)
    sd = vals.std(axis=0, ddof=1)
    if vals.shape[1]:
        constant = np.all(vals == vals[0:1, :], axis=0)
        sd = np.where(constant, 0.0, sd)
    stats = ColumnStats(mean=mean, sd=sd)
    return DesignMatrix(stats.transform(vals), X.feature_names, X.sample_ids), stats


def lambda_grid(
    X: DesignMatrix,
    y: OutcomeVector,
    kind: str,
    n_values: int = 15,
    min_ratio: float = 1e-2,
) -> np.ndarray:
    """Descending log-spaced penalty grid anchored at the data's lambda_max.

    lambda_max = max_j |x_j^T (y - ybar)| is the smallest lasso penalty
    with an all-zero solution on the sum-scale objective. The lasso grid
    runs from lambda_max down to lambda_max*min_ratio; the ridge grid
    tops out at lambda_max*100 since ridge never reaches exact zero.
    """
    if kind not in ("ridge", "lasso"):
        raise ValueError(f"penalty kind must be 'ridge' or 'lasso', got {kind!r}")
    if n_values < 2:
        raise ValueError(f"n_values must be >= 2, got {n_values}")
    if not 0.0 < min_ratio < 1.0:
        raise ValueError(f"min_ratio must be in (0, 1), got {min_ratio}")
    if X.n != y.n:
        raise ValueError(f"X has {X.n} rows but y has {y.n}")
    if X.p:
        col_mean = X.values.mean(axis=0)
        col_sd = X.values.std(axis=0, ddof=1)
        bad = np.flatnonzero((col_sd > 0.0) & (np.abs(col_mean) > 1e-6))
        if bad.size:
            raise ValueError(
                f"X is not standardized: column {X.feature_names[bad[0]]!r} "
                f"has mean {col_mean[bad[0]]:.3g}"
            )
    yarr = y.labels.astype(np.float64)
    resid = yarr - yarr.mean()
    lam_max = float(np.max(np.abs(X.values.T @ resid))) if X.p else 0.0
    if lam_max <= 0.0:
        # all-constant design: any lambda yields the null model
        lam_max = 1.0
    top = lam_max if kind == "lasso" else lam_max * 100.0
    return np.geomspace(top, lam_max * min_ratio, n_values)


# ------------------------------------------------------------------ #
# Solvers
# ------------------------------------------------------------------ #


@njit(cache=True, nogil=True)
def _cd_sweep(A, w, r, beta, denom, js, lam, thresh):
    """One coordinate-descent pass over the listed coordinates; returns max |change|."""
    n = A.shape[0]
    delta = 0.0
    for t in range(js.size):
        j = js[t]
        dj = denom[j]
        if dj <= 0.0:
            continue
        u = 0.0
        for i in range(n):
            u += w[i] * A[i, j] * r[i]
        u += dj * beta[j]
        if u > thresh:
            bnew = (u - lam) / dj
        elif u < -thresh:
            bnew = (u + lam) / dj
        else:
            bnew = 0.0
        d = bnew - beta[j]
        if d != 0.0:
            for i in range(n):
                r[i] -= d * A[i, j]
            beta[j] = bnew
            if abs(d) > delta:
                delta = abs(d)
    return delta


@njit(cache=True, nogil=True)
def _cd_intercept(w, r, sw):
    """Unpenalized intercept coordinate step; returns the change."""
    g = 0.0
    n = r.size
    for i in range(n):
        g += w[i] * r[i]
    da = g / sw
    for i in range(n):
        r[i] -= da
    return da


@njit(cache=True, nogil=True)
def _cd_weighted_lasso(A, w, target, a0, beta, lam, fit_intercept, tol, max_sweeps):
    """Full cyclic coordinate-descent passes with soft-thresholding.

    Works on 0.5*sum_i w_i*(target_i - a - A_i@beta)^2 + lam*sum_j |beta_j|
    with an unpenalized intercept. beta is updated in place; returns the
    final intercept and the max coefficient move of the last pass, which
    is <= tol only when the subproblem is solved. The soft threshold
    carries a 1e-10 relative slack so the null model stays exactly null
    at the top of the grid. A should be Fortran-ordered for contiguous
    column scans.
    """
    n, k = A.shape
    r = np.empty(n)
    for i in range(n):
        r[i] = target[i] - a0
    for j in range(k):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                r[i] -= A[i, j] * bj
    sw = 0.0
    for i in range(n):
        sw += w[i]
    denom = np.zeros(k)
    for j in range(k):
        s = 0.0
        for i in range(n):
            aij = A[i, j]
            s += w[i] * aij * aij
        denom[j] = s
    a = a0
    thresh = lam * (1.0 + 1e-10)
    all_js = np.arange(k)
    delta = np.inf
    for _ in range(max_sweeps):
        delta = 0.0
        if fit_intercept and sw > 0.0:
            da = _cd_intercept(w, r, sw)
            a += da
            delta = abs(da)
        d = _cd_sweep(A, w, r, beta, denom, all_js, lam, thresh)
        if d > delta:
            delta = d
        if delta <= tol:
            break
    return a, delta


def _wls_lasso_objective(
    A: np.ndarray, w: np.ndarray, target: np.ndarray, a: float, beta: np.ndarray, lam: float
) -> float:
    resid = target - a - A @ beta
    return 0.5 * float(np.sum(w * resid * resid)) + lam * float(np.sum(np.abs(beta)))


def _solve_wls_lasso(
    A: np.ndarray,
    w: np.ndarray,
    target: np.ndarray,
    a: float,
    beta: np.ndarray,
    lam: float,
    fit_intercept: bool,
) -> tuple[float, np.ndarray]:
    """Weighted lasso least squares by coordinate descent with Newton polish.

    Correlated designs make plain cyclic descent crawl, so short bursts
    of full passes alternate with an exact solve of the normal equations
    restricted to the current active set; the candidate is adopted only
    when it does not worsen the penalized objective. Convergence is
    certified by a full pass moving no coordinate by more than the
    tolerance, the same fixpoint criterion plain descent uses.
    """
    beta = beta.copy()
    for _ in range(50):
        a, delta = _cd_weighted_lasso(A, w, target, a, beta, lam, fit_intercept, _CD_TOL, 3)
        if delta <= _CD_TOL:
            return a, beta
        obj = _wls_lasso_objective(A, w, target, a, beta, lam)
        act = np.flatnonzero(beta)
        if act.size == 0:
            continue
        Aa = A[:, act]
        Awa = Aa * w[:, None]
        q = Aa.T @ Awa
        rhs = Aa.T @ (w * target) - lam * np.sign(beta[act])
        if fit_intercept:
            m = act.size + 1
            h = np.empty((m, m))
            h[0, 0] = np.sum(w)
            h[0, 1:] = Awa.sum(axis=0)
            h[1:, 0] = h[0, 1:]
            h[1:, 1:] = q
            g = np.concatenate(([np.sum(w * target)], rhs))
        else:
            h, g = q, rhs
        try:
            sol = np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            continue
        cand = np.zeros_like(beta)
        if fit_intercept:
            a_cand = float(sol[0])
            cand[act] = sol[1:]
        else:
            a_cand = a
            cand[act] = sol
        cand_obj = _wls_lasso_objective(A, w, target, a_cand, cand, lam)
        if cand_obj <= obj + 1e-12:
            a, beta, obj = a_cand, cand, cand_obj
    a, _ = _cd_weighted_lasso(
        A, w, target, a, beta, lam, fit_intercept, _CD_TOL, _CD_MAX_SWEEPS
    )
    return a, beta


def _start_point(
    yarr: np.ndarray,
    k: int,
    fit_intercept: bool,
    intercept_init: float | None,
    coef_init: np.ndarray | None,
) -> tuple[float, np.ndarray]:
    if coef_init is not None:
        beta = np.array(coef_init, dtype=np.float64, copy=True)
        if beta.size != k:
            raise ValueError(f"coef_init has {beta.size} entries for {k} features")
    else:
        beta = np.zeros(k)
    if intercept_init is not None:
        a = float(intercept_init)
    elif fit_intercept:
        a = float(logit_clip(float(yarr.mean())))
    else:
        a = 0.0
    return a, beta


def _solve_core(
    A: np.ndarray,
    yarr: np.ndarray,
    offs: np.ndarray,
    kind: str,
    lam: float,
    fit_intercept: bool,
    a0: float,
    b0: np.ndarray,
    max_iter: int,
) -> tuple[float, np.ndarray, bool, int, float]:
    """Damped Newton (ridge) / IRLS + coordinate descent (lasso) loop.

    A holds only the varying (non-constant) standardized columns. The
    step toward each proposal is halved until the penalized objective is
    non-decreasing, so the objective is monotone across outer iterations.
    """
    n, k = A.shape
    a, beta = a0, b0

    def objective(ai: float, bi: np.ndarray) -> float:
        probs = _clipped_probs(ai + offs + A @ bi)
        return _log_likelihood(yarr, probs) - _penalty_value(kind, lam, bi)

    obj = objective(a, beta)
    if k == 0 and not fit_intercept:
        return a, beta, True, 0, obj

    converged = False
    iterations = 0
    if kind == "ridge":
        m = k + 1 if fit_intercept else k
        h = np.empty((m, m))
        g = np.empty(m)
    for it in range(1, max_iter + 1):
        iterations = it
        eta = a + offs + A @ beta
        p = _clipped_probs(eta)
        w = p * (1.0 - p)
        if kind == "ridge":
            resid = yarr - p
            aw = A * w[:, None]
            if fit_intercept:
                g[0] = np.sum(resid)
                g[1:] = A.T @ resid - 2.0 * lam * beta
                h[0, 0] = np.sum(w)
                h[0, 1:] = aw.sum(axis=0)
                h[1:, 0] = h[0, 1:]
                np.matmul(A.T, aw, out=h[1:, 1:])
                h[1:, 1:].flat[:: k + 1] += 2.0 * lam
            else:
                g[:] = A.T @ resid - 2.0 * lam * beta
                np.matmul(A.T, aw, out=h)
                h.flat[:: k + 1] += 2.0 * lam
            try:
                step = np.linalg.solve(h, g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(h, g, rcond=None)[0]
            if fit_intercept:
                a_prop, b_prop = a + step[0], beta + step[1:]
            else:
                a_prop, b_prop = a, beta + step
        else:
            etac = np.clip(eta, -LOGIT_CAP, LOGIT_CAP)
            target = etac + (yarr - p) / w - offs
            a_prop, b_prop = _solve_wls_lasso(A, w, target, a, beta, lam, fit_intercept)

        obj_prop = objective(a_prop, b_prop)
        a_new, b_new, obj_new = a_prop, b_prop, obj_prop
        t = 1.0
        while obj_new < obj - 1e-12 and t > 1e-8:
            t *= 0.5
            a_new = a + t * (a_prop - a)
            b_new = beta + t * (b_prop - beta)
            obj_new = objective(a_new, b_new)

        coef_delta = abs(a_new - a) if fit_intercept else 0.0
        if k:
            coef_delta = max(coef_delta, float(np.max(np.abs(b_new - beta))))
        obj_delta = abs(obj_new - obj)
        a, beta, obj = a_new, b_new, obj_new
        if obj_delta <= _OBJ_REL_TOL * (abs(obj) + 1e-15) or coef_delta <= _COEF_ABS_TOL:
            converged = True
            break
    return a, beta, converged, iterations, obj


def fit_penalized_logistic(
    X: DesignMatrix,
    y: OutcomeVector,
    penalty: PenaltySpec,
    offset: OffsetVector | None = None,
    fit_intercept: bool = True,
    *,
    max_iter: int = _MAX_OUTER_ITER,
    coef_init: np.ndarray | None = None,
    intercept_init: float | None = None,
) -> FitResult:
    """Fit a ridge- or lasso-penalized logistic regression.

    Raw inputs are accepted: standardization happens internally and the
    stats travel in the result for prediction. Coefficients of constant
    columns are exactly 0. Non-convergence is reported through the
    ``converged`` flag, never an exception; quasi-separation is handled
    by capping working-response logits at +-13.8155 and clipping fitted
    probabilities at 1e-6.
    """
    if X.sample_ids != y.sample_ids:
        raise ValueError("X and y sample ids differ")
    offs = offset.values if offset is not None else np.zeros(X.n)
    if offs.size != X.n:
        raise ValueError(f"offset has {offs.size} values for {X.n} samples")

    Xs, stats = standardize(X)
    varying = np.flatnonzero(stats.sd > 0.0)
    A = np.asfortranarray(Xs.values[:, varying])  # contiguous column scans in CD
    yarr = y.labels.astype(np.float64)

    b0_full = None if coef_init is None else np.asarray(coef_init, dtype=np.float64)
    a0, b0 = _start_point(
        yarr,
        varying.size,
        fit_intercept,
        intercept_init,
        None if b0_full is None else b0_full[varying],
    )
    a, b, converged, iterations, obj = _solve_core(
        A, yarr, offs, penalty.kind, penalty.lam, fit_intercept, a0, b0, max_iter
    )
    coefficients = np.zeros(X.p)
    coefficients[varying] = b
    return FitResult(
        intercept=float(a),
        coefficients=coefficients,
        penalty=penalty,
        standardization=stats,
        converged=converged,
        iterations=iterations,
        objective=float(obj),
        fit_intercept=fit_intercept,
    )


def fit_penalized_path(
    X: DesignMatrix,
    y: OutcomeVector,
    kind: str,
    lambdas: np.ndarray,
    offset: OffsetVector | None = None,
    *,
    max_iter: int = _MAX_OUTER_ITER,
) -> list[FitResult]:
    """Fit one model per penalty value, warm-starting down a descending grid.

    Standardization happens once and is shared by every fit on the path.
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.size == 0:
        raise ValueError("empty lambda grid")
    if np.any(np.diff(lambdas) > 0.0):
        raise ValueError("lambda grid must be non-increasing")
    if X.sample_ids != y.sample_ids:
        raise ValueError("X and y sample ids differ")
    offs = offset.values if offset is not None else np.zeros(X.n)
    if offs.size != X.n:
        raise ValueError(f"offset has {offs.size} values for {X.n} samples")

    Xs, stats = standardize(X)
    varying = np.flatnonzero(stats.sd > 0.0)
    A = np.asfortranarray(Xs.values[:, varying])
    yarr = y.labels.astype(np.float64)
    a, b = _start_point(yarr, varying.size, True, None, None)

    fits: list[FitResult] = []
    for lam in lambdas:
        a, b, converged, iterations, obj = _solve_core(
            A, yarr, offs, kind, float(lam), True, a, b.copy(), max_iter
        )
        coefficients = np.zeros(X.p)
        coefficients[varying] = b
        fits.append(
            FitResult(
                intercept=float(a),
                coefficients=coefficients,
                penalty=PenaltySpec(kind, float(lam)),
                standardization=stats,
                converged=converged,
                iterations=iterations,
                objective=float(obj),
                fit_intercept=True,
            )
        )
    return fits


def predict_proba(
    fit: FitResult,
    X: DesignMatrix,
    offset: OffsetVector | None = None,
    method: str | None = None,
) -> PredictionVector:
    """Class-1 probabilities for new rows, clipped to [1e-6, 1-1e-6]."""
    if X.p != fit.coefficients.size:
        raise ValueError(f"X has {X.p} features but the fit expects {fit.coefficients.size}")
    offs = offset.values if offset is not None else np.zeros(X.n)
    if offs.size != X.n:
        raise ValueError(f"offset has {offs.size} values for {X.n} samples")
    eta = fit.intercept + offs + fit.standardization.transform(X.values) @ fit.coefficients
    return PredictionVector(_clipped_probs(eta), method or f"glm[{fit.penalty.kind}]")


def kkt_max_violation(
    fit: FitResult,
    X: DesignMatrix,
    y: OutcomeVector,
    offset: OffsetVector | None = None,
) -> float:
    """Max first-order optimality violation of the fit on its own objective.

    Ridge: the largest absolute gradient entry of the penalized
    log-likelihood. Lasso: subgradient conditions, (|g_j| - lam)_+ at
    zero coefficients and |g_j - lam*sign(beta_j)| elsewhere. The
    unpenalized intercept gradient is included when fitted.
    """
    offs = offset.values if offset is not None else np.zeros(X.n)
    A = fit.standardization.transform(X.values)
    yarr = y.labels.astype(np.float64)
    p = _sigmoid(fit.intercept + offs + A @ fit.coefficients)
    resid = yarr - p
    g = A.T @ resid
    lam, beta = fit.penalty.lam, fit.coefficients
    if fit.penalty.kind == "ridge":
        viol = np.abs(g - 2.0 * lam * beta)
    else:
        viol = np.where(
            beta == 0.0,
            np.maximum(np.abs(g) - lam, 0.0),
            np.abs(g - lam * np.sign(beta)),
        )
    worst = float(np.max(viol)) if viol.size else 0.0
    if fit.fit_intercept:
        worst = max(worst, abs(float(np.sum(resid))))
    return worst
