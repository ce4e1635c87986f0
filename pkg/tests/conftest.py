"""Shared test utilities: seeded problem generators and independent oracles."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import minimize

from omnifuse import DesignMatrix, OutcomeVector, PenaltySpec, fit_penalized_logistic
from omnifuse.glm import _sigmoid


def make_problem(seed, n=60, p=8, scale=0.7):
    """Random logistic problem with both classes guaranteed present."""
    rng = np.random.default_rng(seed)
    X = DesignMatrix(
        rng.normal(size=(n, p)),
        tuple(f"f{j}" for j in range(p)),
        tuple(f"s{i}" for i in range(n)),
    )
    beta = rng.normal(size=p)
    probs = _sigmoid(scale * (X.values @ beta))
    labels = (rng.uniform(size=n) < probs).astype(int)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    return X, OutcomeVector(labels, X.sample_ids)


def oracle_penalized_fit(A, yarr, offs, kind, lam):
    """Generic numerical maximizer of the sum-scale penalized log-likelihood.

    Independent of the package solver: ridge via BFGS on the smooth
    objective, lasso via L-BFGS-B on the positive/negative split with
    bound constraints. Returns (intercept, beta, objective).
    """
    n, k = A.shape

    def loglik(a, b):
        eta = a + offs + A @ b
        return float(np.sum(yarr * eta - np.logaddexp(0.0, eta)))

    if kind == "ridge":

        def neg(u):
            return -(loglik(u[0], u[1:]) - lam * np.sum(u[1:] ** 2))

        def grad(u):
            p = _sigmoid(u[0] + offs + A @ u[1:])
            return -np.concatenate(
                ([np.sum(yarr - p)], A.T @ (yarr - p) - 2.0 * lam * u[1:])
            )

        res = minimize(neg, np.zeros(k + 1), jac=grad, method="BFGS",
                       options={"gtol": 1e-10, "maxiter": 5000})
        return float(res.x[0]), res.x[1:], -float(res.fun)

    def neg(u):
        b = u[1 : k + 1] - u[k + 1 :]
        return -(loglik(u[0], b) - lam * np.sum(u[1:]))

    def grad(u):
        p = _sigmoid(u[0] + offs + A @ (u[1 : k + 1] - u[k + 1 :]))
        g = A.T @ (yarr - p)
        return -np.concatenate(([np.sum(yarr - p)], g - lam, -g - lam))

    bounds = [(None, None)] + [(0.0, None)] * (2 * k)
    res = minimize(neg, np.zeros(2 * k + 1), jac=grad, method="L-BFGS-B",
                   bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 10000})
    beta = res.x[1 : k + 1] - res.x[k + 1 :]
    return float(res.x[0]), beta, -float(res.fun)


@pytest.fixture(scope="session", autouse=True)
def warm_numba():
    """Compile the CD kernel once so timing-sensitive tests are not skewed."""
    X, y = make_problem(0, n=20, p=3)
    fit_penalized_logistic(X, y, PenaltySpec("lasso", 1.0))
