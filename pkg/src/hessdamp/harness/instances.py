"""Seeded regularized least squares instances and reference optima.

All randomness flows through numpy's PCG64 generator seeded explicitly,
so every instance is reproducible from its parameter tuple alone.  Each
generator returns a `CompositeRLS` problem; `reference_optimum` then
computes a high-accuracy optimal value by plain forward-backward
iteration, which serves as the gap reference for rate reports.

The Lasso recipe is the canonical one: a standard normal design with
unit-norm rows, a sparse plus/minus-one ground truth, observations
contaminated with 1 percent noise, and the penalty weight set to a tenth
of the value at which the zero vector becomes optimal.  The group, total
variation, and nuclear norm instances follow the same pattern with the
matching penalty and dual norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import ConvergenceError
from ..problems import (
    CompositeRLS,
    SmoothConvexProblem,
    composite_value,
    spectral_norm_sq,
)
from ..proxcalc import (
    grad_fM,
    group_l1l2,
    l1,
    nuclear_norm,
    prox_metric_M,
    scaled,
    tv1d,
)

_NOISE_LEVEL = 0.01
_PENALTY_FRACTION = 0.1

__all__ = [
    "make_lasso",
    "make_group_lasso",
    "make_tv_denoise",
    "make_nuclear",
    "reference_optimum",
    "metric_problem",
    "rng_from_seed",
]


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 generator; the single entry point for harness randomness."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def _design(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=1, keepdims=True)
    return A


def _default_step(A: np.ndarray) -> float:
    return 0.99 / spectral_norm_sq(A)


def make_lasso(m: int = 100, n: int = 256, sparsity: int = 10,
               seed: int = 0) -> CompositeRLS:
    """Lasso instance: l1-penalized least squares."""
    rng = rng_from_seed(seed)
    A = _design(rng, m, n)
    xbar = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    xbar[support] = rng.choice([-1.0, 1.0], size=sparsity)
    y = A @ xbar + _NOISE_LEVEL * rng.standard_normal(m)
    gamma = _PENALTY_FRACTION * float(np.max(np.abs(A.T @ y)))
    return CompositeRLS(A=A, y=y, regularizer=scaled(l1(), gamma),
                        s=_default_step(A))


def make_group_lasso(m: int = 100, n: int = 256, group_size: int = 8,
                     sparsity: int = 4, seed: int = 0) -> CompositeRLS:
    """Group Lasso instance with consecutive equal-size groups."""
    if n % group_size != 0:
        raise ValueError(f"group_size {group_size} must divide n={n}")
    rng = rng_from_seed(seed)
    A = _design(rng, m, n)
    n_groups = n // group_size
    groups = [list(range(g * group_size, (g + 1) * group_size))
              for g in range(n_groups)]
    xbar = np.zeros(n)
    active = rng.choice(n_groups, size=sparsity, replace=False)
    for g in active:
        xbar[groups[g]] = rng.choice([-1.0, 1.0], size=group_size)
    y = A @ xbar + _NOISE_LEVEL * rng.standard_normal(m)
    corr = (A.T @ y).reshape(n_groups, group_size)
    gamma = _PENALTY_FRACTION * float(np.max(np.linalg.norm(corr, axis=1)))
    return CompositeRLS(A=A, y=y, regularizer=scaled(group_l1l2(groups), gamma),
                        s=_default_step(A))


def make_tv_denoise(n: int = 128, pieces: int = 5, seed: int = 0) -> CompositeRLS:
    """Total variation instance: piecewise constant truth, square design."""
    rng = rng_from_seed(seed)
    A = _design(rng, n, n)
    edges = np.sort(rng.choice(np.arange(1, n), size=pieces - 1, replace=False))
    levels = rng.choice([-1.0, 1.0], size=pieces) * rng.uniform(0.5, 1.5, size=pieces)
    xbar = np.empty(n)
    bounds = [0, *edges.tolist(), n]
    for i in range(pieces):
        xbar[bounds[i]:bounds[i + 1]] = levels[i]
    y = A @ xbar + _NOISE_LEVEL * rng.standard_normal(n)
    corr = A.T @ y
    gamma = _PENALTY_FRACTION * float(np.max(np.abs(np.diff(corr))))
    return CompositeRLS(A=A, y=y, regularizer=scaled(tv1d(), gamma),
                        s=_default_step(A))


def make_nuclear(N: int = 16, rank: int = 3, seed: int = 0) -> CompositeRLS:
    """Nuclear norm instance: low-rank matrix sensed by random rows.

    The unknown is an N-by-N matrix handled in vectorized form; the
    number of measurements is three times the degrees of freedom of the
    rank, rounded to stay below N squared.
    """
    rng = rng_from_seed(seed)
    n = N * N
    m = min(n - 1, 3 * rank * (2 * N - rank))
    A = _design(rng, m, n)
    L = rng.standard_normal((N, rank))
    R = rng.standard_normal((N, rank))
    xbar = (L @ R.T / np.sqrt(rank)).ravel()
    y = A @ xbar + _NOISE_LEVEL * rng.standard_normal(m)
    corr = (A.T @ y).reshape(N, N)
    gamma = _PENALTY_FRACTION * float(np.linalg.norm(corr, ord=2))
    return CompositeRLS(A=A, y=y, regularizer=scaled(nuclear_norm((N, N)), gamma),
                        s=_default_step(A))


@dataclass(frozen=True)
class ReferenceOptimum:
    value: float
    point: np.ndarray
    iterations: int
    step_norm: float


def reference_optimum(problem: CompositeRLS, tol: float = 1e-14,
                      max_iter: int = 1_000_000) -> ReferenceOptimum:
    """High-accuracy optimal value by forward-backward iteration.

    Iterates ``x <- prox_{s g}(x - s A^T (A x - y))`` from zero until the
    relative step norm drops below ``tol`` or the iteration budget runs
    out.  The best objective value seen is kept, so a late non-monotone
    wiggle cannot push the reference above an attained value.  Hitting
    the budget without meeting ``tol`` raises `ConvergenceError` with
    the best iterate attached.
    """
    A, y, g = problem.A, problem.y, problem.regularizer
    s = problem.s
    x = np.zeros(A.shape[1])
    best_val = composite_value(problem, x)
    best_x = x.copy()
    for it in range(1, max_iter + 1):
        x_new = g.prox(x - s * (A.T @ (A @ x - y)), s)
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        val = composite_value(problem, x)
        if val < best_val:
            best_val = val
            best_x = x.copy()
        if step <= tol * (1.0 + float(np.linalg.norm(x))):
            return ReferenceOptimum(best_val, best_x, it, step)
    err = ConvergenceError(
        f"forward-backward reference did not reach tol={tol} "
        f"in {max_iter} iterations (last step {step:.3e})"
    )
    err.best = ReferenceOptimum(best_val, best_x, max_iter, step)
    raise err


def metric_problem(problem: CompositeRLS,
                   opt_value: Optional[float] = None) -> SmoothConvexProblem:
    """Smooth surrogate of a composite instance for gradient methods.

    Wraps the Moreau-type envelope of the composite objective in the
    metric induced by the design: the surrogate's gradient is the metric
    prox residual and has Lipschitz constant one, so inertial gradient
    schemes run on it with unit-scale steps.  The reported value is the
    composite objective at the metric prox point, which both algorithms
    drive to the composite optimum.
    """
    def value(x: np.ndarray) -> float:
        return composite_value(problem, prox_metric_M(problem, x))

    def gradient(x: np.ndarray) -> np.ndarray:
        return grad_fM(problem, x)

    return SmoothConvexProblem(
        dim=problem.A.shape[1],
        value=value,
        gradient=gradient,
        lipschitz=1.0,
        opt_value=opt_value,
        opt_point=None,
    )
