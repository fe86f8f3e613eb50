"""Problem models.

Smooth convex objectives with optional curvature metadata, exact
quadratics built from an eigendecomposition, and composite regularized
least-squares problems equipped with the metric M = s^{-1} I - A^T A.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, ConvergenceError

__all__ = [
    "SmoothConvexProblem",
    "QuadraticProblem",
    "CompositeRLS",
    "ProxFriendlyFunction",
    "make_quadratic",
    "spectral_norm_sq",
    "composite_value",
    "metric_norm_sq",
]

#: step constant for the finite-difference Hessian-vector fallback
FD_HESS_STEP = 1e-6

#: inner prox solver tolerance (gradient norm, relative)
PROX_INNER_TOL = 1e-12


def _as_vector(x, dim=None, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x.reshape(1)
    if x.ndim != 1:
        raise ConfigError(f"{name} must be a vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ConfigError(f"{name} has dimension {x.shape[0]}, expected {dim}")
    return x


@dataclass(frozen=True)
class SmoothConvexProblem:
    """A convex C^1 (usually C^2) objective on R^dim.

    value and gradient are callables on 1-D numpy arrays.  Optional
    metadata is explicit: routines that need the Lipschitz constant,
    the strong-convexity modulus, or the minimizer fail fast when the
    field is missing instead of guessing.

    hess_vec, when given, maps (x, v) -> grad^2 f(x) v exactly.  When
    absent, ``hessian_vector`` falls back to central differences of
    the gradient with step FD_HESS_STEP * (1 + |x|).

    prox, when given, maps (z, t) to the exact minimizer of
    t*f(u) + 1/2 |u - z|^2.  ``prox_point`` provides an inner-solver
    fallback for problems without a closed form.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hess_vec: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    lipschitz: Optional[float] = None
    strong_modulus: float = 0.0
    opt_value: Optional[float] = None
    opt_point: Optional[np.ndarray] = None
    prox: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = ""

    def hessian_vector(self, x, v):
        if self.hess_vec is not None:
            return self.hess_vec(x, v)
        x = _as_vector(x, self.dim)
        v = _as_vector(v, self.dim)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            return np.zeros(self.dim)
        h = FD_HESS_STEP * (1.0 + float(np.linalg.norm(x))) / nv
        return (self.gradient(x + h * v) - self.gradient(x - h * v)) / (2.0 * h)

    def prox_point(self, z, t):
        """Minimizer of t*f(u) + 1/2|u-z|^2 (exact or inner solve)."""
        z = _as_vector(z, self.dim)
        if t == 0.0:
            return z.copy()
        if t < 0.0:
            raise ConfigError("prox parameter must be nonnegative")
        if self.prox is not None:
            return self.prox(z, t)
        return _prox_inner_solve(self, z, t)

    def gap(self, x):
        """f(x) - min f, when the optimal value is known."""
        if self.opt_value is None:
            raise ConfigError(f"problem {self.name!r} has no opt_value")
        return float(self.value(x)) - self.opt_value


def _prox_inner_solve(problem, z, t):
    # The prox objective u -> t f(u) + 1/2|u-z|^2 is 1-strongly convex,
    # with gradient Lipschitz constant 1 + t L.  Plain gradient descent
    # with step 1/(1+tL) converges linearly; we run it to PROX_INNER_TOL.
    if problem.lipschitz is None:
        raise ConfigError(
            "inner prox solver needs a Lipschitz constant on the problem")
    step = 1.0 / (1.0 + t * problem.lipschitz)
    u = z.copy()
    scale = 1.0 + float(np.linalg.norm(z))
    for _ in range(100_000):
        g = t * problem.gradient(u) + (u - z)
        gn = float(np.linalg.norm(g))
        if gn <= PROX_INNER_TOL * scale:
            return u
        u = u - step * g
    raise ConvergenceError("inner prox solve did not reach tolerance", best=u)


@dataclass(frozen=True)
class QuadraticProblem(SmoothConvexProblem):
    """f(x) = 1/2 <Q (x - shift), x - shift> with Q = B diag(lam) B^T."""

    eigenvalues: Optional[np.ndarray] = None
    basis: Optional[np.ndarray] = None
    shift: Optional[np.ndarray] = None


def make_quadratic(eigenvalues, shift=None, basis=None) -> QuadraticProblem:
    """Build the quadratic with the given Hessian eigenvalues.

    Parameters
    ----------
    eigenvalues : sequence of nonnegative reals
        Eigenvalues of the Hessian Q.
    shift : vector, optional
        Minimizer location (default origin).
    basis : orthogonal matrix, optional
        Eigenbasis; Q = basis @ diag(eigenvalues) @ basis.T.  Identity
        by default.

    Returns
    -------
    QuadraticProblem
        With exact gradient, Hessian-vector product and prox,
        lipschitz = max eigenvalue, strong_modulus = min eigenvalue,
        opt_value = 0 and opt_point = shift.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ConfigError("eigenvalues must be a non-empty 1-D sequence")
    if np.any(lam < 0):
        raise ConfigError(f"negative eigenvalue in {lam!r}")
    n = lam.size
    if shift is None:
        shift = np.zeros(n)
    shift = _as_vector(shift, n, "shift")
    if basis is None:
        B = np.eye(n)
    else:
        B = np.asarray(basis, dtype=float)
        if B.shape != (n, n):
            raise ConfigError(f"basis must be {n}x{n}, got {B.shape}")
        if not np.allclose(B.T @ B, np.eye(n), atol=1e-10):
            raise ConfigError("basis is not orthogonal")
    Q = B @ np.diag(lam) @ B.T
    Q = 0.5 * (Q + Q.T)  # kill asymmetric round-off

    def value(x):
        d = _as_vector(x, n) - shift
        return 0.5 * float(d @ (Q @ d))

    def gradient(x):
        return Q @ (_as_vector(x, n) - shift)

    def hess_vec(x, v):
        return Q @ _as_vector(v, n)

    def prox(z, t):
        # (I + tQ)^(-1) through the eigenbasis, exact
        w = B.T @ (_as_vector(z, n) - shift)
        return shift + B @ (w / (1.0 + t * lam))

    return QuadraticProblem(
        dim=n,
        value=value,
        gradient=gradient,
        hess_vec=hess_vec,
        lipschitz=float(np.max(lam)),
        strong_modulus=float(np.min(lam)),
        opt_value=0.0,
        opt_point=shift,
        prox=prox,
        name="quadratic",
        eigenvalues=lam,
        basis=B,
        shift=shift,
    )


def spectral_norm_sq(A, tol=1e-9, max_iter=10_000):
    """Largest eigenvalue of A^T A by power iteration.

    Stops when the residual |B v - nu v| drops below tol * nu, which
    bounds the eigenvalue error for the symmetric iteration matrix.
    Raises ConvergenceError (carrying the best estimate) after
    max_iter steps without convergence.
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        raise ConfigError("empty matrix")
    if A.ndim != 2:
        raise ConfigError("A must be 2-D")
    m, n = A.shape
    # iterate on the smaller Gram matrix; eigenvalues coincide
    if m < n:
        A = A.T
        m, n = n, m

    def apply_b(v):
        return A.T @ (A @ v)

    rng = np.random.default_rng(np.random.SeedSequence(20190701))
    v = np.ones(n) + 1e-3 * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    nu = 0.0
    for _ in range(max_iter):
        bv = apply_b(v)
        nu = float(v @ bv)
        if nu == 0.0:
            return 0.0  # A maps everything near zero: |A|^2 = 0 for A = 0
        resid = float(np.linalg.norm(bv - nu * v))
        if resid <= tol * nu:
            return nu
        v = bv / np.linalg.norm(bv)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} steps", best=nu)


@dataclass(frozen=True)
class ProxFriendlyFunction:
    """A (possibly nonsmooth) convex function with an exact prox.

    value may return +inf.  prox(x, lam) minimizes
    lam * value(z) + 1/2 |z - x|^2 exactly; lam = 0 is the identity.
    """

    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    strong_modulus: float = 0.0
    tag: str = ""


@dataclass(frozen=True)
class CompositeRLS:
    """Regularized least squares 1/2 |y - Ax|^2 + g(x).

    s must satisfy 0 < s |A|^2 < 1 so that M = s^{-1} I - A^T A is
    positive definite; for n <= 50 the constructor verifies this by
    eigendecomposition, beyond that by the spectral-norm bound.
    """

    A: np.ndarray
    y: np.ndarray
    regularizer: ProxFriendlyFunction
    s: float
    opnorm_sq: float = field(default=None)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        y = _as_vector(self.y, A.shape[0], "y")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        if self.opnorm_sq is None:
            object.__setattr__(self, "opnorm_sq", spectral_norm_sq(A))
        if not (self.s > 0.0 and self.s * self.opnorm_sq < 1.0):
            raise ConfigError(
                f"need 0 < s*|A|^2 < 1, got s={self.s}, |A|^2={self.opnorm_sq}")
        n = A.shape[1]
        if n <= 50:
            M = np.eye(n) / self.s - A.T @ A
            lam_min = float(np.linalg.eigvalsh(M)[0])
            if lam_min <= 0.0:
                raise ConfigError(
                    f"metric M is not positive definite (min eig {lam_min})")

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def m(self):
        return self.A.shape[0]


def composite_value(p: CompositeRLS, x) -> float:
    """1/2 |y - Ax|^2 + g(x); +inf allowed from the regularizer."""
    x = _as_vector(x, p.n)
    r = p.y - p.A @ x
    return 0.5 * float(r @ r) + float(p.regularizer.value(x))


def metric_norm_sq(p: CompositeRLS, v) -> float:
    """<M v, v> with M = s^{-1} I - A^T A; positive for v != 0."""
    v = _as_vector(v, p.n)
    av = p.A @ v
    return float(v @ v) / p.s - float(av @ av)
