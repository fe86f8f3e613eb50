"""Moreau envelope calculus and the standard proximal operators.

The envelope identities implemented here are the ones the relaxed
proximal algorithms rely on:

    f_lam(x)      = f(p) + 1/(2 lam) |x - p|^2,     p = prox_{lam f}(x)
    grad f_lam(x) = (x - p)/lam
    prox_{theta f_lam}(x) = lam/(lam+theta) x
                            + theta/(lam+theta) prox_{(lam+theta) f}(x)

together with the strong-convexity modulus mu/(1 + lam mu) of the
envelope of a mu-strongly-convex function.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericsError
from .problems import CompositeRLS, ProxFriendlyFunction, _as_vector

__all__ = [
    "EnvelopeView",
    "envelope_value",
    "envelope_gradient",
    "prox_of_envelope",
    "envelope_strong_modulus",
    "prox_l1",
    "prox_group_l1l2",
    "prox_tv1d",
    "prox_nuclear",
    "prox_metric_M",
    "grad_fM",
    "l1",
    "half_sqnorm",
    "tv1d",
    "group_l1l2",
    "nuclear_norm",
    "abs_plus_half_sq",
    "zero_fn",
    "scaled",
]


@dataclass(frozen=True)
class EnvelopeView:
    """Moreau envelope f_lam of a prox-friendly base function.

    Behaves like a smooth problem: it has value/gradient/prox_point,
    so the proximal runners can operate on it directly.  The gradient
    is (1/lam)-Lipschitz and the prox comes from the envelope identity
    rather than an inner solve, so composing envelopes stays exact.
    """

    base: ProxFriendlyFunction
    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ConfigError(f"envelope parameter must be positive, got {self.lam}")

    # -- smooth-problem protocol ------------------------------------
    def value(self, x):
        return envelope_value(self, x)

    def gradient(self, x):
        return envelope_gradient(self, x)

    def prox_point(self, z, t):
        if t == 0.0:
            return np.asarray(z, dtype=float).copy()
        return prox_of_envelope(self, t, z)

    @property
    def strong_modulus(self):
        return envelope_strong_modulus(self.base.strong_modulus, self.lam)

    @property
    def lipschitz(self):
        return 1.0 / self.lam


def envelope_value(e: EnvelopeView, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p = e.base.prox(x, e.lam)
    d = x - p
    return float(e.base.value(p)) + float(d @ d) / (2.0 * e.lam)


def envelope_gradient(e: EnvelopeView, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return (x - e.base.prox(x, e.lam)) / e.lam


def prox_of_envelope(e: EnvelopeView, theta: float, x) -> np.ndarray:
    if not theta > 0.0:
        raise ConfigError(f"theta must be positive, got {theta}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lam = e.lam
    w = theta / (lam + theta)
    return (1.0 - w) * x + w * e.base.prox(x, lam + theta)


def envelope_strong_modulus(mu: float, lam: float) -> float:
    if not lam > 0.0:
        raise ConfigError(f"lam must be positive, got {lam}")
    if mu < 0.0:
        raise ConfigError(f"mu must be nonnegative, got {mu}")
    return mu / (1.0 + lam * mu)


# ---------------------------------------------------------------------------
# proximal operators


def prox_l1(x, lam):
    """Soft threshold, componentwise."""
    if lam < 0.0:
        raise ConfigError("lam must be nonnegative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def prox_group_l1l2(x, groups, lam):
    """Block soft threshold over a partition of the indices."""
    if lam < 0.0:
        raise ConfigError("lam must be nonnegative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[0]
    seen = np.zeros(n, dtype=bool)
    out = np.empty_like(x)
    for g in groups:
        idx = np.asarray(g, dtype=int)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ConfigError(f"group index out of range in {g!r}")
        if np.any(seen[idx]):
            raise ConfigError("groups overlap")
        seen[idx] = True
        xg = x[idx]
        ng = float(np.linalg.norm(xg))
        out[idx] = 0.0 if ng <= lam else (1.0 - lam / ng) * xg
    if not np.all(seen):
        raise ConfigError("groups do not cover all indices")
    return out


def prox_tv1d(x, lam):
    """Exact prox of lam * TV, TV(z) = sum |z_{i+1} - z_i|.

    Direct taut-string method: runs through the signal once keeping
    the current segment's admissible mean range and emits segments as
    soon as a jump becomes unavoidable.  Exact up to floating point.
    """
    if lam < 0.0:
        raise ConfigError("lam must be nonnegative")
    y = np.atleast_1d(np.asarray(x, dtype=float))
    n = y.shape[0]
    if n == 0 or lam == 0.0 or n == 1:
        return y.copy()
    out = np.empty(n)
    k = k0 = kminus = kplus = 0
    vmin = y[0] - lam
    vmax = y[0] + lam
    umin = lam
    umax = -lam
    while True:
        while k == n - 1:
            if umin < 0.0:
                # string hits the lower tube bound: emit segment at vmin
                out[k0:kminus + 1] = vmin
                k = k0 = kminus = kminus + 1
                vmin = y[k]
                umin = lam
                umax = y[k] + lam - vmax
            elif umax > 0.0:
                out[k0:kplus + 1] = vmax
                k = k0 = kplus = kplus + 1
                vmax = y[k]
                umax = -lam
                umin = y[k] - lam - vmin
            else:
                out[k0:] = vmin + umin / (k - k0 + 1)
                return out
        umin += y[k + 1] - vmin
        if umin < -lam:
            # negative jump is unavoidable
            out[k0:kminus + 1] = vmin
            k = k0 = kminus = kplus = kminus + 1
            vmin = y[k]
            vmax = y[k] + 2.0 * lam
            umin = lam
            umax = -lam
            continue
        umax += y[k + 1] - vmax
        if umax > lam:
            out[k0:kplus + 1] = vmax
            k = k0 = kminus = kplus = kplus + 1
            vmax = y[k]
            vmin = y[k] - 2.0 * lam
            umin = lam
            umax = -lam
            continue
        k += 1
        if umin >= lam:
            vmin += (umin - lam) / (k - k0 + 1)
            umin = lam
            kminus = k
        if umax <= -lam:
            vmax += (umax + lam) / (k - k0 + 1)
            umax = -lam
            kplus = k


def prox_nuclear(X, lam):
    """Singular-value soft threshold of a matrix."""
    if lam < 0.0:
        raise ConfigError("lam must be nonnegative")
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ConfigError("X must be a matrix")
    try:
        U, sig, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"SVD failed: {exc}") from exc
    return (U * np.maximum(sig - lam, 0.0)) @ Vt


# ---------------------------------------------------------------------------
# the metric-M prox of the composite problem


def prox_metric_M(p: CompositeRLS, x):
    """One forward-backward step = the prox of the composite in the M metric.

    prox_{s g}(x + s A^T (y - A x)) minimizes 1/2 |z - x|_M^2 + f(z)
    with f the full composite objective and M = s^{-1} I - A^T A.
    """
    x = _as_vector(x, p.n)
    return p.regularizer.prox(x + p.s * (p.A.T @ (p.y - p.A @ x)), p.s)


def grad_fM(p: CompositeRLS, x):
    """Gradient (in the M metric) of the composite's Moreau-type envelope."""
    x = _as_vector(x, p.n)
    return x - prox_metric_M(p, x)


# ---------------------------------------------------------------------------
# standard regularizer constructors (registry by tag)


def l1():
    return ProxFriendlyFunction(
        value=lambda x: float(np.sum(np.abs(x))),
        prox=prox_l1,
        tag="l1",
    )


def half_sqnorm():
    return ProxFriendlyFunction(
        value=lambda x: 0.5 * float(np.asarray(x) @ np.asarray(x)),
        prox=lambda x, lam: np.asarray(x, dtype=float) / (1.0 + lam),
        strong_modulus=1.0,
        tag="sqnorm",
    )


def tv1d():
    def tv_value(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(np.sum(np.abs(np.diff(x)))) if x.size > 1 else 0.0

    return ProxFriendlyFunction(value=tv_value, prox=prox_tv1d, tag="tv1d")


def group_l1l2(groups):
    groups = [list(g) for g in groups]

    def gvalue(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(sum(np.linalg.norm(x[np.asarray(g, dtype=int)]) for g in groups))

    return ProxFriendlyFunction(
        value=gvalue,
        prox=lambda x, lam: prox_group_l1l2(x, groups, lam),
        tag="group-l1l2",
    )


def nuclear_norm(shape):
    """Nuclear norm of vectors viewed as matrices of the given shape."""
    rows, cols = shape

    def nvalue(x):
        X = np.asarray(x, dtype=float).reshape(rows, cols)
        return float(np.sum(np.linalg.svd(X, compute_uv=False)))

    def nprox(x, lam):
        X = np.asarray(x, dtype=float).reshape(rows, cols)
        return prox_nuclear(X, lam).ravel()

    return ProxFriendlyFunction(value=nvalue, prox=nprox, tag="nuclear")


def abs_plus_half_sq():
    """f(x) = |x|_1 + 1/2 |x|^2, strongly convex with modulus 1."""

    def fvalue(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(np.sum(np.abs(x))) + 0.5 * float(x @ x)

    def fprox(x, lam):
        return prox_l1(x, lam) / (1.0 + lam)

    return ProxFriendlyFunction(
        value=fvalue, prox=fprox, strong_modulus=1.0, tag="abs+sq")


def zero_fn():
    return ProxFriendlyFunction(
        value=lambda x: 0.0,
        prox=lambda x, lam: np.atleast_1d(np.asarray(x, dtype=float)).copy(),
        tag="zero",
    )


def scaled(f: ProxFriendlyFunction, gamma: float) -> ProxFriendlyFunction:
    """gamma * f for gamma > 0; the prox absorbs gamma into lam."""
    if not gamma > 0.0:
        raise ConfigError("gamma must be positive")
    return ProxFriendlyFunction(
        value=lambda x: gamma * float(f.value(x)),
        prox=lambda x, lam: f.prox(x, gamma * lam),
        strong_modulus=gamma * f.strong_modulus,
        tag=f"{f.tag}*{gamma:g}",
    )
