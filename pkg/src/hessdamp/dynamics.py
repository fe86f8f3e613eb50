"""The damped inertial ODE: integration, growth conditions, energies.

The system is

    x'' + gamma(t) x' + beta(t) Hess f(x) x' + b(t) grad f(x) = 0

with gamma(t) = alpha/t (vanishing damping) or a fixed constant
2 sqrt(mu) in the strongly convex variant.  Everything here works on
the first-order state (x, v); the Hessian only ever appears through
matrix-vector products, so problems with a hess_vec callback or the
finite-difference fallback both integrate fine.

The quantities w(t) = b(t) - beta'(t) - beta(t)/t and delta(t) = t^2 w(t)
drive the convergence theory; the growth checks G2 and G3 below decide
whether the Lyapunov energy is guaranteed to decay on a given span.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, NumericsError, StiffnessError

__all__ = [
    "DampedSystemSpec",
    "TrajectorySample",
    "integrate",
    "integrate_first_order_form",
    "w_and_delta",
    "check_growth_continuous",
    "energy_continuous",
    "sc_energy_continuous",
    "default_grid",
]

_FD_H = 1e-6
_GRID_RATIO = 1.02


@dataclass(frozen=True)
class DampedSystemSpec:
    """Coefficients and problem of one damped system.

    beta_fn and b_fn map t to nonnegative reals; their derivatives may
    be supplied (beta_deriv, b_deriv) or fall back to central
    differences with step 1e-6.  gamma_const, when set, replaces the
    alpha/t viscosity with a constant (the 2 sqrt(mu) form); alpha is
    ignored in that case.  t0 must be positive unless alpha = 0, where
    the singular term vanishes and t0 = 0 is allowed.
    """

    alpha: float
    beta_fn: Callable[[float], float]
    b_fn: Callable[[float], float]
    problem: object
    t0: float = 1.0
    gamma_const: Optional[float] = None
    beta_deriv: Optional[Callable[[float], float]] = None
    b_deriv: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.gamma_const is None and self.alpha > 0:
            if not self.t0 > 0:
                raise ConfigError(
                    f"t0 must be > 0 when alpha > 0, got t0={self.t0}")
        elif self.t0 < 0:
            raise ConfigError(f"t0 must be >= 0, got {self.t0}")

    def gamma(self, t: float) -> float:
        if self.gamma_const is not None:
            return self.gamma_const
        return 0.0 if self.alpha == 0 else self.alpha / t

    def beta_prime(self, t: float) -> float:
        if self.beta_deriv is not None:
            return self.beta_deriv(t)
        return (self.beta_fn(t + _FD_H) - self.beta_fn(t - _FD_H)) / (2 * _FD_H)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    x: np.ndarray
    v: np.ndarray
    f_gap: float
    grad_norm: float
    energy: float


def _w_of(spec: DampedSystemSpec, t: float) -> float:
    bp = spec.beta_prime(t)
    if t == 0.0:
        if spec.beta_fn(0.0) != 0.0:
            raise ConfigError("beta(0) != 0 makes beta(t)/t singular at t=0")
        ratio = bp
    else:
        ratio = spec.beta_fn(t) / t
    return spec.b_fn(t) - bp - ratio


def w_and_delta(spec: DampedSystemSpec, t: float):
    """w(t) = b(t) - beta'(t) - beta(t)/t and delta(t) = t^2 w(t).

    At t = 0 (allowed only for alpha = 0 systems) beta(t)/t is taken
    as its limit beta'(0) when beta(0) = 0.
    """
    if t < spec.t0:
        raise ConfigError(f"t={t} below t0={spec.t0}")
    w = _w_of(spec, t)
    return w, t * t * w


def check_growth_continuous(spec: DampedSystemSpec, t: float) -> dict:
    """Growth conditions at time t.

    G2:  b(t) > beta'(t) + beta(t)/t          (w(t) > 0)
    G3:  t w'(t) <= (alpha - 3) w(t)

    w' is a central difference of w itself, so a small relative slack
    (1e-9) keeps exact-equality cases such as b(t) = t^r with
    r = alpha - 3 from flipping on rounding noise.
    """
    w, _ = w_and_delta(spec, t)
    h = _FD_H * max(1.0, abs(t))
    wp = (_w_of(spec, t + h) - _w_of(spec, t - h)) / (2 * h)
    lhs = t * wp
    rhs = (spec.alpha - 3.0) * w
    slack = 1e-9 * (1.0 + abs(lhs) + abs(rhs))
    return {"G2": w > 0.0, "G3": lhs <= rhs + slack}


def default_grid(t0: float, T: float, ratio: float = _GRID_RATIO) -> np.ndarray:
    """Sample times: geometric with the given ratio, so points per
    decade stay constant and log-log fits are well conditioned.  Falls
    back to a uniform grid when t0 = 0."""
    if T <= t0:
        raise ConfigError(f"need T > t0, got t0={t0}, T={T}")
    if t0 <= 0.0:
        return np.linspace(t0, T, 400)
    n = int(math.ceil(math.log(T / t0) / math.log(ratio)))
    ts = t0 * ratio ** np.arange(n + 1)
    ts[-1] = T
    return ts


def _sample(spec: DampedSystemSpec, t, x, v) -> TrajectorySample:
    problem = spec.problem
    g = problem.gradient(x)
    fx = float(problem.value(x))
    opt_value = getattr(problem, "opt_value", None)
    opt_point = getattr(problem, "opt_point", None)
    gap = fx - opt_value if opt_value is not None else math.nan
    raw = TrajectorySample(t=float(t), x=x, v=v, f_gap=gap,
                           grad_norm=float(np.linalg.norm(g)),
                           energy=math.nan)
    if opt_point is None or opt_value is None:
        return raw
    mu = getattr(problem, "strong_modulus", 0.0)
    if spec.gamma_const is not None and mu > 0.0:
        energy = sc_energy_continuous(problem, spec.beta_fn(t), raw, opt_point)
    elif spec.gamma_const is None:
        energy = energy_continuous(spec, raw, opt_point)
    else:
        return raw
    return TrajectorySample(t=raw.t, x=x, v=v, f_gap=gap,
                            grad_norm=raw.grad_norm, energy=energy)


def _check_coefficients(spec: DampedSystemSpec, T: float):
    ts = np.linspace(spec.t0 if spec.t0 > 0 else 1e-12, T, 1000)
    for t in ts:
        bt = spec.beta_fn(float(t))
        ct = spec.b_fn(float(t))
        if bt < 0 or ct < 0:
            raise ConfigError(
                f"coefficients must stay nonnegative; at t={t}: "
                f"beta={bt}, b={ct}")


def integrate(spec: DampedSystemSpec, x0, v0, T: float, tol: float = 1e-8,
              sample_times: Optional[Sequence[float]] = None
              ) -> List[TrajectorySample]:
    """Integrate the damped system from (x0, v0) at t0 up to T.

    Adaptive embedded Runge-Kutta 4(5) on the stacked state (x, v)
    with local error tolerance tol; samples are read off the dense
    interpolant on the default geometric grid or at sample_times.
    Integrator failure (step collapse) raises StiffnessError and
    non-finite states raise NumericsError.
    """
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    if not T > spec.t0:
        raise ConfigError(f"need T > t0, got T={T}, t0={spec.t0}")
    _check_coefficients(spec, T)
    problem = spec.problem
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    n = x0.size

    def rhs(t, state):
        x = state[:n]
        v = state[n:]
        if not np.all(np.isfinite(state)):
            raise NumericsError(f"non-finite state at t={t}")
        g = problem.gradient(x)
        bt = spec.beta_fn(t)
        acc = -spec.gamma(t) * v - spec.b_fn(t) * g
        if bt != 0.0:
            acc = acc - bt * problem.hessian_vector(x, v)
        return np.concatenate([v, acc])

    sol = solve_ivp(rhs, (spec.t0, T), np.concatenate([x0, v0]),
                    method="RK45", rtol=tol, atol=tol, dense_output=True)
    if sol.status == -1:
        raise StiffnessError(
            f"integrator failed (likely step underflow): {sol.message}")
    if not sol.success:
        raise NumericsError(f"integration did not finish: {sol.message}")
    if sample_times is None:
        ts = default_grid(spec.t0, T)
    else:
        ts = np.asarray(sample_times, dtype=float)
        if ts.size == 0 or ts[0] < spec.t0 - 1e-12 or ts[-1] > T + 1e-12:
            raise ConfigError("sample_times must lie inside [t0, T]")
    states = sol.sol(ts)
    if not np.all(np.isfinite(states)):
        raise NumericsError("non-finite values in the dense output")
    out = []
    for i, t in enumerate(ts):
        out.append(_sample(spec, t, states[:n, i].copy(), states[n:, i].copy()))
    return out


def integrate_first_order_form(spec: DampedSystemSpec, x0, v0, T: float,
                               tol: float = 1e-8,
                               sample_times: Optional[Sequence[float]] = None
                               ) -> List[TrajectorySample]:
    """Hessian-free reformulation for constant beta and b.

    With beta and b constant the system is equivalent to the pair

        x' = (1/B - alpha/t) x - B grad F(x) - y / B
        y' = (1/B - alpha/t + alpha B / t^2) x - y / B

    where F = b0 f and B = beta0 / b0 absorb the constant b into the
    objective.  No Hessian products appear; used as a cross-check of
    integrate() on constant-coefficient systems.
    """
    beta0 = spec.beta_fn(spec.t0)
    b0 = spec.b_fn(spec.t0)
    mid = 0.5 * (spec.t0 + T)
    for t_probe in (mid, T):
        if abs(spec.beta_fn(t_probe) - beta0) > 1e-12 * max(1.0, abs(beta0)) or \
           abs(spec.b_fn(t_probe) - b0) > 1e-12 * max(1.0, abs(b0)):
            raise ConfigError(
                "first-order form needs constant beta and b")
    if beta0 <= 0:
        raise ConfigError("first-order form needs beta > 0")
    if spec.gamma_const is not None:
        raise ConfigError("first-order form implemented for gamma = alpha/t")
    if not tol > 0:
        raise ConfigError(f"tol must be positive, got {tol}")
    if not T > spec.t0:
        raise ConfigError(f"need T > t0, got T={T}, t0={spec.t0}")
    problem = spec.problem
    B = beta0 / b0

    def grad_eff(x):
        return b0 * problem.gradient(x)

    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    n = x0.size
    alpha = spec.alpha
    y0 = (1.0 - alpha * B / spec.t0) * x0 - B * B * grad_eff(x0) - B * v0

    def rhs(t, state):
        x = state[:n]
        y = state[n:]
        xdot = (1.0 / B - alpha / t) * x - B * grad_eff(x) - y / B
        ydot = (1.0 / B - alpha / t + alpha * B / (t * t)) * x - y / B
        return np.concatenate([xdot, ydot])

    sol = solve_ivp(rhs, (spec.t0, T), np.concatenate([x0, y0]),
                    method="RK45", rtol=tol, atol=tol, dense_output=True)
    if sol.status == -1:
        raise StiffnessError(
            f"integrator failed (likely step underflow): {sol.message}")
    if not sol.success:
        raise NumericsError(f"integration did not finish: {sol.message}")
    ts = (default_grid(spec.t0, T) if sample_times is None
          else np.asarray(sample_times, dtype=float))
    states = sol.sol(ts)
    out = []
    for i, t in enumerate(ts):
        x = states[:n, i].copy()
        y = states[n:, i]
        v = (1.0 / B - alpha / t) * x - B * grad_eff(x) - y / B
        out.append(_sample(spec, t, x, v.copy()))
    return out


def energy_continuous(spec: DampedSystemSpec, sample: TrajectorySample,
                      xstar) -> float:
    """Lyapunov energy of the vanishing-damping system:

    E(t) = delta(t)(f(x) - f*) + (1/2)|(alpha-1)(x - x*) + t(v + beta(t) grad f(x))|^2
    """
    if xstar is None:
        raise ConfigError("energy needs the minimizer x*")
    problem = spec.problem
    fstar = getattr(problem, "opt_value", None)
    if fstar is None:
        raise ConfigError("energy needs the optimal value")
    xstar = np.atleast_1d(np.asarray(xstar, dtype=float))
    t = sample.t
    _, delta = w_and_delta(spec, t)
    g = problem.gradient(sample.x)
    vterm = (spec.alpha - 1.0) * (sample.x - xstar) + t * (
        sample.v + spec.beta_fn(t) * g)
    return delta * (float(problem.value(sample.x)) - fstar) + 0.5 * float(
        vterm @ vterm)


def sc_energy_continuous(problem, beta: float, sample: TrajectorySample,
                         xstar) -> float:
    """Energy of the constant-damping strongly convex system:

    E(t) = f(x) - min f + (1/2)|sqrt(mu)(x - x*) + v + beta grad f(x)|^2

    Decays at least like exp(-(sqrt(mu)/2)(t - t0)) whenever
    0 <= beta <= 1/(2 sqrt(mu)).
    """
    mu = getattr(problem, "strong_modulus", 0.0)
    if not mu or mu <= 0.0:
        raise ConfigError("strong convexity modulus mu > 0 required")
    fstar = getattr(problem, "opt_value", None)
    if fstar is None or xstar is None:
        raise ConfigError("energy needs the minimizer and optimal value")
    xstar = np.atleast_1d(np.asarray(xstar, dtype=float))
    g = problem.gradient(sample.x)
    vterm = math.sqrt(mu) * (sample.x - xstar) + sample.v + beta * g
    return (float(problem.value(sample.x)) - fstar) + 0.5 * float(vterm @ vterm)
