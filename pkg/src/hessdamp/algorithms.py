"""Inertial first-order algorithms driven by gradient correction terms.

Six schemes share the family resemblance: a vanishing (alpha/k) or
constant viscous momentum, plus a damping term built from gradient
differences that mimics Hessian damping without ever forming a
Hessian.  Configurations validate the hypotheses of the convergence
theorems strictly by default; every runner returns a list of IterTrace
rows carrying the Lyapunov energy of its theorem where it is defined.

Naming scheme for the runners:

========  ===========================================================
igahd     inertial gradient scheme, explicit step (includes FISTA as
          the beta = 0 special case)
ipahd     inertial proximal scheme with schedules beta_k, b_k
ipahd_ns  the same through the Moreau envelope of a nonsmooth f
*_sc      the constant-momentum variants for strongly convex f
========  ===========================================================
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .errors import ConfigError, HypothesisViolation, NumericsError
from .problems import ProxFriendlyFunction, SmoothConvexProblem

__all__ = [
    "IGAHDConfig",
    "IPAHDConfig",
    "SCConfig",
    "IterTrace",
    "igahd_run",
    "igahd_energy",
    "fista_run",
    "ipahd_run",
    "ipahd_mu",
    "ipahd_delta",
    "check_growth_discrete",
    "ipahd_ns_run",
    "ipahd_sc_run",
    "ipahd_ns_sc_run",
    "igahd_sc_run",
    "theta_weighted_gradient_sum",
    "descent_lemma_check",
    "attach_empirical_gap",
]

logger = logging.getLogger("hessdamp")

_REL_TOL = 1e-12  # slack for boundary cases like s = 1/L in floating point


@dataclass(frozen=True)
class IterTrace:
    """One row of a run: the iterate and its certificates."""

    k: int
    x: np.ndarray
    f_gap: float
    grad_norm: float
    energy: float
    y: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IGAHDConfig:
    """Parameters of the explicit inertial-gradient scheme.

    Hypotheses checked when strict (the default): alpha >= 3,
    0 <= beta < 2 sqrt(s), s > 0.  The step condition s <= 1/L is
    checked against the problem at run time.
    """

    alpha: float
    beta: float
    s: float
    start_index: int = 1
    max_iter: int = 1000
    strict: bool = True

    def __post_init__(self):
        if not self.s > 0.0:
            raise ConfigError(f"step must be positive, got s={self.s}")
        if self.start_index < 1:
            raise ConfigError("start_index must be >= 1")
        if self.strict:
            if self.alpha < 3.0:
                raise HypothesisViolation(f"alpha >= 3 required, got {self.alpha}")
            if not (0.0 <= self.beta < 2.0 * math.sqrt(self.s)):
                raise HypothesisViolation(
                    f"0 <= beta < 2*sqrt(s) required, got beta={self.beta}, "
                    f"2*sqrt(s)={2.0 * math.sqrt(self.s)}")
        elif self.beta < 0.0 or self.alpha <= 0.0:
            raise ConfigError("alpha must be positive and beta nonnegative")

    @property
    def sqrt_s(self):
        return math.sqrt(self.s)

    def t_k(self, k: int) -> float:
        return (k - 1) / (self.alpha - 1.0)


def _check_step(cfg: IGAHDConfig, problem):
    if problem.lipschitz is None:
        raise ConfigError("problem needs a Lipschitz constant for this scheme")
    if cfg.strict and cfg.s * problem.lipschitz > 1.0 + _REL_TOL:
        raise HypothesisViolation(
            f"s <= 1/L required: s={cfg.s}, 1/L={1.0 / problem.lipschitz}")


def _gap_of(problem, fx):
    opt = getattr(problem, "opt_value", None)
    return fx - opt if opt is not None else math.nan


def igahd_run(problem, cfg: IGAHDConfig, x0, x1=None) -> List[IterTrace]:
    """Run the inertial gradient scheme with Hessian-type correction.

    The update, for k = start_index, ..., max_iter:

        y_k     = x_k + (1 - alpha/k)(x_k - x_{k-1})
                      - beta sqrt(s) (grad f(x_k) - grad f(x_{k-1}))
                      - (beta sqrt(s) / k) grad f(x_{k-1})
        x_{k+1} = y_k - s grad f(y_k)

    x1 defaults to x0.  The trace holds one row per k (the iterate
    x_k, its gap, gradient norm, energy E_k and the extrapolated
    point y_k), plus a final row for the last produced iterate.

    For k < alpha the momentum coefficient is negative and is used as
    written; the energy is only guaranteed monotone from k >= alpha.
    """
    _check_step(cfg, problem)
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    bs = cfg.beta * cfg.sqrt_s
    g_prev = problem.gradient(x_prev)
    trace: List[IterTrace] = []
    for k in range(cfg.start_index, cfg.max_iter + 1):
        g_cur = problem.gradient(x_cur)
        y = (x_cur + (1.0 - cfg.alpha / k) * (x_cur - x_prev)
             - bs * (g_cur - g_prev) - (bs / k) * g_prev)
        g_y = problem.gradient(y)
        x_next = y - cfg.s * g_y
        trace.append(IterTrace(
            k=k,
            x=x_cur,
            f_gap=_gap_of(problem, float(problem.value(x_cur))),
            grad_norm=float(np.linalg.norm(g_cur)),
            energy=_energy_or_nan(problem, cfg, x_prev, x_cur, k, g_prev),
            y=y,
        ))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur, g_prev = x_cur, x_next, g_cur
    k_last = cfg.max_iter + 1
    trace.append(IterTrace(
        k=k_last,
        x=x_cur,
        f_gap=_gap_of(problem, float(problem.value(x_cur))),
        grad_norm=float(np.linalg.norm(problem.gradient(x_cur))),
        energy=_energy_or_nan(problem, cfg, x_prev, x_cur, k_last, g_prev),
        y=None,
    ))
    return trace


def _energy_or_nan(problem, cfg, x_prev, x_cur, k, g_prev=None):
    if getattr(problem, "opt_point", None) is None or getattr(problem, "opt_value", None) is None:
        return math.nan
    return igahd_energy(problem, cfg, x_prev, x_cur, k, g_prev)


def igahd_energy(problem, cfg: IGAHDConfig, x_prev, x_cur, k: int,
                 g_prev=None) -> float:
    """Lyapunov energy of the inertial-gradient scheme.

    E_k = t_k^2 (f(x_k) - f*) + (1/2s) |v_k|^2 with
    t_k = (k-1)/(alpha-1) and
    v_k = (x_{k-1} - x*) + t_k (x_k - x_{k-1} + beta sqrt(s) grad f(x_{k-1})).

    g_prev, when given, stands in for grad f(x_{k-1}).
    """
    if getattr(problem, "opt_point", None) is None:
        raise ConfigError("energy needs the problem's opt_point")
    if getattr(problem, "opt_value", None) is None:
        raise ConfigError("energy needs the problem's opt_value")
    if g_prev is None:
        g_prev = problem.gradient(x_prev)
    t = cfg.t_k(k)
    v = (x_prev - problem.opt_point) + t * (
        x_cur - x_prev + cfg.beta * cfg.sqrt_s * g_prev)
    gap = float(problem.value(x_cur)) - problem.opt_value
    return t * t * gap + float(v @ v) / (2.0 * cfg.s)


def fista_run(problem, alpha, s, x0, x1=None, max_iter=1000, start_index=1):
    """The beta = 0 run of igahd_run: classical inertial gradient steps."""
    cfg = IGAHDConfig(alpha=alpha, beta=0.0, s=s,
                      start_index=start_index, max_iter=max_iter)
    return igahd_run(problem, cfg, x0, x1)


# ---------------------------------------------------------------------------
# proximal variant with schedules


@dataclass(frozen=True)
class IPAHDConfig:
    """Schedules and step for the proximal scheme.

    beta_schedule and b_schedule map the iteration index k to
    beta_k >= 0 and b_k > 0.  h is the time step (s = h^2).
    """

    alpha: float
    beta_schedule: Callable[[int], float]
    b_schedule: Callable[[int], float]
    h: float
    max_iter: int = 1000
    strict: bool = True

    def __post_init__(self):
        if not self.h > 0.0:
            raise ConfigError(f"h must be positive, got {self.h}")
        if self.strict and self.alpha < 1.0:
            raise HypothesisViolation(f"alpha >= 1 required, got {self.alpha}")

    @property
    def s(self):
        return self.h * self.h


def ipahd_mu(cfg: IPAHDConfig, k: int) -> float:
    """Prox parameter mu_k = (k/(k+alpha)) (beta_k h + h^2 b_k)."""
    bk = cfg.beta_schedule(k)
    return (k / (k + cfg.alpha)) * (bk * cfg.h + cfg.s * cfg.b_schedule(k))


def ipahd_delta(cfg: IPAHDConfig, k: int) -> float:
    """delta_k = h (b_k h k - beta_{k+1} - k (beta_{k+1} - beta_k)) (k+1)."""
    bk1 = cfg.beta_schedule(k + 1)
    bk = cfg.beta_schedule(k)
    return cfg.h * (cfg.b_schedule(k) * cfg.h * k - bk1 - k * (bk1 - bk)) * (k + 1)


def check_growth_discrete(cfg: IPAHDConfig, alpha: float, k: int) -> dict:
    """Discrete growth conditions at index k.

    G2dis:  b_k h k - beta_{k+1} - k (beta_{k+1} - beta_k) > 0
    G3dis:  delta_{k+1} - delta_k <= (alpha - 1) delta_k / (k + 1)
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    bk1 = cfg.beta_schedule(k + 1)
    bk = cfg.beta_schedule(k)
    core = cfg.b_schedule(k) * cfg.h * k - bk1 - k * (bk1 - bk)
    dk = ipahd_delta(cfg, k)
    dk1 = ipahd_delta(cfg, k + 1)
    return {
        "G2dis": core > 0.0,
        "G3dis": dk1 - dk <= (alpha - 1.0) * dk / (k + 1),
    }


def _prox_of(problem, z, t):
    if hasattr(problem, "prox_point"):
        return problem.prox_point(z, t)
    raise ConfigError(f"problem {problem!r} exposes no prox")


def ipahd_run(problem, cfg: IPAHDConfig, x0, x1=None) -> List[IterTrace]:
    """Run the proximal scheme.

        mu_k    = (k/(k+alpha)) (beta_k sqrt(s) + s b_k)
        y_k     = x_k + (1 - alpha/(k+alpha)) (x_k - x_{k-1})
                      + beta_k sqrt(s) (1 - alpha/(k+alpha)) grad f(x_k)
        x_{k+1} = prox_{mu_k f}(y_k)

    Accepts any problem with value/gradient/prox_point (smooth
    problems with exact or inner-solver prox, or a Moreau envelope
    whose prox comes from the envelope identity).
    """
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    trace: List[IterTrace] = []
    for k in range(1, cfg.max_iter + 1):
        mu_k = ipahd_mu(cfg, k)
        if mu_k <= 0.0:
            raise ConfigError(f"mu_k = {mu_k} <= 0 at k={k}; check schedules")
        m = 1.0 - cfg.alpha / (k + cfg.alpha)
        g_cur = problem.gradient(x_cur)
        y = x_cur + m * (x_cur - x_prev) + cfg.beta_schedule(k) * cfg.h * m * g_cur
        x_next = _prox_of(problem, y, mu_k)
        trace.append(IterTrace(
            k=k,
            x=x_cur,
            f_gap=_gap_of(problem, float(problem.value(x_cur))),
            grad_norm=float(np.linalg.norm(g_cur)),
            energy=math.nan,
            y=y,
        ))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur = x_cur, x_next
    trace.append(IterTrace(
        k=cfg.max_iter + 1,
        x=x_cur,
        f_gap=_gap_of(problem, float(problem.value(x_cur))),
        grad_norm=float(np.linalg.norm(problem.gradient(x_cur))),
        energy=math.nan,
        y=None,
    ))
    return trace


def ipahd_ns_run(f: ProxFriendlyFunction, cfg: IPAHDConfig, lam: float,
                 x0, x1=None, opt_value=None) -> List[IterTrace]:
    """Relaxed proximal scheme on a nonsmooth f through its envelope.

        theta_k = (k/(k+alpha)) (beta_k sqrt(s) + s b_k)
        mu_k    = lam (k+alpha) / (lam (k+alpha) + k (beta_k sqrt(s) + s b_k))
        y_k     = x_k + (1 - alpha/(k+alpha)) (x_k - x_{k-1})
                      + (beta_k sqrt(s)/lam)(1 - alpha/(k+alpha))(x_k - prox_{lam f}(x_k))
        x_{k+1} = mu_k y_k + (1 - mu_k) prox_{(lam/mu_k) f}(y_k)

    Algebraically this is ipahd_run on the envelope f_lam; the runs
    agree to round-off and the tests pin that.  The trace reports
    f(prox_{lam f}(x_k)) - opt_value as the gap and the envelope
    gradient norm |x_k - prox_{lam f}(x_k)| / lam.
    """
    if not lam > 0.0:
        raise ConfigError(f"lam must be positive, got {lam}")
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    trace: List[IterTrace] = []

    def row(k, x, y=None):
        p = f.prox(x, lam)
        gap = float(f.value(p)) - opt_value if opt_value is not None else math.nan
        return IterTrace(k=k, x=x, f_gap=gap,
                         grad_norm=float(np.linalg.norm(x - p)) / lam,
                         energy=math.nan, y=y)

    for k in range(1, cfg.max_iter + 1):
        bk = cfg.beta_schedule(k)
        theta_k = (k / (k + cfg.alpha)) * (bk * cfg.h + cfg.s * cfg.b_schedule(k))
        if theta_k <= 0.0:
            raise ConfigError(f"nonpositive prox weight at k={k}")
        mu_k = lam / (lam + theta_k)
        m = 1.0 - cfg.alpha / (k + cfg.alpha)
        y = x_cur + m * (x_cur - x_prev) + (bk * cfg.h / lam) * m * (
            x_cur - f.prox(x_cur, lam))
        x_next = mu_k * y + (1.0 - mu_k) * f.prox(y, lam / mu_k)
        trace.append(row(k, x_cur, y))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur = x_cur, x_next
    trace.append(row(cfg.max_iter + 1, x_cur))
    return trace


# ---------------------------------------------------------------------------
# strongly convex variants


@dataclass(frozen=True)
class SCConfig:
    """Configuration for the strongly convex (linear-rate) schemes.

    variant selects the hypothesis set:
      "prox"     beta <= 1/(2 sqrt(mu)) and sqrt(s) <= beta
      "prox-ns"  beta <= (1/2) sqrt(lam + 1/mu) and sqrt(s) <= beta
      "grad"     beta <= 1/sqrt(mu); the Lipschitz inequality is
                 checked against the problem at run time
    The contraction factor is q = 1/(1 + (1/2) sqrt(mu_eff s)) where
    mu_eff is mu, except for prox-ns where mu_eff = mu/(1 + lam mu).
    """

    mu: float
    beta: float
    s: float
    variant: str = "prox"
    lam: Optional[float] = None
    max_iter: int = 500
    strict: bool = True

    def __post_init__(self):
        if self.variant not in ("prox", "prox-ns", "grad"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if not (self.mu > 0.0 and self.s > 0.0):
            raise ConfigError("mu and s must be positive")
        if self.beta < 0.0:
            raise ConfigError("beta must be nonnegative")
        if self.variant == "prox-ns" and not (self.lam and self.lam > 0.0):
            raise ConfigError("prox-ns needs lam > 0")
        if not self.strict:
            return
        rs = math.sqrt(self.s)
        if self.variant == "prox":
            bound = 1.0 / (2.0 * math.sqrt(self.mu))
            if self.beta > bound * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"beta <= 1/(2 sqrt(mu)) fails: beta={self.beta}, bound={bound}")
            if rs > self.beta * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"sqrt(s) <= beta fails: sqrt(s)={rs}, beta={self.beta}")
        elif self.variant == "prox-ns":
            bound = 0.5 * math.sqrt(self.lam + 1.0 / self.mu)
            if self.beta > bound * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"beta <= (1/2) sqrt(lam + 1/mu) fails: beta={self.beta}, "
                    f"bound={bound}")
            if rs > self.beta * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"sqrt(s) <= beta fails: sqrt(s)={rs}, beta={self.beta}")
        else:  # grad
            bound = 1.0 / math.sqrt(self.mu)
            if self.beta > bound * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"beta <= 1/sqrt(mu) fails: beta={self.beta}, bound={bound}")

    @property
    def mu_eff(self):
        if self.variant == "prox-ns":
            return self.mu / (1.0 + self.lam * self.mu)
        return self.mu

    @property
    def q(self):
        return 1.0 / (1.0 + 0.5 * math.sqrt(self.mu_eff * self.s))

    @property
    def theta(self):
        return 1.0 / (1.0 + math.sqrt(self.mu_eff * self.s))


def _sc_energy(problem, mu, beta, rs, x_prev, x_cur, anchor_prev):
    """E_k of the strongly convex schemes; anchor_prev picks whose
    gradient and anchor point enter v_k (x_{k-1} for the explicit
    scheme, x_k for the proximal one)."""
    xstar = getattr(problem, "opt_point", None)
    fstar = getattr(problem, "opt_value", None)
    if xstar is None or fstar is None:
        return math.nan
    xa = x_prev if anchor_prev else x_cur
    v = (math.sqrt(mu) * (xa - xstar) + (x_cur - x_prev) / rs
         + beta * problem.gradient(xa))
    return float(problem.value(x_cur)) - fstar + 0.5 * float(v @ v)


def ipahd_sc_run(problem, cfg: SCConfig, x0, x1=None) -> List[IterTrace]:
    """Proximal scheme with constant momentum for mu-strongly convex f.

        a       = 2 sqrt(mu s) / (1 + 2 sqrt(mu s))
        y_k     = x_k + (1-a)(x_k - x_{k-1}) + beta sqrt(s) (1-a) grad f(x_k)
        x_{k+1} = prox_{theta_p f}(y_k),  theta_p = (beta sqrt(s)+s)/(1+2 sqrt(mu s))

    Trace rows start at k=0 (the initial point, no energy) so that the
    weighted gradient sums can include j = 0.  E_k uses the anchor x_k.
    """
    if cfg.variant != "prox":
        raise ConfigError("ipahd_sc_run needs variant='prox'")
    rs = math.sqrt(cfg.s)
    rms = math.sqrt(cfg.mu * cfg.s)
    a = 2.0 * rms / (1.0 + 2.0 * rms)
    theta_p = (cfg.beta * rs + cfg.s) / (1.0 + 2.0 * rms)
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    trace: List[IterTrace] = [IterTrace(
        k=0, x=x_prev, f_gap=_gap_of(problem, float(problem.value(x_prev))),
        grad_norm=float(np.linalg.norm(problem.gradient(x_prev))),
        energy=math.nan, y=None)]
    for k in range(1, cfg.max_iter + 1):
        g_cur = problem.gradient(x_cur)
        y = x_cur + (1.0 - a) * (x_cur - x_prev) + cfg.beta * rs * (1.0 - a) * g_cur
        x_next = _prox_of(problem, y, theta_p)
        trace.append(IterTrace(
            k=k, x=x_cur,
            f_gap=_gap_of(problem, float(problem.value(x_cur))),
            grad_norm=float(np.linalg.norm(g_cur)),
            energy=_sc_energy(problem, cfg.mu, cfg.beta, rs, x_prev, x_cur,
                              anchor_prev=False),
            y=y))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur = x_cur, x_next
    trace.append(IterTrace(
        k=cfg.max_iter + 1, x=x_cur,
        f_gap=_gap_of(problem, float(problem.value(x_cur))),
        grad_norm=float(np.linalg.norm(problem.gradient(x_cur))),
        energy=_sc_energy(problem, cfg.mu, cfg.beta, rs, x_prev, x_cur,
                          anchor_prev=False),
        y=None))
    return trace


def ipahd_ns_sc_run(f: ProxFriendlyFunction, cfg: SCConfig, x0, x1=None,
                    opt_value=None, opt_point=None) -> List[IterTrace]:
    """Strongly convex proximal scheme on nonsmooth f via its envelope.

    Uses the effective modulus mu/(1 + lam mu) in the momentum and the
    prox splitting identity for the envelope, so only prox of f itself
    is ever evaluated.
    """
    if cfg.variant != "prox-ns":
        raise ConfigError("ipahd_ns_sc_run needs variant='prox-ns'")
    lam = cfg.lam
    mu_eff = cfg.mu_eff
    rs = math.sqrt(cfg.s)
    rms = math.sqrt(mu_eff * cfg.s)
    a = 2.0 * rms / (1.0 + 2.0 * rms)
    theta = (cfg.beta * rs + cfg.s) / (1.0 + 2.0 * rms)
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()

    def row(k, x_p, x_c, y=None, with_energy=True):
        p = f.prox(x_c, lam)
        gap = float(f.value(p)) - opt_value if opt_value is not None else math.nan
        genv = (x_c - p) / lam
        if with_energy and opt_point is not None and opt_value is not None:
            penv = f.prox(x_c, lam)
            envval = float(f.value(penv)) + float((x_c - penv) @ (x_c - penv)) / (2 * lam)
            v = math.sqrt(mu_eff) * (x_c - opt_point) + (x_c - x_p) / rs + cfg.beta * genv
            energy = envval - opt_value + 0.5 * float(v @ v)
        else:
            energy = math.nan
        return IterTrace(k=k, x=x_c, f_gap=gap,
                         grad_norm=float(np.linalg.norm(genv)),
                         energy=energy, y=y)

    trace: List[IterTrace] = [row(0, x_prev, x_prev, with_energy=False)]
    for k in range(1, cfg.max_iter + 1):
        p_cur = f.prox(x_cur, lam)
        y = x_cur + (1.0 - a) * (x_cur - x_prev) + (cfg.beta * rs / lam) * (
            1.0 - a) * (x_cur - p_cur)
        x_next = (lam / (lam + theta)) * y + (theta / (lam + theta)) * f.prox(
            y, lam + theta)
        trace.append(row(k, x_prev, x_cur, y))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur = x_cur, x_next
    trace.append(row(cfg.max_iter + 1, x_prev, x_cur))
    return trace


def igahd_sc_run(problem, cfg: SCConfig, x0, x1=None) -> List[IterTrace]:
    """Explicit gradient scheme with constant momentum (strongly convex).

        x_{k+1} = x_k + (1-r)/(1+r) (x_k - x_{k-1})
                      - beta sqrt(s)/(1+r) (grad f(x_k) - grad f(x_{k-1}))
                      - s/(1+r) grad f(x_k),     r = sqrt(mu s)

    Validation reports which of the two Lipschitz inequalities failed.
    E_k uses the anchor x_{k-1}.
    """
    if cfg.variant != "grad":
        raise ConfigError("igahd_sc_run needs variant='grad'")
    L = getattr(problem, "lipschitz", None)
    if L is None:
        raise ConfigError("problem needs a Lipschitz constant")
    if cfg.strict:
        rmu = math.sqrt(cfg.mu)
        rs = math.sqrt(cfg.s)
        if cfg.beta > 0.0:
            b1 = rmu / (8.0 * cfg.beta)
            if L > b1 * (1.0 + _REL_TOL):
                raise HypothesisViolation(
                    f"L <= sqrt(mu)/(8 beta) fails: L={L}, bound={b1}")
        b2 = (rmu / (2.0 * cfg.s) + cfg.mu / rs) / (
            2.0 * cfg.beta * cfg.mu + 1.0 / rs + rmu / 2.0)
        if L > b2 * (1.0 + _REL_TOL):
            raise HypothesisViolation(
                f"second Lipschitz bound fails: L={L}, bound={b2}")
    r = math.sqrt(cfg.mu * cfg.s)
    rs = math.sqrt(cfg.s)
    mcoef = (1.0 - r) / (1.0 + r)
    bcoef = cfg.beta * rs / (1.0 + r)
    gcoef = cfg.s / (1.0 + r)
    x_prev = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    x_cur = x_prev.copy() if x1 is None else np.atleast_1d(np.asarray(x1, dtype=float)).copy()
    g_prev = problem.gradient(x_prev)
    trace: List[IterTrace] = [IterTrace(
        k=0, x=x_prev, f_gap=_gap_of(problem, float(problem.value(x_prev))),
        grad_norm=float(np.linalg.norm(g_prev)), energy=math.nan, y=None)]
    for k in range(1, cfg.max_iter + 1):
        g_cur = problem.gradient(x_cur)
        x_next = (x_cur + mcoef * (x_cur - x_prev)
                  - bcoef * (g_cur - g_prev) - gcoef * g_cur)
        trace.append(IterTrace(
            k=k, x=x_cur,
            f_gap=_gap_of(problem, float(problem.value(x_cur))),
            grad_norm=float(np.linalg.norm(g_cur)),
            energy=_sc_energy(problem, cfg.mu, cfg.beta, rs, x_prev, x_cur,
                              anchor_prev=True),
            y=None))
        if not np.all(np.isfinite(x_next)):
            err = NumericsError(f"non-finite iterate at k={k}")
            err.trace = trace
            raise err
        x_prev, x_cur, g_prev = x_cur, x_next, g_cur
    trace.append(IterTrace(
        k=cfg.max_iter + 1, x=x_cur,
        f_gap=_gap_of(problem, float(problem.value(x_cur))),
        grad_norm=float(np.linalg.norm(problem.gradient(x_cur))),
        energy=_sc_energy(problem, cfg.mu, cfg.beta, rs, x_prev, x_cur,
                          anchor_prev=True),
        y=None))
    return trace


# ---------------------------------------------------------------------------
# certificates


def theta_weighted_gradient_sum(trace: List[IterTrace], theta: float):
    """Partial sums S_k = theta^k sum_{j <= k-2} theta^{-j} g_j^2.

    g_j is the recorded gradient norm at index j.  Computed by the
    stable recursion S_k = theta S_{k-1} + theta^2 g_{k-2}^2, aligned
    with the trace rows (rows with k < 2 get S = 0).
    """
    if not (0.0 < theta < 1.0):
        raise ConfigError(f"theta must be in (0,1), got {theta}")
    by_k = {row.k: row.grad_norm for row in trace}
    kmax = max(by_k)
    sums = {0: 0.0, 1: 0.0} if 0 in by_k else {1: 0.0}
    s = 0.0
    start = min(by_k)
    for k in range(start + 1, kmax + 1):
        g = by_k.get(k - 2)
        s = theta * s + (theta * theta * g * g if g is not None else 0.0)
        sums[k] = s
    return [sums.get(row.k, 0.0) for row in trace]


def descent_lemma_check(problem, x, y, s: float) -> float:
    """Slack of the reinforced descent inequality at (x, y, s).

    slack = f(x) + <grad f(y), y-x> - (s/2)|grad f(y)|^2
            - (s/2)|grad f(x) - grad f(y)|^2 - f(y - s grad f(y))

    Nonnegative (up to round-off) whenever s L <= 1.
    """
    if problem.lipschitz is None:
        raise ConfigError("descent lemma check needs a Lipschitz constant")
    if s * problem.lipschitz > 1.0 + _REL_TOL:
        raise ConfigError(
            f"s L <= 1 required: s={s}, L={problem.lipschitz}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    gy = problem.gradient(y)
    gx = problem.gradient(x)
    return (float(problem.value(x)) + float(gy @ (y - x))
            - 0.5 * s * float(gy @ gy)
            - 0.5 * s * float((gx - gy) @ (gx - gy))
            - float(problem.value(y - s * gy)))


def attach_empirical_gap(trace: List[IterTrace], f_ref: float,
                         values=None) -> List[IterTrace]:
    """Recompute f_gap against an external reference optimum.

    values, when given, supplies f(x_k) per row (used when the
    problem recorded NaN gaps because opt_value was unknown).
    """
    out = []
    for i, row in enumerate(trace):
        fx = values[i] if values is not None else row.f_gap
        out.append(IterTrace(k=row.k, x=row.x, f_gap=fx - f_ref,
                             grad_norm=row.grad_norm, energy=row.energy,
                             y=row.y))
    return out
