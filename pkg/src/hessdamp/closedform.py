"""Closed-form trajectories of the damped dynamics on quadratics.

Each eigenmode of a quadratic objective turns the system into a scalar
linear ODE

    x'' + (alpha/t + beta*lam) x' + lam*(b + gamma/t) x = 0

whose solutions are Kummer functions of xi*t with
xi = sqrt(beta^2 lam^2 - 4 b lam), or Bessel functions of
zeta*sqrt(t) on the discriminant-zero branch.  A power-law damping
beta(t) = t^p with b(t) = c t^(p-1) reduces to the constant-beta form
after the substitution tau = t^(1+p).

Magnitudes get extreme fast: the fast Kummer branch decays like
exp(-(beta*lam + xi)t/2), which for a stiff mode (lam ~ 1e3) leaves
the representable range of doubles immediately.  Evaluation and
fitting therefore switch to mpmath arithmetic (and mpmath's own
hypergeometric routines, which handle large arguments by asymptotic
continuation) once |xi*t| or the exponent outgrow the float-safe
region; fitted coefficients are kept as mpmath scalars when they do
not fit in a double.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import mpmath as _mp
import numpy as np

from .dynamics import DampedSystemSpec, TrajectorySample, energy_continuous
from .errors import ConfigError, DomainError, NumericsError
from .specfun import kummer_m, kummer_u

__all__ = [
    "ClosedFormSpec",
    "fit_closed_form_ic",
    "closed_form_eval",
    "closed_form_derivative",
    "asymptotic_rate",
    "rescaled_change_of_variable",
    "closed_form_trajectory",
]

_SERIES_LIMIT = 60.0      # |xi*t| beyond which mpmath takes over
_EXP_LIMIT = 600.0        # exponent magnitude safe for doubles
_CSTEP = 1e-6             # complex-step size for t-derivatives
_COND_LIMIT = 1e10
_MP_DPS = 40


def _disc_scale(lam, beta, b):
    return max(1.0, (beta * lam) ** 2, 4.0 * abs(b) * lam)


def _mode_parameters(lam, alpha, beta, b, gamma_coef):
    disc = (beta * lam) ** 2 - 4.0 * b * lam
    degenerate = abs(disc) <= 1e-12 * _disc_scale(lam, beta, b)
    core = lam * (gamma_coef - alpha * beta / 2.0)
    zeta = 2.0 * cmath.sqrt(complex(core))
    if degenerate:
        xi = 0.0 + 0.0j
        kappa = 0.0 + 0.0j
    else:
        xi = cmath.sqrt(complex(disc))
        kappa = core / xi
    sigma = (alpha - 1.0) / 2.0
    return xi, kappa, sigma, zeta, degenerate


@dataclass(frozen=True)
class ClosedFormSpec:
    """One fitted eigenmode solution.

    xi, kappa drive the Kummer branch; sigma, zeta the Bessel branch
    (taken when the discriminant vanishes).  c1, c2 weight the two
    basis solutions; they are ordinary complex numbers except for
    extreme-magnitude fits, where mpmath scalars hold values outside
    the double range.
    """

    lambda_mode: float
    alpha: float
    beta: float
    b: float
    gamma_coef: float
    xi: complex
    kappa: complex
    sigma: float
    zeta: complex
    c1: complex
    c2: complex

    def __post_init__(self):
        if not self.lambda_mode > 0:
            raise ConfigError(f"lambda_mode must be > 0, got {self.lambda_mode}")
        disc = (self.beta * self.lambda_mode) ** 2 - 4.0 * self.b * self.lambda_mode
        zero_disc = abs(disc) <= 1e-12 * _disc_scale(
            self.lambda_mode, self.beta, self.b)
        if (abs(self.xi) == 0.0) != zero_disc:
            raise ConfigError(
                "inconsistent branch: xi and the discriminant disagree "
                f"(xi={self.xi}, disc={disc})")

    @property
    def degenerate(self) -> bool:
        return abs(self.xi) == 0.0


def _is_mp(v) -> bool:
    return isinstance(v, (_mp.mpc, _mp.mpf))


def _needs_mp(cf: ClosedFormSpec, t) -> bool:
    if _is_mp(cf.c1) or _is_mp(cf.c2):
        return True
    if cf.degenerate:
        return False
    at = abs(t)
    return (abs(cf.xi) * at > _SERIES_LIMIT
            or (cf.beta * cf.lambda_mode + abs(cf.xi)) * at / 2.0 > _EXP_LIMIT)


def _eval_complex(cf: ClosedFormSpec, t):
    """Value of the mode solution at complex t (principal branches)."""
    lam = cf.lambda_mode
    if cf.degenerate:
        # with a sqrt(t) argument the Bessel order is alpha - 1, twice
        # the prefactor exponent (order sigma would need argument ~ t).
        # The decaying solution on this branch is a K-like combination
        # of I-like basis functions, which cancels catastrophically in
        # doubles (and the complex-step derivative divides any eval
        # noise by 2e-6), so this branch always evaluates in mpmath.
        order = 2.0 * cf.sigma
        with _mp.mp.workdps(_MP_DPS):
            tm = _mp.mpc(t)
            z = _mp.mpc(cf.zeta) * _mp.sqrt(tm)
            pref = _mp.exp(-cf.sigma * _mp.log(tm)
                           - cf.beta * lam * tm / 2.0)
            total = _mp.mpc(0)
            if cf.c1 != 0:
                total += _mp.mpc(cf.c1) * _mp.besselj(order, z)
            if cf.c2 != 0:
                total += _mp.mpc(cf.c2) * _mp.bessely(order, z)
            return pref * total
    a = cf.alpha / 2.0 - cf.kappa
    if not _needs_mp(cf, t):
        tc = complex(t)
        z = cf.xi * tc
        pref = cmath.exp((cf.alpha / 2.0) * cmath.log(cf.xi)
                         - (cf.beta * lam + cf.xi) * tc / 2.0)
        total = 0.0 + 0.0j
        if cf.c1 != 0:
            total += complex(cf.c1) * kummer_m(a, cf.alpha, z)
        if cf.c2 != 0:
            total += complex(cf.c2) * kummer_u(a, cf.alpha, z)
        return pref * total
    with _mp.mp.workdps(_MP_DPS):
        tm = _mp.mpc(t)
        xim = _mp.mpc(cf.xi)
        z = xim * tm
        pref = _mp.exp((cf.alpha / 2.0) * _mp.log(xim)
                       - (cf.beta * lam + xim) * tm / 2.0)
        total = _mp.mpc(0)
        if cf.c1 != 0:
            total += _mp.mpc(cf.c1) * _mp.hyp1f1(_mp.mpc(a), cf.alpha, z)
        if cf.c2 != 0:
            total += _mp.mpc(cf.c2) * _mp.hyperu(_mp.mpc(a), cf.alpha, z)
        return pref * total


def _deriv_complex(cf: ClosedFormSpec, t):
    """d/dt of the mode solution by a central complex step.

    Call sites pass real t (possibly boxed as complex or mpf)."""
    h = _CSTEP
    tr = float(complex(t).real)
    if _needs_mp(cf, tr):
        with _mp.mp.workdps(_MP_DPS):
            hi = _eval_complex(cf, _mp.mpc(tr, h))
            lo = _eval_complex(cf, _mp.mpc(tr, -h))
            return (hi - lo) / _mp.mpc(0, 2 * h)
    hi = _eval_complex(cf, complex(tr, h))
    lo = _eval_complex(cf, complex(tr, -h))
    return (hi - lo) / complex(0, 2 * h)


def _check_integer_alpha(cf: ClosedFormSpec):
    if cf.degenerate or cf.c2 == 0:
        return
    if abs(cf.alpha - round(cf.alpha)) < 1e-9:
        raise DomainError(
            f"integer alpha={cf.alpha} hits the unsupported branch of U; "
            "perturb alpha by about 1e-6")


def _to_real(val, where: str) -> float:
    val = complex(val)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise NumericsError(
            f"imaginary residue too large in {where}: {val}")
    return val.real


def closed_form_eval(cf: ClosedFormSpec, t: float) -> float:
    """The real mode trajectory x(t).  The solution of a real ODE is
    real, so a nontrivial imaginary residue means the coefficients or
    branches are wrong and raises instead of being dropped."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    _check_integer_alpha(cf)
    return _to_real(_eval_complex(cf, t), f"closed_form_eval(t={t})")


def closed_form_derivative(cf: ClosedFormSpec, t: float) -> float:
    """dx/dt at real t (central complex step, h = 1e-6)."""
    if t <= 0:
        raise DomainError(f"t must be positive, got {t}")
    _check_integer_alpha(cf)
    return _to_real(_deriv_complex(cf, t), f"closed_form_derivative(t={t})")


def fit_closed_form_ic(lambda_mode: float, alpha: float, beta: float,
                       b: float, gamma_coef: float, t0: float,
                       x0: float, xdot0: float) -> ClosedFormSpec:
    """Fit c1, c2 so the mode solution matches x(t0) and x'(t0).

    The 2x2 system uses basis values and complex-step derivatives at
    t0 with column equilibration; conditioning of the equilibrated
    matrix above 1e10 is an error.  Integer alpha is perturbed by 1e-6
    before fitting (the U branch needs noninteger parameters); the
    induced trajectory error is at the 1e-4 level.
    """
    if not t0 > 0:
        raise DomainError(f"t0 must be positive, got {t0}")
    if not lambda_mode > 0:
        raise ConfigError(f"lambda_mode must be > 0, got {lambda_mode}")
    _, _, _, _, degenerate = _mode_parameters(
        lambda_mode, alpha, beta, b, gamma_coef)
    if not degenerate and abs(alpha - round(alpha)) < 1e-9:
        alpha = alpha + 1e-6
    xi, kappa, sigma, zeta, degenerate = _mode_parameters(
        lambda_mode, alpha, beta, b, gamma_coef)
    base = ClosedFormSpec(lambda_mode=lambda_mode, alpha=alpha, beta=beta,
                          b=b, gamma_coef=gamma_coef, xi=xi, kappa=kappa,
                          sigma=sigma, zeta=zeta, c1=0j, c2=0j)
    if x0 == 0.0 and xdot0 == 0.0:
        return base
    basis1 = replace(base, c1=1.0 + 0j, c2=0j)
    basis2 = replace(base, c1=0j, c2=1.0 + 0j)
    mp_mode = _needs_mp(basis1, t0)
    if mp_mode:
        with _mp.mp.workdps(_MP_DPS):
            u1 = _eval_complex(basis1, _mp.mpc(t0))
            u2 = _eval_complex(basis2, _mp.mpc(t0))
            d1 = _deriv_complex(basis1, _mp.mpc(t0))
            d2 = _deriv_complex(basis2, _mp.mpc(t0))
            s1 = max(abs(u1), abs(d1))
            s2 = max(abs(u2), abs(d2))
            if s1 == 0 or s2 == 0:
                raise ConfigError("degenerate basis at t0 (a column vanished)")
            a11, a21 = u1 / s1, d1 / s1
            a12, a22 = u2 / s2, d2 / s2
            cond = _cond2(complex(a11), complex(a12), complex(a21), complex(a22))
            if cond > _COND_LIMIT:
                raise ConfigError(
                    f"ill-conditioned basis at t0 (cond ~ {cond:.3e})")
            det = a11 * a22 - a12 * a21
            ch1 = (x0 * a22 - a12 * xdot0) / det
            ch2 = (a11 * xdot0 - a21 * x0) / det
            c1 = ch1 / s1
            c2 = ch2 / s2
        return replace(base, c1=_maybe_downcast(c1), c2=_maybe_downcast(c2))
    u1 = _eval_complex(basis1, complex(t0))
    u2 = _eval_complex(basis2, complex(t0))
    d1 = _deriv_complex(basis1, complex(t0))
    d2 = _deriv_complex(basis2, complex(t0))
    s1 = max(abs(u1), abs(d1))
    s2 = max(abs(u2), abs(d2))
    if s1 == 0 or s2 == 0:
        raise ConfigError("degenerate basis at t0 (a column vanished)")
    a11, a21 = u1 / s1, d1 / s1
    a12, a22 = u2 / s2, d2 / s2
    cond = _cond2(a11, a12, a21, a22)
    if cond > _COND_LIMIT:
        raise ConfigError(f"ill-conditioned basis at t0 (cond ~ {cond:.3e})")
    det = a11 * a22 - a12 * a21
    ch1 = (x0 * a22 - a12 * xdot0) / det
    ch2 = (a11 * xdot0 - a21 * x0) / det
    return replace(base, c1=_maybe_downcast(ch1 / s1),
                   c2=_maybe_downcast(ch2 / s2))


def _cond2(a11, a12, a21, a22) -> float:
    m = np.array([[a11, a12], [a21, a22]], dtype=complex)
    try:
        return float(np.linalg.cond(m))
    except np.linalg.LinAlgError:
        return math.inf


def _maybe_downcast(c):
    mag = abs(c)
    if mag == 0:
        return 0j
    if 1e-280 < mag < 1e280:
        return complex(c)
    return c


def asymptotic_rate(lambda_mode: float, alpha: float, beta: float,
                    b: float) -> dict:
    """Dominant large-t decay of |x(t)| for the gamma_coef = 0 mode:
    |x(t)| ~ t^(-poly_power) exp(-exp_rate * t).

    Overdamped branch (beta^2 lam^2 > 4 b lam): the slow solution
    carries exp_rate = (beta*lam - xi)/2, which tends to b/beta for
    large beta*lam, with poly_power alpha/2 - |kappa|.  Underdamped:
    exp_rate = beta*lam/2, poly alpha/2.  Critically damped: the same
    exponential with poly (2 alpha - 1)/4 (times a subexponential
    exp(|zeta| sqrt(t)) correction not reported here).
    """
    if lambda_mode <= 0 or beta < 0 or b < 0:
        raise ConfigError("need lambda_mode > 0, beta >= 0, b >= 0")
    lam = lambda_mode
    disc = (beta * lam) ** 2 - 4.0 * b * lam
    scale = _disc_scale(lam, beta, b)
    if abs(disc) <= 1e-12 * scale:
        return {"exp_rate": beta * lam / 2.0, "poly_power": (2.0 * alpha - 1.0) / 4.0}
    if disc < 0:
        return {"exp_rate": beta * lam / 2.0, "poly_power": alpha / 2.0}
    xi = math.sqrt(disc)
    kappa = -alpha * beta * lam / (2.0 * xi)
    return {"exp_rate": (beta * lam - xi) / 2.0,
            "poly_power": alpha / 2.0 - abs(kappa)}


def rescaled_change_of_variable(beta_exp: float, c: float, alpha: float) -> dict:
    """Map the power-law system beta(t) = t^beta_exp, b(t) = c t^(beta_exp - 1)
    to constant-beta form via tau = t^(1 + beta_exp).

    Returns the tau-system bundle: alpha' = (alpha + p)/(1 + p) with
    p = beta_exp, effective beta' = 1 on the scaled eigenvalue
    lam' = lam/(1 + p) (the lambda_scale entry), b' = 0,
    gamma' = c/(1 + p), and for reference
    kappa' = (2c - alpha - p)/(2(1 + p)), sigma' = (alpha - 1)/(2(1 + p)).
    Evaluation maps back through t = tau^(1/(1+p)).
    """
    if beta_exp < 0:
        raise ConfigError(f"beta_exp must be >= 0, got {beta_exp}")
    if not c > 0:
        raise ConfigError(f"c must be > 0, got {c}")
    p = beta_exp
    op = 1.0 + p
    return {
        "alpha": (alpha + p) / op,
        "beta": 1.0,
        "b": 0.0,
        "gamma_coef": c / op,
        "lambda_scale": 1.0 / op,
        "kappa": (2.0 * c - alpha - p) / (2.0 * op),
        "sigma": (alpha - 1.0) / (2.0 * op),
        "tau_exponent": op,
    }


def _kernel_mode(alpha, t0, w0, wd0, t):
    """lam = 0 decouples into v' = -(alpha/t) v."""
    if alpha == 1.0:
        w = w0 + wd0 * t0 * math.log(t / t0)
    else:
        w = w0 + wd0 * t0 / (alpha - 1.0) * (1.0 - (t0 / t) ** (alpha - 1.0))
    return w, wd0 * (t0 / t) ** alpha


def closed_form_trajectory(problem, alpha: float, t0: float, x0, v0,
                           times: Sequence[float], beta: float = 0.0,
                           b: float = 1.0, gamma_coef: float = 0.0,
                           family2: Optional[tuple] = None,
                           energy_spec: Optional[DampedSystemSpec] = None,
                           with_velocity: bool = True
                           ) -> List[TrajectorySample]:
    """Exact trajectory of the damped system on a quadratic problem.

    Decomposes (x0, v0) into eigenmodes, fits each mode's closed form
    and recombines.  family2 = (beta_exp, c) selects the power-law
    coefficients beta(t) = t^beta_exp, b(t) = c t^(beta_exp-1) through
    the tau-substitution; otherwise beta, b, gamma_coef give the
    constant-beta mode b(t) = b + gamma_coef/t.

    Zero eigenvalues integrate in closed form directly.  Energies are
    attached when energy_spec (a matching DampedSystemSpec) is given.
    velocities come from the complex-step derivative; with_velocity
    False skips them (NaN) and roughly halves the work.
    """
    eigvals = getattr(problem, "eigenvalues", None)
    basis = getattr(problem, "basis", None)
    if eigvals is None or basis is None:
        raise ConfigError("closed_form_trajectory needs a quadratic problem "
                          "with an eigendecomposition")
    shift = problem.shift if problem.shift is not None else np.zeros(len(eigvals))
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    times = np.asarray(times, dtype=float)
    if np.any(times < t0 - 1e-12):
        raise ConfigError("times must start at or after t0")
    w0 = basis.T @ (x0 - shift)
    wd0 = basis.T @ v0
    lam_max = float(np.max(eigvals)) if len(eigvals) else 0.0
    n = len(eigvals)
    W = np.zeros((n, times.size))
    Wd = np.full((n, times.size), math.nan)
    for i, lam in enumerate(eigvals):
        if w0[i] == 0.0 and wd0[i] == 0.0:
            W[i, :] = 0.0
            Wd[i, :] = 0.0
            continue
        if lam <= 1e-14 * max(1.0, lam_max):
            for j, t in enumerate(times):
                W[i, j], Wd[i, j] = _kernel_mode(alpha, t0, w0[i], wd0[i], t)
            continue
        if family2 is not None:
            p, c = family2
            alpha_used = alpha
            mapped = rescaled_change_of_variable(p, c, alpha_used)
            if abs(mapped["alpha"] - round(mapped["alpha"])) < 1e-9:
                alpha_used = alpha + 1e-6
                mapped = rescaled_change_of_variable(p, c, alpha_used)
            op = 1.0 + p
            cf = fit_closed_form_ic(
                lam * mapped["lambda_scale"], mapped["alpha"], mapped["beta"],
                mapped["b"], mapped["gamma_coef"], t0 ** op,
                float(w0[i]), float(wd0[i]) / (op * t0 ** p))
            for j, t in enumerate(times):
                tau = t ** op
                W[i, j] = closed_form_eval(cf, tau)
                if with_velocity:
                    Wd[i, j] = closed_form_derivative(cf, tau) * op * t ** p
        else:
            cf = fit_closed_form_ic(lam, alpha, beta, b, gamma_coef, t0,
                                    float(w0[i]), float(wd0[i]))
            for j, t in enumerate(times):
                W[i, j] = closed_form_eval(cf, t)
                if with_velocity:
                    Wd[i, j] = closed_form_derivative(cf, t)
    out: List[TrajectorySample] = []
    opt_value = getattr(problem, "opt_value", None)
    for j, t in enumerate(times):
        x = shift + basis @ W[:, j]
        v = basis @ Wd[:, j] if with_velocity else np.full(n, math.nan)
        fx = float(problem.value(x))
        gap = fx - opt_value if opt_value is not None else math.nan
        g = problem.gradient(x)
        sample = TrajectorySample(t=float(t), x=x, v=v, f_gap=gap,
                                  grad_norm=float(np.linalg.norm(g)),
                                  energy=math.nan)
        if energy_spec is not None and with_velocity and \
                getattr(problem, "opt_point", None) is not None:
            sample = TrajectorySample(
                t=sample.t, x=x, v=v, f_gap=gap, grad_norm=sample.grad_norm,
                energy=energy_continuous(energy_spec, sample, problem.opt_point))
        out.append(sample)
    return out
