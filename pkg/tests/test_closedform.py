"""Closed-form mode solutions checked against independent references.

The oracles here are deliberately outside the closed-form code paths:
the adaptive integrator at tight tolerance, fourth-order finite
differences plugged into the scalar mode equation, and log-linear
regression of the evaluated trajectory for the asymptotic rates.
"""
import math
from dataclasses import replace

import numpy as np
import pytest

from hessdamp import (
    ConfigError,
    DampedSystemSpec,
    DomainError,
    NumericsError,
    asymptotic_rate,
    closed_form_derivative,
    closed_form_eval,
    closed_form_trajectory,
    fit_closed_form_ic,
    integrate,
    make_quadratic,
    rescaled_change_of_variable,
)
from hessdamp.closedform import ClosedFormSpec
from hessdamp.dynamics import energy_continuous


def _const_spec(alpha, eigenvalues, b_fn=None, b_deriv=None):
    problem = make_quadratic(eigenvalues)
    return DampedSystemSpec(
        alpha=alpha,
        beta_fn=lambda t: 1.0,
        b_fn=b_fn if b_fn is not None else (lambda t: 1.0),
        problem=problem,
        t0=1.0,
        beta_deriv=lambda t: 0.0,
        b_deriv=b_deriv if b_deriv is not None else (lambda t: 0.0),
    ), problem


def _fd_residual(cf, t, h=1e-3):
    """Scalar mode equation residual from a fourth-order stencil."""
    f = [closed_form_eval(cf, t + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    r = (d2 + (cf.alpha / t + cf.beta * cf.lambda_mode) * d1
         + cf.lambda_mode * (cf.b + cf.gamma_coef / t) * f[2])
    return abs(r) / max(1.0, abs(f[2]))


def test_zero_ic_gives_zero_solution():
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0)
    assert cf.c1 == 0j and cf.c2 == 0j
    for t in (1.0, 2.5, 7.3, 40.0):
        assert closed_form_eval(cf, t) == 0.0


def test_fit_round_trip_value_and_slope():
    cases = [
        (1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0),
        (1.0, 3.1, 1.0, 0.1, 0.0, 2.0, -0.4, 0.7),
        (1.0, 3.1, 0.0, 1.0, 0.0, 1.0, 0.3, -1.2),
        (1.0, 3.1, 0.5, 1.0, 0.7, 1.5, 1.0, -0.5),
        (4.0, 5.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0),   # discriminant zero
        (4.0, 3.1, 1.0, 1.0, 3.0, 1.0, 0.5, -0.2),  # zero disc, real zeta
    ]
    for lam, alpha, beta, b, gamma, t0, x0, xd0 in cases:
        cf = fit_closed_form_ic(lam, alpha, beta, b, gamma, t0, x0, xd0)
        assert abs(closed_form_eval(cf, t0) - x0) <= 1e-8
        assert abs(closed_form_derivative(cf, t0) - xd0) <= 1e-8


def test_matches_integrator_unit_mode():
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    spec, _ = _const_spec(3.1, [1.0])
    ts = np.linspace(1.0, 20.0, 100)
    out = integrate(spec, [1.0], [0.0], T=20.0, tol=1e-10, sample_times=ts)
    dev = max(abs(closed_form_eval(cf, s.t) - s.x[0]) for s in out)
    assert dev <= 1e-5


def test_matches_integrator_stiff_mode():
    # lam = 1000 forces the extended-precision Kummer evaluation; the
    # deviation is measured against the trajectory's own scale
    cf = fit_closed_form_ic(1000.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    spec, _ = _const_spec(3.1, [1000.0])
    ts = np.linspace(1.0, 10.0, 60)
    out = integrate(spec, [1.0], [0.0], T=10.0, tol=1e-10, sample_times=ts)
    scale = max(abs(s.x[0]) for s in out)
    dev = max(abs(closed_form_eval(cf, s.t) - s.x[0]) for s in out)
    assert dev / scale <= 1e-4


def test_ode_residual_fourth_order_fd():
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    worst = max(_fd_residual(cf, t) for t in np.linspace(1.1, 19.9, 100))
    assert worst <= 1e-6
    # secondary parameter sets at a coarser sampling (the evaluations
    # run in extended precision over most of this range)
    cases = [
        (1.0, 3.1, 1.0, 0.1, 0.0, 1.0, 0.0),    # overdamped
        (1.0, 3.1, 0.0, 1.0, 0.0, 1.0, 0.0),    # undamped
        (1.0, 3.1, 0.5, 1.0, 0.7, 1.0, -0.5),   # 1/t coefficient active
    ]
    for lam, alpha, beta, b, gamma, x0, xd0 in cases:
        cf = fit_closed_form_ic(lam, alpha, beta, b, gamma, 1.0, x0, xd0)
        worst = max(_fd_residual(cf, t) for t in np.linspace(1.1, 19.9, 25))
        assert worst <= 1e-6


def test_degenerate_branch_matches_integrator():
    # beta^2 lam^2 = 4 b lam exactly: Bessel basis instead of Kummer
    cf = fit_closed_form_ic(4.0, 5.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    assert cf.degenerate
    spec, _ = _const_spec(5.0, [4.0])
    ts = np.linspace(1.0, 12.0, 80)
    out = integrate(spec, [1.0], [0.0], T=12.0, tol=1e-10, sample_times=ts)
    dev = max(abs(closed_form_eval(cf, s.t) - s.x[0]) for s in out)
    assert dev <= 1e-5
    worst = max(_fd_residual(cf, t) for t in np.linspace(1.1, 11.9, 50))
    assert worst <= 1e-6


def test_degenerate_real_zeta_matches_integrator():
    # gamma > alpha*beta/2 flips the Bessel argument onto the real axis
    cf = fit_closed_form_ic(4.0, 3.1, 1.0, 1.0, 3.0, 1.0, 0.5, -0.2)
    assert cf.degenerate and abs(cf.zeta.imag) == 0.0
    spec, _ = _const_spec(3.1, [4.0], b_fn=lambda t: 1.0 + 3.0 / t,
                          b_deriv=lambda t: -3.0 / (t * t))
    ts = np.linspace(1.0, 12.0, 80)
    out = integrate(spec, [0.5], [-0.2], T=12.0, tol=1e-10, sample_times=ts)
    dev = max(abs(closed_form_eval(cf, s.t) - s.x[0]) for s in out)
    assert dev <= 1e-5
    worst = max(_fd_residual(cf, t) for t in np.linspace(1.1, 11.9, 50))
    assert worst <= 1e-6


def test_integer_alpha_is_perturbed_before_fitting():
    cf = fit_closed_form_ic(1.0, 5.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    assert cf.alpha == pytest.approx(5.0 + 1e-6, abs=1e-12)
    spec, _ = _const_spec(5.0, [1.0])
    ts = np.linspace(1.0, 12.0, 60)
    out = integrate(spec, [1.0], [0.0], T=12.0, tol=1e-10, sample_times=ts)
    dev = max(abs(closed_form_eval(cf, s.t) - s.x[0]) for s in out)
    assert dev <= 1e-5


def test_integer_alpha_spec_rejected_directly():
    cf = fit_closed_form_ic(1.0, 5.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    bad = replace(cf, alpha=5.0)
    with pytest.raises(DomainError):
        closed_form_eval(bad, 2.0)
    with pytest.raises(DomainError):
        closed_form_derivative(bad, 2.0)


def test_asymptotic_rate_critical_and_undamped():
    r = asymptotic_rate(4.0, 5.0, 1.0, 1.0)
    assert r["exp_rate"] == pytest.approx(2.0, abs=1e-12)
    assert r["poly_power"] == pytest.approx(2.25, abs=1e-12)
    r0 = asymptotic_rate(1.0, 3.1, 0.0, 1.0)
    assert r0["exp_rate"] == 0.0
    assert r0["poly_power"] == pytest.approx(1.55, abs=1e-12)


def test_asymptotic_rate_overdamped_regression():
    # slow-root decay (beta*lam - xi)/2; checked against a log-linear
    # fit of the evaluated trajectory on t in [20, 40]
    r = asymptotic_rate(1.0, 3.1, 1.0, 0.1)
    xi = math.sqrt(1.0 - 0.4)
    assert r["exp_rate"] == pytest.approx((1.0 - xi) / 2.0, abs=1e-14)
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 0.1, 0.0, 1.0, 1.0, 0.0)
    ts = np.linspace(20.0, 40.0, 200)
    logs = np.array([math.log(abs(closed_form_eval(cf, t))) for t in ts])
    # remove the known polynomial factor before reading off the slope
    slope = np.polyfit(ts, logs + r["poly_power"] * np.log(ts), 1)[0]
    assert abs(-slope - r["exp_rate"]) <= 0.1 * r["exp_rate"]

    # a stiffer mode where the polynomial factor is negligible and the
    # raw slope already matches
    r4 = asymptotic_rate(4.0, 3.1, 1.0, 0.1)
    cf4 = fit_closed_form_ic(4.0, 3.1, 1.0, 0.1, 0.0, 1.0, 1.0, 0.0)
    ts4 = np.linspace(20.0, 40.0, 80)
    logs4 = [math.log(abs(closed_form_eval(cf4, t))) for t in ts4]
    slope4 = np.polyfit(ts4, logs4, 1)[0]
    assert abs(-slope4 - r4["exp_rate"]) <= 0.1 * r4["exp_rate"]


def test_asymptotic_rate_validation():
    with pytest.raises(ConfigError):
        asymptotic_rate(0.0, 3.1, 1.0, 1.0)
    with pytest.raises(ConfigError):
        asymptotic_rate(1.0, 3.1, -0.5, 1.0)
    with pytest.raises(ConfigError):
        asymptotic_rate(1.0, 3.1, 1.0, -1.0)


def test_rescaled_change_of_variable_identity_exponent():
    m = rescaled_change_of_variable(0.0, 0.7, 3.1)
    assert m["alpha"] == pytest.approx(3.1)
    assert m["beta"] == 1.0
    assert m["b"] == 0.0
    assert m["gamma_coef"] == pytest.approx(0.7)
    assert m["lambda_scale"] == 1.0
    assert m["kappa"] == pytest.approx(0.7 - 3.1 / 2.0)
    assert m["sigma"] == pytest.approx((3.1 - 1.0) / 2.0)
    assert m["tau_exponent"] == 1.0


def test_rescaled_change_of_variable_cubic_growth():
    m = rescaled_change_of_variable(3.0, 5.0, 5.0)
    assert m["alpha"] == pytest.approx(2.0)
    assert m["lambda_scale"] == pytest.approx(0.25)
    assert m["gamma_coef"] == pytest.approx(1.25)
    assert m["kappa"] == pytest.approx(0.25)
    assert m["sigma"] == pytest.approx(0.5)
    assert m["tau_exponent"] == pytest.approx(4.0)


def test_rescaled_change_of_variable_validation():
    with pytest.raises(ConfigError):
        rescaled_change_of_variable(-0.5, 1.0, 3.1)
    with pytest.raises(ConfigError):
        rescaled_change_of_variable(1.0, 0.0, 3.1)


def test_power_law_family_matches_integrator():
    # beta(t) = t^3, b(t) = 5 t^2 on a rank-deficient quadratic: the
    # tau = t^4 substitution handles the lam = 2 mode, the kernel
    # direction integrates directly
    s = 1.0 / math.sqrt(2.0)
    problem = make_quadratic([2.0, 0.0], basis=[[s, s], [s, -s]])
    ts = np.linspace(1.0, 5.0, 40)
    traj = closed_form_trajectory(problem, alpha=5.0, t0=1.0,
                                  x0=[0.7, -0.3], v0=[0.1, 0.2],
                                  times=ts, family2=(3.0, 5.0))
    spec = DampedSystemSpec(alpha=5.0,
                            beta_fn=lambda t: t ** 3,
                            b_fn=lambda t: 5.0 * t * t,
                            problem=problem, t0=1.0,
                            beta_deriv=lambda t: 3.0 * t * t,
                            b_deriv=lambda t: 10.0 * t)
    out = integrate(spec, [0.7, -0.3], [0.1, 0.2], T=5.0, tol=1e-10,
                    sample_times=ts)
    dev = max(float(np.max(np.abs(a.x - b.x))) for a, b in zip(traj, out))
    assert dev <= 1e-4
    kernel = np.array([1.0, -1.0]) * s
    dev_k = max(abs(float(a.x @ kernel) - float(b.x @ kernel))
                for a, b in zip(traj, out))
    assert dev_k <= 1e-8
    # the kernel component genuinely moves before settling
    drift = abs(float(traj[-1].x @ kernel) - float(traj[0].x @ kernel))
    assert drift > 0.01


def test_trajectory_two_dim_fields_and_energy():
    problem = make_quadratic([1.0, 4.0])
    spec = DampedSystemSpec(alpha=3.1, beta_fn=lambda t: 1.0,
                            b_fn=lambda t: 1.0, problem=problem, t0=1.0,
                            beta_deriv=lambda t: 0.0,
                            b_deriv=lambda t: 0.0)
    ts = np.linspace(1.0, 12.0, 60)
    traj = closed_form_trajectory(problem, alpha=3.1, t0=1.0,
                                  x0=[1.0, 0.5], v0=[0.0, -0.2],
                                  times=ts, beta=1.0, b=1.0,
                                  energy_spec=spec)
    out = integrate(spec, [1.0, 0.5], [0.0, -0.2], T=12.0, tol=1e-10,
                    sample_times=ts)
    dev_x = max(float(np.max(np.abs(a.x - b.x))) for a, b in zip(traj, out))
    dev_v = max(float(np.max(np.abs(a.v - b.v))) for a, b in zip(traj, out))
    assert dev_x <= 1e-8
    assert dev_v <= 1e-7
    for sample in traj[::20]:
        assert sample.f_gap == pytest.approx(problem.value(sample.x), abs=1e-12)
        ref = energy_continuous(spec, sample, problem.opt_point)
        assert sample.energy == pytest.approx(ref, rel=1e-12)
    # at t0 the weight b - beta' - beta/t vanishes, so the energy is the
    # pure quadratic term |(alpha-1)(x - x*) + t(v + beta grad)|^2 / 2
    assert traj[0].energy == pytest.approx(8.86625, abs=1e-9)
    tail = [s.energy for s in traj[30:]]
    assert all(b <= a + 1e-8 for a, b in zip(tail, tail[1:]))


def test_trajectory_without_velocity():
    problem = make_quadratic([1.0, 4.0])
    ts = np.linspace(1.0, 6.0, 20)
    traj = closed_form_trajectory(problem, alpha=3.1, t0=1.0,
                                  x0=[1.0, 0.5], v0=[0.0, -0.2],
                                  times=ts, beta=1.0, b=1.0,
                                  with_velocity=False)
    full = closed_form_trajectory(problem, alpha=3.1, t0=1.0,
                                  x0=[1.0, 0.5], v0=[0.0, -0.2],
                                  times=ts, beta=1.0, b=1.0)
    for a, b in zip(traj, full):
        assert np.all(np.isnan(a.v))
        assert np.allclose(a.x, b.x, atol=1e-14)
        assert math.isnan(a.energy)


def test_trajectory_validation():
    problem = make_quadratic([1.0])
    with pytest.raises(ConfigError):
        closed_form_trajectory(object(), 3.1, 1.0, [1.0], [0.0], [1.0, 2.0])
    with pytest.raises(ConfigError):
        closed_form_trajectory(problem, 3.1, 2.0, [1.0], [0.0], [1.0, 3.0])


def test_mangled_coefficients_raise_numerics_error():
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    bad = replace(cf, c2=cf.c2 * 1j)
    with pytest.raises(NumericsError):
        closed_form_eval(bad, 3.0)


def test_spec_construction_guards():
    with pytest.raises(ConfigError):
        # xi = 0 contradicts a nonzero discriminant
        ClosedFormSpec(lambda_mode=1.0, alpha=3.1, beta=1.0, b=1.0,
                       gamma_coef=0.0, xi=0j, kappa=0j, sigma=1.05,
                       zeta=1.0 + 0j, c1=1 + 0j, c2=0j)
    with pytest.raises(ConfigError):
        fit_closed_form_ic(-1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, -1.0, 1.0, 0.0)
    cf = fit_closed_form_ic(1.0, 3.1, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        closed_form_eval(cf, 0.0)
    with pytest.raises(DomainError):
        closed_form_derivative(cf, -2.0)
