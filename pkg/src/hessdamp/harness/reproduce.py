"""Turnkey reproduction of the pinned reference experiments.

Each target rebuilds its problem from pinned parameters and seeds, runs
the configured trajectories or iterations, and writes CSV traces, an
SVG overlay, and a JSON report into the output directory.  Everything
is deterministic; running a target twice produces identical bytes.

Targets:

* ``fig1``: the ill-conditioned planar quadratic under inertial
  dynamics with and without gradient-flow damping, integrated on
  t in [1, 30]; the report compares oscillation counts.
* ``fig2-case4``: four coefficient regimes of the damped system on a
  degenerate planar quadratic, with growth certificates and fitted
  decay slopes.
* ``rls-l1``, ``rls-group``, ``rls-tv``, ``rls-nuclear``: the inertial
  gradient scheme against its beta = 0 counterpart on seeded
  regularized least squares instances, run on the smooth metric
  surrogate; the report carries fitted slopes, oscillation counts, and
  the forward-backward reference optimum.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from typing import Dict, List, Optional

import numpy as np

from ..algorithms import IGAHDConfig, fista_run, igahd_run
from ..closedform import closed_form_trajectory
from ..dynamics import (
    DampedSystemSpec,
    TrajectorySample,
    check_growth_continuous,
    default_grid,
    energy_continuous,
    integrate,
    w_and_delta,
)
from ..errors import ConfigError, ConvergenceError
from ..problems import make_quadratic
from .instances import (
    make_group_lasso,
    make_lasso,
    make_nuclear,
    make_tv_denoise,
    metric_problem,
    reference_optimum,
)
from .io import emit_csv, emit_svg
from .ratefit import (
    apply_noise_floor,
    noise_floor,
    oscillation_count,
    peak_subseries,
    rate_fit,
)

TARGETS = ("fig1", "fig2-case4", "rls-l1", "rls-group", "rls-tv", "rls-nuclear")

# Pinned instance seeds; the l1 seed is the one whose oscillation-count
# comparison is asserted strictly.
RLS_SEEDS = {"l1": 1001, "group": 1006, "tv": 1003, "nuclear": 1013}

_REFERENCE_TOL = 1e-12
_REFERENCE_LABEL = "reference optimum, tol 1e-12"

__all__ = ["reproduce", "TARGETS", "RLS_SEEDS",
           "reproduce_fig1", "reproduce_fig2_case4", "reproduce_rls"]


def resolve_outdir(outdir: Optional[str] = None) -> str:
    """Explicit argument, then the HESSDAMP_OUT variable, then cwd."""
    out = outdir or os.environ.get("HESSDAMP_OUT") or "."
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _write_report(report: dict, path: str) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def _report_of_fit(fit) -> dict:
    return dataclasses.asdict(fit)


def fit_decay_slope(pairs, window):
    """Log-log slope over a window, following the oscillation envelope.

    Oscillating gaps dip far below their envelope between bursts, which
    drags a direct log fit down; when enough strict local maxima fall
    inside the window the fit uses those instead.
    """
    peaks = peak_subseries(pairs)
    in_window = [p for p in peaks if window[0] <= p[0] <= window[1]]
    if len(in_window) >= 10:
        return rate_fit(peaks, window=window, mode="poly")
    return rate_fit(pairs, window=window, mode="poly")


def _start_energy(spec: DampedSystemSpec, x0, v0) -> float:
    """Lyapunov energy at t0, from the initial conditions alone."""
    problem = spec.problem
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    g = problem.gradient(x0)
    s0 = TrajectorySample(
        t=spec.t0, x=x0, v=v0,
        f_gap=float(problem.value(x0)) - problem.opt_value,
        grad_norm=float(np.linalg.norm(g)), energy=math.nan)
    return energy_continuous(spec, s0, problem.opt_point)


def _certify(spec: DampedSystemSpec, samples: List[TrajectorySample],
             e_start: float) -> dict:
    """Growth conditions and the energy bound along a trajectory."""
    g2 = True
    g3 = True
    worst_ratio = 0.0
    for s in samples:
        checks = check_growth_continuous(spec, s.t)
        g2 = g2 and checks["G2"]
        g3 = g3 and checks["G3"]
        _, delta = w_and_delta(spec, s.t)
        if math.isfinite(s.f_gap) and e_start > 0.0:
            worst_ratio = max(worst_ratio, delta * s.f_gap / e_start)
    return {"G2": g2, "G3": g3, "energy_start": e_start,
            "max_delta_gap_over_energy": worst_ratio}


# ---------------------------------------------------------------------------
# fig1: damped vs undamped inertial dynamics on a stiff quadratic

FIG1_ALPHA = 3.1


def reproduce_fig1(outdir: Optional[str] = None) -> dict:
    out = resolve_outdir(outdir)
    problem = make_quadratic([1.0, 1000.0])
    x0 = np.array([1.0, 1.0])
    v0 = np.zeros(2)
    times = np.linspace(1.0, 30.0, 2901)
    runs = {}
    for label, beta in (("avd", 0.0), ("din-avd", 1.0)):
        spec = DampedSystemSpec(
            alpha=FIG1_ALPHA,
            beta_fn=(lambda t, b=beta: b),
            b_fn=lambda t: 1.0,
            problem=problem,
            t0=1.0,
            beta_deriv=lambda t: 0.0,
            b_deriv=lambda t: 0.0,
        )
        samples = integrate(spec, x0, v0, T=30.0, tol=1e-9,
                            sample_times=times)
        emit_csv(samples, os.path.join(out, f"fig1-{label}.csv"))
        runs[label] = samples
    emit_svg(
        [(label, [s.t for s in samples], [s.f_gap for s in samples])
         for label, samples in runs.items()],
        os.path.join(out, "fig1.svg"),
        xscale="linear", yscale="log",
        title="inertial dynamics on a (1, 1000) quadratic",
        xlabel="t", ylabel="objective gap",
    )
    counts = {label: oscillation_count([s.f_gap for s in samples])
              for label, samples in runs.items()}
    report = {
        "target": "fig1",
        "alpha": FIG1_ALPHA,
        "eigenvalues": [1.0, 1000.0],
        "span": [1.0, 30.0],
        "sample_step": 0.01,
        "oscillation_count": counts,
        "damping_reduces_oscillations": counts["din-avd"] < counts["avd"],
        "files": ["fig1-avd.csv", "fig1-din-avd.csv", "fig1.svg"],
    }
    _write_report(report, os.path.join(out, "fig1-report.json"))
    return report


# ---------------------------------------------------------------------------
# fig2-case4: the four coefficient regimes on a degenerate quadratic

FIG2_ALPHA = 5.0
_FIG2_T_END = 100.0
_ROT = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def _fig2_problem():
    # f(x) = (x1 + x2)^2 / 2: eigenvalues 2 and 0 in the rotated basis.
    return make_quadratic([2.0, 0.0], basis=_ROT)


def _fig2_cases(problem) -> Dict[str, dict]:
    return {
        "case1": {
            "label": "beta=1, b=1",
            "t0": 2.0,
            "route": "closed-form",
            "kwargs": {"beta": 1.0, "b": 1.0, "gamma_coef": 0.0},
            "spec": DampedSystemSpec(
                alpha=FIG2_ALPHA, beta_fn=lambda t: 1.0, b_fn=lambda t: 1.0,
                problem=problem, t0=2.0,
                beta_deriv=lambda t: 0.0, b_deriv=lambda t: 0.0),
            "slope_bound": -1.9,
        },
        "case2": {
            "label": "beta=1, b=1+1/t",
            "t0": 1.0,
            "route": "closed-form",
            "kwargs": {"beta": 1.0, "b": 1.0, "gamma_coef": 1.0},
            "spec": DampedSystemSpec(
                alpha=FIG2_ALPHA, beta_fn=lambda t: 1.0,
                b_fn=lambda t: 1.0 + 1.0 / t,
                problem=problem, t0=1.0,
                beta_deriv=lambda t: 0.0, b_deriv=lambda t: -1.0 / t ** 2),
            "slope_bound": -1.9,
        },
        "case3": {
            "label": "beta=0, b=t^2",
            "t0": 1.0,
            "route": "integrate",
            "spec": DampedSystemSpec(
                alpha=FIG2_ALPHA, beta_fn=lambda t: 0.0,
                b_fn=lambda t: t * t,
                problem=problem, t0=1.0,
                beta_deriv=lambda t: 0.0, b_deriv=lambda t: 2.0 * t),
            "slope_bound": -3.5,
        },
        "case4": {
            "label": "beta=t^3, b=5t^2",
            "t0": 1.0,
            "route": "closed-form",
            "kwargs": {"family2": (3.0, 5.0)},
            "spec": DampedSystemSpec(
                alpha=FIG2_ALPHA, beta_fn=lambda t: t ** 3,
                b_fn=lambda t: 5.0 * t * t,
                problem=problem, t0=1.0,
                beta_deriv=lambda t: 3.0 * t * t, b_deriv=lambda t: 10.0 * t),
            "slope_bound": -3.5,
        },
    }


def run_fig2_case(problem, case: dict) -> List[TrajectorySample]:
    """One coefficient regime from x(t0) = (1, 1), zero velocity."""
    x0 = np.array([1.0, 1.0])
    v0 = np.zeros(2)
    t0 = case["spec"].t0
    if case["route"] == "closed-form":
        times = default_grid(t0, _FIG2_T_END)
        return closed_form_trajectory(
            problem, FIG2_ALPHA, t0, x0, v0, times,
            with_velocity=False, **case["kwargs"])
    # The undamped oscillatory case needs the frequency resolved: the
    # phase grows like t^2, so a uniform step that resolves the final
    # period is used for sampling the dense integrator output.
    times = np.arange(t0, _FIG2_T_END + 1e-9, 0.005)
    return integrate(case["spec"], x0, v0, T=_FIG2_T_END, tol=1e-8,
                     sample_times=times)


def reproduce_fig2_case4(outdir: Optional[str] = None) -> dict:
    out = resolve_outdir(outdir)
    problem = _fig2_problem()
    cases = _fig2_cases(problem)
    x0 = np.array([1.0, 1.0])
    v0 = np.zeros(2)
    case_reports = {}
    curves = []
    files = []
    for name, case in cases.items():
        samples = run_fig2_case(problem, case)
        fname = f"fig2-{name}.csv"
        emit_csv(samples, os.path.join(out, fname))
        files.append(fname)
        cert = _certify(case["spec"], samples,
                        _start_energy(case["spec"], x0, v0))
        fit = fit_decay_slope([(s.t, s.f_gap) for s in samples],
                              window=(10.0, _FIG2_T_END))
        case_reports[name] = {
            "label": case["label"],
            "route": case["route"],
            "t0": case["spec"].t0,
            "certificates": cert,
            "fit": _report_of_fit(fit),
            "slope_bound": case["slope_bound"],
            "slope_ok": fit.slope <= case["slope_bound"],
        }
        curves.append((case["label"],
                       [s.t for s in samples], [s.f_gap for s in samples]))
    emit_svg(curves, os.path.join(out, "fig2.svg"),
             xscale="log", yscale="log",
             title="damped dynamics, four coefficient regimes (alpha=5)",
             xlabel="t", ylabel="objective gap")
    files.append("fig2.svg")
    report = {"target": "fig2-case4", "alpha": FIG2_ALPHA,
              "cases": case_reports, "files": files}
    _write_report(report, os.path.join(out, "fig2-report.json"))
    return report


# ---------------------------------------------------------------------------
# rls-*: inertial gradient scheme vs its beta = 0 twin on RLS instances

RLS_ALPHA = 3.0
RLS_ITERATIONS = 2000
_RLS_FIT_WINDOW = (50.0, 2000.0)
_RLS_OSC_HORIZON = 500


def _rls_instance(tag: str):
    seed = RLS_SEEDS[tag]
    if tag == "l1":
        return make_lasso(m=100, n=256, sparsity=10, seed=seed)
    if tag == "group":
        return make_group_lasso(m=100, n=256, group_size=8, sparsity=4,
                                seed=seed)
    if tag == "tv":
        return make_tv_denoise(n=128, pieces=5, seed=seed)
    if tag == "nuclear":
        return make_nuclear(N=16, rank=3, seed=seed)
    raise ConfigError(f"unknown rls tag {tag!r}")


def reproduce_rls(tag: str, outdir: Optional[str] = None) -> dict:
    out = resolve_outdir(outdir)
    instance = _rls_instance(tag)
    converged = True
    try:
        ref = reference_optimum(instance, tol=_REFERENCE_TOL)
    except ConvergenceError as exc:
        ref = exc.best
        converged = False
    surrogate = metric_problem(instance, opt_value=ref.value)
    s = instance.s
    x0 = np.zeros(instance.A.shape[1])
    cfg = IGAHDConfig(alpha=RLS_ALPHA, beta=0.5 * math.sqrt(s), s=s,
                      max_iter=RLS_ITERATIONS)
    traces = {
        "igahd": igahd_run(surrogate, cfg, x0),
        "fista": fista_run(surrogate, RLS_ALPHA, s, x0,
                           max_iter=RLS_ITERATIONS),
    }
    files = []
    algo_reports = {}
    curves = []
    floor = noise_floor(ref.value)
    for label, trace in traces.items():
        fname = f"rls-{tag}-{label}.csv"
        emit_csv(trace, os.path.join(out, fname))
        files.append(fname)
        # The gap is measured against a finite reference, so it bottoms
        # out at round-off; fits and counts see the clamped values.
        pairs = apply_noise_floor([(r.k, r.f_gap) for r in trace],
                                  ref.value)
        fit = rate_fit(pairs, window=_RLS_FIT_WINDOW, mode="poly")
        osc = oscillation_count(
            [v for k, v in pairs if k <= _RLS_OSC_HORIZON])
        algo_reports[label] = {
            "fit": _report_of_fit(fit),
            "oscillation_count_first_500": osc,
            "final_gap": trace[-1].f_gap,
            "gap_floor": floor,
        }
        curves.append((label, [p[0] for p in pairs],
                       [p[1] for p in pairs]))
    emit_svg(curves, os.path.join(out, f"rls-{tag}.svg"),
             xscale="log", yscale="log",
             title=f"rls-{tag}: inertial gradient with and without "
                   "gradient correction",
             xlabel="k", ylabel="composite gap at the metric prox point")
    files.append(f"rls-{tag}.svg")
    report = {
        "target": f"rls-{tag}",
        "seed": RLS_SEEDS[tag],
        "alpha": RLS_ALPHA,
        "s": s,
        "beta": 0.5 * math.sqrt(s),
        "iterations": RLS_ITERATIONS,
        "reference": {
            "label": _REFERENCE_LABEL,
            "value": ref.value,
            "iterations": ref.iterations,
            "converged": converged,
        },
        "algorithms": algo_reports,
        "igahd_oscillates_no_more": (
            algo_reports["igahd"]["oscillation_count_first_500"]
            <= algo_reports["fista"]["oscillation_count_first_500"]),
        "files": files,
    }
    _write_report(report, os.path.join(out, f"rls-{tag}-report.json"))
    return report


def reproduce(target: str, outdir: Optional[str] = None) -> dict:
    """Run one pinned target; returns the report that was written."""
    if target == "fig1":
        return reproduce_fig1(outdir)
    if target == "fig2-case4":
        return reproduce_fig2_case4(outdir)
    if target.startswith("rls-"):
        tag = target[len("rls-"):]
        if tag in RLS_SEEDS:
            return reproduce_rls(tag, outdir)
    raise ConfigError(
        f"unknown target {target!r} (available: {', '.join(TARGETS)})"
    )
