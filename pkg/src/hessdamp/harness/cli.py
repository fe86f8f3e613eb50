"""Command line front end.

Subcommands:

* ``run <config.json>``: execute one experiment described by a config
  file and write its requested outputs.
* ``reproduce <target>``: run a pinned reference experiment.
* ``validate <config.json>``: check the config schema and the theorem
  hypotheses of the configured algorithm without running anything.
* ``rate <trace.csv> --mode {poly,linear} --window a:b``: fit a decay
  rate to a previously written trace.

Exit codes: 0 success, 2 configuration or hypothesis violation,
3 numerical failure, 4 I/O failure.  The output directory is the
``--out`` option when given, else the ``HESSDAMP_OUT`` environment
variable, else the working directory.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import Optional

import numpy as np

from ..algorithms import (
    IGAHDConfig,
    IPAHDConfig,
    SCConfig,
    fista_run,
    igahd_run,
    igahd_sc_run,
    ipahd_ns_run,
    ipahd_ns_sc_run,
    ipahd_run,
    ipahd_sc_run,
)
from ..dynamics import DampedSystemSpec, integrate
from ..errors import ConfigError, NumericsError, ConvergenceError
from ..problems import ProxFriendlyFunction, make_quadratic
from .config import ExperimentConfig
from .instances import (
    make_group_lasso,
    make_lasso,
    make_nuclear,
    make_tv_denoise,
    metric_problem,
    reference_optimum,
)
from .io import emit_csv, emit_svg, parse_csv
from .ratefit import oscillation_count, rate_fit
from .reproduce import TARGETS, reproduce, resolve_outdir

__all__ = ["main"]


def _coefficient_fn(spec):
    """A config coefficient is a constant or a [coef, exponent] pair."""
    if isinstance(spec, (int, float)):
        c = float(spec)
        return (lambda t: c), (lambda t: 0.0)
    c, p = float(spec[0]), float(spec[1])
    if p == 0.0:
        return (lambda t: c), (lambda t: 0.0)

    def fn(t, c=c, p=p):
        return c * t ** p

    def deriv(t, c=c, p=p):
        return c * p * t ** (p - 1.0)

    return fn, deriv


def _build_quadratic(pcfg):
    return make_quadratic(
        pcfg["eigenvalues"],
        shift=pcfg.get("shift"),
        basis=pcfg.get("basis"),
    )


def _build_instance(pcfg):
    kind = pcfg["kind"]
    if kind == "lasso":
        return make_lasso(pcfg["m"], pcfg["n"], pcfg["sparsity"], pcfg["seed"])
    if kind == "group-lasso":
        return make_group_lasso(pcfg["m"], pcfg["n"], pcfg["group_size"],
                                pcfg["sparsity"], pcfg["seed"])
    if kind == "tv-denoise":
        return make_tv_denoise(pcfg["n"], pcfg.get("pieces", 5), pcfg["seed"])
    if kind == "nuclear":
        return make_nuclear(pcfg["N"], pcfg["rank"], pcfg["seed"])
    raise ConfigError(f"problem.kind: cannot build {kind!r}")


def _iterations_of(cfg: ExperimentConfig) -> int:
    if "iterations" not in cfg.horizon:
        raise ConfigError(
            "horizon: discrete algorithms need an 'iterations' horizon")
    return cfg.horizon["iterations"]


def _discrete_trace(cfg: ExperimentConfig, problem, x0):
    """Run the configured iterative scheme and return its trace."""
    a = cfg.algorithm
    kind = a["kind"]
    n_iter = _iterations_of(cfg)
    if kind == "igahd":
        s = a.get("s", _default_smooth_step(problem))
        run_cfg = IGAHDConfig(alpha=a["alpha"], beta=a["beta"], s=s,
                              start_index=a.get("start_index", 1),
                              max_iter=n_iter)
        return igahd_run(problem, run_cfg, x0)
    if kind == "fista":
        s = a.get("s", _default_smooth_step(problem))
        return fista_run(problem, a.get("alpha", 3.0), s, x0,
                         max_iter=n_iter)
    if kind == "ipahd":
        beta_fn, _ = _coefficient_fn(a["beta"])
        b_fn, _ = _coefficient_fn(a["b"])
        run_cfg = IPAHDConfig(alpha=a["alpha"],
                              beta_schedule=lambda k: beta_fn(float(k)),
                              b_schedule=lambda k: b_fn(float(k)),
                              h=a["h"], max_iter=n_iter)
        return ipahd_run(problem, run_cfg, x0)
    if kind == "ipahd-ns":
        run_cfg = IPAHDConfig(alpha=a["alpha"],
                              beta_schedule=lambda k: float(a["beta"]),
                              b_schedule=lambda k: float(a["b"]),
                              h=a["h"], max_iter=n_iter)
        f = _prox_view(problem)
        return ipahd_ns_run(f, run_cfg, a["lam"], x0,
                            opt_value=problem.opt_value)
    if kind in ("ipahd-sc", "igahd-sc", "ipahd-ns-sc"):
        mu = a.get("mu", getattr(problem, "strong_modulus", 0.0))
        variant = {"ipahd-sc": "prox", "igahd-sc": "grad",
                   "ipahd-ns-sc": "prox-ns"}[kind]
        run_cfg = SCConfig(mu=mu, beta=a["beta"], s=a["s"], variant=variant,
                           lam=a.get("lam"), max_iter=n_iter)
        if kind == "ipahd-sc":
            return ipahd_sc_run(problem, run_cfg, x0)
        if kind == "igahd-sc":
            return igahd_sc_run(problem, run_cfg, x0)
        f = _prox_view(problem)
        return ipahd_ns_sc_run(f, run_cfg, x0,
                               opt_value=problem.opt_value,
                               opt_point=problem.opt_point)
    raise ConfigError(f"algorithm.kind: cannot run {kind!r}")


def _default_smooth_step(problem) -> float:
    L = getattr(problem, "lipschitz", None)
    if not L:
        raise ConfigError(
            "algorithm.s: no step given and the problem has no Lipschitz "
            "constant to derive one from")
    return 1.0 / L


def _prox_view(problem) -> ProxFriendlyFunction:
    if getattr(problem, "prox", None) is None:
        raise ConfigError(
            "this algorithm needs a problem with an exact prox")
    return ProxFriendlyFunction(
        value=problem.value, prox=problem.prox,
        strong_modulus=getattr(problem, "strong_modulus", 0.0))


def _dynamics_samples(cfg: ExperimentConfig, problem, x0, v0):
    a = cfg.algorithm
    if "T" not in cfg.horizon:
        raise ConfigError("horizon: the dynamics need a time horizon 'T'")
    beta_fn, beta_deriv = _coefficient_fn(a["beta"])
    b_fn, b_deriv = _coefficient_fn(a["b"])
    spec = DampedSystemSpec(
        alpha=a["alpha"], beta_fn=beta_fn, b_fn=b_fn, problem=problem,
        t0=a.get("t0", 1.0), gamma_const=a.get("gamma_const"),
        beta_deriv=beta_deriv, b_deriv=b_deriv)
    return integrate(spec, x0, v0, T=cfg.horizon["T"],
                     tol=a.get("tol", 1e-8))


def _trace_report(cfg: ExperimentConfig, rows) -> dict:
    pairs = [(r.t, r.f_gap) for r in rows] if hasattr(rows[0], "t") else \
            [(r.k, r.f_gap) for r in rows]
    report = {
        "name": cfg.name,
        "algorithm": cfg.algorithm["kind"],
        "rows": len(rows),
        "final_gap": float(pairs[-1][1]),
    }
    try:
        report["fit"] = dataclasses.asdict(rate_fit(pairs, mode="poly"))
    except ConfigError:
        report["fit"] = None
    gaps = [v for _, v in pairs]
    report["oscillation_count"] = (
        oscillation_count(gaps) if len(gaps) >= 3 else 0)
    return report


def run_config(cfg: ExperimentConfig, outdir: Optional[str] = None) -> dict:
    """Execute one experiment and write its requested outputs."""
    out = resolve_outdir(outdir)
    pkind = cfg.problem["kind"]
    if pkind == "quadratic":
        problem = _build_quadratic(cfg.problem)
        x0 = np.asarray(cfg.problem.get("x0", np.ones(problem.dim)),
                        dtype=float)
        v0 = np.asarray(cfg.problem.get("v0", np.zeros(problem.dim)),
                        dtype=float)
        if cfg.algorithm["kind"] == "din-avd":
            rows = _dynamics_samples(cfg, problem, x0, v0)
        else:
            rows = _discrete_trace(cfg, problem, x0)
    else:
        if cfg.algorithm["kind"] not in ("igahd", "fista"):
            raise ConfigError(
                "composite instances run with algorithm.kind 'igahd' or "
                f"'fista', not {cfg.algorithm['kind']!r}")
        instance = _build_instance(cfg.problem)
        try:
            ref = reference_optimum(instance, tol=1e-12)
            ref_value = ref.value
        except ConvergenceError as exc:
            ref_value = exc.best.value
        problem = metric_problem(instance, opt_value=ref_value)
        x0 = np.zeros(problem.dim)
        local = dict(cfg.algorithm)
        local.setdefault("s", instance.s)
        cfg = ExperimentConfig(name=cfg.name, problem=cfg.problem,
                               algorithm=local, horizon=cfg.horizon,
                               outputs=cfg.outputs, seed=cfg.seed)
        rows = _discrete_trace(cfg, problem, x0)

    report = _trace_report(cfg, rows)
    written = []
    for entry in cfg.outputs:
        (okind, fname), = entry.items()
        path = os.path.join(out, fname)
        if okind == "csv":
            emit_csv(rows, path)
        elif okind == "svg":
            if hasattr(rows[0], "t"):
                xs = [r.t for r in rows]
                xlabel = "t"
            else:
                xs = [r.k for r in rows]
                xlabel = "k"
            emit_svg([(cfg.name, xs, [r.f_gap for r in rows])], path,
                     xscale="log", yscale="log",
                     title=cfg.name, xlabel=xlabel, ylabel="objective gap")
        else:
            with open(path, "w", newline="\n") as fh:
                json.dump(report, fh, indent=2, sort_keys=True)
                fh.write("\n")
        written.append(path)
    report["files"] = written
    return report


def validate_config(cfg: ExperimentConfig) -> None:
    """Hypothesis check only: build everything, run nothing."""
    a = cfg.algorithm
    kind = a["kind"]
    if cfg.problem["kind"] == "quadratic":
        problem = _build_quadratic(cfg.problem)
    else:
        problem = metric_problem(_build_instance(cfg.problem))
        if kind not in ("igahd", "fista"):
            raise ConfigError(
                "composite instances run with algorithm.kind 'igahd' or "
                f"'fista', not {kind!r}")
    if kind == "igahd":
        IGAHDConfig(alpha=a["alpha"], beta=a["beta"],
                    s=a.get("s", 1.0 / (problem.lipschitz or 1.0)),
                    start_index=a.get("start_index", 1), max_iter=1)
    elif kind in ("ipahd", "ipahd-ns"):
        beta_fn, _ = _coefficient_fn(a["beta"])
        b_fn, _ = _coefficient_fn(a["b"])
        IPAHDConfig(alpha=a["alpha"],
                    beta_schedule=lambda k: beta_fn(float(k)),
                    b_schedule=lambda k: b_fn(float(k)),
                    h=a["h"], max_iter=1)
    elif kind in ("ipahd-sc", "igahd-sc", "ipahd-ns-sc"):
        variant = {"ipahd-sc": "prox", "igahd-sc": "grad",
                   "ipahd-ns-sc": "prox-ns"}[kind]
        SCConfig(mu=a.get("mu", getattr(problem, "strong_modulus", 0.0)),
                 beta=a["beta"], s=a["s"], variant=variant,
                 lam=a.get("lam"), max_iter=1)
    elif kind == "din-avd":
        beta_fn, beta_deriv = _coefficient_fn(a["beta"])
        b_fn, b_deriv = _coefficient_fn(a["b"])
        DampedSystemSpec(alpha=a["alpha"], beta_fn=beta_fn, b_fn=b_fn,
                         problem=problem, t0=a.get("t0", 1.0),
                         gamma_const=a.get("gamma_const"),
                         beta_deriv=beta_deriv, b_deriv=b_deriv)
    # fista has no extra hypotheses beyond the schema.


def _parse_window(text: Optional[str]):
    if text is None:
        return None
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"--window expects 'a:b', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"--window expects numbers, got {text!r}") from exc


def _cmd_rate(args) -> int:
    rows = parse_csv(args.trace)
    fit = rate_fit([(r.t, r.f_gap) for r in rows],
                   window=_parse_window(args.window), mode=args.mode)
    print(f"slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
          f"window=[{fit.window[0]:.6g}, {fit.window[1]:.6g}] "
          f"residual={fit.residual:.6g} "
          f"oscillation_count={fit.oscillation_count}")
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hessdamp",
        description="Inertial dynamics and algorithms with gradient-flow "
                    "damping: experiment runner.")
    sub = p.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument("--out", default=None, help="output directory")

    p_rep = sub.add_parser("reproduce", help="run a pinned reference target")
    p_rep.add_argument("target", help=f"one of: {', '.join(TARGETS)}")
    p_rep.add_argument("--out", default=None, help="output directory")

    p_val = sub.add_parser("validate",
                           help="schema and hypothesis check, no run")
    p_val.add_argument("config", help="path to a JSON experiment config")

    p_rate = sub.add_parser("rate", help="fit a decay rate to a CSV trace")
    p_rate.add_argument("trace", help="path to a trace CSV")
    p_rate.add_argument("--mode", choices=("poly", "linear"), default="poly")
    p_rate.add_argument("--window", default=None,
                        help="abscissa window 'a:b'")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = ExperimentConfig.load(args.config)
            report = run_config(cfg, args.out)
            for path in report["files"]:
                print(f"wrote {path}")
            print(f"{cfg.name}: final gap {report['final_gap']:.6g}")
        elif args.command == "reproduce":
            report = reproduce(args.target, args.out)
            out = resolve_outdir(args.out)
            for fname in report["files"]:
                print(f"wrote {os.path.join(out, fname)}")
        elif args.command == "validate":
            cfg = ExperimentConfig.load(args.config)
            validate_config(cfg)
            print(f"ok: {cfg.name}")
        elif args.command == "rate":
            return _cmd_rate(args)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
