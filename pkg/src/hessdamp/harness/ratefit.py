"""Decay-rate estimation for convergence traces.

A trace is a sequence of ``(abscissa, value)`` pairs where the abscissa is
an iteration count or a time and the value is a positive quantity such as
an objective gap.  Two fit modes cover the regimes we report on:

* ``poly``: least squares on ``log value`` against ``log abscissa``.  The
  slope is the polynomial decay power, so ``value ~ C / k**2`` fits to a
  slope near ``-2``.
* ``linear``: least squares on ``log value`` against the raw abscissa.
  The slope is the log-linear rate, so ``value ~ C * q**k`` fits to a
  slope near ``log q``.

Oscillating traces ruin a direct log fit because the dips between bursts
sit orders of magnitude below the envelope.  `peak_subseries` extracts the
strict local maxima so the fit can follow the envelope instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import ConfigError

_MIN_FIT_POINTS = 10

__all__ = ["RateReport", "rate_fit", "oscillation_count", "peak_subseries",
           "noise_floor", "apply_noise_floor"]


def noise_floor(reference: float, scale: float = 1e-14) -> float:
    """Resolution limit of a gap measured against a finite reference.

    A gap computed as ``f(x) - reference`` cancels once the iterates
    close in on the reference value, leaving round-off of relative size
    a few ulps of the reference.  Below this level the measured gap is
    noise (it can even turn negative), so fits and oscillation counts
    clamp to the floor instead.  Gaps against an exact zero reference
    (for example centered quadratics) need no floor.
    """
    return scale * max(1.0, abs(float(reference)))


def apply_noise_floor(
    pairs: Sequence[Tuple[float, float]], reference: float,
    scale: float = 1e-14,
) -> list[Tuple[float, float]]:
    """Clamp gap values at `noise_floor`; abscissae pass through."""
    floor = noise_floor(reference, scale)
    return [(float(a), max(float(v), floor)) for a, v in pairs]


@dataclass(frozen=True)
class RateReport:
    """Outcome of a rate fit.

    slope, intercept
        Coefficients of the least-squares line in the mode's coordinates.
    window
        The abscissa interval ``(lo, hi)`` the fit actually used.
    residual
        Root mean square misfit of ``log value`` over the window.
    oscillation_count
        Number of strict local maxima of the windowed values.
    """

    slope: float
    intercept: float
    window: Tuple[float, float]
    residual: float
    oscillation_count: int


def oscillation_count(values: Sequence[float]) -> int:
    """Count strict interior local maxima of a sequence.

    A point counts when it is strictly larger than both neighbours, so
    plateaus and endpoints never count and a monotone sequence gives 0.
    """
    vals = [float(v) for v in values]
    if len(vals) < 3:
        raise ConfigError(
            f"oscillation_count needs at least 3 values, got {len(vals)}"
        )
    count = 0
    for i in range(1, len(vals) - 1):
        if vals[i] > vals[i - 1] and vals[i] > vals[i + 1]:
            count += 1
    return count


def peak_subseries(
    series: Sequence[Tuple[float, float]],
) -> list[Tuple[float, float]]:
    """Return the strict local maxima of a trace, in order.

    The result is the envelope sampling used to fit decay rates of
    oscillatory traces.  Endpoints are never included.
    """
    pts = [(float(a), float(v)) for a, v in series]
    peaks = []
    for i in range(1, len(pts) - 1):
        if pts[i][1] > pts[i - 1][1] and pts[i][1] > pts[i + 1][1]:
            peaks.append(pts[i])
    return peaks


def rate_fit(
    series: Sequence[Tuple[float, float]],
    window: Tuple[float, float] | None = None,
    mode: str = "poly",
) -> RateReport:
    """Fit a decay rate to a trace of ``(abscissa, value)`` pairs.

    ``window`` restricts the fit to abscissae in ``[lo, hi]``; ``None``
    uses the whole trace.  All windowed values must be strictly positive,
    and in ``poly`` mode the windowed abscissae as well; offenders are
    reported by their index in the input.  At least 10 points must
    survive the windowing.
    """
    if mode not in ("poly", "linear"):
        raise ConfigError(f"unknown fit mode {mode!r}, expected 'poly' or 'linear'")
    pts = [(float(a), float(v)) for a, v in series]
    if window is None:
        idx = list(range(len(pts)))
    else:
        lo, hi = float(window[0]), float(window[1])
        if not lo < hi:
            raise ConfigError(f"empty fit window ({lo}, {hi})")
        idx = [i for i, (a, _) in enumerate(pts) if lo <= a <= hi]
    if len(idx) < _MIN_FIT_POINTS:
        raise ConfigError(
            f"rate_fit needs at least {_MIN_FIT_POINTS} points in the window, "
            f"got {len(idx)}"
        )

    bad = [i for i in idx if not (pts[i][1] > 0.0 and math.isfinite(pts[i][1]))]
    if mode == "poly":
        bad += [i for i in idx if not pts[i][0] > 0.0]
    if bad:
        bad = sorted(set(bad))
        shown = ", ".join(str(i) for i in bad[:12])
        more = "" if len(bad) <= 12 else f" (and {len(bad) - 12} more)"
        raise ConfigError(
            f"rate_fit requires positive finite values; offending indices: "
            f"{shown}{more}"
        )

    absc = np.array([pts[i][0] for i in idx])
    vals = np.array([pts[i][1] for i in idx])
    xs = np.log(absc) if mode == "poly" else absc
    ys = np.log(vals)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    rms = float(np.sqrt(np.mean(resid * resid)))
    used = (float(absc[0]), float(absc[-1]))
    osc = oscillation_count(vals) if len(vals) >= 3 else 0
    return RateReport(
        slope=float(slope),
        intercept=float(intercept),
        window=used,
        residual=rms,
        oscillation_count=osc,
    )
