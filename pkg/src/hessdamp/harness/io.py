"""Trace serialization: CSV emission and parsing, plus SVG plots.

The CSV layout is fixed so traces can be diffed across runs and machines:
a header line ``index,t,f_gap,grad_norm,energy`` followed by one row per
sample, floats printed with 17 significant digits (enough to round-trip
IEEE doubles exactly) and LF line endings.  Discrete traces fill the
``t`` column with the iteration index.

The SVG writer is dependency free and fully deterministic: no
timestamps, fixed canvas, fixed palette, coordinates rounded to 1/100
pixel.  Identical inputs give byte-identical files.
"""
from __future__ import annotations

import math
from typing import Iterable, NamedTuple, Sequence, Tuple
from xml.sax.saxutils import escape

from ..errors import ConfigError

CSV_HEADER = "index,t,f_gap,grad_norm,energy"

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

__all__ = ["CsvRow", "emit_csv", "parse_csv", "emit_svg", "CSV_HEADER"]


class CsvRow(NamedTuple):
    index: int
    t: float
    f_gap: float
    grad_norm: float
    energy: float


def _rows_from_trace(trace: Sequence) -> list[CsvRow]:
    rows = []
    for i, item in enumerate(trace):
        if hasattr(item, "k"):
            rows.append(
                CsvRow(int(item.k), float(item.k), float(item.f_gap),
                       float(item.grad_norm), float(item.energy))
            )
        elif hasattr(item, "t"):
            rows.append(
                CsvRow(i, float(item.t), float(item.f_gap),
                       float(item.grad_norm), float(item.energy))
            )
        else:
            index, t, f_gap, grad_norm, energy = item
            rows.append(
                CsvRow(int(index), float(t), float(f_gap),
                       float(grad_norm), float(energy))
            )
    return rows


def emit_csv(trace: Sequence, path: str) -> None:
    """Write a trace to ``path`` in the fixed CSV layout.

    Accepts iteration traces (items with a ``k`` field), trajectory
    samples (items with a ``t`` field), or plain 5-tuples.
    """
    rows = _rows_from_trace(trace)
    if not rows:
        raise ConfigError("refusing to write an empty trace")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in rows:
                fh.write(
                    "%d,%.17g,%.17g,%.17g,%.17g\n"
                    % (r.index, r.t, r.f_gap, r.grad_norm, r.energy)
                )
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def parse_csv(path: str) -> list[CsvRow]:
    """Read a trace written by `emit_csv` back into rows."""
    try:
        with open(path, "r", newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read trace from {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        head = lines[0] if lines else "<empty file>"
        raise ConfigError(
            f"{path}: expected header {CSV_HEADER!r}, found {head!r}"
        )
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise ConfigError(f"{path}:{ln}: expected 5 fields, got {len(parts)}")
        try:
            rows.append(
                CsvRow(int(parts[0]), float(parts[1]), float(parts[2]),
                       float(parts[3]), float(parts[4]))
            )
        except ValueError as exc:
            raise ConfigError(f"{path}:{ln}: {exc}") from exc
    return rows


def _axis_ticks(lo: float, hi: float, log: bool) -> list[float]:
    if log:
        d0 = math.floor(math.log10(lo))
        d1 = math.ceil(math.log10(hi))
        step = max(1, (d1 - d0) // 8 + (1 if (d1 - d0) % 8 else 0))
        ticks = [10.0 ** d for d in range(d0, d1 + 1, step)]
        return [t for t in ticks if lo * 0.999 <= t <= hi * 1.001]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(v)
        v += step
    return ticks


def _fmt_tick(v: float) -> str:
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-3):
        e = int(math.floor(math.log10(abs(v))))
        m = v / 10.0 ** e
        if abs(m - 1.0) < 1e-9:
            return f"1e{e}"
        return f"{m:.3g}e{e}"
    return f"{v:.6g}"


def emit_svg(
    curves: Sequence[Tuple[str, Iterable[float], Iterable[float]]],
    path: str,
    xscale: str = "log",
    yscale: str = "log",
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    """Write a line plot of ``(label, xs, ys)`` curves as a standalone SVG.

    Points that cannot be placed on the requested axes (non-finite, or
    non-positive on a log axis) are dropped per curve.  Raises
    `ConfigError` when nothing remains to plot.
    """
    if xscale not in ("log", "linear") or yscale not in ("log", "linear"):
        raise ConfigError("axis scales must be 'log' or 'linear'")
    cleaned = []
    for label, xs, ys in curves:
        pts = []
        for x, y in zip(xs, ys):
            x, y = float(x), float(y)
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if xscale == "log" and x <= 0:
                continue
            if yscale == "log" and y <= 0:
                continue
            pts.append((x, y))
        if pts:
            cleaned.append((str(label), pts))
    if not cleaned:
        raise ConfigError("no plottable points after filtering")

    all_x = [p[0] for _, pts in cleaned for p in pts]
    all_y = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo * 0.5 if yscale == "log" else y_lo - 0.5, \
                     y_hi * 2.0 if yscale == "log" else y_hi + 0.5

    width, height = 720.0, 480.0
    ml, mr, mt, mb = 80.0, 24.0, 44.0, 56.0
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x: float) -> float:
        if xscale == "log":
            u = (math.log10(x) - math.log10(x_lo)) / (
                math.log10(x_hi) - math.log10(x_lo))
        else:
            u = (x - x_lo) / (x_hi - x_lo)
        return ml + u * pw

    def sy(y: float) -> float:
        if yscale == "log":
            u = (math.log10(y) - math.log10(y_lo)) / (
                math.log10(y_hi) - math.log10(y_lo))
        else:
            u = (y - y_lo) / (y_hi - y_lo)
        return mt + (1.0 - u) * ph

    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">'
    )
    out.append(f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>')
    out.append(
        f'<rect x="{ml:.2f}" y="{mt:.2f}" width="{pw:.2f}" height="{ph:.2f}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    )
    for xt in _axis_ticks(x_lo, x_hi, xscale == "log"):
        px = sx(xt)
        out.append(
            f'<line x1="{px:.2f}" y1="{mt:.2f}" x2="{px:.2f}" '
            f'y2="{mt + ph:.2f}" stroke="#dddddd" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{mt + ph + 18:.2f}" font-size="12" '
            f'font-family="sans-serif" text-anchor="middle">'
            f"{escape(_fmt_tick(xt))}</text>"
        )
    for yt in _axis_ticks(y_lo, y_hi, yscale == "log"):
        py = sy(yt)
        out.append(
            f'<line x1="{ml:.2f}" y1="{py:.2f}" x2="{ml + pw:.2f}" '
            f'y2="{py:.2f}" stroke="#dddddd" stroke-width="0.5"/>'
        )
        out.append(
            f'<text x="{ml - 6:.2f}" y="{py + 4:.2f}" font-size="12" '
            f'font-family="sans-serif" text-anchor="end">'
            f"{escape(_fmt_tick(yt))}</text>"
        )
    for ci, (label, pts) in enumerate(cleaned):
        color = _PALETTE[ci % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        ly = mt + 16.0 + 18.0 * ci
        out.append(
            f'<line x1="{ml + pw - 150:.2f}" y1="{ly - 4:.2f}" '
            f'x2="{ml + pw - 122:.2f}" y2="{ly - 4:.2f}" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{ml + pw - 116:.2f}" y="{ly:.2f}" font-size="12" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
    if title:
        out.append(
            f'<text x="{width / 2:.2f}" y="24" font-size="15" '
            f'font-family="sans-serif" text-anchor="middle">'
            f"{escape(title)}</text>"
        )
    if xlabel:
        out.append(
            f'<text x="{ml + pw / 2:.2f}" y="{height - 12:.2f}" '
            f'font-size="13" font-family="sans-serif" text-anchor="middle">'
            f"{escape(xlabel)}</text>"
        )
    if ylabel:
        out.append(
            f'<text x="20" y="{mt + ph / 2:.2f}" font-size="13" '
            f'font-family="sans-serif" text-anchor="middle" '
            f'transform="rotate(-90 20 {mt + ph / 2:.2f})">'
            f"{escape(ylabel)}</text>"
        )
    out.append("</svg>")
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
