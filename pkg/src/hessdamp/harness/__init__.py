"""Experiment harness: configs, rate fits, CSV/SVG emission, CLI."""
from .config import ExperimentConfig
from .ratefit import RateReport, oscillation_count, peak_subseries, rate_fit
from .io import emit_csv, emit_svg, parse_csv

__all__ = [
    "ExperimentConfig",
    "RateReport",
    "rate_fit",
    "oscillation_count",
    "peak_subseries",
    "emit_csv",
    "emit_svg",
    "parse_csv",
]
