"""Experiment configuration: a validated, canonically serialized JSON doc.

A config names a problem, an algorithm, a horizon, and the output files
to produce.  Validation is strict: every key must be known, required
keys must be present, and errors name the offending path (for example
``problem.sparsitty``).  Serialization is canonical (sorted keys, fixed
separators, shortest round-trip floats) so a config that parses equals
the one that was written, byte for byte.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List

from ..errors import ConfigError

_PROBLEM_KEYS = {
    "quadratic": ({"kind", "eigenvalues"}, {"basis", "shift", "x0", "v0"}),
    "lasso": ({"kind", "m", "n", "sparsity", "seed"}, set()),
    "group-lasso": ({"kind", "m", "n", "group_size", "sparsity", "seed"}, set()),
    "tv-denoise": ({"kind", "n", "seed"}, {"pieces"}),
    "nuclear": ({"kind", "N", "rank", "seed"}, set()),
}

_ALGORITHM_KEYS = {
    "igahd": ({"kind", "alpha", "beta"}, {"s", "start_index"}),
    "fista": ({"kind"}, {"alpha", "s"}),
    "ipahd": ({"kind", "alpha", "h", "beta", "b"}, set()),
    "ipahd-ns": ({"kind", "alpha", "h", "beta", "b", "lam"}, set()),
    "ipahd-sc": ({"kind", "beta", "s"}, {"mu"}),
    "ipahd-ns-sc": ({"kind", "beta", "s", "mu", "lam"}, set()),
    "igahd-sc": ({"kind", "beta", "s"}, {"mu"}),
    "din-avd": ({"kind", "alpha", "beta", "b"}, {"t0", "gamma_const", "tol"}),
}

_OUTPUT_KINDS = {"csv", "svg", "report"}

__all__ = ["ExperimentConfig"]


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v: Any) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool))


def _check_keys(d: Dict[str, Any], path: str, required: set, optional: set) -> None:
    allowed = required | optional
    for key in d:
        if key not in allowed:
            raise ConfigError(
                f"{path}.{key}: unknown key (allowed: {', '.join(sorted(allowed))})"
            )
    for key in sorted(required):
        if key not in d:
            raise ConfigError(f"{path}.{key}: missing required key")


def _check_coefficient(v: Any, path: str) -> None:
    """A damping coefficient is a constant or a [coef, exponent] power."""
    if _is_num(v):
        return
    if (isinstance(v, list) and len(v) == 2
            and all(_is_num(u) for u in v)):
        return
    raise ConfigError(
        f"{path}: expected a number or a [coefficient, exponent] pair, "
        f"got {v!r}"
    )


def _validate_problem(p: Any) -> None:
    if not isinstance(p, dict):
        raise ConfigError("problem: expected an object with a 'kind' key")
    kind = p.get("kind")
    if kind not in _PROBLEM_KEYS:
        raise ConfigError(
            f"problem.kind: unknown kind {kind!r} "
            f"(known: {', '.join(sorted(_PROBLEM_KEYS))})"
        )
    required, optional = _PROBLEM_KEYS[kind]
    _check_keys(p, "problem", required, optional)
    if kind == "quadratic":
        ev = p["eigenvalues"]
        if (not isinstance(ev, list) or not ev
                or not all(_is_num(v) and v >= 0 for v in ev)):
            raise ConfigError(
                "problem.eigenvalues: expected a non-empty list of "
                "nonnegative numbers"
            )
        for key in ("x0", "v0", "shift"):
            if key in p:
                vec = p[key]
                if (not isinstance(vec, list) or len(vec) != len(ev)
                        or not all(_is_num(v) for v in vec)):
                    raise ConfigError(
                        f"problem.{key}: expected a list of {len(ev)} numbers"
                    )
    else:
        for key in sorted(required - {"kind"}):
            if not _is_int(p[key]) or p[key] < 0:
                raise ConfigError(
                    f"problem.{key}: expected a nonnegative integer, "
                    f"got {p[key]!r}"
                )


def _validate_algorithm(a: Any) -> None:
    if not isinstance(a, dict):
        raise ConfigError("algorithm: expected an object with a 'kind' key")
    kind = a.get("kind")
    if kind not in _ALGORITHM_KEYS:
        raise ConfigError(
            f"algorithm.kind: unknown kind {kind!r} "
            f"(known: {', '.join(sorted(_ALGORITHM_KEYS))})"
        )
    required, optional = _ALGORITHM_KEYS[kind]
    _check_keys(a, "algorithm", required, optional)
    for key, val in a.items():
        if key == "kind":
            continue
        if kind == "din-avd" and key in ("beta", "b"):
            _check_coefficient(val, f"algorithm.{key}")
        elif key == "start_index":
            if not _is_int(val) or val < 1:
                raise ConfigError(
                    f"algorithm.start_index: expected a positive integer, "
                    f"got {val!r}"
                )
        elif not _is_num(val):
            raise ConfigError(
                f"algorithm.{key}: expected a number, got {val!r}"
            )


def _validate_horizon(h: Any) -> None:
    if not isinstance(h, dict):
        raise ConfigError("horizon: expected an object")
    if set(h) == {"iterations"}:
        if not _is_int(h["iterations"]) or h["iterations"] < 1:
            raise ConfigError(
                "horizon.iterations: expected a positive integer"
            )
    elif set(h) == {"T"}:
        if not _is_num(h["T"]) or h["T"] <= 0:
            raise ConfigError("horizon.T: expected a positive number")
    else:
        raise ConfigError(
            "horizon: expected exactly one of 'iterations' or 'T'"
        )


def _validate_outputs(outs: Any) -> None:
    if not isinstance(outs, list):
        raise ConfigError("outputs: expected a list")
    for i, entry in enumerate(outs):
        if not isinstance(entry, dict) or len(entry) != 1:
            raise ConfigError(
                f"outputs[{i}]: expected an object with a single key "
                f"among {', '.join(sorted(_OUTPUT_KINDS))}"
            )
        (key, val), = entry.items()
        if key not in _OUTPUT_KINDS:
            raise ConfigError(
                f"outputs[{i}].{key}: unknown output kind "
                f"(allowed: {', '.join(sorted(_OUTPUT_KINDS))})"
            )
        if not isinstance(val, str) or not val:
            raise ConfigError(
                f"outputs[{i}].{key}: expected a non-empty filename"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: problem, algorithm, horizon, outputs, seed.

    The ``problem`` and ``algorithm`` fields are tagged dictionaries
    (their ``kind`` key selects the variant) kept in validated JSON
    form, so a config survives a serialize/parse round trip unchanged.
    """

    name: str
    problem: Dict[str, Any]
    algorithm: Dict[str, Any]
    horizon: Dict[str, Any]
    outputs: List[Dict[str, str]] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ConfigError("name: expected a non-empty string")
        _validate_problem(self.problem)
        _validate_algorithm(self.algorithm)
        _validate_horizon(self.horizon)
        _validate_outputs(self.outputs)
        if not _is_int(self.seed):
            raise ConfigError(f"seed: expected an integer, got {self.seed!r}")
        if not -(2 ** 63) <= self.seed < 2 ** 64:
            raise ConfigError("seed: out of 64-bit range")

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("config root: expected a JSON object")
        allowed = {"name", "problem", "algorithm", "horizon", "outputs", "seed"}
        for key in d:
            if key not in allowed:
                raise ConfigError(
                    f"{key}: unknown key (allowed: {', '.join(sorted(allowed))})"
                )
        for key in sorted(allowed - {"outputs", "seed"}):
            if key not in d:
                raise ConfigError(f"{key}: missing required key")
        return cls(
            name=d["name"],
            problem=d["problem"],
            algorithm=d["algorithm"],
            horizon=d["horizon"],
            outputs=d.get("outputs", []),
            seed=d.get("seed", 0),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(payload)

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(text)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "problem": self.problem,
            "algorithm": self.algorithm,
            "horizon": self.horizon,
            "outputs": self.outputs,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":"))
