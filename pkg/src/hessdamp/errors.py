"""Exception hierarchy shared across the package.

The split mirrors how failures are reported at the command line:
configuration and hypothesis problems are user errors, numerical
failures are runtime diagnostics, and I/O keeps the builtin OSError.
"""

__all__ = [
    "ConfigError",
    "HypothesisViolation",
    "NumericsError",
    "StiffnessError",
    "ConvergenceError",
    "PoleError",
    "DomainError",
]


class ConfigError(ValueError):
    """Invalid configuration, precondition, or input shape."""


class HypothesisViolation(ConfigError):
    """A theorem hypothesis required by an algorithm does not hold.

    The message states which inequality failed, with numbers.
    """


class NumericsError(ArithmeticError):
    """Numerical failure while running (NaN, divergence, overflow)."""


class StiffnessError(NumericsError):
    """The integrator step size underflowed; the system is too stiff."""


class ConvergenceError(NumericsError):
    """An iterative routine hit its iteration cap.

    Carries the best estimate found so far in ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PoleError(ConfigError):
    """Evaluation at a pole of a special function (e.g. gamma at -n)."""


class DomainError(ConfigError):
    """Argument outside the documented domain of a routine."""
