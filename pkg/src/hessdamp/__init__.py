"""Inertial first-order optimization with Hessian-driven damping.

The package has three layers.  ``problems`` and ``proxcalc`` define the
objects being optimized: smooth convex problems, prox-friendly
nonsmooth functions, Moreau envelopes, and the metric prox machinery
for regularized least squares.  ``algorithms``, ``dynamics``, and
``closedform`` implement the solvers: the inertial gradient and
proximal schemes with their Lyapunov certificates, the continuous-time
damped system with an adaptive integrator, and exact trajectories on
quadratics through confluent hypergeometric and Bessel functions
(``specfun``).  ``harness`` wraps everything in reproducible, seeded
experiments with CSV/SVG reporting and a command line.
"""
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    HypothesisViolation,
    NumericsError,
    PoleError,
    StiffnessError,
)
from .problems import (
    CompositeRLS,
    ProxFriendlyFunction,
    QuadraticProblem,
    SmoothConvexProblem,
    composite_value,
    make_quadratic,
    metric_norm_sq,
    spectral_norm_sq,
)
from .proxcalc import (
    EnvelopeView,
    envelope_gradient,
    envelope_strong_modulus,
    envelope_value,
    grad_fM,
    prox_group_l1l2,
    prox_l1,
    prox_metric_M,
    prox_nuclear,
    prox_of_envelope,
    prox_tv1d,
)
from .algorithms import (
    IGAHDConfig,
    IPAHDConfig,
    IterTrace,
    SCConfig,
    check_growth_discrete,
    descent_lemma_check,
    fista_run,
    igahd_energy,
    igahd_run,
    igahd_sc_run,
    ipahd_delta,
    ipahd_mu,
    ipahd_ns_run,
    ipahd_ns_sc_run,
    ipahd_run,
    ipahd_sc_run,
    theta_weighted_gradient_sum,
)
from .dynamics import (
    DampedSystemSpec,
    TrajectorySample,
    check_growth_continuous,
    default_grid,
    energy_continuous,
    integrate,
    integrate_first_order_form,
    sc_energy_continuous,
    w_and_delta,
)
from .closedform import (
    ClosedFormSpec,
    asymptotic_rate,
    closed_form_derivative,
    closed_form_eval,
    closed_form_trajectory,
    fit_closed_form_ic,
    rescaled_change_of_variable,
)
from .specfun import bessel_j, bessel_y, kummer_m, kummer_u, log_gamma

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "HypothesisViolation", "NumericsError", "StiffnessError",
    "ConvergenceError", "PoleError", "DomainError",
    "SmoothConvexProblem", "QuadraticProblem", "ProxFriendlyFunction",
    "CompositeRLS", "make_quadratic", "spectral_norm_sq", "composite_value",
    "metric_norm_sq",
    "EnvelopeView", "envelope_value", "envelope_gradient",
    "prox_of_envelope", "envelope_strong_modulus", "prox_l1",
    "prox_group_l1l2", "prox_tv1d", "prox_nuclear", "prox_metric_M",
    "grad_fM",
    "IterTrace", "IGAHDConfig", "IPAHDConfig", "SCConfig", "igahd_run",
    "igahd_energy", "fista_run", "ipahd_run", "ipahd_ns_run", "ipahd_mu",
    "ipahd_delta", "check_growth_discrete", "ipahd_sc_run",
    "ipahd_ns_sc_run", "igahd_sc_run", "theta_weighted_gradient_sum",
    "descent_lemma_check",
    "DampedSystemSpec", "TrajectorySample", "integrate",
    "integrate_first_order_form", "w_and_delta", "check_growth_continuous",
    "energy_continuous", "sc_energy_continuous", "default_grid",
    "ClosedFormSpec", "closed_form_eval", "closed_form_derivative",
    "fit_closed_form_ic", "closed_form_trajectory", "asymptotic_rate",
    "rescaled_change_of_variable",
    "kummer_m", "kummer_u", "bessel_j", "bessel_y", "log_gamma",
    "__version__",
]
