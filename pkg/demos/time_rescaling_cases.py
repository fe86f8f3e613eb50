"""
Time rescaling: four coefficient regimes, four decay rates
==========================================================

The coefficient b(t) in front of the gradient acts as a time rescaling.
The decay guarantee for the objective gap is O(1/(t^2 b(t))) provided
the growth conditions hold:

    G2:  b(t) > beta'(t) + beta(t)/t
    G3:  t w'(t) <= (alpha - 3) w(t),   w = b - beta' - beta/t

So b = 1 gives the classical 1/t^2, while b growing like t^2 pushes the
rate to 1/t^4.  This script runs four regimes on the degenerate
quadratic f(x) = (x1 + x2)^2 / 2 (one zero eigenvalue, so the problem
is convex but not strongly convex) and compares the fitted slopes with
the certificates.
"""
import numpy as np

from hessdamp import (DampedSystemSpec, check_growth_continuous,
                      closed_form_trajectory, default_grid, integrate,
                      make_quadratic)
from hessdamp.harness import peak_subseries, rate_fit

rot = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
problem = make_quadratic([2.0, 0.0], basis=rot)
alpha = 5.0
x0 = np.array([1.0, 1.0])
v0 = np.zeros(2)
T = 100.0

# Each regime: its coefficients as a DampedSystemSpec (for the
# certificates) plus the route that produces the trajectory.  Constant
# or power-law coefficients have exact mode solutions, so those go
# through closed_form_trajectory; the beta = 0 regime integrates
# directly.
cases = [
    ("beta=1, b=1", 2.0,
     DampedSystemSpec(alpha=alpha, beta_fn=lambda t: 1.0,
                      b_fn=lambda t: 1.0, problem=problem, t0=2.0,
                      beta_deriv=lambda t: 0.0, b_deriv=lambda t: 0.0),
     dict(beta=1.0, b=1.0)),
    ("beta=1, b=1+1/t", 1.0,
     DampedSystemSpec(alpha=alpha, beta_fn=lambda t: 1.0,
                      b_fn=lambda t: 1.0 + 1.0 / t, problem=problem,
                      t0=1.0, beta_deriv=lambda t: 0.0,
                      b_deriv=lambda t: -1.0 / t ** 2),
     dict(beta=1.0, b=1.0, gamma_coef=1.0)),
    ("beta=0, b=t^2", 1.0,
     DampedSystemSpec(alpha=alpha, beta_fn=lambda t: 0.0,
                      b_fn=lambda t: t * t, problem=problem, t0=1.0,
                      beta_deriv=lambda t: 0.0, b_deriv=lambda t: 2.0 * t),
     None),
    ("beta=t^3, b=5t^2", 1.0,
     DampedSystemSpec(alpha=alpha, beta_fn=lambda t: t ** 3,
                      b_fn=lambda t: 5.0 * t * t, problem=problem, t0=1.0,
                      beta_deriv=lambda t: 3.0 * t * t,
                      b_deriv=lambda t: 10.0 * t),
     dict(family2=(3.0, 5.0))),
]

print("%-18s %-5s %-5s %8s" % ("regime", "G2", "G3", "slope"))
for label, t0, spec, cf_kwargs in cases:
    # certificates checked at a few times across the span
    checks = [check_growth_continuous(spec, t)
              for t in (t0 + 0.5, 10.0, 50.0, T)]
    g2 = all(c["G2"] for c in checks)
    g3 = all(c["G3"] for c in checks)

    if cf_kwargs is None:
        samples = integrate(spec, x0, v0, T=T, tol=1e-10)
    else:
        samples = closed_form_trajectory(problem, alpha, t0, x0, v0,
                                         default_grid(t0, T),
                                         with_velocity=False, **cf_kwargs)
    pairs = [(s.t, s.f_gap) for s in samples]

    # oscillating gaps dip far below their envelope between bursts, so
    # fit through the local maxima when there are enough of them
    peaks = [p for p in peak_subseries(pairs) if 10.0 <= p[0] <= T]
    fit = rate_fit(peaks if len(peaks) >= 10 else pairs,
                   window=(10.0, T), mode="poly")
    print("%-18s %-5s %-5s %8.2f" % (label, g2, g3, fit.slope))

print()
print("the first two certify O(1/t^2); the t^2 rescalings certify")
print("O(1/t^4), and the fitted slopes sit at or below those bounds")
print("(with beta > 0 and b constant the active mode actually decays")
print("exponentially, which is why the first two slopes are so steep)")
