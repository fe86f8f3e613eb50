"""Series evaluation of Kummer M/U and Bessel J/Y over complex scalars.

These four kernels are exactly what the closed-form trajectories of
the damped dynamics on quadratics need, so the module stays small on
purpose: ascending series with a hard term cap, the U connection
formula, and the Y reflection formula.  No asymptotic expansions.

Floating point is the delicate part.  The M series for z with large
negative real part (and the J series on the real axis) suffer
catastrophic cancellation: the largest term exceeds the sum by a
factor of roughly exp(|z| - Re z), so double precision loses that
many digits.  Plain compensated summation recovers one or two of
them, nowhere near enough at |z| = 60.  The fix here: estimate the
amplification up front, run the identical series in mpmath scalars
with just enough working digits when doubles cannot hold the target,
and fall back to a Kahan loop in the benign region.  The extended
path sums until terms drop below the working precision, not below
1e-16: the U connection formula feeds those sums into a difference
that cancels exp(Re z) of their size, so they have to be good to the
last working digit.
"""
from __future__ import annotations

import cmath
import math

import mpmath as _mp

from .errors import DomainError, PoleError

__all__ = [
    "ComplexScalar",
    "log_gamma",
    "kummer_m",
    "kummer_u",
    "bessel_j",
    "bessel_y",
]

# Complex arithmetic lives on the built-in complex type; re/im are its
# real and imag attributes.
ComplexScalar = complex

_MAX_TERMS = 10_000
_STOP_REL = 1e-16
_STOP_RUNS = 5
_LN10 = math.log(10.0)

# Lanczos approximation, g = 7, nine coefficients.
_LG = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _is_nonpositive_int(w: complex, tol: float = 1e-13) -> bool:
    r = round(w.real)
    return abs(w.imag) < tol and abs(w.real - r) < tol and r <= 0


def _is_int(w: complex, tol: float = 1e-9) -> bool:
    return abs(w.imag) < tol and abs(w.real - round(w.real)) < tol


def _sinpi(z: complex) -> complex:
    """sin(pi z) with the integer part of Re z subtracted first.

    Near a zero, sin(pi * z) evaluated directly inherits the absolute
    rounding of the large argument, which is a relative disaster; the
    reduced form stays accurate because z - n is exact in floating
    point there.
    """
    n = round(z.real)
    reduced = cmath.sin(math.pi * (z - n))
    return reduced if n % 2 == 0 else -reduced


def log_gamma(z) -> complex:
    """Principal log of the gamma function, Lanczos rational form.

    Reflection handles Re z < 1/2.  Accuracy is about 1e-12 for real
    parts in [-30, 30]; poles at nonpositive integers raise.
    """
    z = complex(z)
    if _is_nonpositive_int(z):
        raise PoleError(f"gamma pole at z={z}")
    if z.real < 0.5:
        return (math.log(math.pi) - cmath.log(_sinpi(z))
                - log_gamma(1.0 - z))
    zz = z - 1.0
    x = complex(_LANCZOS[0])
    for i in range(1, len(_LANCZOS)):
        x += _LANCZOS[i] / (zz + i)
    t = zz + _LG + 0.5
    return (0.5 * math.log(2.0 * math.pi) + (zz + 0.5) * cmath.log(t)
            - t + cmath.log(x))


def _gamma(z: complex) -> complex:
    return cmath.exp(log_gamma(z))


def _recip_gamma(z: complex) -> complex:
    """1/gamma, zero at the poles (entire function)."""
    if _is_nonpositive_int(z):
        return 0.0 + 0.0j
    return cmath.exp(-log_gamma(z))


def _dps_for(log_amp: float, extra: int = 0) -> int:
    return max(20, 17 + int(log_amp / _LN10) + 8 + extra)


def _kummer_series_float(a: complex, b: complex, z: complex) -> complex:
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    comp = 0.0 + 0.0j
    runs = 0
    for n in range(_MAX_TERMS):
        term = term * (a + n) / (b + n) * z / (n + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0 or abs(term) < _STOP_REL * abs(total):
            runs += 1
            if runs >= _STOP_RUNS:
                return total
        else:
            runs = 0
    raise DomainError(
        f"Kummer series did not converge in {_MAX_TERMS} terms "
        f"(a={a}, b={b}, z={z})")


def _kummer_series_mp(a: complex, b: complex, z: complex, dps: int):
    """Same series in mpmath scalars; returns an mpc at working dps."""
    with _mp.mp.workdps(dps):
        am, bm, zm = _mp.mpc(a), _mp.mpc(b), _mp.mpc(z)
        stop = _mp.mpf(10) ** (2 - dps)
        total = _mp.mpc(1)
        term = _mp.mpc(1)
        runs = 0
        for n in range(_MAX_TERMS):
            term = term * (am + n) / (bm + n) * zm / (n + 1)
            total += term
            if term == 0 or abs(term) < stop * abs(total):
                runs += 1
                if runs >= _STOP_RUNS:
                    return total
            else:
                runs = 0
    raise DomainError(
        f"Kummer series did not converge in {_MAX_TERMS} terms "
        f"(a={a}, b={b}, z={z})")


def kummer_m(a, b, z) -> complex:
    """Confluent hypergeometric M(a, b, z) by its ascending series.

    Terms are summed until five consecutive ones fall below 1e-16 of
    the running sum.  b at a nonpositive integer is a pole.
    """
    a, b, z = complex(a), complex(b), complex(z)
    if _is_nonpositive_int(b):
        raise PoleError(f"M(a, b, z) pole: b={b} is a nonpositive integer")
    if z == 0:
        return 1.0 + 0.0j
    log_amp = abs(z) - z.real
    if log_amp <= 6.0:
        return _kummer_series_float(a, b, z)
    return complex(_kummer_series_mp(a, b, z, _dps_for(log_amp)))


def kummer_u(a, b, z) -> complex:
    """Tricomi U(a, b, z) through the two-term connection formula.

        U = gamma(1-b)/gamma(a-b+1) M(a,b,z)
          + gamma(b-1)/gamma(a) z^(1-b) M(a-b+1, 2-b, z)

    Integer b sits on the unsupported branch (perturb it by ~1e-6 and
    average if needed).  A pole of a denominator gamma zeroes that
    term.  The two sides cancel to roughly exp(Re z) of their size, so
    for |z| beyond a few units the whole combination runs in extended
    precision, gamma factors included.
    """
    a, b, z = complex(a), complex(b), complex(z)
    if z == 0:
        raise DomainError("U(a, b, 0) is not defined here (z must be nonzero)")
    if _is_int(b):
        raise DomainError(
            f"integer b={b} is an unsupported branch of U; "
            "perturb b by about 1e-6")
    log_amp = abs(z)
    near = abs(b.real - round(b.real))
    extra = 0
    if near < 1e-3:
        extra = int(-math.log10(near)) + 2
    if log_amp <= 4.0 and extra == 0:
        c1 = _recip_gamma(a - b + 1) * _gamma(1 - b)
        c2 = _recip_gamma(a) * _gamma(b - 1)
        out = c1 * _kummer_series_float(a, b, z)
        if c2 != 0:
            out += (c2 * cmath.exp((1 - b) * cmath.log(z))
                    * _kummer_series_float(a - b + 1, 2 - b, z))
        return out
    dps = _dps_for(log_amp, extra)
    with _mp.mp.workdps(dps):
        am, bm, zm = _mp.mpc(a), _mp.mpc(b), _mp.mpc(z)

        def rgamma(w):
            if _is_nonpositive_int(complex(w)):
                return _mp.mpc(0)
            return 1 / _mp.gamma(w)

        c1 = rgamma(am - bm + 1) * _mp.gamma(1 - bm)
        c2 = rgamma(am) * _mp.gamma(bm - 1)
        total = _mp.mpc(0)
        if c1 != 0:
            total += c1 * _kummer_series_mp(a, b, z, dps)
        if c2 != 0:
            total += (c2 * _mp.power(zm, 1 - bm)
                      * _kummer_series_mp(a - b + 1, 2 - b, z, dps))
        return complex(total)


# ---------------------------------------------------------------------------
# Bessel


def _bessel_series(nu: float, z: complex) -> complex:
    """J_nu(z) for noninteger or nonnegative-integer nu, ascending series."""
    if z == 0:
        if nu == 0:
            return 1.0 + 0.0j
        if nu > 0:
            return 0.0 + 0.0j
        raise DomainError(f"J_nu(0) diverges for nu={nu} < 0")
    log_amp = abs(z) - abs(z.imag)
    u0 = _recip_gamma(complex(nu + 1.0))
    q = (z / 2.0) * (z / 2.0)
    if log_amp <= 6.0:
        total = u0
        term = u0
        comp = 0.0 + 0.0j
        runs = 0
        for m in range(_MAX_TERMS):
            term = -term * q / ((m + 1) * (nu + m + 1))
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            if term == 0 or abs(term) < _STOP_REL * abs(total):
                runs += 1
                if runs >= _STOP_RUNS:
                    break
            else:
                runs = 0
        else:
            raise DomainError(
                f"Bessel series did not converge in {_MAX_TERMS} terms "
                f"(nu={nu}, z={z})")
        s = total
    else:
        dps = _dps_for(log_amp)
        with _mp.mp.workdps(dps):
            qm = _mp.mpc(q)
            # keep nu in mpmath: forming nu + m + 1 in doubles loses
            # ~1e-16 per term, which the cancellation amplifies
            num = _mp.mpf(nu)
            stop = _mp.mpf(10) ** (2 - dps)
            term = _mp.mpc(u0)
            total = _mp.mpc(u0)
            runs = 0
            for m in range(_MAX_TERMS):
                term = -term * qm / ((m + 1) * (num + m + 1))
                total += term
                if term == 0 or abs(term) < stop * abs(total):
                    runs += 1
                    if runs >= _STOP_RUNS:
                        break
                else:
                    runs = 0
            else:
                raise DomainError(
                    f"Bessel series did not converge in {_MAX_TERMS} terms "
                    f"(nu={nu}, z={z})")
            s = complex(total)
    return cmath.exp(nu * cmath.log(z / 2.0)) * s


def _bessel_j_complex(nu: float, z: complex) -> complex:
    nu = float(nu)
    if abs(nu - round(nu)) < 1e-12 and nu < 0:
        n = int(round(-nu))
        return (-1.0) ** n * _bessel_series(float(n), z)
    return _bessel_series(nu, z)


def _bessel_y_complex(nu: float, z: complex) -> complex:
    nu = float(nu)
    if abs(nu - round(nu)) < 1e-9:
        n = round(nu)
        eps = 1e-6
        lo = _bessel_y_complex(n - eps, z)
        hi = _bessel_y_complex(n + eps, z)
        return 0.5 * (lo + hi)
    n = round(nu)
    sign = 1.0 if n % 2 == 0 else -1.0
    c = sign * math.cos(math.pi * (nu - n))
    s = sign * math.sin(math.pi * (nu - n))
    return (_bessel_j_complex(nu, z) * c - _bessel_j_complex(-nu, z)) / s


def bessel_j(nu: float, x: float) -> float:
    """Bessel function of the first kind, real order and argument."""
    val = _bessel_j_complex(float(nu), complex(x))
    if abs(val.imag) > 1e-8 * max(1.0, abs(val)):
        raise DomainError(
            f"J_{nu}({x}) is not real (got {val}); "
            "negative x with noninteger order")
    return val.real


def bessel_y(nu: float, x: float) -> float:
    """Bessel function of the second kind through the reflection
    formula; integer order by the two-sided average at nu +- 1e-6.
    """
    if x <= 0:
        raise DomainError(f"Y_nu needs x > 0, got x={x}")
    val = _bessel_y_complex(float(nu), complex(x))
    return val.real
