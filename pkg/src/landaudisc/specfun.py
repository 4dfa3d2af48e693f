"""Double-precision special functions used by the trial-state and oracle code.

Everything here is a pure function of its arguments.  Scalar arguments give
Python floats back; numpy arrays are accepted wherever it is cheap to do so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from landaudisc.errors import InvalidC, NonConvergence

KUMMER_TOL = 1e-17
KUMMER_MAX_TERMS = 1_000_000

_EXACT_FACTORIAL_MAX = 20


def factorial(k: int) -> float:
    """k! as a float; exact integer arithmetic up to 20!, log-gamma above."""
    if k < 0:
        raise ValueError(f"factorial of negative integer {k}")
    if k <= _EXACT_FACTORIAL_MAX:
        return float(math.factorial(k))
    return math.exp(math.lgamma(k + 1))


def binomial(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    if n <= _EXACT_FACTORIAL_MAX:
        return float(math.comb(n, k))
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def _as_output(x, like):
    if np.ndim(like) == 0 and np.ndim(x) == 0:
        return float(x)
    return x


# --------------------------------------------------------------------------
# Associated Laguerre polynomials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LaguerreSpec:
    """Associated Laguerre polynomial L^m_deg (superscript m, degree deg)."""

    m: int
    deg: int

    def __post_init__(self):
        if self.m < 0 or self.deg < 0:
            raise ValueError(f"LaguerreSpec needs m >= 0 and deg >= 0, got {self}")

    def coefficients(self) -> tuple[Fraction, ...]:
        """Exact monomial coefficients, lowest power first."""
        return laguerre_coeffs(self.m, self.deg)


@lru_cache(maxsize=None)
def laguerre_coeffs(m: int, deg: int) -> tuple[Fraction, ...]:
    """Coefficients of sum_l (-1)^l / l! * C(deg+m, deg-l) s^l, exactly."""
    return tuple(
        Fraction((-1) ** l * math.comb(deg + m, deg - l), math.factorial(l))
        for l in range(deg + 1)
    )


def _laguerre_rec(m: int, deg: int, s):
    # three-term recurrence in the degree
    s = np.asarray(s, dtype=float)
    if deg == 0:
        return np.ones_like(s)
    prev = np.ones_like(s)
    cur = 1.0 + m - s
    for k in range(1, deg):
        prev, cur = cur, ((2 * k + m + 1 - s) * cur - (k + m) * prev) / (k + 1)
    return cur


def laguerre(spec: LaguerreSpec, s):
    """Evaluate L^m_deg(s) by the three-term recurrence in the degree."""
    return _as_output(_laguerre_rec(spec.m, spec.deg, s), s)


def laguerre_deriv(spec: LaguerreSpec, s):
    """d/ds L^m_deg(s).

    The shifted-index sum for the derivative is, term by term, the
    expansion of -L^{m+1}_{deg-1}; evaluating the latter by recurrence keeps
    the large-s cancellation under control.
    """
    if spec.deg == 0:
        return _as_output(np.zeros_like(np.asarray(s, dtype=float)), s)
    return _as_output(-_laguerre_rec(spec.m + 1, spec.deg - 1, s), s)


def laguerre_deriv2(spec: LaguerreSpec, s):
    """Second derivative, L^{m+2}_{deg-2}(s)."""
    if spec.deg < 2:
        return _as_output(np.zeros_like(np.asarray(s, dtype=float)), s)
    return _as_output(_laguerre_rec(spec.m + 2, spec.deg - 2, s), s)


def laguerre_monomial(spec: LaguerreSpec, s):
    """Direct monomial sum; only sensible for small degree (used as an oracle)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for c in reversed(spec.coefficients()):
        out = out * s + float(c)
    return _as_output(out, s)


# --------------------------------------------------------------------------
# Integer-shape incomplete gamma integrals
# --------------------------------------------------------------------------


def gamma_upper_scaled(k: int, z: float) -> float:
    """e^z * Gamma(k+1, z) = k! * sum_{t<=k} z^t / t!  (a polynomial in z)."""
    if k < 0 or z < 0:
        raise ValueError("gamma_upper_scaled needs k >= 0 and z >= 0")
    term = 1.0
    total = 1.0
    for t in range(1, k + 1):
        term *= z / t
        total += term
    return factorial(k) * total


def gamma_upper_int(k: int, z: float) -> float:
    """Integral of s^k e^{-s} over [z, inf)."""
    return math.exp(-z) * gamma_upper_scaled(k, z)


def exp_lower_scaled(k: int, z: float) -> float:
    """e^{-z} times the integral of e^s s^k over [0, z].

    For z >= k the forward recurrence J_k = z^k - k J_{k-1} is stable
    (error growth k!/z^k <= 1).  Below that it loses digits, so the
    all-positive power series sum_j z^{k+j+1} / (j! (k+j+1)) is used.
    """
    if k < 0 or z < 0:
        raise ValueError("exp_lower_scaled needs k >= 0 and z >= 0")
    if z == 0.0:
        return 0.0
    if z >= k:
        j = -math.expm1(-z)
        for t in range(1, k + 1):
            j = z**t - t * j
        return j
    term = z ** (k + 1)
    total = term / (k + 1)
    jj = 0
    while True:
        jj += 1
        term *= z / jj
        inc = term / (k + jj + 1)
        total += inc
        if inc <= 1e-17 * total:
            break
    return math.exp(-z) * total


def exp_lower_int(k: int, z: float) -> float:
    """Integral of e^s s^k over [0, z]."""
    return math.exp(z) * exp_lower_scaled(k, z)


# --------------------------------------------------------------------------
# Kummer's confluent hypergeometric function M(a, c, z)
# --------------------------------------------------------------------------


def _check_c(c):
    if c <= 0 and float(c).is_integer():
        raise InvalidC(f"Kummer M undefined for c = {c}")


def _kummer_scalar(a: float, c: float, z: float) -> float:
    # same stopping rule as the array path, without numpy overhead
    term = total = scale = 1.0
    k = 0
    while True:
        if k >= KUMMER_MAX_TERMS:
            raise NonConvergence(f"Kummer series did not converge in {KUMMER_MAX_TERMS} terms")
        term *= (a + k) * z / ((c + k) * (k + 1))
        k += 1
        total += term
        scale = max(scale, abs(total), abs(term))
        if abs(term) <= KUMMER_TOL * scale and k > -a and k + 1 > 4.0 * z:
            return total


def kummer_m(a, c: float, z):
    """Kummer's function M(a, c, z) by its power series.

    ``a`` and ``z`` may be arrays (broadcast together).  Summation stops
    once the current term is below 1e-17 of the largest partial sum and the
    terms are past the point where they decrease geometrically; the
    magnitude-based stop keeps working near roots of M.
    """
    _check_c(c)
    if np.ndim(a) == 0 and np.ndim(z) == 0:
        return _kummer_scalar(float(a), float(c), float(z))
    a_arr = np.asarray(a, dtype=float)
    z_arr = np.asarray(z, dtype=float)
    a_b, z_b = np.broadcast_arrays(a_arr, z_arr)
    term = np.ones(a_b.shape)
    total = np.ones(a_b.shape)
    scale = np.ones(a_b.shape)
    active = np.ones(a_b.shape, dtype=bool)
    k = 0
    while active.any():
        if k >= KUMMER_MAX_TERMS:
            raise NonConvergence(
                f"Kummer series did not converge in {KUMMER_MAX_TERMS} terms"
            )
        term = term * (a_b + k) * z_b / ((c + k) * (k + 1))
        k += 1
        total = total + np.where(active, term, 0.0)
        scale = np.maximum(scale, np.maximum(np.abs(total), np.abs(term)))
        done = (
            (np.abs(term) <= KUMMER_TOL * scale)
            & (k > -a_b)
            & (k + 1 > 4.0 * z_b)
        )
        active &= ~done
    return float(total) if total.ndim == 0 else total


def kummer_m_dz(a, c: float, z):
    """dM/dz(a, c, z) = (a / c) M(a + 1, c + 1, z)."""
    _check_c(c)
    a_arr = np.asarray(a, dtype=float)
    out = (a_arr / c) * np.asarray(kummer_m(a_arr + 1.0, c + 1.0, z))
    return float(out) if out.ndim == 0 else out
