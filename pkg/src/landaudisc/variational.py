"""Closed-form inner products of trial states and the eigenvalue bounds built on them.

After the substitution s = b r^2 / 2 every inner product reduces to integrals
of s^k against e^{-s}, e^{s} or 1 over [0, b/2].  Polynomial coefficients are
kept as exact fractions until those integrals are taken:

* e^{z} int_0^z s^k e^{-s} ds = e^z k! - k! sum_{t<=k} z^t/t!
  (full-line moment minus the upper incomplete gamma tail, both exact),
* e^{-z} int_0^z s^k e^{s} ds via :func:`specfun.exp_lower_scaled`,
* int_0^z s^k ds = z^{k+1}/(k+1), exact.

Eigenvalue bounds are formed in "deviation" form around the Landau level
(2n-1) b so that exponentially small corrections are not lost to
cancellation against exponentially large norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from landaudisc.errors import NotPositiveDefinite, PreconditionViolated
from landaudisc.specfun import exp_lower_scaled, laguerre_coeffs
from landaudisc.trialstate import BoundaryCondition, TrialCoeffs, coefficients

DEFAULT_FLOOR_C = 2.0
# the Landau floor nu for lambda_{n+1} is only trusted in the large-field regime
TEMPLE_MIN_FIELD = 10.0


# --------------------------------------------------------------------------
# exact polynomial helpers
# --------------------------------------------------------------------------


def _mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, c in enumerate(q):
                out[i + j] += a * c
    return out


def _shift(p, k):
    return [Fraction(0)] * k + list(p)


def _laguerre_poly(m, n):
    return list(laguerre_coeffs(m, n - 1))


def _residual_poly(m, n):
    # 2 s L'(s) + (m + 1) L(s): coefficient of s^l is (2l + m + 1) a_l
    return [(2 * l + m + 1) * a for l, a in enumerate(laguerre_coeffs(m, n - 1))]


def _int_plain(q, z):
    zf = Fraction(z)
    total = Fraction(0)
    power = zf
    for k, a in enumerate(q):
        if a:
            total += a * power / (k + 1)
        power *= zf
    return float(total)


def _int_exp_minus(q, z):
    """e^{z} times the integral of q(s) e^{-s} over [0, z]."""
    zf = Fraction(z)
    moment = Fraction(0)
    tail = Fraction(0)
    for k, a in enumerate(q):
        if not a:
            continue
        kf = math.factorial(k)
        moment += a * kf
        partial = Fraction(0)
        term = Fraction(1)
        for t in range(k + 1):
            if t:
                term = term * zf / t
            partial += term
        tail += a * kf * partial
    return math.fsum([math.exp(z) * float(moment), -float(tail)])


def _int_exp_plus(q, z):
    """e^{-z} times the integral of q(s) e^{s} over [0, z]."""
    return math.fsum(float(a) * exp_lower_scaled(k, z) for k, a in enumerate(q) if a)


# --------------------------------------------------------------------------
# inner products
# --------------------------------------------------------------------------


def _prefactor(m, b):
    # r^{2m+1} dr = 2^m / b^{m+1} s^m ds
    return 2.0**m / b ** (m + 1)


def _check(m, b):
    if m < 0:
        raise ValueError("closed-form inner products need a reduced m >= 0")
    if b <= 0:
        raise ValueError("closed-form inner products need b > 0")


def inner_closed(m: int, i: int, j: int, b: float, ci: TrialCoeffs,
                 cj: TrialCoeffs) -> float:
    """<u_{m,i}, u_{m,j}> in L^2((0,1), r dr), exact finite sums."""
    _check(m, b)
    z = b / 2.0
    q = _shift(_mul(_laguerre_poly(m, i), _laguerre_poly(m, j)), m)
    parts = [
        ci.c1 * cj.c1 * _int_exp_minus(q, z),
        ci.c2 * cj.c2 * _int_exp_plus(q, z),
        (ci.c1 * cj.c2 + ci.c2 * cj.c1) * _int_plain(q, z),
    ]
    return _prefactor(m, b) * math.fsum(parts)


def norm_sq_closed(m: int, n: int, b: float, coeffs: TrialCoeffs) -> float:
    """||u_{m,n}||^2 as an exact finite sum (not the large-b asymptotics)."""
    return inner_closed(m, n, n, b, coeffs, coeffs)


def residual_inner_closed(m: int, i: int, j: int, b: float, ci: TrialCoeffs,
                          cj: TrialCoeffs) -> float:
    """<R_{m,i}, u_{m,j}>."""
    _check(m, b)
    z = b / 2.0
    q = _shift(_mul(_residual_poly(m, i), _laguerre_poly(m, j)), m)
    inner = math.fsum([cj.c1 * _int_plain(q, z), cj.c2 * _int_exp_plus(q, z)])
    return -2.0 * b * ci.c2 * _prefactor(m, b) * inner


def residual_norm_sq_closed(m: int, n: int, b: float, coeffs: TrialCoeffs) -> float:
    """||R_{m,n}||^2."""
    _check(m, b)
    p = _residual_poly(m, n)
    q = _shift(_mul(p, p), m)
    return 4.0 * b * b * coeffs.c2**2 * _prefactor(m, b) * _int_exp_plus(q, b / 2.0)


@dataclass
class GramPair:
    """Gram and H-Gram matrices of {u_{m,1}, ..., u_{m,n_max}}.

    ``rinner[i, j]`` holds <R_{m,i+1}, u_{m,j+1}>; ``hgram`` is built from it
    as (2i-1) b gram + rinner and then symmetrized (``asymmetry`` records
    the largest relative off-diagonal mismatch before that).
    """

    m: int
    b: float
    bc: BoundaryCondition
    coeffs: list
    gram: np.ndarray
    hgram: np.ndarray
    rinner: np.ndarray
    asymmetry: float = field(default=0.0)

    @property
    def levels(self) -> np.ndarray:
        return (2.0 * np.arange(1, len(self.coeffs) + 1) - 1.0) * self.b


def _first_bad_minor(scaled):
    for k in range(1, scaled.shape[0] + 1):
        try:
            np.linalg.cholesky(scaled[:k, :k])
        except np.linalg.LinAlgError:
            return k
    return None


def gram_pair(m: int, n_max: int, b: float, bc: BoundaryCondition,
              check_pd: bool = True) -> GramPair:
    """Closed-form Gram / H-Gram pair for the first ``n_max`` trial states."""
    _check(m, b)
    coeffs = [coefficients(m, i, b, bc) for i in range(1, n_max + 1)]
    gram = np.empty((n_max, n_max))
    rinner = np.empty((n_max, n_max))
    for i in range(n_max):
        for j in range(n_max):
            if j >= i:
                gram[i, j] = inner_closed(m, i + 1, j + 1, b, coeffs[i], coeffs[j])
            else:
                gram[i, j] = gram[j, i]
            rinner[i, j] = residual_inner_closed(m, i + 1, j + 1, b, coeffs[i], coeffs[j])
    levels = (2.0 * np.arange(1, n_max + 1) - 1.0) * b
    raw = levels[:, None] * gram + rinner
    asym = 0.0
    for i in range(n_max):
        for j in range(i + 1, n_max):
            denom = max(abs(raw[i, j]), abs(raw[j, i]))
            if denom > 0:
                asym = max(asym, abs(raw[i, j] - raw[j, i]) / denom)
    hgram = 0.5 * (raw + raw.T)
    gp = GramPair(m, b, bc, coeffs, gram, hgram, rinner, asym)
    if check_pd:
        d = 1.0 / np.sqrt(np.abs(np.diag(gram)))
        bad = _first_bad_minor(gram * d[:, None] * d[None, :])
        if bad is not None or np.any(np.diag(gram) <= 0):
            raise NotPositiveDefinite(
                f"trial Gram matrix not positive definite for m={m}, b={b}, "
                f"bc={bc} (leading minor {bad or 1})",
                minor=bad or 1,
            )
    return gp


# --------------------------------------------------------------------------
# eigenvalue bounds
# --------------------------------------------------------------------------


def rayleigh_ritz_upper(m: int, b: float, n: int, bc: BoundaryCondition) -> list[float]:
    """Ascending Ritz values of the trial span; the k-th bounds lambda_k from above.

    Negative m is reduced to |m| and 2|m|b is added back.
    """
    shift = 2.0 * abs(m) * b if m < 0 else 0.0
    gp = gram_pair(abs(m), n, b, bc)
    d = 1.0 / np.sqrt(np.diag(gp.gram))
    g = gp.gram * d[:, None] * d[None, :]
    h = gp.hgram * d[:, None] * d[None, :]
    # eigh reduces the pencil through a Cholesky factor of g
    vals = scipy.linalg.eigh(h, g, eigvals_only=True)
    return [float(v) + shift for v in np.sort(vals)]


@dataclass(frozen=True)
class BracketResult:
    m: int
    n: int
    b: float
    bc: BoundaryCondition
    lower: float
    upper: float
    floor_used: float
    mu_used: float
    preconditions_ok: bool


@dataclass(frozen=True)
class TempleTerms:
    """||u||^2, <Hu,u>, <Hu,Hu> and the residual pieces they are built from."""

    norm_sq: float
    r_inner: float
    r_norm_sq: float
    level: float

    @property
    def h_inner(self) -> float:
        return self.level * self.norm_sq + self.r_inner

    @property
    def h_norm_sq(self) -> float:
        # <Hu,Hu> = (2n-1) b <Hu,u> + <Hu,R>,  <Hu,R> = (2n-1) b <u,R> + ||R||^2
        return self.level * self.h_inner + self.level * self.r_inner + self.r_norm_sq

    @property
    def rayleigh(self) -> float:
        return self.level + self.r_inner / self.norm_sq


def temple_terms(m: int, n: int, b: float, bc: BoundaryCondition) -> TempleTerms:
    _check(m, b)
    c = coefficients(m, n, b, bc)
    return TempleTerms(
        norm_sq=norm_sq_closed(m, n, b, c),
        r_inner=residual_inner_closed(m, n, n, b, c, c),
        r_norm_sq=residual_norm_sq_closed(m, n, b, c),
        level=(2 * n - 1) * b,
    )


def temple_quotient(terms: TempleTerms, nu: float) -> float:
    """(nu <Hu,u> - <Hu,Hu>) / (nu ||u||^2 - <Hu,u>), evaluated around the level."""
    gap = nu - terms.level
    num = terms.r_inner * gap - terms.r_norm_sq
    den = terms.norm_sq * gap - terms.r_inner
    return terms.level + num / den


def landau_floor(n: int, b: float, C: float) -> float:
    return (2 * n - 1) * b - C


def temple_lower(m: int, b: float, n: int, bc: BoundaryCondition,
                 floor_constant: float = DEFAULT_FLOOR_C,
                 strict: bool = True) -> BracketResult:
    """Temple lower bound for lambda_n with the single trial state u_{m,n}.

    The neighbours are controlled by nu = (2n+1) b - C (floor for lambda_{n+1})
    and mu = (2n-3) b + 1 (n >= 2; no lower neighbour for n = 1).  The floor
    is an asymptotic statement, so b < TEMPLE_MIN_FIELD counts as a failed
    precondition too.  On a failed precondition a
    :class:`PreconditionViolated` is raised, or with ``strict=False`` a
    result with ``preconditions_ok=False`` and ``lower = nan`` is returned.
    """
    shift = 2.0 * abs(m) * b if m < 0 else 0.0
    mm = abs(m)
    nu = landau_floor(n + 1, b, floor_constant)
    mu = (2 * n - 3) * b + 1.0 if n >= 2 else -math.inf
    terms = temple_terms(mm, n, b, bc)
    rho = terms.rayleigh
    ok = mu < rho < nu and b >= TEMPLE_MIN_FIELD
    if not ok:
        if b < TEMPLE_MIN_FIELD:
            side, msg = "b", f"b={b} is below the large-field regime b >= {TEMPLE_MIN_FIELD:g}"
        else:
            side = "nu" if rho >= nu else "mu"
            msg = (f"Rayleigh quotient {rho:.6g} outside ({mu:.6g}, {nu:.6g}) "
                   f"for m={m}, n={n}, b={b}, bc={bc}")
        if strict:
            raise PreconditionViolated(msg, side=side)
        lower = math.nan
    else:
        lower = temple_quotient(terms, nu) + shift
    try:
        upper = rayleigh_ritz_upper(mm, b, n, bc)[n - 1] + shift
    except NotPositiveDefinite:
        if strict:
            raise
        upper = math.nan
    return BracketResult(m, n, b, bc, lower, upper, nu + shift, mu + shift, ok)


# --------------------------------------------------------------------------
# large-b asymptotics
# --------------------------------------------------------------------------


def asymptotic_correction(m: int, n: int, b: float) -> float:
    """e^{-b/2} b^{2n+m} / ((n-1)! (m+n-1)! 2^{2(n-1)+m}) for m >= 0."""
    if m < 0:
        raise ValueError("asymptotic_correction expects a reduced m >= 0")
    log_val = (
        -b / 2.0
        + (2 * n + m) * math.log(b)
        - math.lgamma(n)
        - math.lgamma(m + n)
        - (2 * (n - 1) + m) * math.log(2.0)
    )
    return math.exp(log_val)


def asymptotic_eig(m: int, n: int, b: float, bc: BoundaryCondition) -> float:
    """Two-term large-b expansion of lambda_n for the fiber m.

    Dirichlet carries a + sign on the exponential term, Neumann a - sign.
    A Robin condition uses the Neumann expansion since the correction does
    not depend on gamma at this order.  Negative m is evaluated at |m| and
    shifted by 2|m|b.
    """
    if n < 1:
        raise ValueError("branch index n must be >= 1")
    sign = 1.0 if bc.is_dirichlet else -1.0
    mm = abs(m)
    base = (2 * n - 1 + abs(m) - m) * b
    return base + sign * asymptotic_correction(mm, n, b)
