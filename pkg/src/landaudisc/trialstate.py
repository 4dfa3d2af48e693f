"""Boundary-matched trial states for the radial fiber operators.

The fiber operator acting on L^2((0, 1), r dr) is

    H_{m,b} = -d^2/dr^2 - (1/r) d/dr + (m/r - b r/2)^2.

For m < 0 it equals H_{|m|,b} + 2|m|b, so every computation here works with
m >= 0 and callers add the shift back (see :meth:`FiberSpec.reduced`).

The trial state is

    u(r) = r^m L^m_{n-1}(b r^2 / 2) (c1 e^{b(1-r^2)/4} + c2 e^{-b(1-r^2)/4})

with c1 = 1 and c2 chosen so that u meets the boundary condition at r = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from landaudisc.errors import DegenerateDenominator
from landaudisc.specfun import (
    LaguerreSpec,
    laguerre,
    laguerre_deriv,
    laguerre_deriv2,
)

_KINDS = ("dirichlet", "neumann", "robin")


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary condition at r = 1: u = 0, u' = 0 or u' = gamma u."""

    kind: str
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind != "robin" and self.gamma != 0.0:
            raise ValueError("gamma is only meaningful for a Robin condition")

    @classmethod
    def dirichlet(cls):
        return cls("dirichlet")

    @classmethod
    def neumann(cls):
        return cls("neumann")

    @classmethod
    def robin(cls, gamma: float):
        return cls("robin", float(gamma))

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        """Parse ``dirichlet``, ``neumann`` or ``robin:GAMMA``."""
        text = text.strip().lower()
        if text.startswith("robin:"):
            return cls.robin(float(text.split(":", 1)[1]))
        if text in ("dirichlet", "neumann"):
            return cls(text)
        raise ValueError(f"cannot parse boundary condition {text!r}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == "dirichlet"

    @property
    def robin_gamma(self) -> float:
        """gamma in u'(1) = gamma u(1); zero for Neumann (and unused for Dirichlet)."""
        return self.gamma if self.kind == "robin" else 0.0

    def __str__(self):
        if self.kind == "robin":
            return f"robin:{self.gamma:g}"
        return self.kind


@dataclass(frozen=True)
class FiberSpec:
    """One radial eigenproblem: angular momentum m, field b, boundary condition."""

    m: int
    b: float
    bc: BoundaryCondition

    def __post_init__(self):
        # b = 0 is allowed so the finite-element code can reach the Bessel limit
        if self.b < 0:
            raise ValueError(f"field strength must be non-negative, got {self.b}")

    @property
    def shift(self) -> float:
        """Eigenvalue offset 2|m|b picked up when m < 0 is reduced to |m|."""
        return 2.0 * abs(self.m) * self.b if self.m < 0 else 0.0

    def reduced(self) -> "FiberSpec":
        return FiberSpec(abs(self.m), self.b, self.bc) if self.m < 0 else self


@dataclass(frozen=True)
class TrialCoeffs:
    c1: float
    c2: float


@dataclass(frozen=True)
class TrialState:
    """u_{m,n} for a reduced spec (m >= 0) and branch index n >= 1."""

    spec: FiberSpec
    n: int
    coeffs: TrialCoeffs

    @classmethod
    def build(cls, spec: FiberSpec, n: int) -> "TrialState":
        spec = spec.reduced()
        return cls(spec, n, coefficients(spec.m, n, spec.b, spec.bc))

    @property
    def laguerre_spec(self) -> LaguerreSpec:
        return LaguerreSpec(self.spec.m, self.n - 1)


def trial_state(m: int, n: int, b: float, bc: BoundaryCondition) -> TrialState:
    return TrialState.build(FiberSpec(m, b, bc), n)


def coefficients(m: int, n: int, b: float, bc: BoundaryCondition) -> TrialCoeffs:
    """Coefficients (c1, c2) = (1, c2) matching the boundary condition."""
    if m < 0:
        raise ValueError("coefficients expects a reduced angular momentum m >= 0")
    if n < 1:
        raise ValueError("branch index n must be >= 1")
    if b <= 0:
        raise ValueError("trial states need b > 0")
    if bc.is_dirichlet:
        return TrialCoeffs(1.0, -1.0)
    g = bc.robin_gamma
    spec = LaguerreSpec(m, n - 1)
    lv = laguerre(spec, b / 2)
    dv = laguerre_deriv(spec, b / 2)
    num = (b / 2 - m + g) * lv - b * dv
    den_a = (b / 2 + m - g) * lv
    den_b = b * dv
    den = den_a + den_b
    if den == 0.0 or abs(den) <= 1e-12 * (abs(den_a) + abs(den_b)):
        raise DegenerateDenominator(
            f"coefficient denominator vanishes for m={m}, n={n}, b={b}, bc={bc}"
        )
    return TrialCoeffs(1.0, num / den)


def _profiles(ts: TrialState, r):
    b = ts.spec.b
    r = np.asarray(r, dtype=float)
    q = b * (1.0 - r * r) / 4.0
    ep = np.exp(q)
    em = np.exp(-q)
    s = b * r * r / 2.0
    return r, ep, em, s


def _out(x, r):
    return float(x) if np.ndim(r) == 0 else x


def eval_trial(ts: TrialState, r):
    """u_{m,n}(r) on [0, 1]; scalar or array input."""
    r_arr, ep, em, s = _profiles(ts, r)
    c = ts.coeffs
    val = r_arr**ts.spec.m * laguerre(ts.laguerre_spec, s) * (c.c1 * ep + c.c2 * em)
    return _out(val, r)


def eval_trial_deriv(ts: TrialState, r):
    """Analytic u'_{m,n}(r)."""
    r_arr, ep, em, s = _profiles(ts, r)
    m, b = ts.spec.m, ts.spec.b
    c = ts.coeffs
    lv = laguerre(ts.laguerre_spec, s)
    dv = laguerre_deriv(ts.laguerre_spec, s)
    env = c.c1 * ep + c.c2 * em
    denv = -(b * r_arr / 2.0) * (c.c1 * ep - c.c2 * em)
    rm = r_arr**m
    val = rm * (dv * b * r_arr * env + lv * denv)
    if m >= 1:
        val = val + m * r_arr ** (m - 1) * lv * env
    return _out(val, r)


def residual_R(ts: TrialState, r):
    """R_{m,n}(r) = H u - (2n-1) b u, the part produced by the c2 term."""
    r_arr, _, em, s = _profiles(ts, r)
    m, b = ts.spec.m, ts.spec.b
    lv = laguerre(ts.laguerre_spec, s)
    dv = laguerre_deriv(ts.laguerre_spec, s)
    val = -2.0 * b * ts.coeffs.c2 * r_arr**m * em * (2.0 * s * dv + (m + 1) * lv)
    return _out(val, r)


def apply_fiber_operator(ts: TrialState, r):
    """(H_{m,b} u)(r) through the identity H u = (2n-1) b u + R."""
    lam0 = (2 * ts.n - 1) * ts.spec.b
    val = lam0 * np.asarray(eval_trial(ts, r)) + np.asarray(residual_R(ts, r))
    return _out(val, r)


def boundary_residual(ts: TrialState) -> float:
    """Mismatch of the boundary condition at r = 1, scaled by max(|u|, |u'|, 1)."""
    u1 = eval_trial(ts, 1.0)
    du1 = eval_trial_deriv(ts, 1.0)
    bc = ts.spec.bc
    if bc.is_dirichlet:
        mismatch = u1
    else:
        mismatch = du1 - bc.robin_gamma * u1
    return abs(mismatch) / max(abs(u1), abs(du1), 1.0)


def same_sign_threshold(m: int, n: int, bc: BoundaryCondition, b_max: float = 50.0,
                        step: float = 0.25) -> float:
    """Smallest grid value b* such that c1 c2 > 0 for every grid b >= b*.

    Scans b over (0, b_max]; degenerate denominators count as failures.
    Returns ``inf`` when the property fails at b_max itself.
    """
    grid = np.arange(step, b_max + step / 2, step)
    threshold = float("inf")
    for b in grid[::-1]:
        try:
            c = coefficients(m, n, float(b), bc)
        except DegenerateDenominator:
            break
        if c.c1 * c.c2 <= 0:
            break
        threshold = float(b)
    return threshold


# --------------------------------------------------------------------------
# Differential identities behind the construction
# --------------------------------------------------------------------------

ODE_KINDS = ("f-equation", "v-equation", "laguerre-equation", "g-equation")


def _weighted_profile(m, n, b, r, kappa):
    """g = r^m e^{kappa r^2} v(r) with v(r) = L^m_{n-1}(b r^2/2): g, g', g'', v'."""
    spec = LaguerreSpec(m, n - 1)
    s = b * r * r / 2.0
    v = laguerre(spec, s)
    dl = laguerre_deriv(spec, s)
    d2l = laguerre_deriv2(spec, s)
    dv = dl * b * r
    d2v = d2l * (b * r) ** 2 + dl * b
    phi = r**m * np.exp(kappa * r * r)
    lead = m / r + 2.0 * kappa * r
    dphi = lead * phi
    d2phi = (lead * lead - m / r**2 + 2.0 * kappa) * phi
    g = phi * v
    dg = dphi * v + phi * dv
    d2g = d2phi * v + 2.0 * dphi * dv + phi * d2v
    return g, dg, d2g, dv, phi


def ode_residual_appendix(kind: str, m: int, n: int, b: float, point: float,
                          relative: bool = False) -> float:
    """Left-minus-right side of one of the identities used to build u_{m,n}.

    ``kind`` selects

    * ``f-equation``: H f - (2n-1) b f with f = r^m e^{-b r^2/4} v
    * ``v-equation``: -r v'' + (b r^2 - 2m - 1) v' - (2n-2) b r v
    * ``laguerre-equation``: s w'' + (m+1-s) w' + (n-1) w, with w = L^m_{n-1}
    * ``g-equation``: H g - (2n-2m-3) b g + 2 b r v' phi with g = phi v,
      phi = r^m e^{b r^2/4}

    ``point`` is r for the first, second and fourth kinds and s for the
    Laguerre equation.  With ``relative=True`` the residual is divided by the
    sum of the absolute values of the individual terms.
    """
    if kind not in ODE_KINDS:
        raise ValueError(f"unknown identity {kind!r}")
    x = float(point)
    if kind == "laguerre-equation":
        spec = LaguerreSpec(m, n - 1)
        terms = [
            x * laguerre_deriv2(spec, x),
            (m + 1 - x) * laguerre_deriv(spec, x),
            (n - 1) * laguerre(spec, x),
        ]
    elif kind == "v-equation":
        spec = LaguerreSpec(m, n - 1)
        s = b * x * x / 2.0
        v = laguerre(spec, s)
        dl = laguerre_deriv(spec, s)
        dv = dl * b * x
        d2v = laguerre_deriv2(spec, s) * (b * x) ** 2 + dl * b
        terms = [-x * d2v, (b * x * x - 2 * m - 1) * dv, -(2 * n - 2) * b * x * v]
    else:
        kappa = -b / 4.0 if kind == "f-equation" else b / 4.0
        g, dg, d2g, dv, phi = _weighted_profile(m, n, b, x, kappa)
        pot = (m / x - b * x / 2.0) ** 2
        terms = [-d2g, -dg / x, pot * g]
        if kind == "f-equation":
            terms.append(-(2 * n - 1) * b * g)
        else:
            terms += [-(2 * n - 2 * m - 3) * b * g, 2.0 * b * x * dv * phi]
    res = float(sum(terms))
    if relative:
        scale = float(sum(abs(t) for t in terms))
        return res / scale if scale > 0 else res
    return res
