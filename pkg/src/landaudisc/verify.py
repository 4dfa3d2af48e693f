"""Self-check suites behind ``landaudisc verify``.

Each suite is a list of :class:`Check` results comparing a measured quantity
with a threshold.  They are small enough to run in a few seconds and use
scipy (quadrature, Bessel zeros, incomplete gamma) as the outside reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.integrate
import scipy.special

from landaudisc import fibersolver, kummeroracle, specfun, trialstate, variational
from landaudisc.errors import DegenerateDenominator, LandauDiscError, PreconditionViolated
from landaudisc.trialstate import BoundaryCondition, FiberSpec

DIRICHLET = BoundaryCondition.dirichlet()
NEUMANN = BoundaryCondition.neumann()


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status}  {self.suite:<11s} {self.name:<40s} "
                f"measured={self.measured:.3e}  threshold={self.threshold:.1e}")
        return f"{text}  ({self.note})" if self.note else text


def _check(suite, name, measured, threshold, note=""):
    measured = float(measured)
    return Check(suite, name, measured, threshold, bool(measured <= threshold), note)


def _guarded(suite, name, threshold, fn: Callable[[], float]) -> Check:
    try:
        return _check(suite, name, fn(), threshold)
    except LandauDiscError as exc:
        return Check(suite, name, math.inf, threshold, False, f"{type(exc).__name__}: {exc}")


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


# --------------------------------------------------------------------------


def suite_specfun() -> list[Check]:
    s = "specfun"

    def bridge():
        worst = 0.0
        for m in range(4):
            for k in range(6):
                poch = math.prod(m + 1 + j for j in range(k))
                for x in (0.5, 3.0, 10.0):
                    lhs = specfun.kummer_m(-k, m + 1, x)
                    rhs = math.factorial(k) / poch * specfun.laguerre(specfun.LaguerreSpec(m, k), x)
                    worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
        return worst

    def kummer_transform():
        worst = 0.0
        for a, c, z in [(0.3, 1.0, 4.0), (-2.7, 2.0, 4.0), (1.5, 4.0, 7.0), (-0.4, 3.0, 2.0)]:
            lhs = specfun.kummer_m(a, c, z)
            rhs = math.exp(z) * specfun.kummer_m(c - a, c, -z)
            worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
        return worst

    def laguerre_forms():
        worst = 0.0
        for m in range(4):
            for deg in range(7):
                spec = specfun.LaguerreSpec(m, deg)
                for x in (0.1, 1.0, 5.0, 12.0):
                    a = specfun.laguerre(spec, x)
                    b = specfun.laguerre_monomial(spec, x)
                    worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        return worst

    def incomplete_gamma():
        worst = 0.0
        for k in range(8):
            for z in (0.5, 5.0, 15.0):
                ref = scipy.special.gammaincc(k + 1, z) * math.factorial(k)
                worst = max(worst, _rel(specfun.gamma_upper_int(k, z), ref))
                quad, _ = scipy.integrate.quad(lambda s: s**k * math.exp(s - z), 0.0, z,
                                               epsabs=0, epsrel=1e-13)
                worst = max(worst, _rel(specfun.exp_lower_scaled(k, z), quad))
        return worst

    return [
        _check(s, "Kummer-Laguerre bridge", bridge(), 1e-12),
        _check(s, "Kummer transformation", kummer_transform(), 1e-10),
        _check(s, "Laguerre recurrence vs monomial", laguerre_forms(), 1e-11),
        _check(s, "incomplete gamma integrals", incomplete_gamma(), 1e-11),
    ]


def suite_trial() -> list[Check]:
    s = "trial"

    skipped = []

    def boundary():
        worst = 0.0
        for bc in (DIRICHLET, NEUMANN, BoundaryCondition.robin(1.0)):
            for m in range(6):
                for n in range(1, 5):
                    for b in (10.0, 20.0, 30.0, 40.0):
                        try:
                            ts = trialstate.trial_state(m, n, b, bc)
                        except DegenerateDenominator:
                            skipped.append((m, n, b, str(bc)))
                            continue
                        worst = max(worst, trialstate.boundary_residual(ts))
        return worst

    def identities():
        worst = 0.0
        for kind in trialstate.ODE_KINDS:
            for m in range(4):
                for n in range(1, 4):
                    for b in (8.0, 20.0):
                        for x in np.linspace(0.05, 1.0, 7):
                            pt = b * x * x / 2 if kind == "laguerre-equation" else x
                            res = trialstate.ode_residual_appendix(kind, m, n, b, pt, relative=True)
                            worst = max(worst, abs(res))
        return worst

    def operator_fd():
        # central second differences of u against H u = (2n-1) b u + R
        worst = 0.0
        h = 1e-4
        for m, n, b in [(0, 1, 10.0), (1, 2, 15.0), (3, 1, 20.0)]:
            ts = trialstate.trial_state(m, n, b, NEUMANN)
            for r in (0.3, 0.6, 0.9):
                u = trialstate.eval_trial(ts, r)
                d1 = trialstate.eval_trial_deriv(ts, r)
                d2 = (trialstate.eval_trial(ts, r + h) - 2 * u + trialstate.eval_trial(ts, r - h)) / h**2
                hu = -d2 - d1 / r + (m / r - b * r / 2) ** 2 * u
                ref = trialstate.apply_fiber_operator(ts, r)
                worst = max(worst, abs(hu - ref) / max(abs(ref), abs((2 * n - 1) * b * u), 1e-12))
        return worst

    return [
        _check(s, "boundary condition residual", boundary(), 1e-9,
               f"{len(skipped)} degenerate (m, n, b) skipped" if skipped else ""),
        _check(s, "differential identities (relative)", identities(), 1e-8),
        _check(s, "H u vs finite differences", operator_fd(), 1e-5),
    ]


def _quad_inner(f, g, panels=32, points=40):
    # composite Gauss-Legendre of int_0^1 f g r dr
    x, w = np.polynomial.legendre.leggauss(points)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = np.diff(edges)[:, None]
    r = (edges[:-1, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    wr = (0.5 * h * w[None, :]).ravel() * r
    return float(np.sum(wr * f(r) * g(r)))


def suite_variational(floor_c: float = variational.DEFAULT_FLOOR_C) -> list[Check]:
    s = "variational"

    def gram():
        worst = 0.0
        for bc in (DIRICHLET, NEUMANN):
            for m in range(3):
                gp = variational.gram_pair(m, 3, 20.0, bc)
                states = [trialstate.trial_state(m, n, 20.0, bc) for n in (1, 2, 3)]
                for i in range(3):
                    for j in range(i, 3):
                        ui = lambda r, t=states[i]: trialstate.eval_trial(t, r)
                        uj = lambda r, t=states[j]: trialstate.eval_trial(t, r)
                        huj = lambda r, t=states[j]: trialstate.apply_fiber_operator(t, r)
                        g = _quad_inner(ui, uj)
                        hg = _quad_inner(ui, huj)
                        worst = max(worst, _rel(gp.gram[i, j], g), _rel(gp.hgram[i, j], hg))
        return worst

    def bracket():
        worst = -math.inf
        for bc in (DIRICHLET, NEUMANN):
            for m, n in [(0, 1), (1, 1), (0, 2)]:
                br = variational.temple_lower(m, 25.0, n, bc, floor_constant=floor_c)
                fem = fibersolver.fem_eigenvalues(m, 25.0, bc, n)[n - 1]
                worst = max(worst, br.lower - fem, fem - br.upper)
        return worst

    checks = [_check(s, "closed form vs quadrature", gram(), 1e-9)]
    try:
        checks.append(_check(s, "bracket ordering (max violation)", bracket(), 0.0,
                             f"floor C={floor_c:g}"))
    except PreconditionViolated as exc:
        checks.append(Check(s, "bracket ordering (max violation)", math.inf, 0.0, False,
                            f"PreconditionViolated on the {exc.side} side: {exc}"))
    except LandauDiscError as exc:
        checks.append(Check(s, "bracket ordering (max violation)", math.inf, 0.0, False,
                            f"{type(exc).__name__}: {exc}"))
    return checks


def suite_fiber() -> list[Check]:
    s = "fiber"
    j01 = scipy.special.jn_zeros(0, 1)[0]
    j11 = scipy.special.jn_zeros(1, 1)[0]

    def shift():
        op_pos = fibersolver.assemble(FiberSpec(2, 12.0, NEUMANN), fibersolver.mesh_policy(12.0))
        op_neg = fibersolver.assemble(FiberSpec(-2, 12.0, NEUMANN), fibersolver.mesh_policy(12.0))
        diff = op_neg.stiffness - op_pos.stiffness - 2 * 2 * 12.0 * op_pos.mass
        return abs(diff).max()

    def robin_limit():
        lr = fibersolver.fem_eigenvalues(1, 15.0, BoundaryCondition.robin(1e-6), 2)
        ln = fibersolver.fem_eigenvalues(1, 15.0, NEUMANN, 2)
        return float(np.max(np.abs(lr - ln)))

    return [
        _guarded(s, "Dirichlet b=0 lambda_1 vs j01^2",
                 1e-6, lambda: _rel(fibersolver.fem_eigenvalues(0, 0.0, DIRICHLET, 1)[0], j01**2)),
        _guarded(s, "Neumann b=0 lambda_1 = 0",
                 1e-9, lambda: abs(fibersolver.fem_eigenvalues(0, 0.0, NEUMANN, 1)[0])),
        _guarded(s, "Neumann b=0 lambda_2 vs j11^2",
                 1e-6, lambda: _rel(fibersolver.fem_eigenvalues(0, 0.0, NEUMANN, 2)[1], j11**2)),
        _guarded(s, "shift identity at matrix level", 1e-12, shift),
        _guarded(s, "Robin gamma -> 0 continuity", 1e-4, robin_limit),
    ]


def suite_kummer() -> list[Check]:
    s = "kummer"

    def cross():
        worst = 0.0
        for bc in (DIRICHLET, NEUMANN, BoundaryCondition.robin(1.0)):
            for m in (0, 2):
                fem = fibersolver.fem_eigenvalues(m, 20.0, bc, 3)
                kum = kummeroracle.fiber_eigenvalues(m, 20.0, bc, 3)
                worst = max(worst, max(abs(f - k) / (1 + k) for f, k in zip(fem, kum)))
        return worst

    def ordering():
        worst = -math.inf
        for m in range(3):
            d = kummeroracle.fiber_eigenvalues(m, 20.0, DIRICHLET, 3)
            nn = kummeroracle.fiber_eigenvalues(m, 20.0, NEUMANN, 3)
            worst = max(worst, max(x - y for x, y in zip(nn, d)))
        return worst

    def robin_limit():
        a = kummeroracle.fiber_eigenvalues(1, 20.0, BoundaryCondition.robin(0.0), 3, tol=1e-12)
        b = kummeroracle.fiber_eigenvalues(1, 20.0, NEUMANN, 3, tol=1e-12)
        return max(abs(x - y) for x, y in zip(a, b))

    return [
        _guarded(s, "fem vs kummer / (1 + lambda)", 1e-6, cross),
        _guarded(s, "Neumann minus Dirichlet (must be < 0)", -1e-9, ordering),
        _guarded(s, "Robin gamma = 0 matches Neumann", 1e-9, robin_limit),
    ]


SUITES = {
    "specfun": suite_specfun,
    "trial": suite_trial,
    "variational": suite_variational,
    "fiber": suite_fiber,
    "kummer": suite_kummer,
}


def run_suites(name: str, floor_c: float = variational.DEFAULT_FLOOR_C) -> list[Check]:
    names = list(SUITES) if name == "all" else [name]
    out: list[Check] = []
    for key in names:
        fn = SUITES[key]
        out.extend(fn(floor_c) if key == "variational" else fn())
    return out
