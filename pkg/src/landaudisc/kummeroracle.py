"""Eigenvalues of the fiber operators from boundary determinants in Kummer's function.

On the whole half-line the regular solution of H_{m,b} u = lambda u is

    u(r) = r^m e^{-b r^2/4} M(a, m + 1, b r^2 / 2),   a = (1 - lambda/b) / 2,

so an eigenvalue of the disc problem is a root in lambda of the boundary
condition applied at r = 1 (z = b/2):

    Dirichlet   M(a, c, z)
    Neumann     2b M'(a, c, z) - (b - 2m) M(a, c, z)
    Robin       2b M'(a, c, z) - (b - 2m + 2 gamma) M(a, c, z)

with c = m + 1 and M' the z-derivative.  The Robin row follows from
u'(1)/u(1) = m - b/2 + b M'/M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from landaudisc.errors import RootNotIsolated
from landaudisc.specfun import kummer_m, kummer_m_dz
from landaudisc.trialstate import BoundaryCondition, FiberSpec

MIN_FIELD = 1.0
EIGENVALUE_FIELD_RANGE = (10.0, 40.0)
MIN_TOL = 1e-12
SAMPLES_PER_WINDOW = 64


@dataclass(frozen=True)
class DeterminantSpec:
    m: int
    b: float
    bc: BoundaryCondition

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("DeterminantSpec needs a reduced angular momentum m >= 0")
        if self.b < MIN_FIELD:
            raise ValueError(f"boundary determinant needs b >= {MIN_FIELD:g}, got {self.b}")

    @property
    def c(self) -> float:
        return self.m + 1.0

    @property
    def z(self) -> float:
        return self.b / 2.0

    def a(self, lam):
        return 0.5 * (1.0 - np.asarray(lam, dtype=float) / self.b)


def boundary_determinant(spec: DeterminantSpec, lam):
    """Boundary determinant at ``lam`` (scalar or array)."""
    a = spec.a(lam)
    m_val = np.asarray(kummer_m(a, spec.c, spec.z))
    if spec.bc.is_dirichlet:
        out = m_val
    else:
        dm = np.asarray(kummer_m_dz(a, spec.c, spec.z))
        coef = spec.b - 2.0 * spec.m + 2.0 * spec.bc.robin_gamma
        out = 2.0 * spec.b * dm - coef * m_val
    return float(out) if np.ndim(lam) == 0 else out


def _scan_start(spec: DeterminantSpec) -> float:
    # the quadratic form is >= -(gamma^2 + 2 gamma) for Robin gamma > 0 and >= 0 otherwise
    g = spec.bc.robin_gamma
    return (-(g * g + 2.0 * g) if g > 0 else 0.0) - 1.0


def _sign_changes(values: np.ndarray) -> np.ndarray:
    s = np.sign(values)
    return np.flatnonzero(s[:-1] * s[1:] < 0)


def _root_events(values: np.ndarray) -> list[tuple[int, bool]]:
    """Roots along a sampled profile, excluding sample 0 (already examined).

    Returns ``(i, True)`` for an exact zero at sample i and ``(i, False)`` for
    a sign change between samples i and i + 1, in order.  An exact zero is
    a root in its own right (for instance lambda = b is an exact Neumann
    eigenvalue when b = 2m), so the samples around it are not compared.
    """
    s = np.sign(values)
    events = [(int(i), True) for i in np.flatnonzero(s[1:] == 0) + 1]
    events += [(int(i), False) for i in np.flatnonzero(s[:-1] * s[1:] < 0)]
    events.sort()
    return events


def _bisect(spec: DeterminantSpec, lo: float, hi: float, tol: float) -> float:
    f_lo = boundary_determinant(spec, lo)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = boundary_determinant(spec, mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def window_sign_changes(spec: DeterminantSpec, n: int,
                        samples: int = SAMPLES_PER_WINDOW) -> list[int]:
    """Sign changes of the determinant in each window [(2k-1)b - b/2, (2k-1)b + b/2], k = 1..n."""
    counts = []
    for k in range(1, n + 1):
        centre = (2 * k - 1) * spec.b
        grid = np.linspace(centre - spec.b / 2, centre + spec.b / 2, samples + 1)
        counts.append(len(_sign_changes(boundary_determinant(spec, grid))))
    return counts


def _check_eigen_pre(spec: DeterminantSpec, n: int, tol: float):
    lo, hi = EIGENVALUE_FIELD_RANGE
    if not lo <= spec.b <= hi:
        raise ValueError(f"eigenvalue needs {lo:g} <= b <= {hi:g}, got {spec.b}")
    if n < 1:
        raise ValueError("branch index n must be >= 1")
    if tol < MIN_TOL:
        raise ValueError(f"tol must be >= {MIN_TOL:g}")


def _eigenvalue_windows(spec: DeterminantSpec, n: int, tol: float) -> float:
    # literal window rule: exactly one sign change in each of the first n windows
    root = None
    for k in range(1, n + 1):
        centre = (2 * k - 1) * spec.b
        grid = np.linspace(centre - spec.b / 2, centre + spec.b / 2, SAMPLES_PER_WINDOW + 1)
        vals = boundary_determinant(spec, grid)
        events = _root_events(vals)
        if len(events) != 1:
            raise RootNotIsolated(
                f"{len(events)} sign changes in window k={k} for m={spec.m}, b={spec.b}, bc={spec.bc}",
                profile=list(zip(grid.tolist(), vals.tolist())),
            )
        if k == n:
            i, exact = events[0]
            root = float(grid[i]) if exact else float(_bisect(spec, grid[i], grid[i + 1], tol))
    return root


def _roots_scan(spec: DeterminantSpec, n: int, tol: float) -> list[float]:
    step = spec.b / SAMPLES_PER_WINDOW
    ceiling = 4.0 * ((2 * n + 3) * spec.b + (spec.m + 2 * n) ** 2 + 100.0)
    lo = _scan_start(spec)
    f_lo = boundary_determinant(spec, lo)
    if f_lo == 0.0:
        raise RootNotIsolated(f"determinant vanishes at the scan start {lo}")
    roots: list[float] = []
    chunk = 4 * SAMPLES_PER_WINDOW
    profile = []
    while lo < ceiling:
        grid = lo + step * np.arange(chunk + 1)
        vals = boundary_determinant(spec, grid)
        vals[0] = f_lo
        profile.extend(zip(grid[1:].tolist(), vals[1:].tolist()))
        for i, exact in _root_events(vals):
            if exact:
                roots.append(float(grid[i]))
            else:
                roots.append(float(_bisect(spec, grid[i], grid[i + 1], tol)))
            if len(roots) == n:
                return roots
        lo, f_lo = grid[-1], vals[-1]
    raise RootNotIsolated(
        f"found {len(roots)} < {n} roots below {ceiling:g} for m={spec.m}, b={spec.b}, bc={spec.bc}",
        profile,
    )


def eigenvalues(spec: DeterminantSpec, n_max: int, tol: float = 1e-10) -> list[float]:
    """The lowest ``n_max`` eigenvalues of the reduced fiber, from one upward scan."""
    _check_eigen_pre(spec, n_max, tol)
    return _roots_scan(spec, n_max, tol)


def eigenvalue(spec: DeterminantSpec, n: int, tol: float = 1e-10,
               method: str = "scan") -> float:
    """n-th eigenvalue of the reduced fiber (m >= 0) as a determinant root.

    ``method="scan"`` walks up from below the spectrum with step b/64 and
    bisects the n-th sign change; since every root is a simple eigenvalue,
    the n-th sign change is the n-th eigenvalue.  ``method="windows"``
    requires exactly one sign change in each window
    [(2k-1)b - b/2, (2k-1)b + b/2], k <= n, and raises
    :class:`RootNotIsolated` otherwise.  The windowed rule breaks down once
    m is comparable to sqrt(b), where the branches leave their Landau
    cluster, which is why it is not the default.
    """
    _check_eigen_pre(spec, n, tol)
    if method == "scan":
        return _roots_scan(spec, n, tol)[-1]
    if method == "windows":
        return _eigenvalue_windows(spec, n, tol)
    raise ValueError(f"unknown isolation method {method!r}")


def fiber_eigenvalues(m: int, b: float, bc: BoundaryCondition, n_max: int,
                      tol: float = 1e-10) -> list[float]:
    """Signed-m version of :func:`eigenvalues`."""
    fs = FiberSpec(m, b, bc)
    red = fs.reduced()
    vals = eigenvalues(DeterminantSpec(red.m, red.b, red.bc), n_max, tol)
    return [v + fs.shift for v in vals]


def fiber_eigenvalue(m: int, n: int, b: float, bc: BoundaryCondition,
                     tol: float = 1e-10, method: str = "scan") -> float:
    """Signed-m wrapper: solves the |m| problem and adds the 2|m|b shift."""
    fs = FiberSpec(m, b, bc)
    red = fs.reduced()
    return eigenvalue(DeterminantSpec(red.m, red.b, red.bc), n, tol, method) + fs.shift
