"""Finite-element eigen-solver for the radial fiber operators.

Weak form on (0, 1) with weight r dr:

    a(u, v) = int u' v' r dr + int (m/r - b r/2)^2 u v r dr - gamma u(1) v(1)
    m(u, v) = int u v r dr

Dirichlet removes the r = 1 dof, Robin subtracts gamma on the r = 1 diagonal
and Neumann needs nothing.  For m >= 1 the r = 0 dof is pinned to zero; for
m = 0 it is free (the weight r makes u'(0) = 0 the natural condition).
Negative m is assembled as the |m| operator plus 2|m|b times the mass matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from landaudisc.errors import ConvergenceFailure, LandauDiscError, QuadratureBreakdown
from landaudisc.trialstate import BoundaryCondition, FiberSpec

DEFAULT_ELEMENTS = 200
RESIDUAL_TOL = 1e-9
MAX_ITER = 2000
BACKWARD_TOL = 1e-13
STALL_STEPS = 5


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    grading: str = "uniform"
    width: float | None = None

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", x)
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ValueError("mesh must start at 0 and end at 1")
        if np.any(np.diff(x) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if len(x) - 1 < 16:
            raise ValueError("mesh needs at least 16 elements")
        if self.grading == "boundary-layer":
            mids = 0.5 * (x[1:] + x[:-1])
            if 3 * np.count_nonzero(mids >= 1.0 - self.width) < len(mids):
                raise ValueError("boundary-layer mesh must put 1/3 of its elements in the layer")

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @classmethod
    def uniform(cls, n_elements: int) -> "Mesh":
        return cls(np.linspace(0.0, 1.0, n_elements + 1))

    @classmethod
    def boundary_layer(cls, n_elements: int, width: float) -> "Mesh":
        """Half of the elements uniformly in [1 - width, 1], the rest in [0, 1 - width]."""
        if not 0.0 < width < 1.0:
            raise ValueError("boundary layer width must lie in (0, 1)")
        n_layer = math.ceil(n_elements / 2)
        inner = np.linspace(0.0, 1.0 - width, n_elements - n_layer + 1)
        layer = np.linspace(1.0 - width, 1.0, n_layer + 1)
        return cls(np.concatenate([inner, layer[1:]]), "boundary-layer", width)


def layer_width(b: float) -> float:
    return 0.5 if b <= 0 else min(0.5, 8.0 / math.sqrt(b))


def mesh_policy(b: float, n_elements: int = DEFAULT_ELEMENTS) -> Mesh:
    """Default mesh: boundary layer of width min(1/2, 8/sqrt(b))."""
    return Mesh.boundary_layer(n_elements, layer_width(b))


@dataclass(eq=False)
class DiscreteOperator:
    """Stiffness/mass pair on the free dofs, with the dof map back to the nodes."""

    spec: FiberSpec
    order: int
    stiffness: scipy.sparse.csr_matrix
    mass: scipy.sparse.csr_matrix
    dofs: np.ndarray
    coords: np.ndarray
    n_nodes: int

    @property
    def size(self) -> int:
        return len(self.dofs)

    def banded(self, matrix) -> np.ndarray:
        """Upper banded storage (scipy ``ab`` layout) of a stiffness-shaped matrix."""
        u = self.order
        n = self.size
        ab = np.zeros((u + 1, n))
        for k in range(u + 1):
            ab[u - k, k:] = matrix.diagonal(k)
        return ab

    def expand(self, vec: np.ndarray) -> np.ndarray:
        """Nodal vector including pinned/eliminated dofs (set to zero)."""
        full = np.zeros(self.n_nodes)
        full[self.dofs] = vec
        return full


def _reference_basis(order, x):
    if order == 1:
        n = np.array([1.0 - x, x])
        dn = np.array([-np.ones_like(x), np.ones_like(x)])
    elif order == 2:
        n = np.array([2 * (x - 0.5) * (x - 1), -4 * x * (x - 1), 2 * x * (x - 0.5)])
        dn = np.array([4 * x - 3, -8 * x + 4, 4 * x - 1])
    else:
        raise ValueError("element order must be 1 or 2")
    return n, dn


def assemble(spec: FiberSpec, mesh: Mesh, order: int = 2,
             quad_points: int | None = None) -> DiscreteOperator:
    """Assemble the stiffness and mass matrices of the fiber operator."""
    reduced = spec.reduced()
    m, b = reduced.m, reduced.b
    nq = quad_points or max(8, 2 * order + 2)
    if nq < 2 * order + 2:
        raise ValueError("need at least 2*order+2 Gauss points per element")
    xg, wg = np.polynomial.legendre.leggauss(nq)
    x = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    basis, dbasis = _reference_basis(order, x)

    a = mesh.nodes[:-1]
    h = np.diff(mesh.nodes)
    r = a[:, None] + h[:, None] * x[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        pot = (m / r - b * r / 2.0) ** 2
    wr = w[None, :] * h[:, None] * r
    ke = np.einsum("eq,iq,jq->eij", wr / h[:, None] ** 2, dbasis, dbasis)
    ke += np.einsum("eq,iq,jq->eij", wr * pot, basis, basis)
    me = np.einsum("eq,iq,jq->eij", wr, basis, basis)
    # einsum may round (i, j) and (j, i) differently
    ke = 0.5 * (ke + ke.transpose(0, 2, 1))
    me = 0.5 * (me + me.transpose(0, 2, 1))
    if not (np.all(np.isfinite(ke)) and np.all(np.isfinite(me))):
        raise QuadratureBreakdown(f"non-finite element integral for {spec}")

    ne = mesh.n_elements
    n_nodes = order * ne + 1
    local = order * np.arange(ne)[:, None] + np.arange(order + 1)[None, :]
    rows = np.repeat(local[:, :, None], order + 1, axis=2).ravel()
    cols = np.repeat(local[:, None, :], order + 1, axis=1).ravel()
    K = scipy.sparse.coo_matrix((ke.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    M = scipy.sparse.coo_matrix((me.ravel(), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    if spec.bc.kind == "robin":
        K = K.tolil()
        K[n_nodes - 1, n_nodes - 1] -= spec.bc.gamma
        K = K.tocsr()

    coords = np.empty(n_nodes)
    coords[::order] = mesh.nodes
    if order == 2:
        coords[1::2] = 0.5 * (mesh.nodes[:-1] + mesh.nodes[1:])
    keep = np.ones(n_nodes, dtype=bool)
    if m >= 1:
        keep[0] = False
    if spec.bc.is_dirichlet:
        keep[-1] = False
    dofs = np.flatnonzero(keep)
    K = K[dofs][:, dofs]
    M = M[dofs][:, dofs]
    if spec.shift:
        K = K + spec.shift * M
    return DiscreteOperator(spec, order, K.tocsr(), M.tocsr(), dofs, coords[dofs], n_nodes)


@dataclass
class EigResult:
    """Lowest eigenpairs of a pencil.

    ``residuals`` holds ||(K - lambda M) x|| / ||M x|| per pair and
    ``backward_errors`` the normwise backward error
    ||(K - lambda M) x|| / ((||K||_1 + |lambda| ||M||_1) ||x||).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    backward_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = field(default=0)


def spectrum_lower_bound(spec: FiberSpec) -> float:
    """A value strictly below every eigenvalue of the discrete pencil.

    The form is non-negative except for the Robin term; with u(1)^2 <=
    2||u||^2 + 2||u|| ||u'|| the Robin part is bounded below by
    -(gamma^2 + 2 gamma) ||u||^2 for gamma > 0.
    """
    g = spec.bc.robin_gamma
    floor = -(g * g + 2.0 * g) if g > 0 else 0.0
    return floor - 1.0


def solve_lowest(op: DiscreteOperator, k: int, tol: float = RESIDUAL_TOL,
                 max_iter: int = MAX_ITER) -> EigResult:
    """Lowest ``k`` eigenpairs of (K, M) by shift-invert subspace iteration.

    The shift sits below the spectrum, so K - sigma M is positive definite
    and is factored once with a banded Cholesky.  Start vectors are the
    all-ones vector followed by cos(j pi r) samples, M-orthonormalised by
    the Rayleigh-Ritz step, so the result is deterministic.

    A pair is accepted once its backward error is at roundoff level
    (``BACKWARD_TOL``) and its residual ratio is either below ``tol`` or has
    stopped improving.  The ratio grows like eps/h^2 on fine meshes, so
    callers that need ``residuals <= tol`` should check it (the default
    mesh satisfies it with two orders of margin).
    """
    n = op.size
    if k < 1 or 4 * k > n:
        raise ValueError(f"k={k} must satisfy 1 <= k <= dof/4 = {n / 4:g}")
    K, M = op.stiffness, op.mass
    norm_k = scipy.sparse.linalg.norm(K, 1)
    norm_m = scipy.sparse.linalg.norm(M, 1)
    sigma = spectrum_lower_bound(op.spec)
    ab = op.banded(K - sigma * M)
    try:
        chol = scipy.linalg.cholesky_banded(ab, lower=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"shifted operator not positive definite: {exc}") from exc
    p = min(n, 2 * k + 4)
    X = np.cos(np.pi * np.outer(op.coords, np.arange(p)))
    best = np.inf
    stalled = 0
    for it in range(1, max_iter + 1):
        Y = scipy.linalg.cho_solve_banded((chol, False), M @ X)
        Kr = Y.T @ (K @ Y)
        Mr = Y.T @ (M @ Y)
        theta, Q = scipy.linalg.eigh(0.5 * (Kr + Kr.T), 0.5 * (Mr + Mr.T))
        X = Y @ Q
        lam = theta[:k]
        MX = M @ X[:, :k]
        rnorm = np.linalg.norm(K @ X[:, :k] - MX * lam, axis=0)
        res = rnorm / np.linalg.norm(MX, axis=0)
        back = rnorm / ((norm_k + np.abs(lam) * norm_m) * np.linalg.norm(X[:, :k], axis=0))
        worst = float(np.max(res))
        stalled = stalled + 1 if worst >= 0.5 * best else 0
        best = min(best, worst)
        if np.max(back) <= BACKWARD_TOL and (worst <= tol or stalled >= STALL_STEPS):
            gaps = np.diff(lam)
            if np.any(gaps <= 1e-10 * (1.0 + np.abs(lam[1:]))):
                raise ConvergenceFailure("repeated eigenvalue in a simple-spectrum problem")
            return EigResult(lam.copy(), X[:, :k].copy(), res, back, it)
    raise ConvergenceFailure(
        f"subspace iteration did not converge in {max_iter} steps (residual {best:.3e})",
        residual=best,
    )


def fem_eigenvalues(m: int, b: float, bc: BoundaryCondition, k: int,
                    n_elements: int = DEFAULT_ELEMENTS, order: int = 2) -> np.ndarray:
    """Lowest ``k`` eigenvalues of the fiber (m, b, bc) on the default mesh."""
    op = assemble(FiberSpec(m, b, bc), mesh_policy(b, n_elements), order)
    return solve_lowest(op, k).eigenvalues


@dataclass(frozen=True)
class BranchRow:
    m: int
    n: int
    b: float
    lam: float


def branch(m: int, b_grid, bc: BoundaryCondition, n_max: int,
           n_elements: int = DEFAULT_ELEMENTS, order: int = 2):
    """Eigenvalues lambda_1..lambda_{n_max} of the fiber m along ``b_grid``.

    Returns ``(rows, missing)``; a solver failure at one grid point is
    recorded in ``missing`` as ``(m, b, reason)`` instead of aborting.
    """
    b_grid = [float(b) for b in b_grid]
    if any(b1 >= b2 for b1, b2 in zip(b_grid, b_grid[1:])):
        raise ValueError("b_grid must be strictly ascending")
    rows, missing = [], []
    for b in b_grid:
        try:
            vals = fem_eigenvalues(m, b, bc, n_max, n_elements, order)
        except LandauDiscError as exc:
            missing.append((m, b, str(exc)))
            continue
        rows.extend(BranchRow(m, i + 1, b, float(v)) for i, v in enumerate(vals))
    return rows, missing
