import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from landaudisc import trialstate as ts_mod
from landaudisc.errors import DegenerateDenominator
from landaudisc.trialstate import (
    BoundaryCondition,
    FiberSpec,
    TrialCoeffs,
    TrialState,
    apply_fiber_operator,
    boundary_residual,
    coefficients,
    eval_trial,
    eval_trial_deriv,
    ode_residual_appendix,
    residual_R,
    trial_state,
)

D = BoundaryCondition.dirichlet()
N = BoundaryCondition.neumann()


def _fd_operator(ts, r, h=1e-3):
    """-u'' - u'/r + V u by 5-point central differences."""
    m, b = ts.spec.m, ts.spec.b
    u = [eval_trial(ts, r + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (u[0] - 8 * u[1] + 8 * u[3] - u[4]) / (12 * h)
    d2 = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
    return -d2 - d1 / r + (m / r - b * r / 2) ** 2 * u[2]


# --- value types ------------------------------------------------------------

def test_boundary_condition_parsing_and_validation():
    assert BoundaryCondition.parse("Dirichlet") == D
    assert BoundaryCondition.parse("neumann") == N
    rob = BoundaryCondition.parse("robin:1.5")
    assert rob.kind == "robin" and rob.gamma == 1.5
    assert str(rob) == "robin:1.5"
    assert str(D) == "dirichlet"
    with pytest.raises(ValueError):
        BoundaryCondition.parse("periodic")
    with pytest.raises(ValueError):
        BoundaryCondition("neumann", 2.0)
    with pytest.raises(ValueError):
        BoundaryCondition("mixed")


def test_fiber_spec_reduction():
    spec = FiberSpec(-3, 12.0, N)
    assert spec.shift == 72.0
    assert spec.reduced() == FiberSpec(3, 12.0, N)
    assert FiberSpec(3, 12.0, N).shift == 0.0
    with pytest.raises(ValueError):
        FiberSpec(0, -1.0, N)


def test_trial_state_build_reduces_m():
    ts = trial_state(-2, 1, 20.0, N)
    assert ts.spec.m == 2
    assert ts.laguerre_spec.deg == 0


# --- coefficients -----------------------------------------------------------

def test_coefficient_examples():
    assert coefficients(0, 1, 20.0, D) == TrialCoeffs(1.0, -1.0)
    assert coefficients(0, 1, 20.0, N).c2 == pytest.approx(1.0, rel=1e-15)
    assert coefficients(0, 1, 20.0, BoundaryCondition.robin(1.0)).c2 == pytest.approx(11 / 9, rel=1e-15)


def test_coefficient_preconditions():
    with pytest.raises(ValueError):
        coefficients(-1, 1, 20.0, N)
    with pytest.raises(ValueError):
        coefficients(0, 0, 20.0, N)
    with pytest.raises(ValueError):
        coefficients(0, 1, 0.0, N)


def test_degenerate_denominator():
    # L^5_1(5) = 1 and its derivative is -1, so (5 + 5) * 1 + 10 * (-1) = 0
    with pytest.raises(DegenerateDenominator):
        coefficients(5, 2, 10.0, N)


def test_robin_zero_matches_neumann():
    for m, n, b in [(0, 1, 12.0), (2, 3, 25.0), (3, 2, 31.0)]:
        a = coefficients(m, n, b, BoundaryCondition.robin(0.0))
        c = coefficients(m, n, b, N)
        assert a == c


def test_neumann_coefficient_asymptotics():
    # |c2 - 1| b stays bounded on [20, 80]; the leading behaviour is 4(m + 2(n-1))
    for m in range(4):
        for n in range(1, 4):
            vals = [abs(coefficients(m, n, b, N).c2 - 1) * b for b in np.linspace(20, 80, 61)]
            assert max(vals) <= 4 * (m + 2 * (n - 1)) * 3 + 1e-9
            assert vals[-1] <= 4 * (m + 2 * (n - 1)) * 1.5 + 1e-9


def test_sign_property_above_threshold(neumann_sign_thresholds):
    for (m, n), bstar in neumann_sign_thresholds.items():
        assert math.isfinite(bstar)
        for b in np.arange(bstar, 50.0, 0.7):
            c = coefficients(m, n, float(b), N)
            assert c.c1 * c.c2 > 0


def test_same_sign_threshold_is_a_true_boundary(neumann_sign_thresholds):
    for (m, n), bstar in neumann_sign_thresholds.items():
        below = bstar - 0.25
        if below <= 0:
            continue
        try:
            c = coefficients(m, n, below, N)
        except DegenerateDenominator:
            continue
        assert c.c1 * c.c2 <= 0


# --- evaluation -------------------------------------------------------------

def test_eval_examples():
    assert eval_trial(trial_state(0, 1, 20.0, D), 1.0) == pytest.approx(0.0, abs=1e-15)
    assert eval_trial(trial_state(0, 1, 20.0, N), 1.0) == pytest.approx(2.0, rel=1e-15)
    for bc in (D, N, BoundaryCondition.robin(2.0)):
        assert eval_trial(trial_state(2, 1, 15.0, bc), 0.0) == 0.0
    ts = trial_state(0, 2, 12.0, N)
    expected = (1 + 0) * (math.exp(3.0) + ts.coeffs.c2 * math.exp(-3.0))
    assert eval_trial(ts, 0.0) == pytest.approx(expected, rel=1e-14)


def test_eval_against_extended_precision():
    for m, n, b, bc in [(0, 1, 20.0, N), (2, 3, 30.0, D), (1, 2, 15.0, BoundaryCondition.robin(1.0))]:
        ts = trial_state(m, n, b, bc)
        for r in (0.1, 0.5, 0.93, 1.0):
            ref = float(oracles.trial_mp(m, n, b, ts.coeffs.c2, r))
            scale = max(abs(ref), abs(float(oracles.trial_mp(m, n, b, 0.0, r))), 1e-300)
            assert abs(eval_trial(ts, r) - ref) <= 1e-12 * scale


def test_eval_array_input():
    ts = trial_state(1, 2, 20.0, N)
    r = np.linspace(0.0, 1.0, 5)
    vals = eval_trial(ts, r)
    assert vals.shape == r.shape
    assert vals[2] == eval_trial(ts, 0.5)


@settings(max_examples=40, deadline=None)
@given(m=st.integers(0, 4), n=st.integers(1, 3), b=st.floats(10.0, 40.0), r=st.floats(0.05, 0.95))
def test_derivative_matches_finite_differences(m, n, b, r):
    ts = trial_state(m, n, b, D)
    h = 1e-6
    fd = (eval_trial(ts, r + h) - eval_trial(ts, r - h)) / (2 * h)
    scale = max(1.0, abs(eval_trial(ts, r)) * b)
    assert abs(eval_trial_deriv(ts, r) - fd) <= 1e-6 * scale


def test_boundary_derivative_examples():
    ts = trial_state(0, 1, 20.0, N)
    assert eval_trial_deriv(ts, 1.0) == pytest.approx(0.0, abs=1e-9)
    rob = trial_state(1, 2, 20.0, BoundaryCondition.robin(0.7))
    assert eval_trial_deriv(rob, 1.0) == pytest.approx(0.7 * eval_trial(rob, 1.0), abs=1e-9)
    dts = trial_state(0, 1, 20.0, D)
    h = 1e-6
    fd = (eval_trial(dts, 1.0) - eval_trial(dts, 1.0 - h)) / h
    assert eval_trial_deriv(dts, 1.0) == pytest.approx(-20.0, rel=1e-12)
    assert eval_trial_deriv(dts, 1.0) == pytest.approx(fd, rel=1e-4)


def test_boundary_matching_grid():
    degenerate = []
    worst = 0.0
    for bc in (D, N, BoundaryCondition.robin(1.0), BoundaryCondition.robin(-0.5)):
        for m in range(6):
            for n in range(1, 5):
                for b in np.linspace(10.0, 40.0, 13):
                    try:
                        ts = trial_state(m, n, float(b), bc)
                    except DegenerateDenominator:
                        degenerate.append((m, n, b, str(bc)))
                        continue
                    worst = max(worst, boundary_residual(ts))
    assert worst <= 1e-9
    # the exact zeros of the denominator on this grid:
    # Neumann (5, 2, 10): 10 * 1 + 10 * (-1);  Robin -0.5 (4, 3, 15): 12 * (-1.875) + 15 * 1.5
    assert sorted((d[0], d[1], float(d[2]), d[3]) for d in degenerate) == [
        (4, 3, 15.0, "robin:-0.5"), (5, 2, 10.0, "neumann")]


# --- residual and operator --------------------------------------------------

def test_residual_examples():
    assert residual_R(trial_state(0, 1, 20.0, N), 1.0) == pytest.approx(-40.0, rel=1e-15)
    assert residual_R(trial_state(2, 2, 20.0, N), 0.0) == 0.0
    c1_only = TrialState(FiberSpec(1, 15.0, N), 2, TrialCoeffs(1.0, 0.0))
    for r in (0.2, 0.7):
        assert residual_R(c1_only, r) == 0.0
        assert apply_fiber_operator(c1_only, r) == 3 * 15.0 * eval_trial(c1_only, r)


def test_operator_defining_identity():
    for bc in (D, N):
        ts = trial_state(1, 2, 18.0, bc)
        for r in (0.3, 0.8):
            lhs = apply_fiber_operator(ts, r) - 3 * 18.0 * eval_trial(ts, r)
            assert lhs == pytest.approx(residual_R(ts, r), rel=1e-12, abs=1e-12)


def test_operator_matches_finite_differences():
    ts = trial_state(0, 1, 10.0, N)
    r = 0.5
    scale = abs(10.0 * eval_trial(ts, r))
    assert abs(_fd_operator(ts, r) - apply_fiber_operator(ts, r)) <= 1e-5 * scale


def test_operator_finite_differences_twenty_points():
    for m, n, b, bc in [(0, 2, 12.0, N), (2, 1, 20.0, D), (1, 3, 25.0, BoundaryCondition.robin(1.0))]:
        ts = trial_state(m, n, b, bc)
        for r in np.linspace(0.1, 0.95, 20):
            ref = apply_fiber_operator(ts, r)
            fd = _fd_operator(ts, r, h=1e-3)
            scale = max(abs(ref), abs((2 * n - 1) * b * eval_trial(ts, r)))
            assert abs(fd - ref) <= 1e-5 * scale


# --- differential identities ------------------------------------------------

def test_identity_examples():
    assert ode_residual_appendix("laguerre-equation", 0, 1, 1.0, 3.0) == 0.0
    assert abs(ode_residual_appendix("laguerre-equation", 1, 3, 1.0, 2.5)) <= 1e-10
    assert abs(ode_residual_appendix("g-equation", 0, 2, 8.0, 0.7, relative=True)) <= 1e-8


def test_identity_rejects_unknown_kind():
    with pytest.raises(ValueError):
        ode_residual_appendix("h-equation", 0, 1, 1.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(ts_mod.ODE_KINDS), m=st.integers(0, 4), n=st.integers(1, 4),
       b=st.floats(2.0, 30.0), x=st.floats(0.05, 1.0))
def test_identities_hold(kind, m, n, b, x):
    point = b * x * x / 2 if kind == "laguerre-equation" else x
    assert abs(ode_residual_appendix(kind, m, n, b, point, relative=True)) <= 1e-8


def test_identity_is_sensitive_to_a_wrong_level():
    # g-equation with the f-level instead of (2n-2m-3) b is far from zero
    g, dg, d2g, dv, phi = ts_mod._weighted_profile(1, 2, 8.0, 0.6, 8.0 / 4)
    pot = (1 / 0.6 - 8.0 * 0.6 / 2) ** 2
    wrong = -d2g - dg / 0.6 + pot * g - 3 * 8.0 * g + 2 * 8.0 * 0.6 * dv * phi
    assert abs(wrong) > 1e-3 * abs(g)
