import pytest

from landaudisc.trialstate import BoundaryCondition, same_sign_threshold


@pytest.fixture(scope="session")
def neumann_sign_thresholds():
    """b*(m, n) above which c1 c2 > 0 for Neumann, found by scanning b in (0, 50]."""
    bc = BoundaryCondition.neumann()
    return {(m, n): same_sign_threshold(m, n, bc) for m in range(4) for n in range(1, 4)}
