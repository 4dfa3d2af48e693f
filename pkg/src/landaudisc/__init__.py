"""Eigenvalue branches of the magnetic Laplacian on the unit disc.

Submodules
----------
specfun       Laguerre, Kummer and integer incomplete-gamma closed forms.
trialstate    Boundary-matched trial states and their residuals.
variational   Closed-form inner products, Rayleigh-Ritz and Temple bounds.
fibersolver   Finite-element solver for the radial fiber operators.
kummeroracle  Eigenvalues as roots of Kummer-function boundary determinants.
cli           Command-line front end emitting CSV tables.
"""

from landaudisc.errors import LandauDiscError
from landaudisc.trialstate import BoundaryCondition, FiberSpec

__all__ = ["BoundaryCondition", "FiberSpec", "LandauDiscError"]
__version__ = "0.1.0"
