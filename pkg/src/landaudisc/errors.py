"""Exception hierarchy shared by all submodules."""


class LandauDiscError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(LandauDiscError):
    """A series hit its term cap before reaching the requested accuracy."""


class InvalidC(LandauDiscError, ValueError):
    """Kummer's function requested with c a non-positive integer."""


class DegenerateDenominator(LandauDiscError):
    """The Neumann/Robin coefficient formula divides by (numerically) zero."""


class NotPositiveDefinite(LandauDiscError):
    """Gram matrix of the trial states is not positive definite.

    ``minor`` is the 1-based size of the first leading minor that fails.
    """

    def __init__(self, message, minor):
        super().__init__(message)
        self.minor = minor


class PreconditionViolated(LandauDiscError):
    """Temple bound requested outside mu < rho < nu (or at too small a field).

    ``side`` is ``"mu"`` or ``"nu"``, or ``"b"`` when the field is below the
    regime where the neighbour floors are trusted.
    """

    def __init__(self, message, side):
        super().__init__(message)
        self.side = side


class QuadratureBreakdown(LandauDiscError):
    """An element integral evaluated to a non-finite number."""


class ConvergenceFailure(LandauDiscError):
    """Eigen-iteration stopped without meeting the residual tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class RootNotIsolated(LandauDiscError):
    """Root scan could not isolate the requested determinant root."""

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile
