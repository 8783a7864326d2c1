"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter point lies outside the patch parameter domain."""


class DegenerateGeometryError(RuntimeError):
    """The surface map is rank-deficient (or an edge tangent vanishes)."""


class CapabilityError(RuntimeError):
    """An evaluation needs derivative data the inputs cannot provide."""


class SingularSystemError(RuntimeError):
    """The assembled system is structurally or numerically singular.

    ``null_dim`` carries an estimate of the null-space dimension when one
    could be computed, otherwise None.
    """

    def __init__(self, message, null_dim=None):
        super().__init__(message)
        self.null_dim = null_dim


class SolveAccuracyError(RuntimeError):
    """A direct solve finished but the residual check failed."""
