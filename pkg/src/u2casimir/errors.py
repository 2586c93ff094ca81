"""Exception hierarchy shared by all modules."""


class CasimirError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(CasimirError, ValueError):
    """Malformed input: non-unit vector, non-unitary matrix, bad grammar..."""


class PhysicsError(CasimirError):
    """The input is well formed but the physical setup is not admissible."""


class BoundStateError(PhysicsError):
    """A negative mode (zero on the positive imaginary momentum axis) was found."""

    def __init__(self, message, kappa=None):
        super().__init__(message)
        self.kappa = kappa


class SingularPointError(PhysicsError):
    """Evaluation hit a zero of a function that is divided by."""


class SingularMatchingError(ValidationError):
    """The delta-delta' matching matrix is singular (w1 = +-1)."""


class QuadratureError(CasimirError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class BracketingError(CasimirError):
    """Root refinement failed on a bracketing interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval
