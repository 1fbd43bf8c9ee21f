"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an argument lies outside the supported domain."""


class SingularInputError(DomainError):
    """Raised at points where the requested function is singular."""


class BesselRangeError(OverflowError):
    """Raised when a result would overflow double precision.

    The exponentially scaled variants stay finite in this regime.
    """


class ConvergenceError(ArithmeticError):
    """Raised when an iterative method fails to converge."""
