"""Exception hierarchy shared by the numerical modules."""


class ZeroRangeError(Exception):
    """Base class for all package errors."""


class DomainError(ZeroRangeError, ValueError):
    """An argument lies outside the domain of the operation."""


class MacdonaldOverflow(ZeroRangeError, OverflowError):
    """K_nu(z) exceeds the largest representable double."""


class MacdonaldUnderflow(ZeroRangeError, ArithmeticError):
    """K_nu(z) is below the smallest positive normal double."""


class SingularBoundaryMatrix(ZeroRangeError):
    """The boundary matrix is singular: -lambda is an eigenvalue."""

    def __init__(self, lam, smallest_singular_value):
        self.lam = lam
        self.smallest_singular_value = smallest_singular_value
        super().__init__(
            f"boundary matrix singular at lambda={lam!r} "
            f"(smallest singular value {smallest_singular_value:.3e})"
        )


class IllConditioned(ZeroRangeError):
    """Condition number of the boundary matrix exceeds the configured cap."""

    def __init__(self, lam, condition):
        self.lam = lam
        self.condition = condition
        super().__init__(f"boundary matrix at lambda={lam!r} has condition number {condition:.3e}")


class QuadratureError(ZeroRangeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved_error=None):
        self.achieved_error = achieved_error
        if achieved_error is not None:
            message = f"{message} (achieved error estimate {achieved_error:.3e})"
        super().__init__(message)


class MaxExpansionExceeded(ZeroRangeError):
    """An eigencurve stayed negative beyond the search-window expansion cap."""


class FitError(ZeroRangeError):
    """Least-squares fit residual above tolerance."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (relative residual {residual:.3e})")
