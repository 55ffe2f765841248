"""Exception types raised across the package."""


class OWRTEError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OWRTEError, ValueError):
    """Invalid physical parameters, grid resolution or run configuration."""

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class EvanescentModeError(OWRTEError, ValueError):
    """A transverse wavevector with |kappa| >= 1 was used where only propagating modes exist."""


class OutOfRangeError(OWRTEError, ValueError):
    """A tabulated model was queried outside its table."""


class UnsupportedModelError(OWRTEError, TypeError):
    """The medium model does not support the requested quantity."""


class QuadratureError(OWRTEError, ArithmeticError):
    """A quadrature did not reach its tolerance; ``residual`` holds the error estimate."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual estimate {residual:.3e})")


class InstabilityError(OWRTEError, ArithmeticError):
    """A time-stepping solver produced negative intensities beyond rounding level."""


class StepSizeError(OWRTEError, ValueError):
    """Requested range step violates the stability limit of the scheme."""


class GridMismatchError(OWRTEError, ValueError):
    """A field and an operator are defined on different angular grids."""
