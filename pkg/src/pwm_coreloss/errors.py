"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation -> 2, numeric -> 3, I/O -> 4.
"""


class CoreLossError(Exception):
    """Base class for all package errors."""


class ValidationError(CoreLossError, ValueError):
    """Invalid input, configuration or shape mismatch."""


class SpectralLeakageError(ValidationError):
    """Series does not span an integer number of fundamental periods."""


class DegenerateExcitationError(ValidationError):
    """Excitation has too few flux turning points to segment."""


class OutOfRangeError(ValidationError):
    """Loss-map query beyond the permitted extrapolation range."""


class NumericError(CoreLossError, ArithmeticError):
    """A numerical procedure failed to converge or produced non-finite output."""
