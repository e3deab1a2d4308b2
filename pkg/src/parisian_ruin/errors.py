"""Exception hierarchy shared by all modules.

The CLI maps :class:`ParameterError` to exit code 2 and :class:`NumericError`
(and its subclasses) to exit code 3.
"""


class ParisianError(Exception):
    """Base class for all package errors."""


class ParameterError(ParisianError, ValueError):
    """An input is outside its admissible domain."""


class NumericError(ParisianError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""


class SingularKernelError(NumericError):
    """Cholesky factorization failed even at the largest jitter."""


class SamplerError(NumericError):
    """Circulant embedding could not be made nonnegative."""


class CoverageError(ParisianError, ValueError):
    """A grid or table does not cover the range an operation needs."""
