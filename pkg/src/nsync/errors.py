"""Exception types raised across the package."""


class NSyncError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(NSyncError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(ValidationError):
    """Vector or matrix shapes do not agree."""


class ZeroColumnError(ValidationError):
    """The data matrix has an all-zero column."""

    def __init__(self, column):
        # stored 0-based, reported 1-based to match the file formats
        self.column = column
        super().__init__(f"column {column + 1} of A is identically zero")


class CoverageError(ValidationError):
    """The sets of a sampling scheme do not cover every coordinate."""


class SetSizeError(ValidationError):
    """A set is smaller than the minibatch size tau."""


class ProbabilityError(ValidationError):
    """A vector is not a strictly positive probability vector."""


class EnumerationTooLarge(NSyncError):
    """Exact enumeration of a sampling would exceed the size guard."""


class DivergenceError(NSyncError, FloatingPointError):
    """The iteration produced non-finite values (stepsizes too aggressive)."""


class ConfigurationError(NSyncError):
    """Derived constants are inconsistent with the theory (e.g. mu > 1)."""


class ContractionViolation(NSyncError, AssertionError):
    """The expected one-step decrease exceeds the certified bound."""


class FormatError(NSyncError, ValueError):
    """A structured input file is malformed."""
