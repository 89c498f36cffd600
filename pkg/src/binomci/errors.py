"""Exception types shared across the package."""


class BinomciError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BinomciError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(BinomciError, ArithmeticError):
    """An iterative solver exhausted its iteration budget."""


class UnsupportedSideError(BinomciError, ValueError):
    """The requested one-sided variant is not defined for this method."""


class CalibrationError(BinomciError, RuntimeError):
    """A coverage calibration criterion cannot be attained."""


class SearchBudgetError(BinomciError, RuntimeError):
    """An exact sample-size search exceeded its allowed range."""
