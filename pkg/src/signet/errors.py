"""Exception hierarchy shared by every stage of the engine."""


class SignetError(Exception):
    """Base class for all engine errors."""


class ParseError(SignetError, ValueError):
    """A source row could not be parsed."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class ValidationError(SignetError, ValueError):
    """Input parsed but violates a domain invariant."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyAnalysisError(SignetError):
    """The calendar is too short to hold a single window."""


class UndefinedSummaryError(SignetError):
    """A summary statistic was requested on too few values."""


class DegenerateBinningError(SignetError):
    """Too few distinct values to build the requested histogram."""


class FitError(SignetError):
    """A curve or likelihood fit could not be carried out."""


class InsufficientTailError(FitError):
    """Fewer exceedances than the minimum tail size."""


class MissingIndexError(SignetError):
    """Index open/close unavailable on a window boundary."""


class ConfigError(SignetError, ValueError):
    """Invalid run configuration."""
