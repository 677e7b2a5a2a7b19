"""Exception hierarchy shared by all mcpinns modules."""

from typing import Any


class McPinnsError(Exception):
    """Base class for every error raised by mcpinns."""

    pass


class DomainError(McPinnsError, ValueError):
    """Raised when an argument lies outside the mathematical domain of an operation."""

    pass


class ContractViolation(McPinnsError, ValueError):
    """Raised when a caller breaks a structural contract (shapes, layouts, headers)."""

    pass


class AccuracyError(McPinnsError):
    """Raised when a reference computation fails to reach its tolerance.

    The best estimate reached so far is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class TrainingError(McPinnsError):
    """Raised when training produces a non-finite loss or gradient."""

    def __init__(
        self,
        message: str,
        diagnostics: dict[str, Any] | None = None,
        last_good: Any = None,
    ):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.last_good = last_good
