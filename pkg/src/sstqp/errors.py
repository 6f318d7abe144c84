"""Exception types shared across the package."""


class SstqpError(Exception):
    """Base class for all package errors."""


class DimensionError(SstqpError):
    """Shapes or lengths do not line up (e.g. non-triangular svec length)."""


class ParameterError(SstqpError):
    """Invalid user-supplied parameter (intervals, cardinalities, flags)."""


class NumericalError(SstqpError):
    """A numerical routine failed to reach its accuracy contract."""


class BudgetError(SstqpError):
    """An enumeration would exceed its solve budget."""

    def __init__(self, message, required=None, budget=None):
        super().__init__(message)
        self.required = required
        self.budget = budget


class UnsupportedBackendError(SstqpError):
    """No external solver backend is configured or available."""


class StatusError(SstqpError):
    """A solver status is not acceptable for the requested operation."""
