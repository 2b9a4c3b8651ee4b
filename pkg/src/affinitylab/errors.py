"""Exception types shared across the package."""


class AffinityLabError(Exception):
    """Base class for all package errors."""


class NotPrimePower(AffinityLabError, ValueError):
    pass


class TooLarge(AffinityLabError, ValueError):
    pass


class BudgetExceeded(AffinityLabError, RuntimeError):
    """A table, factorial or search exceeded its configured budget."""


class FieldMismatch(AffinityLabError, ValueError):
    pass


class DegreeTooLow(AffinityLabError, ValueError):
    pass


class CheckpointCorrupt(AffinityLabError, ValueError):
    pass


class InternalInvariantViolation(AffinityLabError, AssertionError):
    """Raised when a proven structural property fails; always a bug."""
