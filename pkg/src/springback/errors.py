"""Exception types shared across the package."""


class SpringbackError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(SpringbackError, ValueError):
    """An argument violates a documented precondition."""


class NumericError(SpringbackError, RuntimeError):
    """A numerical routine failed (non-SPD factorization, non-finite iterates)."""


class RipConditionError(InvalidParameterError):
    """A bound was requested for a RIP profile that does not satisfy the
    recovery condition, so the bound would be vacuous."""
