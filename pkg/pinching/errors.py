"""Exception hierarchy."""
from __future__ import annotations

__all__ = [
    'PinchingError',
    'PreconditionError',
    'DegenerateGeometryError',
    'ConvergenceError',
    'CheckFailure',
]

class PinchingError(Exception):
    """Base class for all errors raised by this package."""

class PreconditionError(PinchingError, ValueError):
    """An input violates the precondition of the called operation.

    Subclasses :class:`ValueError` so callers that only know about the
    built-in still catch it.
    """

class DegenerateGeometryError(PreconditionError):
    """The geometry makes the requested design unsolvable.

    Raised for the two-user deviation design when both users share a
    y-coordinate and for ill-conditioned zero-forcing Gram matrices.
    """

class ConvergenceError(PinchingError, RuntimeError):
    """A numerical reference did not converge before its step floor."""

class CheckFailure(PinchingError, AssertionError):
    """A post-run figure check failed."""
