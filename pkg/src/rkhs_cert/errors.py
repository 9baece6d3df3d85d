"""Exception types shared across the package."""

from __future__ import annotations


class ExpressionError(ValueError):
    """Raised when an expression string falls outside the whitelisted grammar."""


class ProfileDerivativeError(ValueError):
    """Raised when Taylor data at the origin is requested but unavailable."""


class WitnessSearchError(RuntimeError):
    """Raised when the witness search cannot complete.

    ``reason`` is a short machine-readable tag; the message carries detail.
    """

    def __init__(self, message: str, reason: str = "search-failed") -> None:
        super().__init__(message)
        self.reason = reason


class SingularGramError(ArithmeticError):
    """Raised when a Gram matrix is numerically singular at the working precision."""


class ConfigError(ValueError):
    """Raised for malformed or unresolvable run configurations."""
