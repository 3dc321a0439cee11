"""Exception hierarchy.

Every error raised by this package derives from :class:`FracidError` so
callers (and the CLI) can map failures to exit codes without inspecting
messages: validation problems exit 1, numerical problems exit 2.
"""

from __future__ import annotations


class FracidError(Exception):
    """Base class for all package errors."""


class ValidationError(FracidError, ValueError):
    """Bad arguments, malformed files, or violated preconditions."""


class IdentifiabilityError(ValidationError):
    """Regression problem is rank deficient.

    Carries the indices and human-readable names of the deficient
    regressor columns.
    """

    def __init__(self, message, columns=(), column_names=()):
        super().__init__(message)
        self.columns = tuple(columns)
        self.column_names = tuple(column_names)


class NumericalError(FracidError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy result."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class PoleAtFrequencyError(NumericalError):
    """Transfer-function denominator vanishes at a requested frequency."""


class ConvergenceError(NumericalError):
    """Iteration cap reached; ``best`` holds the best result so far."""

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.best = best
