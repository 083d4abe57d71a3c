"""
Exception hierarchy for mellinsio.

All library errors derive from MellinSIOError. Validation-type errors also
derive from ValueError so callers that only know the builtin still catch them.
"""

from __future__ import annotations


class MellinSIOError(Exception):
    """Base class for all mellinsio errors."""


class InvalidInputError(MellinSIOError, ValueError):
    """Input data does not match its grid or contains non-finite values."""


class ConfigurationError(MellinSIOError, ValueError):
    """A configuration file or grid specification is invalid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(MellinSIOError, ValueError):
    """A parameter lies outside the domain where the quantity is defined."""


class PreconditionError(MellinSIOError, ValueError):
    """A measured precondition (e.g. a contraction factor) is violated."""


class EllipticityError(MellinSIOError, ValueError):
    """A symbol comes too close to zero on the grid."""


class DegenerateLoopError(MellinSIOError, ValueError):
    """A boundary loop passes too close to the origin."""


class ScanError(MellinSIOError, ValueError):
    """A homotopy scan step failed."""


class NumericalError(MellinSIOError, RuntimeError):
    """An iterative procedure failed to converge."""
