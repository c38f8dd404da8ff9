"""Exception types shared across the package.

Each class maps to one CLI exit code (see cli.py) so callers can tell a
bad input file from a physics misuse without parsing messages.
"""

from __future__ import annotations


class RehabGloveError(Exception):
    """Base class for all package errors."""


class ParseError(RehabGloveError):
    """A file or wire payload could not be decoded.

    Carries a 1-based line (or event) number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(RehabGloveError):
    """Structurally readable data that violates a documented invariant."""


class PressureRangeError(RehabGloveError):
    """Pressure outside the characterized [0, max] range of an actuator."""


class CalibrationError(RehabGloveError):
    """Anchor table rejected: model class is monotone through (0, 0)."""
