"""Exception hierarchy.

Each error class carries the process exit code the command-line interface
reports for it.
"""

from __future__ import annotations


class VineError(Exception):
    exit_code = 1


class InputError(VineError, ValueError):
    """Malformed or out-of-range input data."""

    exit_code = 2


class DomainError(InputError):
    """A parameter or argument outside the admissible domain."""


class StructureError(InputError):
    """An invalid or disconnected vine/graph structure."""


class FormatError(InputError):
    """A corrupt or unsupported model file."""


class NumericError(VineError, ArithmeticError):
    exit_code = 3


class FitError(NumericError):
    """An estimation routine failed.

    ``best`` holds the best-so-far result when one exists.
    """

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(VineError, ValueError):
    exit_code = 4


class DegenerateDataWarning(UserWarning):
    """Data too degenerate for a statistic to be informative."""
