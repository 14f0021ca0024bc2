"""
Exception hierarchy for the Tropical EP Analyzer.

Input problems and numeric failures are kept apart because the command line
reports them with different exit statuses.
"""

from typing import Any, Optional


class TropicalEPError(Exception):
    """Base class for every error raised by the analyzer."""


class InputError(TropicalEPError, ValueError):
    """Malformed input: bad parameters, files, models or commands."""


class NumericalError(TropicalEPError, RuntimeError):
    """A floating-point stage failed (non-convergence, ambiguity, degeneracy)."""

    def __init__(self, message: str, partial: Optional[Any] = None):
        super().__init__(message)
        self.partial = partial
