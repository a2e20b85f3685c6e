"""Exception types shared across the toolkit.

The three coarse kinds (config, data, solver) map onto process exit
codes 1, 2 and 3 in the command-line client and onto the ``error_kind``
field of service error payloads.
"""

from __future__ import annotations


class DcaError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DcaError):
    """Invalid or inconsistent experiment configuration."""


class DataError(DcaError):
    """A dataset could not be read or fails a data-level requirement."""


class SolverError(DcaError):
    """A collaborative-function solver could not produce a result."""


class DimensionError(SolverError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class AsymmetryError(SolverError, ValueError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class DefinitenessError(SolverError, ValueError):
    """A matrix required to be positive definite is not, even after
    ridge escalation."""


class RankError(SolverError, ValueError):
    """A matrix is rank-deficient where full rank is required."""


def error_kind(exc: BaseException) -> str:
    """Classify an exception into one of the coarse error kinds."""
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, DataError):
        return "data"
    if isinstance(exc, SolverError):
        return "solver"
    return "internal"
