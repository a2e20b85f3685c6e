"""Per-institution dimension reduction.

Each institution fits a principal-component map on its own training
rows and shares only the projected data. The map is the institution's
private function; everything downstream of it operates on the reduced
representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError

__all__ = ["AbstractionMap", "fit_abstraction", "apply_abstraction"]


@dataclass(frozen=True)
class AbstractionMap:
    """Centering vector plus orthonormal projection columns.

    ``explained_ratio[k]`` is the fraction of total variance captured
    by component ``k``; the fractions are non-increasing.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_ratio: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.components.shape[0]

    @property
    def output_dim(self) -> int:
        return self.components.shape[1]


def fit_abstraction(x, intermediate_dim: int | None = None,
                    threshold: float | None = None) -> AbstractionMap:
    """Fit a principal-component map on ``x`` (rows are samples).

    Exactly one sizing rule must be given:

    * ``intermediate_dim``: keep that many leading components.
    * ``threshold``: keep the largest count whose cumulative explained
      variance ratio stays strictly below the threshold, but always at
      least one component.

    Requires at least two rows; raises ``DataError`` when the data has
    no variance at all, ``DimensionError`` when the requested dimension
    exceeds what the data supports (min(rows - 1, cols), capped by the
    actual rank).
    """
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError("x must be a 2-d matrix")
    rows, cols = a.shape
    if rows < 2:
        raise DimensionError(f"need at least 2 rows to fit, got {rows}")
    if not np.all(np.isfinite(a)):
        raise ValueError("x contains non-finite entries")
    if (intermediate_dim is None) == (threshold is None):
        raise ValueError("give exactly one of intermediate_dim or threshold")

    mean = a.mean(axis=0)
    centered = a - mean
    _, sigma, vt = np.linalg.svd(centered, full_matrices=False)
    power = sigma ** 2
    total = power.sum()
    if total <= 0.0 or sigma[0] <= 0.0:
        raise DataError("data has zero variance; no components exist")
    ratios = power / total
    rank = int(np.sum(sigma > max(rows, cols) * np.finfo(np.float64).eps * sigma[0]))

    limit = min(rows - 1, cols)
    if intermediate_dim is not None:
        dim = int(intermediate_dim)
        if not 1 <= dim <= limit:
            raise DimensionError(f"intermediate_dim={dim} outside [1, {limit}]")
        if dim > rank:
            raise DimensionError(f"intermediate_dim={dim} exceeds data rank {rank}")
    else:
        if not 0.0 < threshold <= 1.0:
            raise ValueError(f"threshold must be in (0, 1], got {threshold}")
        cumulative = np.cumsum(ratios)
        dim = int(np.sum(cumulative < threshold))
        dim = max(dim, 1)
        dim = min(dim, rank)

    components = vt[:dim].T
    # Deterministic orientation: largest-magnitude entry of each
    # component positive.
    idx = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[idx, np.arange(dim)])
    signs[signs == 0] = 1.0
    components = components * signs
    return AbstractionMap(mean=mean, components=components,
                          explained_ratio=ratios[:dim].copy())


def apply_abstraction(mapping: AbstractionMap, x) -> np.ndarray:
    """Project rows of ``x`` through a fitted map."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[1] != mapping.input_dim:
        raise DimensionError(
            f"x must have {mapping.input_dim} columns, got shape {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise ValueError("x contains non-finite entries")
    return (a - mapping.mean) @ mapping.components
