"""Shared anchor data.

Every institution transforms the same anchor matrix with its own
abstraction map; the alignment solvers then only ever see those
transformed copies. The anchor itself carries no private rows: it is
i.i.d. standard normal noise, reproducible from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ANCHOR_GENERATOR", "AnchorData", "generate_anchor"]

#: Name of the pseudo-random generator behind ``generate_anchor``,
#: recorded in experiment metadata so results can be regenerated.
ANCHOR_GENERATOR = "numpy-pcg64/standard-normal"


@dataclass(frozen=True)
class AnchorData:
    """An anchor matrix together with the seed that produced it."""

    matrix: np.ndarray
    seed: int

    def __post_init__(self):
        if self.matrix.ndim != 2:
            raise ValueError("anchor matrix must be 2-d")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("anchor matrix contains non-finite entries")


def generate_anchor(rows: int, dims: int, seed: int) -> AnchorData:
    """Draw a ``rows x dims`` standard-normal anchor matrix.

    Uses ``numpy.random.default_rng`` (PCG64), so the same seed always
    yields the same matrix on any platform.
    """
    if rows < 1 or dims < 1:
        raise ValueError(f"anchor shape must be positive, got {rows} x {dims}")
    rng = np.random.default_rng(seed)
    return AnchorData(matrix=rng.standard_normal((rows, dims)), seed=int(seed))
