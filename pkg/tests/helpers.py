"""Shared fixtures-in-code for the test suite."""

import numpy as np

from dcakit.collab import IntermediateBundle


def random_bundle(seed, institutions=None, anchor_rows=None, dims=None,
                  data_rows=6) -> IntermediateBundle:
    """A bundle with standard-normal intermediate matrices.

    Shapes default to the seeded ranges used throughout: 2-6
    institutions, 2-6 dims each, 8-32 anchor rows. Full column rank
    with probability one.
    """
    rng = np.random.default_rng(seed)
    n = institutions if institutions is not None else int(rng.integers(2, 7))
    r = anchor_rows if anchor_rows is not None else int(rng.integers(8, 33))
    if dims is None:
        dims = [int(rng.integers(2, 7)) for _ in range(n)]
    anchors = tuple(rng.standard_normal((r, d)) for d in dims)
    data = tuple(rng.standard_normal((data_rows, d)) for d in dims)
    return IntermediateBundle(data=data, anchors=anchors)


def stacked_anchor_images(bundle, maps, j) -> np.ndarray:
    """Concatenated transformed anchor column j across institutions."""
    return np.concatenate([a @ g[:, j] for a, g in zip(bundle.anchors, maps.maps)])
