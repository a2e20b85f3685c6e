"""Collaborative-function estimation.

The central analysis sees one ``IntermediateBundle``: per institution,
the reduced data matrix and the reduced anchor matrix, nothing else.
Three solvers estimate the per-institution alignment maps ``G_i`` that
place every institution's representation in one shared space:

* ``solve_collab_minperturb``: left singular vectors of the stacked
  anchor representations, pulled back through each institution's
  pseudo-inverse. No eigenvalue information.
* ``solve_collab_gep``: the alignment objective as a generalized
  eigenproblem. The objective pits total pairwise disagreement of the
  transformed anchors against a unit total-energy constraint; the
  smallest eigenvalues give the directions institutions agree on most,
  and each eigenvalue equals its direction's disagreement score.
* ``solve_collab_qr_svd``: the same eigenproblem rewritten through thin
  QR factors of the anchor representations, so one SVD of a stack of
  orthonormal blocks replaces the dense pencil. Algebraically
  equivalent to the GEP path; the two scale differently with anchor
  size.

Eigenvalue-based confidence weights (``weight_vector``) can then damp
the directions institutions disagree on before a model is trained.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, RankError
from .linalg import (
    _fix_column_signs,
    gen_eig_sym,
    pseudo_inverse,
    qr_thin,
    randomized_svd,
    svd_thin,
)

__all__ = [
    "IntermediateBundle",
    "CollaborativeMaps",
    "CollaborativeData",
    "build_gep_matrices",
    "gep_maps_from_matrices",
    "solve_collab_gep",
    "stack_anchor_bases",
    "qr_svd_maps_from_stack",
    "solve_collab_qr_svd",
    "stack_anchor_reps",
    "min_perturb_maps_from_stack",
    "solve_collab_minperturb",
    "objective_value",
    "weight_vector",
    "transform_collab",
]

#: Relative diagonal cutoff below which a triangular factor counts as
#: singular, and relative singular-value cutoff for rank checks.
RANK_RTOL = 1e-12

#: Eigenvalue span below which all weights collapse to one.
WEIGHT_SPAN_FLOOR = 1e-12

#: Sketch parameters for the randomized solver variants.
RSVD_OVERSAMPLE = 8
RSVD_POWER_ITERS = 2


def _matrix(value, name: str, min_rows: int = 0) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-d, got ndim={arr.ndim}")
    if arr.shape[0] < min_rows or arr.shape[1] < 1:
        raise DimensionError(f"{name} has invalid shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class IntermediateBundle:
    """What each institution shares: reduced data and reduced anchors.

    ``data[i]`` is ``n_i x d_i`` (may have zero rows when only maps are
    wanted); ``anchors[i]`` is ``r x d_i`` with the same ``r`` for all
    institutions and the same ``d_i`` as ``data[i]``.
    """

    data: tuple[np.ndarray, ...]
    anchors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.data) != len(self.anchors) or not self.anchors:
            raise DimensionError("need one (data, anchor) pair per institution")
        data = tuple(_matrix(d, f"data[{i}]") for i, d in enumerate(self.data))
        anchors = tuple(_matrix(a, f"anchors[{i}]", min_rows=1)
                        for i, a in enumerate(self.anchors))
        rows = {a.shape[0] for a in anchors}
        if len(rows) != 1:
            raise DimensionError(f"anchor row counts differ: {sorted(rows)}")
        for i, (d, a) in enumerate(zip(data, anchors)):
            if d.shape[1] != a.shape[1]:
                raise DimensionError(
                    f"institution {i}: data has {d.shape[1]} columns but "
                    f"anchor has {a.shape[1]}"
                )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "anchors", anchors)

    @property
    def institutions(self) -> int:
        return len(self.anchors)

    @property
    def anchor_rows(self) -> int:
        return self.anchors[0].shape[0]

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(a.shape[1] for a in self.anchors)

    @property
    def total_dim(self) -> int:
        return sum(self.block_dims)


@dataclass(frozen=True)
class CollaborativeMaps:
    """Per-institution alignment maps.

    ``eigenvalues`` is ascending and empty for the minimal-perturbation
    solver, which has no spectral interpretation. ``build_seconds`` and
    ``solve_seconds`` time the two phases of estimation (matrix or
    stack construction vs. the decomposition itself).
    """

    maps: tuple[np.ndarray, ...]
    eigenvalues: np.ndarray
    method_tag: str
    build_seconds: float = 0.0
    solve_seconds: float = 0.0

    @property
    def collab_dim(self) -> int:
        return self.maps[0].shape[1]


@dataclass(frozen=True)
class CollaborativeData:
    """Per-institution representations in the shared space."""

    reps: tuple[np.ndarray, ...]
    applied_weights: np.ndarray | None


def _resolve_collab_dim(bundle: IntermediateBundle, collab_dim: int | None) -> int:
    if collab_dim is None:
        return min(bundle.block_dims)
    return int(collab_dim)


def _split_rows(stacked: np.ndarray, block_dims: tuple[int, ...]) -> tuple[np.ndarray, ...]:
    out = []
    offset = 0
    for d in block_dims:
        out.append(np.ascontiguousarray(stacked[offset:offset + d]))
        offset += d
    return tuple(out)


# ---------------------------------------------------------------------------
# Generalized eigenproblem route
# ---------------------------------------------------------------------------

def build_gep_matrices(bundle: IntermediateBundle) -> tuple[np.ndarray, np.ndarray]:
    """Build the pencil matrices of the alignment eigenproblem.

    The left matrix has diagonal blocks ``2 (N-1) A_i' A_i`` and
    off-diagonal blocks ``-2 A_i' A_j`` (``A_i`` the anchor
    representations); the right matrix is the block diagonal of the
    anchor Grams. Both are symmetric by construction, and the identity
    ``left = 2 N right - 2 W'W`` (``W`` the column-stacked anchors)
    holds to machine precision.
    """
    n = bundle.institutions
    dims = bundle.block_dims
    total = bundle.total_dim
    grams = [[None] * n for _ in range(n)]
    for i in range(n):
        grams[i][i] = bundle.anchors[i].T @ bundle.anchors[i]
        for j in range(i + 1, n):
            g = bundle.anchors[i].T @ bundle.anchors[j]
            grams[i][j] = g
            grams[j][i] = g.T
    offsets = np.concatenate([[0], np.cumsum(dims)])
    left = np.zeros((total, total))
    right = np.zeros((total, total))
    for i in range(n):
        ri, ci = offsets[i], offsets[i + 1]
        left[ri:ci, ri:ci] = 2.0 * (n - 1) * grams[i][i]
        right[ri:ci, ri:ci] = grams[i][i]
        for j in range(i + 1, n):
            rj, cj = offsets[j], offsets[j + 1]
            left[ri:ci, rj:cj] = -2.0 * grams[i][j]
            left[rj:cj, ri:ci] = -2.0 * grams[j][i]
    return left, right


def gep_maps_from_matrices(left: np.ndarray, right: np.ndarray,
                           block_dims: tuple[int, ...], collab_dim: int,
                           ridge: float = 0.0) -> CollaborativeMaps:
    """Solve a prebuilt pencil and split the eigenvectors by institution."""
    pairs = gen_eig_sym(left, right, k=collab_dim, ridge=ridge)
    return CollaborativeMaps(maps=_split_rows(pairs.vectors, block_dims),
                             eigenvalues=pairs.values, method_tag="gep")


def solve_collab_gep(bundle: IntermediateBundle, collab_dim: int | None = None,
                     ridge: float = 0.0) -> CollaborativeMaps:
    """Alignment maps from the smallest eigenpairs of the pencil."""
    dim = _resolve_collab_dim(bundle, collab_dim)
    if not 1 <= dim <= bundle.total_dim:
        raise DimensionError(f"collab_dim={dim} outside [1, {bundle.total_dim}]")
    t0 = time.perf_counter()
    left, right = build_gep_matrices(bundle)
    t1 = time.perf_counter()
    maps = gep_maps_from_matrices(left, right, bundle.block_dims, dim, ridge)
    t2 = time.perf_counter()
    return CollaborativeMaps(maps=maps.maps, eigenvalues=maps.eigenvalues,
                             method_tag="gep", build_seconds=t1 - t0,
                             solve_seconds=t2 - t1)


# ---------------------------------------------------------------------------
# QR + SVD route
# ---------------------------------------------------------------------------

def stack_anchor_bases(bundle: IntermediateBundle) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Thin-QR each anchor representation and stack the Q blocks.

    Returns the ``r x total_dim`` stack of orthonormal blocks and the
    triangular factors needed to recover eigenvectors later. Raises
    ``RankError`` when a triangular factor is numerically singular
    (an anchor representation without full column rank); the pencil
    route still applies in that case.
    """
    r = bundle.anchor_rows
    qs = []
    r_factors = []
    for i, a in enumerate(bundle.anchors):
        if r < a.shape[1]:
            raise DimensionError(
                f"institution {i}: anchor rows {r} < columns {a.shape[1]}"
            )
        q, rr = qr_thin(a)
        diag = np.abs(np.diag(rr))
        if diag.min() <= RANK_RTOL * diag.max():
            raise RankError(
                f"institution {i}: anchor representation is rank deficient; "
                "use the pencil solver instead"
            )
        qs.append(q)
        r_factors.append(rr)
    return np.hstack(qs), tuple(r_factors)


def qr_svd_maps_from_stack(basis_stack: np.ndarray,
                           r_factors: tuple[np.ndarray, ...], collab_dim: int,
                           randomized: bool = False, seed: int = 0) -> CollaborativeMaps:
    """Recover alignment maps from the SVD of the stacked Q blocks.

    The top singular values sigma of the stack give the pencil's
    smallest eigenvalues as ``2 N - 2 sigma^2``; right singular vectors
    are back-substituted through each triangular factor, renormalized
    to unit constraint energy, and sign-fixed like the pencil route.
    """
    n = len(r_factors)
    block_dims = tuple(rf.shape[1] for rf in r_factors)
    limit = min(basis_stack.shape)
    if not 1 <= collab_dim <= limit:
        raise DimensionError(f"collab_dim={collab_dim} outside [1, {limit}]")
    if randomized:
        res = randomized_svd(basis_stack, k=collab_dim,
                             oversample=RSVD_OVERSAMPLE,
                             power_iters=RSVD_POWER_ITERS, seed=seed)
    else:
        res = svd_thin(basis_stack)
    sigma = res.sigma[:collab_dim]
    eigenvalues = 2.0 * n - 2.0 * sigma ** 2
    # Ascending eigenvalues correspond to descending singular values.
    short = res.v[:, :collab_dim]

    blocks = []
    offset = 0
    norms_sq = np.zeros(collab_dim)
    for rf, d in zip(r_factors, block_dims):
        piece = short[offset:offset + d]
        g = solve_triangular(rf, piece, lower=False)
        # Constraint energy of this block is ||rf @ g||^2 per column.
        norms_sq += np.einsum("ij,ij->j", piece, piece)
        blocks.append(g)
        offset += d
    stacked = np.vstack(blocks) / np.sqrt(norms_sq)
    stacked = _fix_column_signs(stacked)
    return CollaborativeMaps(maps=_split_rows(stacked, block_dims),
                             eigenvalues=eigenvalues, method_tag="qr_svd")


def solve_collab_qr_svd(bundle: IntermediateBundle, collab_dim: int | None = None,
                        randomized: bool = False, seed: int = 0) -> CollaborativeMaps:
    """Alignment maps via thin QR factors and one SVD of their stack."""
    dim = _resolve_collab_dim(bundle, collab_dim)
    limit = min(bundle.anchor_rows, bundle.total_dim)
    if not 1 <= dim <= limit:
        raise DimensionError(f"collab_dim={dim} outside [1, {limit}]")
    t0 = time.perf_counter()
    basis_stack, r_factors = stack_anchor_bases(bundle)
    t1 = time.perf_counter()
    maps = qr_svd_maps_from_stack(basis_stack, r_factors, dim,
                                  randomized=randomized, seed=seed)
    t2 = time.perf_counter()
    return CollaborativeMaps(maps=maps.maps, eigenvalues=maps.eigenvalues,
                             method_tag="qr_svd", build_seconds=t1 - t0,
                             solve_seconds=t2 - t1)


# ---------------------------------------------------------------------------
# Minimal-perturbation route
# ---------------------------------------------------------------------------

def stack_anchor_reps(bundle: IntermediateBundle) -> np.ndarray:
    """Column-stack the anchor representations into one r x total matrix."""
    return np.hstack(bundle.anchors)


def min_perturb_maps_from_stack(bundle: IntermediateBundle, stacked: np.ndarray,
                                collab_dim: int, randomized: bool = False,
                                seed: int = 0) -> CollaborativeMaps:
    """Maps onto the dominant left singular subspace of the stack."""
    limit = min(stacked.shape)
    if not 1 <= collab_dim <= limit:
        raise DimensionError(f"collab_dim={collab_dim} outside [1, {limit}]")
    if randomized:
        res = randomized_svd(stacked, k=collab_dim,
                             oversample=RSVD_OVERSAMPLE,
                             power_iters=RSVD_POWER_ITERS, seed=seed)
    else:
        res = svd_thin(stacked)
    sigma = res.sigma
    if sigma[collab_dim - 1] <= RANK_RTOL * sigma[0]:
        raise RankError(
            f"stacked anchor representations have rank below collab_dim={collab_dim}"
        )
    target = _fix_column_signs(res.u[:, :collab_dim])
    maps = tuple(pseudo_inverse(a) @ target for a in bundle.anchors)
    return CollaborativeMaps(maps=maps, eigenvalues=np.empty(0),
                             method_tag="min_perturb")


def solve_collab_minperturb(bundle: IntermediateBundle, collab_dim: int | None = None,
                            randomized: bool = False, seed: int = 0) -> CollaborativeMaps:
    """Alignment maps that perturb the anchor representations least.

    Each institution's map sends its anchor representation as close as
    possible (in least squares) to a common target: the dominant left
    singular subspace of the stacked anchor representations.
    """
    dim = _resolve_collab_dim(bundle, collab_dim)
    limit = min(bundle.anchor_rows, bundle.total_dim)
    if not 1 <= dim <= limit:
        raise DimensionError(f"collab_dim={dim} outside [1, {limit}]")
    t0 = time.perf_counter()
    stacked = stack_anchor_reps(bundle)
    t1 = time.perf_counter()
    maps = min_perturb_maps_from_stack(bundle, stacked, dim,
                                       randomized=randomized, seed=seed)
    t2 = time.perf_counter()
    return CollaborativeMaps(maps=maps.maps, eigenvalues=maps.eigenvalues,
                             method_tag="min_perturb", build_seconds=t1 - t0,
                             solve_seconds=t2 - t1)


# ---------------------------------------------------------------------------
# Diagnostics and application
# ---------------------------------------------------------------------------

def objective_value(bundle: IntermediateBundle, maps: CollaborativeMaps,
                    j: int) -> float:
    """Total pairwise disagreement of direction ``j``, by the literal
    double sum over ordered institution pairs.

    For the eigenproblem solvers this equals the ``j``-th eigenvalue up
    to rounding; the sum is kept explicit so it can serve as an
    independent check on them.
    """
    if not 0 <= j < maps.collab_dim:
        raise IndexError(f"direction {j} out of range [0, {maps.collab_dim})")
    if len(maps.maps) != bundle.institutions:
        raise DimensionError("maps and bundle disagree on institution count")
    images = [a @ g[:, j] for a, g in zip(bundle.anchors, maps.maps)]
    total = 0.0
    for yi in images:
        for yk in images:
            diff = yi - yk
            total += float(diff @ diff)
    return total


def weight_vector(eigenvalues) -> np.ndarray:
    """Confidence weights from ascending disagreement eigenvalues.

    The best-agreed direction gets weight one; weights decay
    exponentially with eigenvalue position inside the spread, down to
    ``exp(-1)`` for the worst. A spread below 1e-12 (all directions
    equally good) yields all ones.
    """
    ev = np.asarray(eigenvalues, dtype=np.float64)
    if ev.ndim != 1 or ev.size < 1:
        raise ValueError("eigenvalues must be a nonempty 1-d array")
    if not np.all(np.isfinite(ev)):
        raise ValueError("eigenvalues contain non-finite entries")
    if np.any(np.diff(ev) < -1e-9 * max(1.0, float(np.abs(ev).max()))):
        raise ValueError("eigenvalues must be ascending")
    span = float(ev[-1] - ev[0])
    if span < WEIGHT_SPAN_FLOOR:
        return np.ones(ev.size)
    return np.exp(-(ev - ev[0]) / span)


def transform_collab(bundle: IntermediateBundle, maps: CollaborativeMaps,
                     weights=None) -> CollaborativeData:
    """Send every institution's data into the shared space.

    Optional ``weights`` scale the shared-space columns (one weight per
    collaborative dimension).
    """
    if len(maps.maps) != bundle.institutions:
        raise DimensionError("maps and bundle disagree on institution count")
    w = None
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size != maps.collab_dim:
            raise DimensionError(
                f"weights must have length {maps.collab_dim}, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
    reps = []
    for i, (d, g) in enumerate(zip(bundle.data, maps.maps)):
        if d.shape[1] != g.shape[0]:
            raise DimensionError(
                f"institution {i}: data columns {d.shape[1]} do not match "
                f"map rows {g.shape[0]}"
            )
        rep = d @ g
        if w is not None:
            rep = rep * w
        reps.append(rep)
    return CollaborativeData(reps=tuple(reps), applied_weights=w)
