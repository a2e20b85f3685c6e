"""Dense linear-algebra kernels used by the collaboration solvers.

Thin wrappers around LAPACK factorizations with fixed sign conventions,
plus a seeded randomized SVD. Every function here is pure: inputs are
never mutated and all randomness comes from an explicit seed, so
repeated calls with the same arguments return identical arrays.

Sign conventions (for deterministic output across runs):

* ``qr_thin`` flips signs so the diagonal of R is nonnegative.
* Eigenvector and singular-vector columns are flipped so the entry of
  largest magnitude in each column is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import AsymmetryError, DefinitenessError, DimensionError

__all__ = [
    "SvdResult",
    "EigPairs",
    "qr_thin",
    "svd_thin",
    "randomized_svd",
    "sym_eig",
    "gen_eig_sym",
    "pseudo_inverse",
]

#: Relative singular-value cutoff below which the pseudo-inverse
#: treats a direction as null.
DEFAULT_RCOND = 1e-12

#: Relative Frobenius tolerance before a matrix is rejected as asymmetric.
SYMMETRY_RTOL = 1e-8

#: Starting ridge is this factor times mean(diag scale) when a Cholesky
#: factorization fails; escalated tenfold up to three times.
RIDGE_FACTOR = 1e-10
RIDGE_ESCALATIONS = 3


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD factors; ``u @ diag(sigma) @ v.T`` recomposes the input.

    ``sigma`` is nonnegative and descending; ``u`` and ``v`` have
    orthonormal columns.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class EigPairs:
    """Eigenvalues in ascending order; ``vectors[:, k]`` pairs with
    ``values[k]``.

    When eigenvalues repeat, any orthonormal basis of the shared
    eigenspace is a valid result; only the subspace is determined.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_matrix(value, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be 2-d with at least one row and column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _fix_column_signs(m: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest-magnitude entry is
    positive. Zero columns are left alone."""
    idx = np.argmax(np.abs(m), axis=0)
    signs = np.sign(m[idx, np.arange(m.shape[1])])
    signs[signs == 0] = 1.0
    return m * signs


def _check_symmetric(s: np.ndarray, name: str) -> np.ndarray:
    scale = np.linalg.norm(s)
    drift = np.linalg.norm(s - s.T)
    if drift > SYMMETRY_RTOL * max(scale, 1e-300):
        raise AsymmetryError(
            f"{name} is not symmetric: asymmetry {drift:.3e} exceeds "
            f"{SYMMETRY_RTOL:.0e} * norm"
        )
    # Work on the symmetric part so tiny drift cannot leak further.
    return 0.5 * (s + s.T)


def qr_thin(m) -> tuple[np.ndarray, np.ndarray]:
    """Thin (reduced) QR factorization with nonnegative R diagonal.

    Parameters
    ----------
    m : array_like, shape (rows, cols) with rows >= cols

    Returns
    -------
    (q, r) : q has orthonormal columns, r is upper triangular with
        nonnegative diagonal, and ``q @ r`` recomposes ``m``.
    """
    a = _as_matrix(m, "m")
    rows, cols = a.shape
    if rows < cols:
        raise DimensionError(f"thin QR needs rows >= cols, got {rows} x {cols}")
    q, r = np.linalg.qr(a, mode="reduced")
    signs = np.sign(np.diag(r)).copy()
    signs[signs == 0] = 1.0
    return q * signs, signs[:, None] * r


def svd_thin(m) -> SvdResult:
    """Thin SVD via LAPACK; returns all min(rows, cols) triplets."""
    a = _as_matrix(m, "m")
    u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    return SvdResult(u=u, sigma=sigma, v=vt.T)


def randomized_svd(m, k: int, oversample: int = 8, power_iters: int = 2,
                   seed: int = 0) -> SvdResult:
    """Randomized top-``k`` SVD with a Gaussian range finder.

    A sketch of ``k + oversample`` columns captures the dominant range
    of ``m``; ``power_iters`` rounds of power iteration (with QR
    re-orthonormalization to avoid losing digits) sharpen the spectrum
    before a small exact SVD. Deterministic for a fixed seed.
    """
    a = _as_matrix(m, "m")
    rows, cols = a.shape
    if not 1 <= k <= min(rows, cols):
        raise DimensionError(f"k={k} outside [1, {min(rows, cols)}]")
    if oversample < 0:
        raise ValueError("oversample must be nonnegative")
    if power_iters < 0:
        raise ValueError("power_iters must be nonnegative")
    rng = np.random.default_rng(seed)
    sketch = min(k + oversample, min(rows, cols))
    test = rng.standard_normal((cols, sketch))
    basis, _ = np.linalg.qr(a @ test, mode="reduced")
    for _ in range(power_iters):
        basis, _ = np.linalg.qr(a.T @ basis, mode="reduced")
        basis, _ = np.linalg.qr(a @ basis, mode="reduced")
    u_small, sigma, vt = np.linalg.svd(basis.T @ a, full_matrices=False)
    u = basis @ u_small
    return SvdResult(u=np.ascontiguousarray(u[:, :k]),
                     sigma=sigma[:k].copy(),
                     v=np.ascontiguousarray(vt[:k].T))


def sym_eig(s) -> EigPairs:
    """Full eigendecomposition of a symmetric matrix, ascending order."""
    a = _as_matrix(s, "s")
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got {a.shape}")
    a = _check_symmetric(a, "s")
    values, vectors = np.linalg.eigh(a)
    return EigPairs(values=values, vectors=_fix_column_signs(vectors))


def _cholesky_escalating(b: np.ndarray, ridge: float) -> tuple[np.ndarray, float]:
    """Cholesky of ``b + eps*I``, escalating ``eps`` on failure.

    Starts from the caller's ridge; if that fails, retries from
    RIDGE_FACTOR * trace(b)/n, multiplying by ten up to
    RIDGE_ESCALATIONS times before giving up.
    """
    n = b.shape[0]
    eye = np.eye(n)
    base = RIDGE_FACTOR * np.trace(b) / n
    if base <= 0.0:
        base = RIDGE_FACTOR
    attempts = [ridge]
    attempts += [base * 10.0 ** i for i in range(RIDGE_ESCALATIONS + 1)
                 if base * 10.0 ** i > ridge]
    last = None
    for eps in attempts:
        try:
            shifted = b if eps == 0.0 else b + eps * eye
            return np.linalg.cholesky(shifted), eps
        except np.linalg.LinAlgError as exc:
            last = exc
    raise DefinitenessError(
        f"matrix is not positive definite even with ridge {attempts[-1]:.3e}"
    ) from last


def gen_eig_sym(a, b, k: int | None = None, ridge: float = 0.0) -> EigPairs:
    """Smallest ``k`` eigenpairs of the pencil ``a v = lambda b v``.

    ``a`` must be symmetric and ``b`` symmetric positive definite
    (possibly after adding ``ridge * I``). The problem is reduced to a
    standard symmetric one through the Cholesky factor of ``b`` and the
    eigenvectors are transformed back, so each returned ``v`` satisfies
    ``v.T @ (b + eps*I) @ v = 1`` with the effective ridge ``eps``.

    When eigenvalues coincide the individual vectors are only
    determined up to rotation inside the shared eigenspace.
    """
    am = _as_matrix(a, "a")
    bm = _as_matrix(b, "b")
    if am.shape[0] != am.shape[1] or am.shape != bm.shape:
        raise DimensionError(f"need square matrices of equal size, got {am.shape} and {bm.shape}")
    if ridge < 0.0:
        raise ValueError("ridge must be nonnegative")
    n = am.shape[0]
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise DimensionError(f"k={k} outside [1, {n}]")
    am = _check_symmetric(am, "a")
    bm = _check_symmetric(bm, "b")

    chol, eps = _cholesky_escalating(bm, ridge)
    # Reduce to the standard problem  inv(L) a inv(L).T  y = lambda y.
    half = solve_triangular(chol, am, lower=True)
    reduced = solve_triangular(chol, half.T, lower=True).T
    reduced = 0.5 * (reduced + reduced.T)
    values, y = np.linalg.eigh(reduced)
    vectors = solve_triangular(chol.T, y[:, :k], lower=False)

    shifted = bm if eps == 0.0 else bm + eps * np.eye(n)
    norms = np.sqrt(np.einsum("ij,ij->j", vectors, shifted @ vectors))
    vectors = _fix_column_signs(vectors / norms)
    return EigPairs(values=values[:k].copy(), vectors=vectors)


def pseudo_inverse(m, rcond: float = DEFAULT_RCOND) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with a relative cutoff.

    Singular values at or below ``rcond`` times the largest are
    treated as zero.
    """
    res = svd_thin(m)
    cutoff = rcond * (res.sigma[0] if res.sigma.size else 0.0)
    inv = np.zeros_like(res.sigma)
    keep = res.sigma > cutoff
    inv[keep] = 1.0 / res.sigma[keep]
    return (res.v * inv) @ res.u.T
