"""Downstream models run on the shared representations.

Deliberately small: a ridge-regularized least-squares classifier on
one-hot targets and a nearest-centroid classifier. Both break ties
toward the lowest class index, so predictions are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RidgeClassifier",
    "CentroidClassifier",
    "one_hot",
    "ridge_fit",
    "ridge_predict",
    "centroid_fit",
    "centroid_predict",
    "accuracy",
]


@dataclass(frozen=True)
class RidgeClassifier:
    """Weight matrix of shape (features + 1, classes); last row is the
    unpenalized bias."""

    weights: np.ndarray
    penalty: float


@dataclass(frozen=True)
class CentroidClassifier:
    classes: np.ndarray
    centroids: np.ndarray


def _features(x, name: str = "x") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1:
        raise ValueError(f"{name} must be 2-d with at least one row")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def one_hot(labels, num_classes: int | None = None) -> np.ndarray:
    """Encode integer labels as one-hot rows."""
    lab = np.asarray(labels)
    if lab.ndim != 1 or lab.size < 1:
        raise ValueError("labels must be a nonempty 1-d array")
    lab = lab.astype(np.int64)
    if lab.min() < 0:
        raise ValueError("labels must be nonnegative")
    if num_classes is None:
        num_classes = int(lab.max()) + 1
    elif lab.max() >= num_classes:
        raise ValueError(f"label {lab.max()} outside [0, {num_classes})")
    out = np.zeros((lab.size, num_classes))
    out[np.arange(lab.size), lab] = 1.0
    return out


def ridge_fit(x, targets, penalty: float) -> RidgeClassifier:
    """Least-squares fit of one-hot targets with an L2 penalty on all
    weights except the bias.

    With any positive penalty the normal-equations matrix is positive
    definite (the penalized block strictly dominates, and the bias
    column cannot be annihilated), so the solve cannot be singular.
    """
    a = _features(x)
    t = np.asarray(targets, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != a.shape[0]:
        raise ValueError("targets must be one-hot with one row per sample")
    if t.shape[1] < 2:
        raise ValueError("need at least two classes")
    if a.shape[0] < t.shape[1]:
        raise ValueError(
            f"need at least as many rows ({a.shape[0]}) as classes ({t.shape[1]})"
        )
    if not penalty > 0.0:
        raise ValueError("penalty must be positive")
    design = np.hstack([a, np.ones((a.shape[0], 1))])
    gram = design.T @ design
    reg = np.full(design.shape[1], float(penalty))
    reg[-1] = 0.0
    gram[np.diag_indices_from(gram)] += reg
    weights = np.linalg.solve(gram, design.T @ t)
    return RidgeClassifier(weights=weights, penalty=float(penalty))


def ridge_predict(model: RidgeClassifier, x) -> np.ndarray:
    """Argmax of the linear scores; first class wins exact ties."""
    a = _features(x)
    if a.shape[1] != model.weights.shape[0] - 1:
        raise ValueError(
            f"x must have {model.weights.shape[0] - 1} columns, got {a.shape[1]}"
        )
    scores = a @ model.weights[:-1] + model.weights[-1]
    return np.argmax(scores, axis=1)


def centroid_fit(x, labels) -> CentroidClassifier:
    a = _features(x)
    lab = np.asarray(labels).astype(np.int64)
    if lab.ndim != 1 or lab.size != a.shape[0]:
        raise ValueError("labels must be 1-d with one entry per row")
    classes = np.unique(lab)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    centroids = np.vstack([a[lab == c].mean(axis=0) for c in classes])
    return CentroidClassifier(classes=classes, centroids=centroids)


def centroid_predict(model: CentroidClassifier, x) -> np.ndarray:
    """Label of the nearest centroid; lowest class wins exact ties."""
    a = _features(x)
    if a.shape[1] != model.centroids.shape[1]:
        raise ValueError(
            f"x must have {model.centroids.shape[1]} columns, got {a.shape[1]}"
        )
    dists = np.linalg.norm(a[:, None, :] - model.centroids[None, :, :], axis=2)
    return model.classes[np.argmin(dists, axis=1)]


def accuracy(predicted, truth) -> float:
    """Fraction of exact matches."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1 or p.size < 1:
        raise ValueError("predicted and truth must be equal-length 1-d arrays")
    return float(np.mean(p == t))
