"""Dataset loading, synthesis, and partitioning across institutions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

__all__ = [
    "InstitutionData",
    "load_csv",
    "write_csv",
    "render_csv",
    "make_synthetic",
    "partition",
]


@dataclass(frozen=True)
class InstitutionData:
    """One institution's private rows: features plus integer labels."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise ValueError("features must be 2-d with at least one row")
        if self.labels.ndim != 1 or self.labels.size != self.features.shape[0]:
            raise ValueError("labels must be 1-d with one entry per feature row")
        if self.labels.size and self.labels.min() < 0:
            raise ValueError("labels must be nonnegative")

    @property
    def rows(self) -> int:
        return self.features.shape[0]


def load_csv(path, label_column: str) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Read a labelled dataset from CSV.

    The first row is a header; ``label_column`` names the label column
    and every other column must parse as a finite float. Label classes
    are encoded as integers in order of first appearance. Errors carry
    the 1-based physical line number.

    Returns ``(features, labels, class_names)``.
    """
    p = Path(path)
    if not p.is_file():
        raise DataError(f"dataset file not found: {p}")
    with p.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{p}: empty file, expected a header row") from None
        if len(set(header)) != len(header):
            raise DataError(f"{p}: duplicate column names in header")
        if label_column not in header:
            raise DataError(f"{p}: no column named {label_column!r} in header")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise DataError(f"{p}: no feature columns besides the label")

        rows: list[list[float]] = []
        names: list[str] = []
        codes: dict[str, int] = {}
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{p}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            values = []
            for i in feature_idx:
                try:
                    v = float(row[i])
                except ValueError:
                    raise DataError(
                        f"{p}:{lineno}: non-numeric value {row[i]!r} in "
                        f"column {header[i]!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DataError(
                        f"{p}:{lineno}: non-finite value in column {header[i]!r}"
                    )
                values.append(v)
            rows.append(values)
            key = row[label_idx]
            if key not in codes:
                codes[key] = len(names)
                names.append(key)
            labels.append(codes[key])
    if not rows:
        raise DataError(f"{p}: no data rows after the header")
    return np.array(rows, dtype=np.float64), np.array(labels, dtype=np.int64), names


def write_csv(path, features: np.ndarray, labels: np.ndarray,
              class_names: list[str], label_column: str = "label") -> None:
    """Write a dataset in the format ``load_csv`` reads.

    Floats are rendered with ``repr`` so a load round-trips bit-exactly.
    """
    feats = np.asarray(features, dtype=np.float64)
    labs = np.asarray(labels)
    header = [f"f{i}" for i in range(feats.shape[1])] + [label_column]
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row, lab in zip(feats, labs):
            writer.writerow([repr(float(v)) for v in row] + [class_names[int(lab)]])


def render_csv(features: np.ndarray, labels: np.ndarray,
               class_names: list[str], label_column: str = "label") -> str:
    """Same as ``write_csv`` but returning the text."""
    buf = io.StringIO()
    feats = np.asarray(features, dtype=np.float64)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"f{i}" for i in range(feats.shape[1])] + [label_column])
    for row, lab in zip(feats, np.asarray(labels)):
        writer.writerow([repr(float(v)) for v in row] + [class_names[int(lab)]])
    return buf.getvalue()


def make_synthetic(classes: int, dims: int, rows: int, spread: float,
                   seed: int) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Gaussian class blobs with seeded random means.

    Class means are standard-normal draws; each row is its class mean
    plus ``spread`` times standard-normal noise, so ``spread`` directly
    controls class overlap (zero makes within-class rows identical).
    Rows cycle through classes in order. Deterministic per seed.
    """
    if classes < 2:
        raise ValueError("need at least two classes")
    if dims < 1 or rows < 1:
        raise ValueError("dims and rows must be positive")
    if rows < classes:
        raise ValueError("need at least one row per class")
    if spread < 0.0:
        raise ValueError("spread must be nonnegative")
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((classes, dims))
    labels = np.arange(rows, dtype=np.int64) % classes
    features = means[labels] + spread * rng.standard_normal((rows, dims))
    return features, labels, [f"c{k}" for k in range(classes)]


def partition(n_rows: int, institutions: int, rows_each: int,
              seed: int) -> list[np.ndarray]:
    """Disjoint row-index blocks, one per institution, drawn without
    replacement from a seeded shuffle of all rows."""
    if institutions < 1 or rows_each < 1:
        raise ValueError("institutions and rows_each must be positive")
    need = institutions * rows_each
    if need > n_rows:
        raise ValueError(
            f"cannot draw {institutions} x {rows_each} rows from {n_rows}"
        )
    perm = np.random.default_rng(seed).permutation(n_rows)
    return [perm[i * rows_each:(i + 1) * rows_each] for i in range(institutions)]
