"""Accuracy and timing experiment protocols.

Every record is a pure function of (config, method, distribution seed,
repetition): partitions, holdout splits, anchors and sketch seeds are
all derived from the master seed with numpy's SeedSequence, so any
single record can be reproduced in isolation and thread-parallel runs
emit byte-identical results. A failure inside one record flags that
record and leaves the rest of the run intact.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .abstraction import AbstractionMap, apply_abstraction, fit_abstraction
from .anchor import ANCHOR_GENERATOR, generate_anchor
from .classifiers import (
    accuracy,
    centroid_fit,
    centroid_predict,
    one_hot,
    ridge_fit,
    ridge_predict,
)
from .collab import (
    IntermediateBundle,
    build_gep_matrices,
    gep_maps_from_matrices,
    min_perturb_maps_from_stack,
    qr_svd_maps_from_stack,
    solve_collab_gep,
    solve_collab_minperturb,
    solve_collab_qr_svd,
    stack_anchor_bases,
    stack_anchor_reps,
    transform_collab,
    weight_vector,
)
from .config import DCA_METHODS, ExperimentConfig, config_echo
from .datasets import InstitutionData, load_csv, make_synthetic, partition
from .errors import ConfigError, DataError, DcaError, error_kind

__all__ = [
    "SCHEMA_VERSION",
    "RunRecord",
    "ExperimentResult",
    "run_accuracy_experiment",
    "run_timing_experiment",
    "derived_seed",
]

SCHEMA_VERSION = 1

#: Eigenvalue weights are applied to both the training and the test
#: representations; recorded in result metadata.
WEIGHTING_SCOPE = "train_and_test"

#: Timing repeats per record; the median damps scheduler noise.
TIMING_REPEATS = 3

# Purpose tags keep derived seed streams disjoint.
_TAG_PARTITION = 101
_TAG_HOLDOUT = 102
_TAG_ANCHOR = 103
_TAG_SKETCH = 104


def derived_seed(*parts: int) -> int:
    """Stable 32-bit seed from nonnegative integer parts."""
    seq = np.random.SeedSequence([int(p) for p in parts])
    return int(seq.generate_state(1)[0])


def _one_line(exc: BaseException) -> str:
    """Flatten an exception to a single record-safe line."""
    return f"{error_kind(exc)}: " + " ".join(str(exc).split())


@dataclass(frozen=True)
class RunRecord:
    """One experiment cell. Optional fields stay None when a method or
    mode does not produce them (or when the record failed)."""

    method: str
    distribution_seed: int
    repetition: int | None
    n_institutions: int
    anchor_rows: int | None = None
    collab_dim: int | None = None
    intermediate_dims: tuple[int, ...] | None = None
    accuracy: float | None = None
    collab_ms: float | None = None
    build_ms: float | None = None
    solve_ms: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class ExperimentResult:
    """Everything one run produced, ready for emission."""

    mode: str
    config_items: tuple[tuple[str, str], ...]
    metadata: tuple[tuple[str, str], ...]
    records: tuple[RunRecord, ...]
    schema_version: int = SCHEMA_VERSION

    @property
    def failed(self) -> int:
        return sum(1 for r in self.records if r.error is not None)

    def aggregates(self) -> list[dict]:
        """Per-method summaries, in first-appearance method order."""
        if self.mode == "accuracy":
            groups: dict[str, list[RunRecord]] = {}
            for r in self.records:
                groups.setdefault(r.method, []).append(r)
            out = []
            for method, recs in groups.items():
                vals = [r.accuracy for r in recs if r.accuracy is not None]
                entry = {
                    "method": method,
                    "records": len(recs),
                    "failed": sum(1 for r in recs if r.error is not None),
                    "mean_accuracy": float(np.mean(vals)) if vals else None,
                    "std_accuracy": (float(np.std(vals, ddof=1))
                                     if len(vals) > 1 else (0.0 if vals else None)),
                }
                out.append(entry)
            return out
        groups2: dict[tuple, list[RunRecord]] = {}
        for r in self.records:
            groups2.setdefault((r.method, r.n_institutions, r.anchor_rows), []).append(r)
        out = []
        for (method, n, rows), recs in groups2.items():
            builds = [r.build_ms for r in recs if r.build_ms is not None]
            solves = [r.solve_ms for r in recs if r.solve_ms is not None]
            entry = {
                "method": method,
                "n_institutions": n,
                "anchor_rows": rows,
                "records": len(recs),
                "failed": sum(1 for r in recs if r.error is not None),
                "mean_build_ms": float(np.mean(builds)) if builds else None,
                "mean_solve_ms": float(np.mean(solves)) if solves else None,
                "mean_total_ms": (float(np.mean([b + s for b, s in zip(builds, solves)]))
                                  if builds and solves else None),
            }
            out.append(entry)
        return out


def _standard_metadata() -> tuple[tuple[str, str], ...]:
    return (("generator", ANCHOR_GENERATOR), ("weighting", WEIGHTING_SCOPE))


def _load_source(cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    if cfg.uses_synthetic:
        feats, labels, _ = make_synthetic(cfg.synth_classes, cfg.synth_dims,
                                          cfg.synth_rows, cfg.synth_spread,
                                          cfg.synth_seed)
    else:
        feats, labels, _ = load_csv(cfg.dataset, cfg.label_column)
    return feats, labels


def _check_capacity(total_rows: int, institutions: int, rows_each: int) -> None:
    if institutions * rows_each > total_rows:
        raise ConfigError(
            f"{institutions} x {rows_each} rows requested but the dataset "
            f"has only {total_rows}"
        )


def _holdout(n: int, ratio: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise DataError(f"need at least 2 rows for a holdout split, got {n}")
    n_train = int(round(n * ratio))
    n_train = min(max(n_train, 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return perm[:n_train], perm[n_train:]


def _fit_model(cfg: ExperimentConfig, feats: np.ndarray, labels: np.ndarray,
               num_classes: int):
    if cfg.classifier == "ridge":
        return ridge_fit(feats, one_hot(labels, num_classes), cfg.ridge_penalty)
    return centroid_fit(feats, labels)


def _predict(model, feats: np.ndarray) -> np.ndarray:
    if hasattr(model, "centroids"):
        return centroid_predict(model, feats)
    return ridge_predict(model, feats)


def _institution_split(cfg: ExperimentConfig, features: np.ndarray,
                       labels: np.ndarray, n_inst: int, ds: int,
                       rep: int) -> tuple[list[InstitutionData], list[InstitutionData]]:
    """Partition rows into institutions and holdout-split each one."""
    idx_blocks = partition(features.shape[0], n_inst, cfg.rows_per_institution,
                           derived_seed(cfg.master_seed, ds, _TAG_PARTITION))
    train, test = [], []
    for i, idx in enumerate(idx_blocks):
        tr, te = _holdout(idx.size, cfg.holdout_ratio,
                          derived_seed(cfg.master_seed, ds, rep, _TAG_HOLDOUT, i))
        train.append(InstitutionData(features[idx[tr]], labels[idx[tr]]))
        test.append(InstitutionData(features[idx[te]], labels[idx[te]]))
    return train, test


def _fit_abstractions(cfg: ExperimentConfig,
                      train: list[InstitutionData]) -> list[AbstractionMap]:
    if cfg.intermediate_dim is not None:
        return [fit_abstraction(t.features, intermediate_dim=cfg.intermediate_dim)
                for t in train]
    if cfg.dim_rule == "institution_one":
        first = fit_abstraction(train[0].features,
                                threshold=cfg.contribution_threshold)
        dim = first.output_dim
        return [first] + [fit_abstraction(t.features, intermediate_dim=dim)
                          for t in train[1:]]
    return [fit_abstraction(t.features, threshold=cfg.contribution_threshold)
            for t in train]


def _solve(method: str, bundle: IntermediateBundle, collab_dim: int | None,
           sketch_seed: int):
    if method in ("dca_gep", "dca_gep_weighted"):
        return solve_collab_gep(bundle, collab_dim)
    if method == "dca_qr_svd":
        return solve_collab_qr_svd(bundle, collab_dim)
    if method == "dca_qr_randsvd":
        return solve_collab_qr_svd(bundle, collab_dim, randomized=True,
                                   seed=sketch_seed)
    if method == "dca_min_perturb":
        return solve_collab_minperturb(bundle, collab_dim)
    if method == "dca_min_perturb_rand":
        return solve_collab_minperturb(bundle, collab_dim, randomized=True,
                                       seed=sketch_seed)
    raise ConfigError(f"unknown collaboration method {method!r}")


def _mean_institution_accuracy(model, reps: list[np.ndarray],
                               test: list[InstitutionData]) -> float:
    scores = [accuracy(_predict(model, rep), t.labels)
              for rep, t in zip(reps, test)]
    return float(np.mean(scores))


def _accuracy_record(cfg: ExperimentConfig, features: np.ndarray,
                     labels: np.ndarray, num_classes: int, n_inst: int,
                     multiplier: int, method: str, ds: int,
                     rep: int) -> RunRecord:
    base = dict(method=method, distribution_seed=ds, repetition=rep,
                n_institutions=n_inst)
    try:
        train, test = _institution_split(cfg, features, labels, n_inst, ds, rep)

        if method == "individual":
            scores = []
            for tr, te in zip(train, test):
                model = _fit_model(cfg, tr.features, tr.labels, num_classes)
                scores.append(accuracy(_predict(model, te.features), te.labels))
            return RunRecord(**base, accuracy=float(np.mean(scores)))

        if method == "centralized":
            pooled_feats = np.vstack([t.features for t in train])
            pooled_labels = np.concatenate([t.labels for t in train])
            model = _fit_model(cfg, pooled_feats, pooled_labels, num_classes)
            scores = [accuracy(_predict(model, te.features), te.labels)
                      for te in test]
            return RunRecord(**base, accuracy=float(np.mean(scores)))

        # Collaboration methods.
        maps = _fit_abstractions(cfg, train)
        dims = tuple(m.output_dim for m in maps)
        feature_dim = features.shape[1]
        anchor = generate_anchor(multiplier * feature_dim, feature_dim,
                                 derived_seed(cfg.master_seed, ds, rep, _TAG_ANCHOR))
        bundle = IntermediateBundle(
            data=tuple(apply_abstraction(m, t.features)
                       for m, t in zip(maps, train)),
            anchors=tuple(apply_abstraction(m, anchor.matrix) for m in maps),
        )
        base.update(anchor_rows=anchor.matrix.shape[0], intermediate_dims=dims)

        sketch_seed = derived_seed(cfg.master_seed, ds, rep, _TAG_SKETCH)
        t0 = time.perf_counter()
        collab = _solve(method, bundle, cfg.collab_dim, sketch_seed)
        collab_ms = (time.perf_counter() - t0) * 1000.0
        base.update(collab_dim=collab.collab_dim)

        weights = (weight_vector(collab.eigenvalues)
                   if method == "dca_gep_weighted" else None)
        shared_train = transform_collab(bundle, collab, weights)
        pooled_feats = np.vstack(shared_train.reps)
        pooled_labels = np.concatenate([t.labels for t in train])
        model = _fit_model(cfg, pooled_feats, pooled_labels, num_classes)

        test_bundle = IntermediateBundle(
            data=tuple(apply_abstraction(m, t.features)
                       for m, t in zip(maps, test)),
            anchors=bundle.anchors,
        )
        shared_test = transform_collab(test_bundle, collab, weights)
        acc = _mean_institution_accuracy(model, list(shared_test.reps), test)
        return RunRecord(**base, accuracy=acc, collab_ms=collab_ms,
                         build_ms=collab.build_seconds * 1000.0,
                         solve_ms=collab.solve_seconds * 1000.0)
    except (DcaError, ValueError) as exc:
        return RunRecord(**base, error=_one_line(exc))


def _run_jobs(specs, job, threads: int) -> list:
    if threads <= 1:
        return [job(s) for s in specs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, specs))


def run_accuracy_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the accuracy protocol.

    Grid: every configured method x distribution seed x holdout
    repetition, in that order. Records: |methods| * |seeds| * reps.
    """
    if len(cfg.institutions) != 1 or len(cfg.anchor_multiplier) != 1:
        raise ConfigError(
            "accuracy mode needs exactly one institutions value and one "
            "anchor_multiplier value"
        )
    features, labels = _load_source(cfg)
    n_inst = cfg.institutions[0]
    multiplier = cfg.anchor_multiplier[0]
    _check_capacity(features.shape[0], n_inst, cfg.rows_per_institution)
    num_classes = int(labels.max()) + 1

    specs = [(method, ds, rep)
             for method in cfg.methods
             for ds in cfg.distribution_seeds
             for rep in range(cfg.holdout_repetitions)]

    def job(spec):
        method, ds, rep = spec
        return _accuracy_record(cfg, features, labels, num_classes, n_inst,
                                multiplier, method, ds, rep)

    records = _run_jobs(specs, job, threads)
    return ExperimentResult(mode="accuracy", config_items=config_echo(cfg),
                            metadata=_standard_metadata(),
                            records=tuple(records))


def _timed_phases(method: str, bundle: IntermediateBundle, collab_dim: int | None,
                  sketch_seed: int):
    """Build/solve closures for one grid cell of the timing protocol."""
    dim = collab_dim if collab_dim is not None else min(bundle.block_dims)
    if method in ("dca_gep", "dca_gep_weighted"):
        return (lambda: build_gep_matrices(bundle),
                lambda built: gep_maps_from_matrices(built[0], built[1],
                                                     bundle.block_dims, dim))
    if method in ("dca_qr_svd", "dca_qr_randsvd"):
        rand = method.endswith("randsvd")
        return (lambda: stack_anchor_bases(bundle),
                lambda built: qr_svd_maps_from_stack(built[0], built[1], dim,
                                                     randomized=rand,
                                                     seed=sketch_seed))
    rand = method.endswith("rand")
    return (lambda: stack_anchor_reps(bundle),
            lambda built: min_perturb_maps_from_stack(bundle, built, dim,
                                                      randomized=rand,
                                                      seed=sketch_seed))


def _timing_record(cfg: ExperimentConfig, features: np.ndarray,
                   labels: np.ndarray, method: str, ds: int, n_inst: int,
                   multiplier: int) -> RunRecord:
    base = dict(method=method, distribution_seed=ds, repetition=None,
                n_institutions=n_inst)
    try:
        idx_blocks = partition(features.shape[0], n_inst,
                               cfg.rows_per_institution,
                               derived_seed(cfg.master_seed, ds, _TAG_PARTITION))
        institutions = [InstitutionData(features[idx], labels[idx])
                        for idx in idx_blocks]
        maps = _fit_abstractions(cfg, institutions)
        dims = tuple(m.output_dim for m in maps)
        feature_dim = features.shape[1]
        anchor = generate_anchor(multiplier * feature_dim, feature_dim,
                                 derived_seed(cfg.master_seed, ds, 0, _TAG_ANCHOR))
        bundle = IntermediateBundle(
            data=tuple(apply_abstraction(m, inst.features)
                       for m, inst in zip(maps, institutions)),
            anchors=tuple(apply_abstraction(m, anchor.matrix) for m in maps),
        )
        base.update(anchor_rows=anchor.matrix.shape[0], intermediate_dims=dims)
        sketch_seed = derived_seed(cfg.master_seed, ds, 0, _TAG_SKETCH)
        build, solve = _timed_phases(method, bundle, cfg.collab_dim, sketch_seed)

        build_times, solve_times = [], []
        collab_dim = None
        for _ in range(TIMING_REPEATS):
            t0 = time.perf_counter()
            built = build()
            t1 = time.perf_counter()
            solved = solve(built)
            t2 = time.perf_counter()
            build_times.append(t1 - t0)
            solve_times.append(t2 - t1)
            collab_dim = solved.collab_dim
        build_ms = statistics.median(build_times) * 1000.0
        solve_ms = statistics.median(solve_times) * 1000.0
        return RunRecord(**base, collab_dim=collab_dim,
                         build_ms=build_ms, solve_ms=solve_ms,
                         collab_ms=build_ms + solve_ms)
    except (DcaError, ValueError) as exc:
        return RunRecord(**base, error=_one_line(exc))


def run_timing_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run the timing protocol over the (institutions x multiplier) grid.

    Only collaboration methods are allowed; classifier settings are
    ignored. Build and solve phases of each solver are timed separately
    (median of TIMING_REPEATS repeats). Single-threaded runs give the
    cleanest timings.
    """
    for m in cfg.methods:
        if m not in DCA_METHODS:
            raise ConfigError(
                f"timing mode measures collaborative-function estimation; "
                f"{m!r} does not estimate one"
            )
    features, labels = _load_source(cfg)
    _check_capacity(features.shape[0], max(cfg.institutions),
                    cfg.rows_per_institution)

    specs = [(method, ds, n, mult)
             for method in cfg.methods
             for ds in cfg.distribution_seeds
             for n in cfg.institutions
             for mult in cfg.anchor_multiplier]

    def job(spec):
        method, ds, n, mult = spec
        return _timing_record(cfg, features, labels, method, ds, n, mult)

    records = _run_jobs(specs, job, threads)
    return ExperimentResult(mode="timing", config_items=config_echo(cfg),
                            metadata=_standard_metadata(),
                            records=tuple(records))
