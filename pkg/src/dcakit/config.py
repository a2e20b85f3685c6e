"""Experiment configuration: a flat ``key = value`` text format.

One assignment per line; ``#`` starts a comment; blank lines are
ignored. Unknown keys and duplicate keys are errors, so a typo cannot
silently change an experiment. Lists are comma separated.

Keys
----
dataset               path to a CSV dataset (with ``label_column``)
label_column          name of the label column in ``dataset``
synth_classes         \\
synth_dims             | synthetic source instead of ``dataset``;
synth_rows             | Gaussian blobs, see ``make_synthetic``
synth_spread           |
synth_seed            /  (default 0)
institutions          institution count; a list is allowed in timing mode
rows_per_institution  rows drawn for each institution
anchor_multiplier     anchor rows = multiplier x feature count; list in
                      timing mode
contribution_threshold  variance-ratio cut for per-institution dims, or
intermediate_dim        a fixed dimension (exactly one of the two)
dim_rule              per_institution (default) | institution_one
collab_dim            shared-space dimension (default: min over
                      institutions)
methods               subset of: individual centralized dca_min_perturb
                      dca_min_perturb_rand dca_gep dca_gep_weighted
                      dca_qr_svd dca_qr_randsvd
classifier            ridge (default) | centroid
ridge_penalty         positive float, default 1.0
distribution_seeds    list of nonnegative ints, one per partition pattern
holdout_repetitions   train/test re-splits per seed (default 10)
holdout_ratio         train fraction in (0, 1), default 0.5
master_seed           nonnegative int, default 0
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError

__all__ = ["ALLOWED_METHODS", "DCA_METHODS", "ExperimentConfig",
           "parse_config_text", "parse_config_file", "config_echo"]

ALLOWED_METHODS = (
    "individual",
    "centralized",
    "dca_min_perturb",
    "dca_min_perturb_rand",
    "dca_gep",
    "dca_gep_weighted",
    "dca_qr_svd",
    "dca_qr_randsvd",
)

#: Methods that estimate a collaborative function (timing mode applies
#: only to these).
DCA_METHODS = tuple(m for m in ALLOWED_METHODS if m.startswith("dca_"))

DIM_RULES = ("per_institution", "institution_one")
CLASSIFIERS = ("ridge", "centroid")


@dataclass(frozen=True)
class ExperimentConfig:
    institutions: tuple[int, ...]
    rows_per_institution: int
    anchor_multiplier: tuple[int, ...]
    methods: tuple[str, ...]
    distribution_seeds: tuple[int, ...]
    dataset: str | None = None
    label_column: str | None = None
    synth_classes: int | None = None
    synth_dims: int | None = None
    synth_rows: int | None = None
    synth_spread: float | None = None
    synth_seed: int = 0
    contribution_threshold: float | None = None
    intermediate_dim: int | None = None
    dim_rule: str = "per_institution"
    collab_dim: int | None = None
    classifier: str = "ridge"
    ridge_penalty: float = 1.0
    holdout_repetitions: int = 10
    holdout_ratio: float = 0.5
    master_seed: int = 0

    @property
    def uses_synthetic(self) -> bool:
        return self.dataset is None

    def with_master_seed(self, seed: int) -> "ExperimentConfig":
        if seed < 0:
            raise ConfigError("master_seed must be nonnegative")
        return replace(self, master_seed=int(seed))


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _parse_int_list(text: str, key: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: expected at least one integer")
    return tuple(_parse_int(p, key) for p in parts)


_PARSERS = {
    "dataset": str,
    "label_column": str,
    "synth_classes": _parse_int,
    "synth_dims": _parse_int,
    "synth_rows": _parse_int,
    "synth_spread": _parse_float,
    "synth_seed": _parse_int,
    "institutions": _parse_int_list,
    "rows_per_institution": _parse_int,
    "anchor_multiplier": _parse_int_list,
    "contribution_threshold": _parse_float,
    "intermediate_dim": _parse_int,
    "dim_rule": str,
    "collab_dim": _parse_int,
    "methods": str,
    "classifier": str,
    "ridge_penalty": _parse_float,
    "distribution_seeds": _parse_int_list,
    "holdout_repetitions": _parse_int,
    "holdout_ratio": _parse_float,
    "master_seed": _parse_int,
}

_REQUIRED = ("institutions", "rows_per_institution", "anchor_multiplier",
             "methods", "distribution_seeds")


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse and validate configuration text."""
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        parser = _PARSERS[key]
        raw[key] = parser(value, key) if parser is not str else value

    for key in _REQUIRED:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    methods = tuple(m.strip() for m in str(raw["methods"]).split(",") if m.strip())
    for m in methods:
        if m not in ALLOWED_METHODS:
            raise ConfigError(
                f"unknown method {m!r}; allowed: {', '.join(ALLOWED_METHODS)}"
            )
    if len(set(methods)) != len(methods):
        raise ConfigError("methods list contains duplicates")
    raw["methods"] = methods

    cfg = ExperimentConfig(**raw)  # type: ignore[arg-type]
    _validate(cfg)
    return cfg


def parse_config_file(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def _validate(cfg: ExperimentConfig) -> None:
    synth_keys = (cfg.synth_classes, cfg.synth_dims, cfg.synth_rows,
                  cfg.synth_spread)
    has_synth = any(v is not None for v in synth_keys)
    if cfg.dataset is not None:
        if has_synth:
            raise ConfigError("give either dataset or synth_* keys, not both")
        if cfg.label_column is None:
            raise ConfigError("dataset requires label_column")
    else:
        if not all(v is not None for v in synth_keys):
            raise ConfigError(
                "synthetic source needs synth_classes, synth_dims, "
                "synth_rows and synth_spread"
            )
        if cfg.synth_classes < 2:
            raise ConfigError("synth_classes must be at least 2")
        if cfg.synth_dims < 1 or cfg.synth_rows < 1:
            raise ConfigError("synth_dims and synth_rows must be positive")
        if cfg.synth_spread < 0.0:
            raise ConfigError("synth_spread must be nonnegative")
        if cfg.synth_seed < 0:
            raise ConfigError("synth_seed must be nonnegative")

    if not cfg.institutions or any(n < 1 for n in cfg.institutions):
        raise ConfigError("institutions must be positive")
    if cfg.rows_per_institution < 1:
        raise ConfigError("rows_per_institution must be positive")
    if any(m < 1 for m in cfg.anchor_multiplier):
        raise ConfigError("anchor_multiplier must be positive")

    if (cfg.contribution_threshold is None) == (cfg.intermediate_dim is None):
        raise ConfigError(
            "give exactly one of contribution_threshold or intermediate_dim"
        )
    if cfg.contribution_threshold is not None and not 0.0 < cfg.contribution_threshold <= 1.0:
        raise ConfigError("contribution_threshold must be in (0, 1]")
    if cfg.intermediate_dim is not None and cfg.intermediate_dim < 1:
        raise ConfigError("intermediate_dim must be positive")
    if cfg.dim_rule not in DIM_RULES:
        raise ConfigError(f"dim_rule must be one of {', '.join(DIM_RULES)}")
    if cfg.collab_dim is not None and cfg.collab_dim < 1:
        raise ConfigError("collab_dim must be positive")

    if cfg.classifier not in CLASSIFIERS:
        raise ConfigError(f"classifier must be one of {', '.join(CLASSIFIERS)}")
    if not cfg.ridge_penalty > 0.0:
        raise ConfigError("ridge_penalty must be positive")

    if not cfg.distribution_seeds:
        raise ConfigError("distribution_seeds must be nonempty")
    if any(s < 0 for s in cfg.distribution_seeds):
        raise ConfigError("distribution_seeds must be nonnegative")
    if len(set(cfg.distribution_seeds)) != len(cfg.distribution_seeds):
        raise ConfigError("distribution_seeds contains duplicates")
    if cfg.holdout_repetitions < 1:
        raise ConfigError("holdout_repetitions must be positive")
    if not 0.0 < cfg.holdout_ratio < 1.0:
        raise ConfigError("holdout_ratio must be strictly between 0 and 1")
    if cfg.master_seed < 0:
        raise ConfigError("master_seed must be nonnegative")


def _render_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_echo(cfg: ExperimentConfig) -> tuple[tuple[str, str], ...]:
    """Render the effective configuration as ordered key/value strings.

    The echo includes applied defaults, omits unset optional keys, and
    re-parses to an identical configuration.
    """
    pairs: list[tuple[str, str]] = []
    for key in _PARSERS:
        value = getattr(cfg, key)
        if value is None:
            continue
        if key == "methods":
            pairs.append((key, ",".join(value)))
        else:
            pairs.append((key, _render_value(value)))
    return tuple(pairs)
