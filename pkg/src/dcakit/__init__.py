"""Data collaboration analysis toolkit.

Institutions reduce their private data with institution-specific maps,
share only the reduced representations of their rows and of a common
random anchor, and a central analysis aligns everything into one
shared space where a single model is trained.
"""

__version__ = "0.1.0"

from .abstraction import AbstractionMap, apply_abstraction, fit_abstraction
from .anchor import ANCHOR_GENERATOR, AnchorData, generate_anchor
from .classifiers import (
    CentroidClassifier,
    RidgeClassifier,
    accuracy,
    centroid_fit,
    centroid_predict,
    one_hot,
    ridge_fit,
    ridge_predict,
)
from .collab import (
    CollaborativeData,
    CollaborativeMaps,
    IntermediateBundle,
    build_gep_matrices,
    objective_value,
    solve_collab_gep,
    solve_collab_minperturb,
    solve_collab_qr_svd,
    transform_collab,
    weight_vector,
)
from .config import ExperimentConfig, parse_config_file, parse_config_text
from .datasets import InstitutionData, load_csv, make_synthetic, partition, write_csv
from .errors import (
    AsymmetryError,
    ConfigError,
    DataError,
    DcaError,
    DefinitenessError,
    DimensionError,
    RankError,
    SolverError,
)
from .experiments import (
    ExperimentResult,
    RunRecord,
    run_accuracy_experiment,
    run_timing_experiment,
)
from .linalg import (
    EigPairs,
    SvdResult,
    gen_eig_sym,
    pseudo_inverse,
    qr_thin,
    randomized_svd,
    svd_thin,
    sym_eig,
)
from .results import emit_results, parse_results, render_results

__all__ = [
    "__version__",
    "ANCHOR_GENERATOR",
    "AbstractionMap",
    "AnchorData",
    "CentroidClassifier",
    "CollaborativeData",
    "CollaborativeMaps",
    "EigPairs",
    "ExperimentConfig",
    "ExperimentResult",
    "InstitutionData",
    "IntermediateBundle",
    "RidgeClassifier",
    "RunRecord",
    "SvdResult",
    "accuracy",
    "apply_abstraction",
    "build_gep_matrices",
    "centroid_fit",
    "centroid_predict",
    "emit_results",
    "fit_abstraction",
    "gen_eig_sym",
    "generate_anchor",
    "load_csv",
    "make_synthetic",
    "objective_value",
    "one_hot",
    "parse_config_file",
    "parse_config_text",
    "parse_results",
    "partition",
    "pseudo_inverse",
    "qr_thin",
    "randomized_svd",
    "render_results",
    "ridge_fit",
    "ridge_predict",
    "run_accuracy_experiment",
    "run_timing_experiment",
    "solve_collab_gep",
    "solve_collab_minperturb",
    "solve_collab_qr_svd",
    "svd_thin",
    "sym_eig",
    "transform_collab",
    "weight_vector",
    "write_csv",
    "AsymmetryError",
    "ConfigError",
    "DataError",
    "DcaError",
    "DefinitenessError",
    "DimensionError",
    "RankError",
    "SolverError",
]
