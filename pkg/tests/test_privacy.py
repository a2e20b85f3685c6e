"""Structural checks on what each layer is allowed to see.

The central-analysis modules must be expressible without ever importing
the raw-data side, so a leak cannot be introduced by accident without
failing these tests.
"""

import ast
from pathlib import Path

SRC = Path(__file__).resolve().parents[1] / "src" / "dcakit"

# Modules that deal in raw (pre-reduction) rows.
RAW_DATA_MODULES = {"datasets", "abstraction", "anchor"}


def imported_modules(path: Path) -> set[str]:
    tree = ast.parse(path.read_text())
    found = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            found.update(alias.name for alias in node.names)
        elif isinstance(node, ast.ImportFrom) and node.module:
            found.add(node.module)
        elif isinstance(node, ast.ImportFrom) and node.level:
            # relative "from . import x"
            found.update(alias.name for alias in node.names)
    return found


def test_solver_layer_never_imports_raw_data_modules():
    for name in ("collab", "classifiers", "linalg"):
        mods = imported_modules(SRC / f"{name}.py")
        hits = {m for m in mods
                if m.split(".")[-1] in RAW_DATA_MODULES}
        assert not hits, f"{name}.py imports raw-data modules: {hits}"


def test_solve_endpoint_request_carries_only_anchor_reps():
    from dcakit.service.schemas import SolveRequest

    names = set(SolveRequest.model_fields)
    assert "anchor_reps" in names
    for bad in ("data", "features", "rows", "labels", "dataset"):
        assert not any(bad in n for n in names), names


def test_solvers_accept_bundles_not_file_paths():
    import inspect

    from dcakit.collab import (
        solve_collab_gep,
        solve_collab_minperturb,
        solve_collab_qr_svd,
    )

    for solver in (solve_collab_gep, solve_collab_qr_svd,
                   solve_collab_minperturb):
        params = list(inspect.signature(solver).parameters)
        assert params[0] == "bundle"


def test_bundle_allows_zero_row_data():
    # The service solves from anchor representations alone; the bundle
    # must not force callers to attach data rows.
    import numpy as np

    from dcakit.collab import IntermediateBundle, solve_collab_gep

    rng = np.random.default_rng(0)
    anchors = tuple(rng.standard_normal((10, 3)) for _ in range(2))
    bundle = IntermediateBundle(
        data=tuple(np.zeros((0, 3)) for _ in range(2)),
        anchors=anchors,
    )
    maps = solve_collab_gep(bundle)
    assert maps.collab_dim == 3
