"""The central analysis institution as a small HTTP service.

Institutions (or the bundled CLI) post work here; responses carry
rendered result files so clients can write them to disk verbatim.
The solver endpoint accepts only anchor representations, never raw
features, mirroring what the central party is allowed to see.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..collab import (
    IntermediateBundle,
    solve_collab_gep,
    solve_collab_minperturb,
    solve_collab_qr_svd,
)
from ..config import parse_config_text
from ..datasets import make_synthetic, render_csv
from ..errors import DataError, DcaError, SolverError, error_kind
from ..experiments import (
    SCHEMA_VERSION,
    run_accuracy_experiment,
    run_timing_experiment,
)
from ..results import render_results
from . import schemas

_STATUS = {"config": 400, "data": 400, "solver": 422, "internal": 500}


def create_app() -> FastAPI:
    app = FastAPI(title="Data collaboration analysis service",
                  version=__version__)

    @app.exception_handler(DcaError)
    async def _dca_error(request: Request, exc: DcaError) -> JSONResponse:
        kind = error_kind(exc)
        payload = schemas.ErrorPayload(error_kind=kind, message=str(exc))
        return JSONResponse(status_code=_STATUS[kind],
                            content=payload.model_dump())

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__,
                                      schema_version=SCHEMA_VERSION)

    @app.post("/datasets/synthetic", response_model=schemas.SyntheticResponse)
    def synthetic(req: schemas.SyntheticRequest) -> schemas.SyntheticResponse:
        try:
            feats, labels, names = make_synthetic(req.classes, req.dims,
                                                  req.rows, req.spread,
                                                  req.seed)
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        return schemas.SyntheticResponse(
            csv_text=render_csv(feats, labels, names),
            rows=feats.shape[0], dims=feats.shape[1], classes=req.classes,
        )

    def _experiment(req: schemas.ExperimentRequest, runner) -> schemas.ExperimentResponse:
        cfg = parse_config_text(req.config_text)
        if req.seed_override is not None:
            cfg = cfg.with_master_seed(req.seed_override)
        result = runner(cfg, threads=req.threads)
        if result.records and result.failed == len(result.records):
            first = next(r.error for r in result.records if r.error)
            raise SolverError(f"all {len(result.records)} records failed; "
                              f"first error: {first}")
        return schemas.ExperimentResponse(
            content=render_results(result, req.format),
            format=req.format,
            mode=result.mode,
            record_count=len(result.records),
            failed_count=result.failed,
            aggregates=result.aggregates(),
        )

    @app.post("/experiments/accuracy", response_model=schemas.ExperimentResponse)
    def accuracy_experiment(req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        return _experiment(req, run_accuracy_experiment)

    @app.post("/experiments/timing", response_model=schemas.ExperimentResponse)
    def timing_experiment(req: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        return _experiment(req, run_timing_experiment)

    @app.post("/collab/solve", response_model=schemas.SolveResponse)
    def solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
        anchors = [np.asarray(a, dtype=np.float64) for a in req.anchor_reps]
        data = [np.zeros((0, a.shape[1] if a.ndim == 2 else 0)) for a in anchors]
        bundle = IntermediateBundle(data=tuple(data), anchors=tuple(anchors))
        if req.method == "dca_gep":
            maps = solve_collab_gep(bundle, req.collab_dim, ridge=req.ridge)
        elif req.method == "dca_qr_svd":
            maps = solve_collab_qr_svd(bundle, req.collab_dim)
        elif req.method == "dca_qr_randsvd":
            maps = solve_collab_qr_svd(bundle, req.collab_dim, randomized=True,
                                       seed=req.seed)
        elif req.method == "dca_min_perturb":
            maps = solve_collab_minperturb(bundle, req.collab_dim)
        else:
            maps = solve_collab_minperturb(bundle, req.collab_dim,
                                           randomized=True, seed=req.seed)
        return schemas.SolveResponse(
            maps=[g.tolist() for g in maps.maps],
            eigenvalues=maps.eigenvalues.tolist(),
            method_tag=maps.method_tag,
            collab_dim=maps.collab_dim,
        )

    return app


app = create_app()
