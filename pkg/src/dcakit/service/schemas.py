"""Request/response models for the analysis service."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field

SolverName = Literal["dca_min_perturb", "dca_min_perturb_rand", "dca_gep",
                     "dca_qr_svd", "dca_qr_randsvd"]


class HealthResponse(BaseModel):
    status: str
    version: str
    schema_version: int


class SyntheticRequest(BaseModel):
    classes: int = Field(ge=2)
    dims: int = Field(ge=1)
    rows: int = Field(ge=1)
    spread: float = Field(ge=0.0)
    seed: int = Field(default=0, ge=0)


class SyntheticResponse(BaseModel):
    csv_text: str
    rows: int
    dims: int
    classes: int


class ExperimentRequest(BaseModel):
    config_text: str
    format: Literal["csv", "jsonl"] = "csv"
    seed_override: Optional[int] = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1, le=64)


class ExperimentResponse(BaseModel):
    content: str
    format: str
    mode: str
    record_count: int
    failed_count: int
    aggregates: list[dict[str, Any]]


class SolveRequest(BaseModel):
    """Solve for alignment maps from anchor representations alone.

    ``anchor_reps[i]`` is institution i's reduced anchor matrix; no raw
    or reduced data rows cross this boundary.
    """

    anchor_reps: list[list[list[float]]]
    method: SolverName
    collab_dim: Optional[int] = Field(default=None, ge=1)
    ridge: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)


class SolveResponse(BaseModel):
    maps: list[list[list[float]]]
    eigenvalues: list[float]
    method_tag: str
    collab_dim: int


class ErrorPayload(BaseModel):
    error_kind: Literal["config", "data", "solver", "internal"]
    message: str
