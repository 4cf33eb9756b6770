"""Pydantic request/response models for the solver service."""
from __future__ import annotations

from pydantic import BaseModel, Field


class SolveRequest(BaseModel):
    case: dict | None = None          # inline case object (same schema as case files)
    case_name: str | None = None      # bundled fixture name, e.g. "case3"
    solver: str = "classical"         # classical | hhl-ideal | hhl-sampled | hhl-noisy
    tol: float = Field(default=1e-5, gt=0)
    max_iter: int = Field(default=200, ge=1)
    shots: int = Field(default=1024, ge=1)
    n_l: int = Field(default=3, ge=2)
    p_cnot: float = Field(default=1e-2, ge=0, le=1)
    p_1q: float | None = Field(default=None, ge=0, le=1)
    seed: int = 0
    readout: str | None = None        # exact | sampled (defaults per solver)
    signs: str = "reference"          # reference | positive


class BusState(BaseModel):
    id: int
    kind: str
    vm: float
    theta_deg: float


class TraceRowModel(BaseModel):
    iteration: int
    vm: list[float]
    theta_deg: list[float]
    dp_norm: float
    dq_norm: float


class SolveResponse(BaseModel):
    solver: str
    tol: float
    converged: bool
    iterations: int
    dp_norm: float
    dq_norm: float
    buses: list[BusState]
    trace: list[TraceRowModel]
    trace_csv: str


class CaseRequest(BaseModel):
    case: dict | None = None
    case_name: str | None = None
    label: str | None = None


class ConditionResponse(BaseModel):
    label: str
    kappa: float
    lambda_max_abs: float
    lambda_min_abs: float


class CircuitTableRequest(BaseModel):
    cases: list[CaseRequest]
    n_l: int = Field(default=3, ge=2)


class CircuitSizeRowModel(BaseModel):
    case: str
    matrix_size: str
    width: int
    depth_estimate: int
    cnot_estimate: int


class CircuitTableResponse(BaseModel):
    rows: list[CircuitSizeRowModel]


class CompareRequest(BaseModel):
    case: dict | None = None
    case_name: str | None = None
    solvers: list[str] = ["classical", "hhl-ideal"]
    tol: float = Field(default=1e-5, gt=0)
    max_iter: int = Field(default=200, ge=1)
    seeds: list[int] | None = None
    n_l: int = Field(default=3, ge=2)
    shots: int = Field(default=1024, ge=1)
    p_cnot: float = Field(default=1e-2, ge=0, le=1)
    p_1q: float | None = Field(default=None, ge=0, le=1)
    signs: str = "reference"


class CompareSolverSummary(BaseModel):
    label: str
    iterations: int
    converged: bool


class CompareResponse(BaseModel):
    tol: float
    solvers: list[CompareSolverSummary]
    error_columns: dict[str, list[float]]
    csv: str
