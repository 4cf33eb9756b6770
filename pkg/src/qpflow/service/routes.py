"""HTTP endpoints for the power-flow solver service."""
from __future__ import annotations

from fastapi import APIRouter, HTTPException

from .. import netmodel
from . import handlers
from .models import (
    CaseRequest,
    CircuitTableRequest,
    CircuitTableResponse,
    CompareRequest,
    CompareResponse,
    ConditionResponse,
    SolveRequest,
    SolveResponse,
)

router = APIRouter()


def _client_error(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


@router.get("/health")
def health() -> dict:
    return {"status": "ok"}


@router.get("/cases")
def cases() -> dict:
    return {"bundled": list(netmodel.bundled_case_names())}


@router.post("/solve", response_model=SolveResponse)
def solve(request: SolveRequest) -> SolveResponse:
    try:
        return handlers.solve(request)
    except (handlers.InputError, FileNotFoundError) as exc:
        raise _client_error(exc) from exc


@router.post("/analyze/condition", response_model=ConditionResponse)
def condition(request: CaseRequest) -> ConditionResponse:
    try:
        return handlers.condition(request)
    except (handlers.InputError, FileNotFoundError) as exc:
        raise _client_error(exc) from exc


@router.post("/analyze/circuit", response_model=CircuitTableResponse)
def circuit(request: CircuitTableRequest) -> CircuitTableResponse:
    try:
        return handlers.circuit_table(request)
    except (handlers.InputError, FileNotFoundError) as exc:
        raise _client_error(exc) from exc


@router.post("/analyze/compare", response_model=CompareResponse)
def compare(request: CompareRequest) -> CompareResponse:
    try:
        return handlers.compare(request)
    except (handlers.InputError, FileNotFoundError) as exc:
        raise _client_error(exc) from exc
