"""Service-layer operations shared by the HTTP routes and the CLI."""
from __future__ import annotations

import json

import numpy as np

from .. import analysis, fdlf, hhl, netmodel
from .models import (
    BusState,
    CaseRequest,
    CircuitSizeRowModel,
    CircuitTableRequest,
    CircuitTableResponse,
    CompareRequest,
    CompareResponse,
    CompareSolverSummary,
    ConditionResponse,
    SolveRequest,
    SolveResponse,
    TraceRowModel,
)


class InputError(ValueError):
    """Client-side problem: bad case data or unknown options."""


def _load_network(case: dict | None, case_name: str | None) -> netmodel.PowerNetwork:
    if (case is None) == (case_name is None):
        raise InputError("provide exactly one of 'case' or 'case_name'")
    try:
        if case is not None:
            return netmodel.parse_case(json.dumps(case))
        return netmodel.load_bundled_case(case_name)
    except netmodel.NetworkError as exc:
        raise InputError(str(exc)) from exc


def solve(request: SolveRequest) -> SolveResponse:
    net = _load_network(request.case, request.case_name)
    try:
        solver = hhl.make_solver(
            request.solver,
            n_l=request.n_l,
            shots=request.shots,
            p_cnot=request.p_cnot,
            p_1q=request.p_1q,
            seed=request.seed,
            readout=request.readout,
            signs=request.signs,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    state, trace = fdlf.run_power_flow(net, solver, request.tol, request.max_iter)

    rows = [
        TraceRowModel(
            iteration=row.iteration,
            vm=[float(v) for v in row.vm],
            theta_deg=[float(t) for t in np.degrees(row.theta)],
            dp_norm=row.dp_norm,
            dq_norm=row.dq_norm,
        )
        for row in trace.rows
    ]
    last_dp = trace.rows[-1].dp_norm if trace.rows else 0.0
    last_dq = trace.rows[-1].dq_norm if trace.rows else 0.0
    buses = [
        BusState(
            id=bus.id,
            kind=bus.kind.value,
            vm=float(state.vm[i]),
            theta_deg=float(np.degrees(state.theta[i])),
        )
        for i, bus in enumerate(net.buses)
    ]
    return SolveResponse(
        solver=solver.label,
        tol=request.tol,
        converged=trace.converged,
        iterations=len(trace.rows),
        dp_norm=last_dp,
        dq_norm=last_dq,
        buses=buses,
        trace=rows,
        trace_csv=fdlf.trace_to_csv(trace, net),
    )


def condition(request: CaseRequest) -> ConditionResponse:
    net = _load_network(request.case, request.case_name)
    label = request.label or request.case_name or "case"
    mats = fdlf.decoupled_matrices(net)
    try:
        report = analysis.condition_number(mats.b_prime, label=label)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return ConditionResponse(**report.to_dict())


def circuit_table(request: CircuitTableRequest) -> CircuitTableResponse:
    cases = []
    for i, entry in enumerate(request.cases):
        net = _load_network(entry.case, entry.case_name)
        cases.append((entry.label or entry.case_name or f"case[{i}]", net))
    rows = analysis.circuit_size_table(cases, n_l=request.n_l)
    return CircuitTableResponse(
        rows=[CircuitSizeRowModel(**row.to_dict()) for row in rows]
    )


def compare(request: CompareRequest) -> CompareResponse:
    net = _load_network(request.case, request.case_name)
    for name in request.solvers:
        if name not in hhl.SOLVER_NAMES:
            raise InputError(f"unknown solver {name!r}")
    comparison = analysis.compare_convergence(
        net,
        request.solvers,
        tol=request.tol,
        max_iter=request.max_iter,
        seeds=request.seeds,
        n_l=request.n_l,
        shots=request.shots,
        p_cnot=request.p_cnot,
        p_1q=request.p_1q,
        signs=request.signs,
    )
    return CompareResponse(
        tol=comparison.tol,
        solvers=[
            CompareSolverSummary(
                label=label, iterations=len(trace.rows), converged=trace.converged
            )
            for label, trace in comparison.entries
        ],
        error_columns=comparison.error_columns,
        csv=analysis.comparison_to_csv(comparison),
    )
