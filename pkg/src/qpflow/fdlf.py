"""Fast decoupled load flow with a pluggable linear-solver contract.

Each iteration computes the power mismatches once, solves the angle system
(B' d_theta = dP) and the magnitude system (B'' d_vm = dQ) from those same
mismatches, then applies both corrections by subtraction. A sub-solve is
skipped once its own mismatch norm is already below tolerance, which is the
update discipline that reproduces the reference iteration trajectories.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
import scipy.linalg

from .netmodel import AdmittanceMatrix, DecoupledMatrices, PowerNetwork, build_b_matrices, build_ybus


class SingularMatrixError(ValueError):
    """Raised when a direct solve meets a pivot below threshold."""


class PowerFlowDidNotConverge(RuntimeError):
    """Signals a run that hit max_iter; the trace is attached."""

    def __init__(self, trace: "PowerFlowTrace"):
        super().__init__(f"power flow did not converge in {len(trace.rows)} iterations")
        self.trace = trace


class LinearSolver(Protocol):
    label: str

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class PFState:
    vm: np.ndarray     # p.u., one entry per bus
    theta: np.ndarray  # radians, one entry per bus

    def copy(self) -> "PFState":
        return PFState(vm=self.vm.copy(), theta=self.theta.copy())


@dataclass(frozen=True)
class MismatchVector:
    dp: np.ndarray  # non-slack buses
    dq: np.ndarray  # PQ buses

    @property
    def dp_norm(self) -> float:
        return float(np.linalg.norm(self.dp))

    @property
    def dq_norm(self) -> float:
        return float(np.linalg.norm(self.dq))


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    vm: np.ndarray
    theta: np.ndarray
    dp_norm: float
    dq_norm: float


@dataclass
class PowerFlowTrace:
    solver: str
    tol: float
    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False


def initial_state(net: PowerNetwork) -> PFState:
    """State from the case's initial voltages (flat start in bundled cases)."""
    vm = np.array([b.vm_init for b in net.buses], dtype=float)
    theta = np.radians([b.theta_init_deg for b in net.buses])
    return PFState(vm=vm, theta=theta)


def compute_mismatch(net: PowerNetwork, y: AdmittanceMatrix, state: PFState) -> MismatchVector:
    """Scheduled-minus-computed injections, scaled elementwise by 1/Vm."""
    if np.any(state.vm == 0):
        raise ValueError("voltage magnitude of zero")
    v = state.vm * np.exp(1j * state.theta)
    ds = (net.injections_pu() - v * np.conj(y.y @ v)) / state.vm
    return MismatchVector(
        dp=ds.real[list(net.non_slack_indices)],
        dq=ds.imag[list(net.pq_indices)],
    )


def classical_solve(b: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Direct LU solve; rejects pivots below 1e-12 as singular."""
    b = np.asarray(b, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] != rhs.shape[0]:
        raise ValueError("matrix/rhs shape mismatch")
    with warnings.catch_warnings():
        # singularity is reported through the pivot check below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(b, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < 1e-12:
        raise SingularMatrixError("singular matrix")
    return scipy.linalg.lu_solve((lu, piv), rhs)


class ClassicalSolver:
    """Direct factorization backend for the solver contract."""

    label = "classical"

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        return classical_solve(matrix, rhs)


def apply_update(net: PowerNetwork, state: PFState, dtheta: np.ndarray, dvm: np.ndarray) -> PFState:
    """theta[non-slack] -= dtheta; vm[PQ] -= dvm; slack untouched."""
    vm = state.vm.copy()
    theta = state.theta.copy()
    nonslack = list(net.non_slack_indices)
    pq = list(net.pq_indices)
    theta[nonslack] -= np.asarray(dtheta, dtype=float)
    vm[pq] -= np.asarray(dvm, dtype=float)
    return PFState(vm=vm, theta=theta)


def run_power_flow(
    net: PowerNetwork,
    solver: LinearSolver,
    tol: float = 1e-5,
    max_iter: int = 200,
) -> tuple[PFState, PowerFlowTrace]:
    """Iterate until both mismatch norms drop below tol.

    Returns the final state and the per-iteration trace. Non-convergence is
    reported through trace.converged = False (no exception), so callers can
    inspect partial results; solver errors propagate.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    y = build_ybus(net)
    mats = build_b_matrices(net, y)
    state = initial_state(net)
    trace = PowerFlowTrace(solver=solver.label, tol=tol)

    mis = compute_mismatch(net, y, state)
    while not (mis.dp_norm < tol and mis.dq_norm < tol):
        if len(trace.rows) >= max_iter:
            return state, trace
        dtheta = (
            solver.solve(mats.b_prime, mis.dp)
            if mis.dp_norm >= tol
            else np.zeros_like(mis.dp)
        )
        dvm = (
            solver.solve(mats.b_dprime, mis.dq)
            if mis.dq_norm >= tol
            else np.zeros_like(mis.dq)
        )
        state = apply_update(net, state, dtheta, dvm)
        mis = compute_mismatch(net, y, state)
        trace.rows.append(
            TraceRow(
                iteration=len(trace.rows) + 1,
                vm=state.vm.copy(),
                theta=state.theta.copy(),
                dp_norm=mis.dp_norm,
                dq_norm=mis.dq_norm,
            )
        )
    trace.converged = True
    return state, trace


def trace_to_csv(trace: PowerFlowTrace, net: PowerNetwork) -> str:
    """Per-iteration CSV: voltages in p.u., angles in degrees, 12 significant digits."""
    nonslack = list(net.non_slack_indices)
    header = ["iter"]
    for i in nonslack:
        label = net.buses[i].id
        header += [f"V{label}", f"theta{label}_deg"]
    header += ["dP_norm", "dQ_norm"]
    lines = [",".join(header)]
    for row in trace.rows:
        cells = [str(row.iteration)]
        for i in nonslack:
            cells.append(format(row.vm[i], ".12g"))
            cells.append(format(np.degrees(row.theta[i]), ".12g"))
        cells.append(format(row.dp_norm, ".12g"))
        cells.append(format(row.dq_norm, ".12g"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def decoupled_matrices(net: PowerNetwork) -> DecoupledMatrices:
    """Convenience wrapper: Ybus assembly plus B-matrix restriction."""
    return build_b_matrices(net, build_ybus(net))
