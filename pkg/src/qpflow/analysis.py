"""Diagnostics: condition numbers, circuit-size tables, convergence comparisons."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import fdlf, hhl
from .fdlf import PowerFlowTrace, run_power_flow
from .netmodel import PowerNetwork, build_b_matrices, build_ybus


@dataclass(frozen=True)
class ConditionReport:
    label: str
    kappa: float
    lambda_max_abs: float
    lambda_min_abs: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kappa": self.kappa,
            "lambda_max_abs": self.lambda_max_abs,
            "lambda_min_abs": self.lambda_min_abs,
        }


def condition_number(b: np.ndarray, label: str = "") -> ConditionReport:
    """kappa = |lambda_max| / |lambda_min| from the symmetric eigenvalues."""
    b = np.asarray(b, dtype=float)
    if not np.allclose(b, b.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    lam = np.abs(np.linalg.eigvalsh(b))
    if lam.min() < 1e-12:
        raise ValueError("singular matrix: smallest |eigenvalue| below 1e-12")
    return ConditionReport(
        label=label,
        kappa=float(lam.max() / lam.min()),
        lambda_max_abs=float(lam.max()),
        lambda_min_abs=float(lam.min()),
    )


@dataclass(frozen=True)
class CircuitSizeRow:
    case: str
    matrix_size: str
    width: int
    depth_estimate: int
    cnot_estimate: int

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "matrix_size": self.matrix_size,
            "width": self.width,
            "depth_estimate": self.depth_estimate,
            "cnot_estimate": self.cnot_estimate,
        }


def circuit_size_table(
    cases: list[tuple[str, PowerNetwork]], n_l: int = 3
) -> list[CircuitSizeRow]:
    """Width (exact) plus depth/CNOT estimates of each case's solver circuit.

    The circuit is built for the case's initial angle mismatch; widths depend
    only on the matrix dimension and register sizing.
    """
    rows = []
    for label, net in cases:
        y = build_ybus(net)
        mats = build_b_matrices(net, y)
        mis = fdlf.compute_mismatch(net, y, fdlf.initial_state(net))
        rhs = mis.dp if np.linalg.norm(mis.dp) > 0 else np.ones(mats.b_prime.shape[0])
        hc = hhl.build_hhl_circuit(mats.b_prime, rhs, hhl.HHLConfig(n_l=n_l))
        metrics = hhl.qsim.circuit_metrics(hc.circuit)
        n = mats.b_prime.shape[0]
        rows.append(
            CircuitSizeRow(
                case=label,
                matrix_size=f"{n}x{n}",
                width=metrics.width,
                depth_estimate=metrics.depth,
                cnot_estimate=metrics.cnot_count,
            )
        )
    return rows


@dataclass
class ConvergenceComparison:
    tol: float
    entries: list[tuple[str, PowerFlowTrace]] = field(default_factory=list)
    # per-entry max-abs error against the classical fixed point, per iteration
    error_columns: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "solvers": [
                {
                    "label": label,
                    "iterations": len(trace.rows),
                    "converged": trace.converged,
                }
                for label, trace in self.entries
            ],
            "error_columns": self.error_columns,
        }


def compare_convergence(
    net: PowerNetwork,
    solver_names: list[str],
    tol: float = 1e-5,
    max_iter: int = 200,
    seeds: list[int] | None = None,
    n_l: int = 3,
    shots: int = 1024,
    p_cnot: float = 1e-2,
    p_1q: float | None = None,
    signs: str = hhl.SIGNS_REFERENCE,
) -> ConvergenceComparison:
    """Run each named solver and tabulate per-iteration error vs the classical
    fixed point (max abs deviation over voltage magnitudes and angles).

    Stochastic solvers run once per seed, labelled `name#s<seed>`; the
    classical and ideal solvers are deterministic and run once.
    """
    seeds = seeds if seeds else [0]
    ref_state, ref_trace = run_power_flow(net, fdlf.ClassicalSolver(), tol, max_iter)
    if not ref_trace.converged:
        raise fdlf.PowerFlowDidNotConverge(ref_trace)

    comparison = ConvergenceComparison(tol=tol)

    def add(label: str, solver) -> None:
        _, trace = run_power_flow(net, solver, tol, max_iter)
        comparison.entries.append((label, trace))
        comparison.error_columns[label] = [
            float(
                max(
                    np.max(np.abs(row.vm - ref_state.vm)),
                    np.max(np.abs(row.theta - ref_state.theta)),
                )
            )
            for row in trace.rows
        ]

    for name in solver_names:
        if name in ("classical", "hhl-ideal"):
            add(name, hhl.make_solver(name, n_l=n_l))
        else:
            for seed in seeds:
                solver = hhl.make_solver(
                    name,
                    n_l=n_l,
                    shots=shots,
                    p_cnot=p_cnot,
                    p_1q=p_1q,
                    seed=seed,
                    signs=signs,
                )
                suffix = f"#s{seed}" if len(seeds) > 1 else ""
                add(f"{name}{suffix}", solver)
    return comparison


def comparison_to_csv(comparison: ConvergenceComparison) -> str:
    """One column per solver of per-iteration error norms; ragged tails blank."""
    labels = [label for label, _ in comparison.entries]
    columns = [comparison.error_columns[label] for label in labels]
    depth = max((len(c) for c in columns), default=0)
    lines = [",".join(["iter"] + labels)]
    for i in range(depth):
        cells = [str(i + 1)]
        for col in columns:
            cells.append(format(col[i], ".12g") if i < len(col) else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def reports_to_json(reports) -> str:
    """JSON list form of any report objects exposing to_dict()."""
    return json.dumps([r.to_dict() for r in reports], indent=2)
