"""Command-line front end; a thin client over the service layer.

Exit codes: 0 converged / success, 1 input error, 2 non-convergence.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import netmodel
from .service import handlers
from .service.models import (
    CaseRequest,
    CircuitTableRequest,
    CompareRequest,
    SolveRequest,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


def _case_payload(path: str) -> dict:
    """Resolve a case argument to an inline case dict (disk, then bundled)."""
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    else:
        name = p.name if p.name.endswith(".json") else p.name + ".json"
        if name not in netmodel.bundled_case_names():
            raise FileNotFoundError(f"case file not found: {path}")
        from importlib import resources

        text = resources.files("qpflow.cases").joinpath(name).read_text("utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise handlers.InputError(f"invalid JSON in {path}: {exc}") from exc


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_INPUT_ERROR)


def _stem(path: str) -> str:
    return Path(path).stem


@click.group()
def main() -> None:
    """Quantum-assisted fast decoupled power flow toolkit."""


@main.command()
@click.argument("case")
@click.option("--solver", default="classical", show_default=True,
              type=click.Choice(["classical", "hhl-ideal", "hhl-sampled", "hhl-noisy"]))
@click.option("--tol", default=1e-5, show_default=True, type=float)
@click.option("--max-iter", default=200, show_default=True, type=int)
@click.option("--shots", default=1024, show_default=True, type=int)
@click.option("--nl", "n_l", default=3, show_default=True, type=int)
@click.option("--p-cnot", default=1e-2, show_default=True, type=float)
@click.option("--p-1q", default=None, type=float,
              help="Single-qubit gate error probability [default: p_cnot/10].")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--readout", default=None, type=click.Choice(["exact", "sampled"]),
              help="Override the solver's readout mode.")
@click.option("--signs", default="reference", show_default=True,
              type=click.Choice(["reference", "positive"]),
              help="Sign policy for sampled readout.")
@click.option("--out", default=".", show_default=True,
              type=click.Path(file_okay=False),
              help="Directory for the trace CSV and solution JSON.")
def run(case, solver, tol, max_iter, shots, n_l, p_cnot, p_1q, seed, readout, signs, out):
    """Run the power flow on CASE and write trace/solution files."""
    try:
        request = SolveRequest(
            case=_case_payload(case), solver=solver, tol=tol, max_iter=max_iter,
            shots=shots, n_l=n_l, p_cnot=p_cnot, p_1q=p_1q, seed=seed,
            readout=readout, signs=signs,
        )
        response = handlers.solve(request)
    except (handlers.InputError, netmodel.NetworkError, FileNotFoundError) as exc:
        _fail(str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = f"{_stem(case)}_{solver}"
    trace_path = out_dir / f"{prefix}_trace.csv"
    solution_path = out_dir / f"{prefix}_solution.json"
    trace_path.write_text(response.trace_csv, encoding="utf-8")
    solution_path.write_text(
        json.dumps(response.model_dump(exclude={"trace_csv"}), indent=2) + "\n",
        encoding="utf-8",
    )

    click.echo(f"solver: {response.solver}   iterations: {response.iterations}   "
               f"converged: {response.converged}")
    click.echo(f"{'Bus':>4} {'V_pu':>14} {'theta_deg':>14}")
    for bus in response.buses:
        click.echo(f"{bus.id:>4} {bus.vm:>14.8f} {bus.theta_deg:>14.8f}")
    click.echo(f"wrote {trace_path} and {solution_path}")
    sys.exit(EXIT_OK if response.converged else EXIT_NOT_CONVERGED)


@main.group()
def analyze() -> None:
    """Reports: condition numbers, circuit sizes, convergence comparisons."""


@analyze.command()
@click.argument("cases", nargs=-1, required=True)
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Write the JSON report here instead of stdout.")
def condition(cases, out):
    """Condition number of each case's angle-coupling matrix."""
    reports = []
    try:
        for path in cases:
            request = CaseRequest(case=_case_payload(path), label=_stem(path))
            reports.append(handlers.condition(request).model_dump())
    except (handlers.InputError, netmodel.NetworkError, FileNotFoundError) as exc:
        _fail(str(exc))
    _emit(json.dumps(reports, indent=2), out)


@analyze.command()
@click.argument("cases", nargs=-1, required=True)
@click.option("--nl", "n_l", default=3, show_default=True, type=int)
@click.option("--out", default=None, type=click.Path(dir_okay=False))
def circuit(cases, n_l, out):
    """Solver-circuit width and size estimates for each case."""
    try:
        request = CircuitTableRequest(
            cases=[CaseRequest(case=_case_payload(p), label=_stem(p)) for p in cases],
            n_l=n_l,
        )
        response = handlers.circuit_table(request)
    except (handlers.InputError, netmodel.NetworkError, FileNotFoundError) as exc:
        _fail(str(exc))
    _emit(json.dumps([r.model_dump() for r in response.rows], indent=2), out)


@analyze.command()
@click.argument("case")
@click.option("--solvers", default="classical,hhl-ideal", show_default=True,
              help="Comma-separated solver names.")
@click.option("--seeds", default="0", show_default=True,
              help="Comma-separated seeds for stochastic solvers.")
@click.option("--tol", default=1e-5, show_default=True, type=float)
@click.option("--max-iter", default=200, show_default=True, type=int)
@click.option("--shots", default=1024, show_default=True, type=int)
@click.option("--nl", "n_l", default=3, show_default=True, type=int)
@click.option("--p-cnot", default=1e-2, show_default=True, type=float)
@click.option("--p-1q", default=None, type=float)
@click.option("--signs", default="reference", show_default=True,
              type=click.Choice(["reference", "positive"]))
@click.option("--out", default=None, type=click.Path(dir_okay=False),
              help="Write the CSV here; a .json summary lands next to it.")
def compare(case, solvers, seeds, tol, max_iter, shots, n_l, p_cnot, p_1q, signs, out):
    """Per-iteration error of each solver against the classical fixed point."""
    try:
        request = CompareRequest(
            case=_case_payload(case),
            solvers=[s.strip() for s in solvers.split(",") if s.strip()],
            seeds=[int(s) for s in seeds.split(",") if s.strip()],
            tol=tol, max_iter=max_iter, shots=shots, n_l=n_l,
            p_cnot=p_cnot, p_1q=p_1q, signs=signs,
        )
        response = handlers.compare(request)
    except (handlers.InputError, netmodel.NetworkError, FileNotFoundError) as exc:
        _fail(str(exc))
    if out:
        Path(out).write_text(response.csv, encoding="utf-8")
        summary = Path(out).with_suffix(".json")
        summary.write_text(
            json.dumps(response.model_dump(exclude={"csv"}), indent=2) + "\n",
            encoding="utf-8",
        )
        click.echo(f"wrote {out} and {summary}")
    else:
        click.echo(response.csv, nl=False)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        click.echo(text)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("qpflow.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
