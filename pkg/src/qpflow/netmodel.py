"""Power system case model: buses, branches, Ybus and the decoupled B matrices."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np


class NetworkError(ValueError):
    """Raised for malformed or inconsistent case data."""


class BusKind(str, Enum):
    SLACK = "slack"
    PQ = "pq"


@dataclass(frozen=True)
class BusRecord:
    id: int
    kind: BusKind
    p_mw: float = 0.0
    q_mvar: float = 0.0
    vm_init: float = 1.0
    theta_init_deg: float = 0.0


@dataclass(frozen=True)
class BranchRecord:
    from_bus: int
    to_bus: int
    r_pu: float
    x_pu: float


@dataclass(frozen=True)
class PowerNetwork:
    """Immutable network description; bus order fixes all matrix orderings."""

    base_mva: float
    buses: tuple[BusRecord, ...]
    branches: tuple[BranchRecord, ...]

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def bus_index(self, label: int) -> int:
        for i, bus in enumerate(self.buses):
            if bus.id == label:
                return i
        raise NetworkError(f"unknown bus {label}")

    @property
    def slack_index(self) -> int:
        return next(i for i, b in enumerate(self.buses) if b.kind is BusKind.SLACK)

    @property
    def non_slack_indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.buses) if b.kind is not BusKind.SLACK)

    @property
    def pq_indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.buses) if b.kind is BusKind.PQ)

    def injections_pu(self) -> np.ndarray:
        """Scheduled complex bus injections in per unit (generation positive)."""
        return np.array(
            [(b.p_mw + 1j * b.q_mvar) / self.base_mva for b in self.buses]
        )


@dataclass(frozen=True)
class AdmittanceMatrix:
    y: np.ndarray  # dense complex, ordered like PowerNetwork.buses


@dataclass(frozen=True)
class DecoupledMatrices:
    b_prime: np.ndarray    # rows/cols over non-slack buses
    b_dprime: np.ndarray   # rows/cols over PQ buses
    bus_order: tuple[int, ...]  # bus label per b_prime row
    pq_order: tuple[int, ...]   # bus label per b_dprime row


_BUS_KEYS = {"id", "kind", "p_mw", "q_mvar", "vm", "theta_deg"}
_BRANCH_KEYS = {"from", "to", "r_pu", "x_pu"}
_TOP_KEYS = {"base_mva", "buses", "branches"}


def parse_case(text: str) -> PowerNetwork:
    """Parse a JSON case file into a validated PowerNetwork.

    The format carries MW/MVAr as scheduled injections plus initial voltage
    magnitude (p.u.) and angle (degrees) per bus. Shunts, taps and line
    charging are not supported and unknown fields are rejected.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise NetworkError("case file must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "case")

    base = float(raw.get("base_mva", 100.0))
    if base <= 0:
        raise NetworkError("non-positive base_mva")

    buses = []
    seen: set[int] = set()
    for entry in raw.get("buses", []):
        _reject_unknown(entry, _BUS_KEYS, "bus")
        label = int(entry["id"])
        if label in seen:
            raise NetworkError(f"duplicate bus id {label}")
        seen.add(label)
        kind = str(entry.get("kind", "")).lower()
        if kind not in (BusKind.SLACK.value, BusKind.PQ.value):
            raise NetworkError(f"bus {label}: kind must be 'slack' or 'pq'")
        vm = float(entry.get("vm", 1.0))
        if vm <= 0:
            raise NetworkError(f"bus {label}: vm must be positive")
        buses.append(
            BusRecord(
                id=label,
                kind=BusKind(kind),
                p_mw=float(entry.get("p_mw", 0.0)),
                q_mvar=float(entry.get("q_mvar", 0.0)),
                vm_init=vm,
                theta_init_deg=float(entry.get("theta_deg", 0.0)),
            )
        )

    n_slack = sum(1 for b in buses if b.kind is BusKind.SLACK)
    if n_slack == 0:
        raise NetworkError("missing slack bus")
    if n_slack > 1:
        raise NetworkError("more than one slack bus")

    branches = []
    for entry in raw.get("branches", []):
        _reject_unknown(entry, _BRANCH_KEYS, "branch")
        f, t = int(entry["from"]), int(entry["to"])
        if f == t:
            raise NetworkError(f"branch {f}-{t}: endpoints must differ")
        if f not in seen or t not in seen:
            raise NetworkError(f"branch {f}-{t}: unknown bus")
        r = float(entry.get("r_pu", 0.0))
        x = float(entry["x_pu"])
        if r < 0:
            raise NetworkError(f"branch {f}-{t}: negative resistance")
        branches.append(BranchRecord(from_bus=f, to_bus=t, r_pu=r, x_pu=x))

    net = PowerNetwork(base_mva=base, buses=tuple(buses), branches=tuple(branches))
    _check_connected(net)
    return net


def _reject_unknown(entry: dict, allowed: set[str], what: str) -> None:
    extra = set(entry) - allowed
    if extra:
        raise NetworkError(f"unsupported {what} field(s): {', '.join(sorted(extra))}")


def _check_connected(net: PowerNetwork) -> None:
    if net.n_buses <= 1:
        return
    adj: dict[int, set[int]] = {b.id: set() for b in net.buses}
    for br in net.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    seen = {net.buses[0].id}
    stack = [net.buses[0].id]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    if len(seen) != net.n_buses:
        raise NetworkError("network is not connected")


def load_case(path: str | Path) -> PowerNetwork:
    return parse_case(Path(path).read_text(encoding="utf-8"))


def bundled_case_names() -> tuple[str, ...]:
    files = resources.files("qpflow.cases")
    return tuple(sorted(p.name for p in files.iterdir() if p.name.endswith(".json")))


def load_bundled_case(name: str) -> PowerNetwork:
    """Load one of the packaged fixtures, e.g. 'case3.json' or 'case3'."""
    if not name.endswith(".json"):
        name += ".json"
    ref = resources.files("qpflow.cases").joinpath(name)
    if not ref.is_file():
        raise NetworkError(f"no bundled case named {name!r}")
    return parse_case(ref.read_text(encoding="utf-8"))


def resolve_case(path_or_name: str | Path) -> PowerNetwork:
    """Load a case from disk, falling back to a bundled fixture of that name."""
    p = Path(path_or_name)
    if p.is_file():
        return load_case(p)
    base = p.name
    if base in bundled_case_names() or f"{base}.json" in bundled_case_names():
        return load_bundled_case(base)
    raise FileNotFoundError(f"case file not found: {path_or_name}")


def build_ybus(net: PowerNetwork) -> AdmittanceMatrix:
    """Assemble the dense complex bus admittance matrix from branch data."""
    n = net.n_buses
    y = np.zeros((n, n), dtype=complex)
    for br in net.branches:
        if br.r_pu == 0.0 and br.x_pu == 0.0:
            raise NetworkError(
                f"branch {br.from_bus}-{br.to_bus}: zero-impedance branch"
            )
        adm = 1.0 / complex(br.r_pu, br.x_pu)
        i, j = net.bus_index(br.from_bus), net.bus_index(br.to_bus)
        y[i, i] += adm
        y[j, j] += adm
        y[i, j] -= adm
        y[j, i] -= adm
    return AdmittanceMatrix(y=y)


def build_b_matrices(net: PowerNetwork, y: AdmittanceMatrix) -> DecoupledMatrices:
    """Constant decoupled Jacobians: Im(Ybus) restricted to non-slack / PQ buses.

    With only slack and PQ buses present the two restrictions coincide.
    """
    nonslack = list(net.non_slack_indices)
    pq = list(net.pq_indices)
    b_full = y.y.imag
    b_prime = b_full[np.ix_(nonslack, nonslack)].copy()
    b_dprime = b_full[np.ix_(pq, pq)].copy()
    return DecoupledMatrices(
        b_prime=b_prime,
        b_dprime=b_dprime,
        bus_order=tuple(net.buses[i].id for i in nonslack),
        pq_order=tuple(net.buses[i].id for i in pq),
    )
