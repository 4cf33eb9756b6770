"""Dense statevector quantum-circuit simulator.

Conventions:
- Qubit 0 is the least significant bit of a basis-state index, so the
  amplitude of computational basis state |b_{n-1} ... b_1 b_0> lives at
  index sum(b_q << q). Histogram bitstrings print qubit n-1 first.
- Gates act as exact unitaries on the full register; measurement is
  terminal only (sampling from |amps|^2).
- Composite gates (multiplexed rotations, controlled phases, swaps) have
  exact standard decompositions into CNOTs and single-qubit rotations,
  used both for circuit metrics and for gate-level noise injection.
  Controlled-unitary blocks are applied numerically as block matrices and
  accounted for with a quantum-Shannon-decomposition CNOT estimate of
  ceil(3/4 * 4^k) for a k-qubit block.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# Gate kinds
H = "H"
X = "X"
RY = "RY"
RZ = "RZ"
PHASE = "PHASE"
CNOT = "CNOT"
CONTROLLED_PHASE = "CONTROLLED_PHASE"
SWAP = "SWAP"
MULTIPLEXED_RY = "MULTIPLEXED_RY"
CONTROLLED_UNITARY = "CONTROLLED_UNITARY"

_SINGLE_QUBIT = (H, X, RY, RZ, PHASE)


@dataclass(frozen=True, eq=False)
class GateOp:
    """One gate: a kind plus target/control qubits and an optional payload."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float = 0.0
    angles: tuple[float, ...] = ()
    matrix: np.ndarray | None = None
    power: int = 1

    def __post_init__(self):
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"{self.kind}: target/control indices must be distinct")
        if self.kind == MULTIPLEXED_RY and len(self.angles) != 2 ** len(self.controls):
            raise ValueError("MULTIPLEXED_RY: angle table must have 2^k entries")
        if self.kind == CONTROLLED_UNITARY:
            mat = np.asarray(self.matrix, dtype=complex)
            dim = 2 ** len(self.targets)
            if mat.shape != (dim, dim):
                raise ValueError("CONTROLLED_UNITARY: matrix shape mismatch")
            if np.max(np.abs(mat @ mat.conj().T - np.eye(dim))) > 1e-10:
                raise ValueError("CONTROLLED_UNITARY: non-unitary payload")
            object.__setattr__(self, "matrix", mat)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets


def h(q: int) -> GateOp:
    return GateOp(H, (q,))


def x(q: int) -> GateOp:
    return GateOp(X, (q,))


def ry(q: int, angle: float) -> GateOp:
    return GateOp(RY, (q,), angle=angle)


def rz(q: int, angle: float) -> GateOp:
    return GateOp(RZ, (q,), angle=angle)


def phase(q: int, angle: float) -> GateOp:
    return GateOp(PHASE, (q,), angle=angle)


def cnot(control: int, target: int) -> GateOp:
    return GateOp(CNOT, (target,), (control,))


def cphase(control: int, target: int, angle: float) -> GateOp:
    return GateOp(CONTROLLED_PHASE, (target,), (control,), angle=angle)


def swap(a: int, b: int) -> GateOp:
    return GateOp(SWAP, (a, b))


def mux_ry(target: int, controls: tuple[int, ...] | list[int], angles) -> GateOp:
    """Uniformly controlled RY: applies RY(angles[v]) for control value v.

    Bit i of the table index v corresponds to controls[i].
    """
    return GateOp(MULTIPLEXED_RY, (target,), tuple(controls), angles=tuple(angles))


def controlled_unitary(matrix: np.ndarray, control: int, targets, power: int = 1) -> GateOp:
    """Single-controlled application of matrix**power on the target qubits.

    targets[0] is the least significant bit of the matrix index.
    """
    return GateOp(
        CONTROLLED_UNITARY, tuple(targets), (control,), matrix=matrix, power=power
    )


@dataclass
class QuantumCircuit:
    n_qubits: int
    gates: list[GateOp] = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def add(self, *gates: GateOp) -> None:
        self.gates.extend(gates)


@dataclass(frozen=True)
class StateVector:
    amps: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if len(self.amps) != 2 ** self.n_qubits:
            raise ValueError("amplitude array length must be 2^n_qubits")
        norm = np.linalg.norm(self.amps)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |amps| = {norm}")

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amps) ** 2
        return p / p.sum()


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(amps=amps, n_qubits=n_qubits)


def state_from_amplitudes(amps, n_qubits: int) -> StateVector:
    return StateVector(amps=np.asarray(amps, dtype=complex), n_qubits=n_qubits)


def bitstring(index: int, n_qubits: int) -> str:
    """Basis-state label with qubit n-1 leftmost and qubit 0 rightmost."""
    return format(index, f"0{n_qubits}b")


# ---------------------------------------------------------------------------
# Gate matrices and compiled application steps
# ---------------------------------------------------------------------------

_H_MAT = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)


def _ry_mat(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz_mat(a: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * a), 0], [0, np.exp(0.5j * a)]], dtype=complex)


def _phase_mat(a: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * a)]], dtype=complex)


def _1q_matrix(gate: GateOp) -> np.ndarray:
    if gate.kind == H:
        return _H_MAT
    if gate.kind == X:
        return _X_MAT
    if gate.kind == RY:
        return _ry_mat(gate.angle)
    if gate.kind == RZ:
        return _rz_mat(gate.angle)
    return _phase_mat(gate.angle)


class _Compiled:
    """Circuit compiled to index-array steps for fast repeated execution."""

    def __init__(self, gates: list[GateOp], n_qubits: int):
        self.n = n_qubits
        dim = 2 ** n_qubits
        base = np.arange(dim)
        # per-qubit index pairs: i0[q] lists states with bit q = 0
        self.i0 = [base[((base >> q) & 1) == 0] for q in range(n_qubits)]
        self.steps = []
        for gate in gates:
            self._compile(gate)

    def _check(self, gate: GateOp) -> None:
        for q in gate.qubits:
            if not 0 <= q < self.n:
                raise ValueError(f"{gate.kind}: qubit index {q} out of range")

    def _compile(self, gate: GateOp) -> None:
        self._check(gate)
        kind = gate.kind
        if kind in _SINGLE_QUBIT:
            self._add_1q(_1q_matrix(gate), gate.targets[0])
        elif kind == CNOT:
            self._add_cnot(gate.controls[0], gate.targets[0])
        elif kind == CONTROLLED_PHASE:
            self._add_1q(
                _phase_mat(gate.angle), gate.targets[0],
                controls=gate.controls, pattern=1,
            )
        elif kind == SWAP:
            a, b = gate.targets
            sel = ((np.arange(2 ** self.n) >> a) & 1) ^ ((np.arange(2 ** self.n) >> b) & 1)
            ia = np.arange(2 ** self.n)[(sel == 1) & (((np.arange(2 ** self.n) >> a) & 1) == 1)]
            ib = (ia ^ (1 << a)) ^ (1 << b)
            self.steps.append(("swap", ia, ib))
        elif kind == MULTIPLEXED_RY:
            for v, ang in enumerate(gate.angles):
                self._add_1q(_ry_mat(ang), gate.targets[0], controls=gate.controls, pattern=v)
        elif kind == CONTROLLED_UNITARY:
            mat = np.linalg.matrix_power(gate.matrix, gate.power)
            self.steps.append(("block", mat, gate.targets, gate.controls))
        else:
            raise ValueError(f"unknown gate kind {kind}")

    def _add_1q(self, mat, target, controls=(), pattern=0):
        i0 = self.i0[target]
        if controls:
            sel = np.ones(len(i0), dtype=bool)
            for bit, c in enumerate(controls):
                sel &= ((i0 >> c) & 1) == ((pattern >> bit) & 1)
            i0 = i0[sel]
        self.steps.append(("1q", i0, i0 + (1 << target), mat))

    def _add_cnot(self, control, target):
        i0 = self.i0[target]
        i0 = i0[((i0 >> control) & 1) == 1]
        self.steps.append(("swap", i0, i0 + (1 << target)))

    def run(self, amps: np.ndarray, start: int = 0, stop: int | None = None) -> np.ndarray:
        for step in self.steps[start:stop]:
            self.apply_step(amps, step)
        return amps

    def apply_step(self, amps: np.ndarray, step) -> None:
        tag = step[0]
        if tag == "1q":
            _, i0, i1, mat = step
            a0 = amps[i0].copy()
            a1 = amps[i1]
            amps[i0] = mat[0, 0] * a0 + mat[0, 1] * a1
            amps[i1] = mat[1, 0] * a0 + mat[1, 1] * a1
        elif tag == "swap":
            _, ia, ib = step
            tmp = amps[ia].copy()
            amps[ia] = amps[ib]
            amps[ib] = tmp
        else:
            _, mat, targets, controls = step
            amps[:] = _apply_block(amps, self.n, mat, targets, controls)

    def apply_pauli(self, amps: np.ndarray, pauli: int, q: int) -> None:
        """In-place X (1), Y (2) or Z (3) on qubit q."""
        i0 = self.i0[q]
        i1 = i0 + (1 << q)
        if pauli == 1:
            tmp = amps[i0].copy()
            amps[i0] = amps[i1]
            amps[i1] = tmp
        elif pauli == 2:
            tmp = amps[i0].copy()
            amps[i0] = -1j * amps[i1]
            amps[i1] = 1j * tmp
        elif pauli == 3:
            amps[i1] = -amps[i1]


def _apply_block(amps, n, mat, targets, controls):
    """Apply a unitary over `targets` (LSB first) where all controls are 1."""
    out = amps.copy().reshape([2] * n)
    sl = [slice(None)] * n
    for c in controls:
        sl[n - 1 - c] = 1
    sub = out[tuple(sl)]
    remaining = [q for q in range(n - 1, -1, -1) if q not in controls]
    axis_of = {q: i for i, q in enumerate(remaining)}
    m = len(targets)
    src = [axis_of[q] for q in targets]
    dst = [sub.ndim - 1 - i for i in range(m)]
    moved = np.moveaxis(sub, src, dst)
    res = moved.reshape(-1, 2 ** m) @ mat.T
    moved[...] = res.reshape(moved.shape)
    return out.reshape(-1)


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Apply one gate's full-register unitary; returns a new state."""
    compiled = _Compiled([gate], state.n_qubits)
    amps = compiled.run(state.amps.astype(complex, copy=True))
    return StateVector(amps=amps, n_qubits=state.n_qubits)


def run_circuit(circuit: QuantumCircuit, initial: StateVector | None = None) -> StateVector:
    """Apply all gates in order; deterministic, no measurement collapse."""
    if initial is None:
        initial = zero_state(circuit.n_qubits)
    if initial.n_qubits != circuit.n_qubits:
        raise ValueError("initial state size does not match circuit")
    compiled = _Compiled(circuit.gates, circuit.n_qubits)
    amps = compiled.run(initial.amps.astype(complex, copy=True))
    return StateVector(amps=amps, n_qubits=circuit.n_qubits)


# ---------------------------------------------------------------------------
# Measurement sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotHistogram:
    counts: dict[str, int]
    shots: int
    seed: int | None = None

    def probability(self, key: str) -> float:
        return self.counts.get(key, 0) / self.shots

    def to_json(self) -> str:
        return json.dumps(
            {"counts": dict(sorted(self.counts.items())), "shots": self.shots,
             "seed": self.seed},
            indent=2,
        )


def derive_seed(*keys: int) -> int:
    """Deterministic child seed for a tuple of integer keys."""
    return int(np.random.SeedSequence(tuple(int(k) for k in keys)).generate_state(1)[0])


def sample(state: StateVector, shots: int, seed: int | None = None) -> ShotHistogram:
    """Draw i.i.d. terminal measurements from |amps|^2; deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(len(state.amps), size=shots, p=state.probabilities())
    values, counts = np.unique(outcomes, return_counts=True)
    strings = {
        bitstring(int(v), state.n_qubits): int(c) for v, c in zip(values, counts)
    }
    return ShotHistogram(counts=strings, shots=shots, seed=seed)


# ---------------------------------------------------------------------------
# QFT construction
# ---------------------------------------------------------------------------


def build_qft(qubits: list[int] | tuple[int, ...]) -> list[GateOp]:
    """Quantum Fourier transform on the listed qubits (qubits[0] = LSB).

    Matches the DFT matrix F[y, c] = exp(2*pi*i*c*y/2^m)/sqrt(2^m).
    """
    qs = list(qubits)
    m = len(qs)
    gates: list[GateOp] = []
    for j in range(m - 1, -1, -1):
        gates.append(h(qs[j]))
        for k in range(j - 1, -1, -1):
            gates.append(cphase(qs[k], qs[j], math.pi / 2 ** (j - k)))
    for i in range(m // 2):
        gates.append(swap(qs[i], qs[m - 1 - i]))
    return gates


def build_inverse_qft(qubits: list[int] | tuple[int, ...]) -> list[GateOp]:
    """Inverse QFT: adjoint of build_qft on the same qubit list."""
    return adjoint_gates(build_qft(qubits))


def adjoint_gates(gates: list[GateOp]) -> list[GateOp]:
    """Reversed, conjugated gate sequence (the adjoint of the product)."""
    out: list[GateOp] = []
    for g in reversed(gates):
        if g.kind in (H, X, CNOT, SWAP):
            out.append(g)
        elif g.kind in (RY, RZ, PHASE):
            out.append(GateOp(g.kind, g.targets, angle=-g.angle))
        elif g.kind == CONTROLLED_PHASE:
            out.append(cphase(g.controls[0], g.targets[0], -g.angle))
        elif g.kind == MULTIPLEXED_RY:
            out.append(mux_ry(g.targets[0], g.controls, [-a for a in g.angles]))
        elif g.kind == CONTROLLED_UNITARY:
            out.append(
                controlled_unitary(g.matrix.conj().T, g.controls[0], g.targets, g.power)
            )
        else:
            raise ValueError(f"cannot take adjoint of {g.kind}")
    return out


# ---------------------------------------------------------------------------
# Exact decomposition into elementary gates (CNOT + single-qubit rotations)
# ---------------------------------------------------------------------------


def elementary_gates(gates: list[GateOp]) -> list[GateOp]:
    """Decompose composite gates exactly; controlled-unitary blocks pass through.

    SWAP -> 3 CNOTs; CONTROLLED_PHASE -> 2 CNOTs + 3 phase rotations;
    MULTIPLEXED_RY with k controls -> 2^k CNOTs + 2^k RYs.
    """
    out: list[GateOp] = []
    for g in gates:
        if g.kind in _SINGLE_QUBIT or g.kind in (CNOT, CONTROLLED_UNITARY):
            out.append(g)
        elif g.kind == SWAP:
            a, b = g.targets
            out += [cnot(a, b), cnot(b, a), cnot(a, b)]
        elif g.kind == CONTROLLED_PHASE:
            c, t = g.controls[0], g.targets[0]
            a = g.angle
            out += [phase(c, a / 2), cnot(c, t), phase(t, -a / 2), cnot(c, t),
                    phase(t, a / 2)]
        elif g.kind == MULTIPLEXED_RY:
            out += _decompose_mux_ry(g.targets[0], list(g.controls), list(g.angles))
        else:
            raise ValueError(f"unknown gate kind {g.kind}")
    return out


def _decompose_mux_ry(target: int, controls: list[int], angles: list[float]) -> list[GateOp]:
    """Gray-code realization with exactly 2^k CNOTs and 2^k RY rotations.

    Conjugation by the CNOT walk flips rotation signs per control value, so
    the Hadamard-transformed angle table reproduces RY(angles[v]) exactly.
    """
    if not controls:
        return [ry(target, angles[0])]
    k = len(controls)
    n = 2 ** k

    def gray(i: int) -> int:
        return i ^ (i >> 1)

    out: list[GateOp] = []
    for i in range(n):
        theta = (
            sum(((-1) ** (v & gray(i)).bit_count()) * angles[v] for v in range(n)) / n
        )
        out.append(ry(target, theta))
        flipped = gray(i) ^ gray((i + 1) % n)
        out.append(cnot(controls[flipped.bit_length() - 1], target))
    return out


def block_cnot_estimate(gate: GateOp) -> int:
    """Quantum-Shannon-decomposition CNOT estimate for a controlled block."""
    k = len(gate.targets) + len(gate.controls)
    return math.ceil(0.75 * 4 ** k)


# ---------------------------------------------------------------------------
# Circuit metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitMetrics:
    width: int
    depth: int
    cnot_count: int
    total_gates: int
    estimated: bool  # True when controlled-unitary blocks were estimated

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "depth": self.depth,
            "cnot_count": self.cnot_count,
            "total_gates": self.total_gates,
            "estimated": self.estimated,
        }


def circuit_metrics(circuit: QuantumCircuit) -> CircuitMetrics:
    """Width, dependency depth and CNOT count over the decomposed gate stream.

    Controlled-unitary blocks contribute their estimated CNOT count both to
    cnot_count and as sequential layers on their qubits, so depth and counts
    are estimates whenever such blocks are present.
    """
    depth = np.zeros(circuit.n_qubits, dtype=int)
    cnots = 0
    total = 0
    estimated = False
    for g in elementary_gates(circuit.gates):
        if g.kind == CONTROLLED_UNITARY:
            estimated = True
            layers = block_cnot_estimate(g)
            cnots += layers
            total += layers
        else:
            layers = 1
            total += 1
            if g.kind == CNOT:
                cnots += 1
        qs = list(g.qubits)
        level = max(depth[q] for q in qs) + layers
        for q in qs:
            depth[q] = level
    return CircuitMetrics(
        width=circuit.n_qubits,
        depth=int(depth.max(initial=0)),
        cnot_count=cnots,
        total_gates=total,
        estimated=estimated,
    )


def circuit_to_json(circuit: QuantumCircuit) -> str:
    """Debug dump: gate list with payload summaries."""
    gates = []
    for g in circuit.gates:
        entry: dict = {"kind": g.kind, "targets": list(g.targets)}
        if g.controls:
            entry["controls"] = list(g.controls)
        if g.kind in (RY, RZ, PHASE, CONTROLLED_PHASE):
            entry["angle"] = g.angle
        if g.kind == MULTIPLEXED_RY:
            entry["angles"] = list(g.angles)
        if g.kind == CONTROLLED_UNITARY:
            entry["power"] = g.power
            entry["dim"] = g.matrix.shape[0]
        gates.append(entry)
    return json.dumps(
        {"n_qubits": circuit.n_qubits,
         "registers": {k: list(v) for k, v in circuit.registers.items()},
         "gates": gates},
        indent=2,
    )
