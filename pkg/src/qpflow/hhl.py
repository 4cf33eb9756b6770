"""HHL linear-system solver built from circuit primitives.

Circuit layout for an N x N symmetric system (N padded to a power of two):

  nb (log2 N qubits)   data register, loads b/||b|| and ends holding x
  nl                   eigenvalue register, two's-complement signed codes
  na (1 qubit)         rotation ancilla; solutions are post-selected on 1

The pipeline is: amplitude-encode b, phase-estimate exp(i*B*t) into nl,
rotate the ancilla by 2*arcsin(C/lambda(code)) for every nonzero signed
code, then uncompute the phase estimation. With t = 2*pi/2^nl an integer
eigenvalue lambda lands exactly on code lambda mod 2^nl, so spectra inside
[-2^(nl-1), 2^(nl-1)-1] are inverted without estimation error; other
spectra leak across codes and degrade the solve gracefully.

The eigenvalue register gets max(n_l, nb + 2) qubits: one resolution bit
per data qubit beyond the first plus a sign bit, never fewer than the
requested n_l. Hamiltonian simulation uses exact matrix exponentiation by
eigendecomposition, applied as controlled block unitaries.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import qsim
from .fdlf import ClassicalSolver
from .qsim import GateOp, QuantumCircuit, ShotHistogram, StateVector

READOUT_EXACT = "exact"
READOUT_SAMPLED = "sampled"
SIGNS_REFERENCE = "reference"
SIGNS_POSITIVE = "positive"


class PostSelectionError(RuntimeError):
    """No usable amplitude or counts in the post-selected subspace."""


@dataclass(frozen=True)
class HHLConfig:
    n_l: int = 3                      # minimum eigenvalue-register bits (signed)
    shots: int = 1024
    readout: str = READOUT_EXACT      # "exact" reads amplitudes, "sampled" counts
    rotation_c: float = 1.0           # C in the 2*arcsin(C/lambda) rotation
    evolution_time: float | None = None  # defaults to 2*pi/2^nl
    signs: str = SIGNS_REFERENCE      # sampled-mode sign policy

    def __post_init__(self):
        if self.n_l < 2:
            raise ValueError("n_l must be >= 2")
        if self.readout == READOUT_SAMPLED and self.shots < 1:
            raise ValueError("sampled readout needs shots >= 1")
        if self.rotation_c <= 0:
            raise ValueError("rotation_c must be positive")
        if self.readout not in (READOUT_EXACT, READOUT_SAMPLED):
            raise ValueError(f"unknown readout mode {self.readout!r}")
        if self.signs not in (SIGNS_REFERENCE, SIGNS_POSITIVE):
            raise ValueError(f"unknown sign policy {self.signs!r}")


@dataclass(frozen=True)
class HHLCircuit:
    circuit: QuantumCircuit
    nb_size: int
    nl_size: int
    b_norm: float
    n_original: int
    n_padded: int
    evolution_time: float
    rotation_c: float

    @property
    def width(self) -> int:
        return self.circuit.n_qubits

    @property
    def lambda_unit(self) -> float:
        """Physical eigenvalue represented by one integer code step."""
        return 2 * math.pi / (self.evolution_time * 2 ** self.nl_size)


@dataclass(frozen=True)
class HHLSolution:
    x: np.ndarray
    success_probability: float
    metrics: qsim.CircuitMetrics
    readout: str
    shots: int | None = None
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "x": [float(v) for v in self.x],
                "success_probability": self.success_probability,
                "width": self.metrics.width,
                "depth_estimate": self.metrics.depth,
                "cnot_estimate": self.metrics.cnot_count,
                "readout": self.readout,
                "shots": self.shots,
                "seed": self.seed,
            },
            indent=2,
        )


def hermitian_embed(a: np.ndarray) -> np.ndarray:
    """Symmetric embedding [[0, A], [A^T, 0]]; symmetric input passes through."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    n, m = a.shape
    if n == m and np.allclose(a, a.T, atol=1e-12):
        return a
    out = np.zeros((n + m, n + m))
    out[:n, n:] = a
    out[n:, :n] = a.T
    return out


@dataclass(frozen=True)
class RepresentabilityReport:
    eigenvalues: np.ndarray
    codes: np.ndarray          # integer code units lambda * t * 2^n_l / (2*pi)
    exact: np.ndarray          # per-eigenvalue: integer and inside signed range
    in_range: np.ndarray
    max_error: float           # largest distance to the integer grid, code units

    @property
    def all_exact(self) -> bool:
        return bool(np.all(self.exact))


def check_representability(b: np.ndarray, n_l: int, t: float) -> RepresentabilityReport:
    """Flag which eigenvalues the signed n_l-bit register resolves exactly."""
    b = np.asarray(b, dtype=float)
    if not np.allclose(b, b.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    lam = np.linalg.eigvalsh(b)
    codes = lam * t * 2 ** n_l / (2 * math.pi)
    err = np.abs(codes - np.round(codes))
    lo, hi = -(2 ** (n_l - 1)), 2 ** (n_l - 1) - 1
    in_range = (np.round(codes) >= lo) & (np.round(codes) <= hi)
    exact = (err <= 1e-9) & in_range
    return RepresentabilityReport(
        eigenvalues=lam,
        codes=codes,
        exact=exact,
        in_range=in_range,
        max_error=float(err.max(initial=0.0)),
    )


def exact_unitary(b: np.ndarray, t: float, power: int = 1) -> np.ndarray:
    """exp(i*b*t*power) via eigendecomposition of the symmetric matrix b."""
    b = np.asarray(b, dtype=float)
    if not np.allclose(b, b.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    lam, vec = np.linalg.eigh(b)
    return (vec * np.exp(1j * lam * t * power)) @ vec.T


def prepare_state_b(b_vec: np.ndarray) -> list[GateOp]:
    """Amplitude-encode a real vector with a tree of multiplexed RY rotations.

    Maps |0...0> to sum_i (b_i/||b||)|i>, preserving component signs. The
    input length is zero-padded to the next power of two.
    """
    b = np.asarray(b_vec, dtype=float)
    norm = np.linalg.norm(b)
    if norm == 0:
        raise ValueError("cannot prepare an all-zero vector")
    m = max(1, math.ceil(math.log2(len(b)))) if len(b) > 1 else 1
    padded = np.zeros(2 ** m)
    padded[: len(b)] = b / norm
    gates: list[GateOp] = []
    for level in range(m):
        target = m - 1 - level
        controls = tuple(range(target + 1, m))
        seg = 2 ** (m - level)
        table: list[float] = []
        for v in range(2 ** level):
            group = padded[v * seg : (v + 1) * seg]
            lo, hi = group[: seg // 2], group[seg // 2 :]
            if level == m - 1:
                angle = 2 * math.atan2(hi[0], lo[0])
            else:
                angle = 2 * math.atan2(np.linalg.norm(hi), np.linalg.norm(lo))
            table.append(angle)
        if controls:
            gates.append(qsim.mux_ry(target, controls, table))
        else:
            gates.append(qsim.ry(target, table[0]))
    return gates


def _pad_system(b: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Pad to the next power of two with a -1 identity block and zero rhs."""
    n = b.shape[0]
    nb_size = max(1, math.ceil(math.log2(n)))
    n_pad = 2 ** nb_size
    if n_pad == n:
        return b, rhs, nb_size
    bp = -np.eye(n_pad)
    bp[:n, :n] = b
    rp = np.zeros(n_pad)
    rp[:n] = rhs
    return bp, rp, nb_size


def build_hhl_circuit(b: np.ndarray, b_vec: np.ndarray, config: HHLConfig | None = None) -> HHLCircuit:
    """Assemble the full solver circuit for the symmetric system b x = b_vec."""
    config = config or HHLConfig()
    b = np.asarray(b, dtype=float)
    b_vec = np.asarray(b_vec, dtype=float)
    if not np.allclose(b, b.T, atol=1e-10):
        raise ValueError("matrix must be symmetric")
    if b.shape[0] != len(b_vec):
        raise ValueError("matrix/vector size mismatch")

    n_original = b.shape[0]
    b_pad, rhs_pad, nb_size = _pad_system(b, b_vec)
    nl_size = max(config.n_l, nb_size + 2)
    t = config.evolution_time if config.evolution_time is not None else 2 * math.pi / 2 ** nl_size

    # reject a rotation constant that exceeds the smallest populated |code|
    codes = np.round(np.linalg.eigvalsh(b) * t * 2 ** nl_size / (2 * math.pi))
    nonzero = np.abs(codes[codes != 0])
    if nonzero.size and config.rotation_c > nonzero.min() + 1e-12:
        raise ValueError(
            f"rotation_c={config.rotation_c} exceeds the smallest representable "
            f"|eigenvalue| code {nonzero.min():.0f}"
        )

    nb_qubits = list(range(nb_size))
    nl_qubits = list(range(nb_size, nb_size + nl_size))
    na_qubit = nb_size + nl_size
    n_qubits = na_qubit + 1

    prep = prepare_state_b(rhs_pad)
    u_base = exact_unitary(b_pad, t, 1)
    qpe = [qsim.h(q) for q in nl_qubits]
    qpe += [
        qsim.controlled_unitary(u_base, nl_qubits[j], nb_qubits, power=2 ** j)
        for j in range(nl_size)
    ]
    qpe += qsim.build_inverse_qft(nl_qubits)

    rotation = qsim.mux_ry(na_qubit, nl_qubits, _inversion_angles(nl_size, config.rotation_c))

    circuit = QuantumCircuit(
        n_qubits=n_qubits,
        gates=prep + qpe + [rotation] + qsim.adjoint_gates(qpe),
        registers={
            "nb": tuple(nb_qubits),
            "nl": tuple(nl_qubits),
            "na": (na_qubit,),
        },
    )
    return HHLCircuit(
        circuit=circuit,
        nb_size=nb_size,
        nl_size=nl_size,
        b_norm=float(np.linalg.norm(b_vec)),
        n_original=n_original,
        n_padded=2 ** nb_size,
        evolution_time=t,
        rotation_c=config.rotation_c,
    )


def _inversion_angles(nl_size: int, c: float) -> list[float]:
    """Rotation table over signed codes: 2*arcsin(C/lambda), identity at 0.

    Codes whose |lambda| is below C are never populated by a validated
    spectrum; their angles are clamped to a full flip so leakage from
    inexact eigenvalues stays well defined.
    """
    n = 2 ** nl_size
    angles = [0.0]
    for code in range(1, n):
        lam = code if code < n // 2 else code - n
        ratio = max(-1.0, min(1.0, c / lam))
        angles.append(2 * math.asin(ratio))
    return angles


def _post_selected_indices(hc: HHLCircuit) -> list[int]:
    """Basis indices with ancilla 1, eigenvalue register 0, data value i."""
    na_bit = 1 << (hc.nb_size + hc.nl_size)
    return [na_bit | i for i in range(hc.n_original)]


def reference_signs(hc: HHLCircuit) -> np.ndarray:
    """Component signs read from a noiseless execution of the same circuit."""
    state = qsim.run_circuit(hc.circuit)
    amps = state.amps[_post_selected_indices(hc)]
    signs = np.sign(amps.real)
    signs[signs == 0] = 1.0
    return signs


def extract_solution(
    outcome: ShotHistogram | StateVector,
    hc: HHLCircuit,
    config: HHLConfig | None = None,
    signs: np.ndarray | None = None,
) -> HHLSolution:
    """Recover the solution vector from a final state or a shot histogram.

    Exact mode reads the signed post-selected amplitudes directly. Sampled
    mode estimates magnitudes as ||b|| * sqrt(count/shots) and attaches signs
    either from a supplied reference or all-positive, per the sign policy.
    Both are rescaled by lambda_unit/rotation_c so magnitudes match the
    linear solve.
    """
    config = config or HHLConfig()
    scale = hc.b_norm / (hc.rotation_c * hc.lambda_unit)
    metrics = qsim.circuit_metrics(hc.circuit)

    if isinstance(outcome, StateVector):
        amps = outcome.amps[_post_selected_indices(hc)]
        na_bit = 1 << (hc.nb_size + hc.nl_size)
        all_post = outcome.amps[[na_bit | i for i in range(hc.n_padded)]]
        success = float(np.sum(np.abs(all_post) ** 2))
        k = int(np.argmax(np.abs(amps)))
        if abs(amps[k]) == 0:
            raise PostSelectionError("post-selection failed: zero amplitude")
        # cancel numerical phase drift without flipping the sign structure
        phase = amps[k] / abs(amps[k])
        aligned = amps / phase
        if phase.real < 0:
            aligned = -aligned
        return HHLSolution(
            x=aligned.real * scale,
            success_probability=success,
            metrics=metrics,
            readout=READOUT_EXACT,
        )

    n_low = hc.nb_size + hc.nl_size
    counts = np.zeros(hc.n_padded)
    post_total = 0
    for key, count in outcome.counts.items():
        idx = int(key, 2)
        if (idx >> n_low) & 1 and ((idx >> hc.nb_size) & (2 ** hc.nl_size - 1)) == 0:
            counts[idx & (2 ** hc.nb_size - 1)] += count
            post_total += count
    if post_total == 0:
        raise PostSelectionError("post-selection failed: no ancilla-1 outcomes")
    mags = np.sqrt(counts[: hc.n_original] / outcome.shots) * scale
    if signs is None:
        signs = np.ones(hc.n_original)
    return HHLSolution(
        x=signs[: hc.n_original] * mags,
        success_probability=post_total / outcome.shots,
        metrics=metrics,
        readout=READOUT_SAMPLED,
        shots=outcome.shots,
        seed=outcome.seed,
    )


def hhl_solve(
    b: np.ndarray,
    rhs: np.ndarray,
    config: HHLConfig | None = None,
    noise=None,
    seed: int | None = None,
) -> HHLSolution:
    """Build, execute and read out one solve of b x = rhs.

    With exact readout this reproduces the direct solution whenever the
    spectrum sits on the signed integer grid. Sampled readout draws shots
    (optionally through the stochastic noise runner) and reconstructs
    magnitudes from the post-selected histogram.
    """
    config = config or HHLConfig()
    hc = build_hhl_circuit(b, rhs, config)
    if config.readout == READOUT_EXACT:
        state = qsim.run_circuit(hc.circuit)
        return extract_solution(state, hc, config)

    signs = None
    if config.signs == SIGNS_REFERENCE:
        signs = reference_signs(hc)
    if noise is not None and (noise.p_cnot > 0 or noise.p_1q > 0):
        from .noise import run_noisy

        hist = run_noisy(hc.circuit, noise, config.shots, seed)
    else:
        state = qsim.run_circuit(hc.circuit)
        hist = qsim.sample(state, config.shots, seed)
    solution = extract_solution(hist, hc, config, signs=signs)
    return replace(solution, seed=seed)


class HHLSolver:
    """Linear-solver contract backed by the HHL circuit.

    Each solve derives a fresh child seed from (seed, call counter) so whole
    power-flow runs are reproducible from a single seed.
    """

    def __init__(
        self,
        config: HHLConfig | None = None,
        noise=None,
        seed: int | None = None,
        label: str | None = None,
    ):
        self.config = config or HHLConfig()
        self.noise = noise
        self.seed = seed if seed is not None else 0
        self._calls = 0
        if label is not None:
            self.label = label
        elif self.config.readout == READOUT_EXACT:
            self.label = "hhl-ideal"
        elif noise is not None:
            self.label = "hhl-noisy"
        else:
            self.label = "hhl-sampled"

    def solve(self, matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        self._calls += 1
        child = qsim.derive_seed(self.seed, self._calls)
        return hhl_solve(matrix, rhs, self.config, noise=self.noise, seed=child).x


SOLVER_NAMES = ("classical", "hhl-ideal", "hhl-sampled", "hhl-noisy")


def make_solver(
    name: str,
    n_l: int = 3,
    shots: int = 1024,
    p_cnot: float = 1e-2,
    p_1q: float | None = None,
    seed: int = 0,
    readout: str | None = None,
    signs: str = SIGNS_REFERENCE,
):
    """Solver-contract factory for the CLI/service solver names."""
    if name == "classical":
        return ClassicalSolver()
    if name not in SOLVER_NAMES:
        raise ValueError(f"unknown solver {name!r}; expected one of {SOLVER_NAMES}")
    default_readout = READOUT_EXACT if name == "hhl-ideal" else READOUT_SAMPLED
    config = HHLConfig(
        n_l=n_l,
        shots=shots,
        readout=readout or default_readout,
        signs=signs,
    )
    noise = None
    if name == "hhl-noisy":
        from .noise import NoiseModel

        noise = NoiseModel(p_cnot=p_cnot, p_1q=p_1q, seed=seed)
    return HHLSolver(config=config, noise=noise, seed=seed, label=name)
