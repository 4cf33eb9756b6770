"""Stochastic gate-noise injection via Pauli trajectories.

Each trajectory replays the circuit's decomposed elementary-gate stream.
After every CNOT a uniformly random non-identity two-qubit Pauli is
inserted with probability p_cnot, and after every single-qubit gate a
random X/Y/Z with probability p_1q. Controlled-unitary blocks cannot be
decomposed here, so they carry their estimated CNOT count as independent
noise sites whose Paulis land on random qubit pairs of the block; error
counts therefore track the estimated two-qubit depth of the circuit.

A zero-noise model short-circuits to the ideal sampler, so histograms are
bit-identical to the noiseless path under the same seed.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import qsim
from .qsim import QuantumCircuit, ShotHistogram


@dataclass(frozen=True)
class NoiseModel:
    p_cnot: float
    p_1q: float | None = None  # defaults to p_cnot / 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_cnot <= 1.0:
            raise ValueError("p_cnot must lie in [0, 1]")
        p1 = self.p_cnot / 10 if self.p_1q is None else self.p_1q
        if not 0.0 <= p1 <= 1.0:
            raise ValueError("p_1q must lie in [0, 1]")
        object.__setattr__(self, "p_1q", p1)

    def to_json(self) -> str:
        return json.dumps(
            {"p_cnot": self.p_cnot, "p_1q": self.p_1q, "seed": self.seed}, indent=2
        )

    @staticmethod
    def from_json(text: str) -> "NoiseModel":
        raw = json.loads(text)
        return NoiseModel(
            p_cnot=float(raw["p_cnot"]),
            p_1q=float(raw["p_1q"]) if raw.get("p_1q") is not None else None,
            seed=int(raw.get("seed", 0)),
        )


# (pauli_a, pauli_b) with 0=I, 1=X, 2=Y, 3=Z; identity pair excluded
_PAULI_PAIRS = [(a, b) for a in range(4) for b in range(4) if (a, b) != (0, 0)]


def _noise_sites(stream):
    """One entry per potential error: (probability class, op index, qubits)."""
    sites: list[tuple[str, int, tuple[int, ...]]] = []
    for op_index, gate in enumerate(stream):
        if gate.kind == qsim.CNOT:
            sites.append(("2q", op_index, gate.qubits))
        elif gate.kind == qsim.CONTROLLED_UNITARY:
            for _ in range(qsim.block_cnot_estimate(gate)):
                sites.append(("2q", op_index, gate.qubits))
        else:
            sites.append(("1q", op_index, gate.targets))
    return sites


def run_noisy_detailed(
    circuit: QuantumCircuit,
    model: NoiseModel,
    shots: int,
    seed: int | None = None,
) -> tuple[ShotHistogram, np.ndarray]:
    """Noisy trajectory sampling; also returns the per-trajectory error counts."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if model.p_cnot == 0.0 and model.p_1q == 0.0:
        state = qsim.run_circuit(circuit)
        return qsim.sample(state, shots, seed), np.zeros(shots, dtype=int)

    stream = qsim.elementary_gates(circuit.gates)
    compiled = qsim._Compiled(stream, circuit.n_qubits)
    # the decomposed stream holds only 1q gates, CNOTs and blocks, each of
    # which compiles to exactly one step, so stream and step indices agree
    sites = _noise_sites(stream)
    site_prob = np.array(
        [model.p_cnot if kind == "2q" else model.p_1q for kind, _, _ in sites]
    )
    # prefix[i] = state after the first i elementary ops
    amps = qsim.zero_state(circuit.n_qubits).amps
    prefix = [amps.copy()]
    for step_index in range(len(compiled.steps)):
        compiled.apply_step(amps, compiled.steps[step_index])
        prefix.append(amps.copy())
    final_probs = np.abs(prefix[-1]) ** 2
    final_probs /= final_probs.sum()
    final_cdf = np.cumsum(final_probs)

    rng = np.random.default_rng(seed)
    fired = rng.random((shots, len(sites))) < site_prob[None, :]
    outcomes = np.zeros(shots, dtype=int)
    n_errors = fired.sum(axis=1)

    for traj in range(shots):
        hit = np.nonzero(fired[traj])[0]
        if hit.size == 0:
            outcomes[traj] = int(np.searchsorted(final_cdf, rng.random()))
            continue
        errors_by_op: dict[int, list[tuple[str, tuple[int, ...]]]] = {}
        for s in hit:
            kind, op_index, qubits = sites[s]
            errors_by_op.setdefault(op_index, []).append((kind, qubits))
        first = min(errors_by_op)
        state = prefix[first + 1].copy()
        _inject(compiled, state, errors_by_op[first], rng)
        for op_index in range(first + 1, len(compiled.steps)):
            compiled.apply_step(state, compiled.steps[op_index])
            if op_index in errors_by_op:
                _inject(compiled, state, errors_by_op[op_index], rng)
        probs = np.abs(state) ** 2
        probs /= probs.sum()
        outcomes[traj] = int(np.searchsorted(np.cumsum(probs), rng.random()))

    values, counts = np.unique(outcomes, return_counts=True)
    histogram = ShotHistogram(
        counts={
            qsim.bitstring(int(v), circuit.n_qubits): int(c)
            for v, c in zip(values, counts)
        },
        shots=shots,
        seed=seed,
    )
    return histogram, n_errors


def _inject(compiled, state, errors, rng) -> None:
    for kind, qubits in errors:
        if kind == "1q":
            compiled.apply_pauli(state, 1 + int(rng.integers(3)), qubits[0])
        else:
            if len(qubits) == 2:
                qa, qb = qubits
            else:
                i = int(rng.integers(len(qubits)))
                j = int(rng.integers(len(qubits) - 1))
                if j >= i:
                    j += 1
                qa, qb = qubits[i], qubits[j]
            pa, pb = _PAULI_PAIRS[int(rng.integers(len(_PAULI_PAIRS)))]
            if pa:
                compiled.apply_pauli(state, pa, qa)
            if pb:
                compiled.apply_pauli(state, pb, qb)


def run_noisy(
    circuit: QuantumCircuit,
    model: NoiseModel,
    shots: int,
    seed: int | None = None,
) -> ShotHistogram:
    """Sample terminal measurements of the circuit under the noise model."""
    histogram, _ = run_noisy_detailed(circuit, model, shots, seed)
    return histogram


def noisy_hhl_solver(model: NoiseModel, config=None, seed: int | None = None):
    """Solver contract running the HHL circuit through the noisy sampler."""
    from .hhl import HHLConfig, HHLSolver, READOUT_SAMPLED

    if config is None:
        config = HHLConfig(readout=READOUT_SAMPLED)
    elif config.readout != READOUT_SAMPLED:
        raise ValueError("noisy solves require sampled readout")
    return HHLSolver(
        config=config,
        noise=model,
        seed=seed if seed is not None else model.seed,
        label="hhl-noisy",
    )
