import json
import math

import numpy as np
import pytest

from qpflow import qsim
from qpflow.qsim import (
    GateOp,
    QuantumCircuit,
    StateVector,
    adjoint_gates,
    apply_gate,
    bitstring,
    build_inverse_qft,
    build_qft,
    circuit_metrics,
    circuit_to_json,
    elementary_gates,
    run_circuit,
    sample,
    state_from_amplitudes,
    zero_state,
)

INV_SQRT2 = 1 / math.sqrt(2)


def gates_to_matrix(gates, n):
    """Column-by-column unitary of a gate list (independent of run_circuit)."""
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    for c in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[c] = 1.0
        state = StateVector(amps=amps, n_qubits=n)
        for g in gates:
            state = apply_gate(state, g)
        u[:, c] = state.amps
    return u


class TestApplyGate:
    def test_h_on_zero(self):
        out = apply_gate(zero_state(1), qsim.h(0))
        assert np.allclose(out.amps, [INV_SQRT2, INV_SQRT2])

    def test_cnot_flips_target(self):
        # |10> = qubit1 set, qubit0 clear = index 2
        amps = np.zeros(4, dtype=complex)
        amps[2] = 1.0
        out = apply_gate(state_from_amplitudes(amps, 2), qsim.cnot(1, 0))
        assert out.amps[3] == pytest.approx(1.0)

    def test_controlled_diagonal_power(self):
        u = np.diag([np.exp(-2j * np.pi / 8), np.exp(-2j * np.pi * 2 / 8)])
        gate = qsim.controlled_unitary(u, control=1, targets=[0], power=2)
        # oracle: direct matrix product
        u_sq = u @ u
        for col, eigvec in enumerate(np.eye(2)):
            amps = np.kron([0, 1], eigvec)  # control qubit 1 set
            out = apply_gate(state_from_amplitudes(amps.astype(complex), 2), gate)
            expected = np.kron([0, 1], u_sq @ eigvec)
            assert np.allclose(out.amps, expected, atol=1e-12)
        # the first eigenvector picks up exp(-i*4*pi/8)
        assert u_sq[0, 0] == pytest.approx(np.exp(-4j * np.pi / 8))

    def test_index_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            apply_gate(zero_state(1), qsim.h(3))

    def test_non_unitary_payload_rejected(self):
        with pytest.raises(ValueError, match="non-unitary"):
            qsim.controlled_unitary(np.array([[1.0, 0.0], [1.0, 1.0]]), 1, [0])

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            qsim.cnot(0, 0)

    def test_norm_preserved_random_gates(self):
        rng = np.random.default_rng(11)
        state = zero_state(3)
        for g in random_gates(rng, 3, 60):
            state = apply_gate(state, g)
            assert abs(np.linalg.norm(state.amps) - 1.0) < 1e-10

    def test_linearity_on_orthogonal_mix(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            q, _ = np.linalg.qr(
                rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
            )
            s1, s2 = q[:, 0], q[:, 1]
            alpha, beta = INV_SQRT2, INV_SQRT2 * 1j
            gate = qsim.cphase(0, 2, 0.7)
            lhs = apply_gate(
                state_from_amplitudes(alpha * s1 + beta * s2, 3), gate
            ).amps
            rhs = (
                alpha * apply_gate(state_from_amplitudes(s1, 3), gate).amps
                + beta * apply_gate(state_from_amplitudes(s2, 3), gate).amps
            )
            assert np.allclose(lhs, rhs, atol=1e-10)


def random_gates(rng, n, count):
    gates = []
    for _ in range(count):
        kind = rng.integers(6)
        q = int(rng.integers(n))
        p = int((q + 1 + rng.integers(n - 1)) % n)
        if kind == 0:
            gates.append(qsim.h(q))
        elif kind == 1:
            gates.append(qsim.ry(q, float(rng.uniform(-np.pi, np.pi))))
        elif kind == 2:
            gates.append(qsim.rz(q, float(rng.uniform(-np.pi, np.pi))))
        elif kind == 3:
            gates.append(qsim.cnot(p, q))
        elif kind == 4:
            gates.append(qsim.cphase(p, q, float(rng.uniform(-np.pi, np.pi))))
        else:
            gates.append(qsim.swap(p, q))
    return gates


class TestRunCircuit:
    def test_empty_circuit(self):
        state = run_circuit(QuantumCircuit(n_qubits=2))
        assert np.allclose(state.amps, [1, 0, 0, 0])

    def test_double_h_is_identity(self):
        circ = QuantumCircuit(n_qubits=1, gates=[qsim.h(0), qsim.h(0)])
        assert np.allclose(run_circuit(circ).amps, [1, 0], atol=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(ValueError, match="size"):
            run_circuit(QuantumCircuit(n_qubits=2), zero_state(3))


class TestSample:
    def test_deterministic_state(self):
        hist = sample(zero_state(1), shots=100, seed=1)
        assert hist.counts == {"0": 100}

    def test_seed_reproducibility(self):
        state = apply_gate(zero_state(1), qsim.h(0))
        h1 = sample(state, shots=1024, seed=42)
        h2 = sample(state, shots=1024, seed=42)
        assert h1.counts == h2.counts
        h3 = sample(state, shots=1024, seed=43)
        assert h1.counts != h3.counts

    def test_frequencies_within_3_sigma(self):
        rng = np.random.default_rng(9)
        amps = rng.normal(size=8) + 1j * rng.normal(size=8)
        amps /= np.linalg.norm(amps)
        state = state_from_amplitudes(amps, 3)
        shots = 10_000
        hist = sample(state, shots=shots, seed=0)
        for idx, p in enumerate(state.probabilities()):
            freq = hist.counts.get(bitstring(idx, 3), 0) / shots
            sigma = math.sqrt(p * (1 - p) / shots)
            assert abs(freq - p) <= 3 * sigma + 1e-12

    def test_shots_validation(self):
        with pytest.raises(ValueError):
            sample(zero_state(1), shots=0)

    def test_histogram_json(self):
        hist = sample(zero_state(2), shots=5, seed=3)
        payload = json.loads(hist.to_json())
        assert payload == {"counts": {"00": 5}, "shots": 5, "seed": 3}


def dft_matrix(m):
    n = 2 ** m
    omega = np.exp(2j * np.pi / n)
    return np.array([[omega ** (r * c) for c in range(n)] for r in range(n)]) / math.sqrt(n)


class TestQft:
    def test_single_qubit_is_h(self):
        gates = build_inverse_qft([0])
        assert len(gates) == 1 and gates[0].kind == qsim.H

    def test_qft_matches_dft_matrix(self):
        assert np.allclose(gates_to_matrix(build_qft([0, 1, 2]), 3), dft_matrix(3), atol=1e-12)

    def test_inverse_qft_matches_conjugate(self):
        u = gates_to_matrix(build_inverse_qft([0, 1]), 2)
        assert np.allclose(u, dft_matrix(2).conj().T, atol=1e-13)
        assert u[1, 3] == pytest.approx(0.5 * np.exp(-1.5j * np.pi), abs=1e-12)

    def test_roundtrip_identity_on_basis_states(self):
        gates = build_qft([0, 1, 2]) + build_inverse_qft([0, 1, 2])
        u = gates_to_matrix(gates, 3)
        assert np.max(np.abs(u - np.eye(8))) < 1e-12


class TestAdjointAndDecomposition:
    def test_adjoint_inverts_random_circuits(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            gates = random_gates(rng, 3, 30)
            u = gates_to_matrix(gates + adjoint_gates(gates), 3)
            assert np.max(np.abs(u - np.eye(8))) < 1e-10

    def test_elementary_gates_equivalence(self):
        rng = np.random.default_rng(2)
        gates = [
            qsim.mux_ry(0, (1, 2), rng.uniform(-np.pi, np.pi, size=4)),
            qsim.cphase(2, 1, 0.9),
            qsim.swap(0, 2),
            qsim.mux_ry(2, (0,), rng.uniform(-np.pi, np.pi, size=2)),
        ]
        dec = elementary_gates(gates)
        assert all(
            g.kind in (qsim.RY, qsim.PHASE, qsim.CNOT) for g in dec
        )
        assert np.allclose(
            gates_to_matrix(gates, 3), gates_to_matrix(dec, 3), atol=1e-12
        )

    def test_mux_ry_decomposition_counts(self):
        gate = qsim.mux_ry(0, (1, 2, 3), np.linspace(0, 1, 8))
        dec = elementary_gates([gate])
        assert sum(1 for g in dec if g.kind == qsim.CNOT) == 8
        assert sum(1 for g in dec if g.kind == qsim.RY) == 8


class TestMetrics:
    def test_single_cnot(self):
        circ = QuantumCircuit(n_qubits=2, gates=[qsim.cnot(0, 1)])
        m = circuit_metrics(circ)
        assert m.depth == 1 and m.cnot_count == 1 and m.width == 2
        assert not m.estimated

    def test_depth_counts_parallel_gates_once(self):
        circ = QuantumCircuit(n_qubits=2, gates=[qsim.h(0), qsim.h(1), qsim.cnot(0, 1)])
        assert circuit_metrics(circ).depth == 2

    def test_block_estimate(self):
        u = np.eye(4, dtype=complex)
        circ = QuantumCircuit(
            n_qubits=3, gates=[qsim.controlled_unitary(u, 2, [0, 1])]
        )
        m = circuit_metrics(circ)
        # 3-qubit controlled block: ceil(0.75 * 4^3) = 48
        assert m.cnot_count == 48
        assert m.estimated

    def test_circuit_json_dump(self):
        circ = QuantumCircuit(
            n_qubits=2,
            gates=[qsim.h(0), qsim.cnot(0, 1)],
            registers={"nb": (0,), "na": (1,)},
        )
        payload = json.loads(circuit_to_json(circ))
        assert payload["n_qubits"] == 2
        assert payload["gates"][1]["kind"] == "CNOT"
        assert payload["registers"]["nb"] == [0]
