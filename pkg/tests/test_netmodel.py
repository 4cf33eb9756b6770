import json
from importlib import resources

import numpy as np
import pytest

from conftest import B3_EXPECTED, B5_NOMINAL
from qpflow import netmodel
from qpflow.netmodel import (
    BusKind,
    NetworkError,
    build_b_matrices,
    build_ybus,
    parse_case,
)


def make_case(buses, branches, base=100.0):
    return json.dumps({"base_mva": base, "buses": buses, "branches": branches})


TWO_BUS = make_case(
    [
        {"id": 1, "kind": "slack", "vm": 1.0},
        {"id": 2, "kind": "pq", "p_mw": -10.0},
    ],
    [{"from": 1, "to": 2, "r_pu": 0.0, "x_pu": 1.0}],
)


class TestParseCase:
    def test_bundled_3bus(self, case3_net):
        assert case3_net.n_buses == 3
        b1, b2, b3 = case3_net.buses
        assert b1.kind is BusKind.SLACK and b1.vm_init == 1.03
        assert b2.kind is BusKind.PQ and b2.p_mw == 10.0
        assert b3.p_mw == -15.0 and b3.q_mvar == -5.0
        assert sorted(br.x_pu for br in case3_net.branches) == [1.0, 1.0, 2.0]
        assert case3_net.base_mva == 100.0

    def test_zero_buses_missing_slack(self):
        with pytest.raises(NetworkError, match="missing slack"):
            parse_case(make_case([], []))

    def test_branch_to_unknown_bus(self, case3_net):
        raw = json.loads(resources.files("qpflow.cases").joinpath("case3.json").read_text())
        raw["branches"].append({"from": 1, "to": 4, "r_pu": 0.0, "x_pu": 1.0})
        with pytest.raises(NetworkError, match="unknown bus"):
            parse_case(json.dumps(raw))

    def test_duplicate_bus_id(self):
        with pytest.raises(NetworkError, match="duplicate"):
            parse_case(
                make_case(
                    [{"id": 1, "kind": "slack"}, {"id": 1, "kind": "pq"}], []
                )
            )

    def test_two_slacks_rejected(self):
        with pytest.raises(NetworkError, match="more than one slack"):
            parse_case(
                make_case(
                    [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "slack"}],
                    [{"from": 1, "to": 2, "x_pu": 1.0}],
                )
            )

    def test_non_positive_base(self):
        with pytest.raises(NetworkError, match="base"):
            parse_case(make_case([{"id": 1, "kind": "slack"}], [], base=0.0))

    def test_shunt_fields_rejected(self):
        with pytest.raises(NetworkError, match="unsupported"):
            parse_case(
                make_case(
                    [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq"}],
                    [{"from": 1, "to": 2, "x_pu": 1.0, "b_shunt": 0.1}],
                )
            )

    def test_non_positive_vm_rejected(self):
        with pytest.raises(NetworkError, match="vm"):
            parse_case(make_case([{"id": 1, "kind": "slack", "vm": 0.0}], []))

    def test_disconnected_network_rejected(self):
        with pytest.raises(NetworkError, match="connected"):
            parse_case(
                make_case(
                    [
                        {"id": 1, "kind": "slack"},
                        {"id": 2, "kind": "pq"},
                        {"id": 3, "kind": "pq"},
                    ],
                    [{"from": 1, "to": 2, "x_pu": 1.0}],
                )
            )

    def test_resolve_falls_back_to_bundled(self):
        net = netmodel.resolve_case("case5.json")
        assert net.n_buses == 5
        with pytest.raises(FileNotFoundError):
            netmodel.resolve_case("missing.json")


def ybus_oracle(net):
    """Independent assembly from a sparse triplet list."""
    index = {b.id: i for i, b in enumerate(net.buses)}
    triplets = []
    for br in net.branches:
        adm = 1.0 / complex(br.r_pu, br.x_pu)
        i, j = index[br.from_bus], index[br.to_bus]
        triplets += [(i, i, adm), (j, j, adm), (i, j, -adm), (j, i, -adm)]
    y = np.zeros((net.n_buses, net.n_buses), dtype=complex)
    for i, j, v in triplets:
        y[i, j] += v
    return y


class TestYbus:
    def test_single_lossless_line(self):
        net = parse_case(TWO_BUS)
        y = build_ybus(net).y
        assert np.allclose(y, np.array([[-1j, 1j], [1j, -1j]]))

    def test_3bus_entries_match_oracle(self, case3_net):
        y = build_ybus(case3_net).y
        assert np.allclose(y, ybus_oracle(case3_net), atol=1e-15)
        i2, i3 = case3_net.bus_index(2), case3_net.bus_index(3)
        assert y[i2, i2] == pytest.approx(-1.5j)
        assert y[i2, i3] == pytest.approx(0.5j)

    def test_zero_impedance_branch(self):
        net = parse_case(
            make_case(
                [{"id": 1, "kind": "slack"}, {"id": 2, "kind": "pq"}],
                [{"from": 1, "to": 2, "r_pu": 0.0, "x_pu": 0.0}],
            )
        )
        with pytest.raises(NetworkError, match="zero-impedance"):
            build_ybus(net)

    def test_symmetry_and_rowsum_random_networks(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(3, 8))
            buses = [{"id": 1, "kind": "slack"}] + [
                {"id": k, "kind": "pq"} for k in range(2, n + 1)
            ]
            branches = [
                {"from": k, "to": int(rng.integers(1, k)),
                 "x_pu": float(rng.uniform(0.1, 3.0))}
                for k in range(2, n + 1)
            ]
            net = parse_case(make_case(buses, branches))
            y = build_ybus(net).y
            assert np.allclose(y, y.T, atol=1e-14)
            # lossless, no shunts: every row sums to zero
            assert np.max(np.abs(y.sum(axis=1))) < 1e-12


class TestBMatrices:
    def test_3bus_matrix(self, case3_net, b3):
        assert np.allclose(b3, B3_EXPECTED, atol=1e-14)
        mats = build_b_matrices(case3_net, build_ybus(case3_net))
        assert np.array_equal(mats.b_prime, mats.b_dprime)
        assert mats.bus_order == (2, 3)

    def test_3bus_eigenvalues(self, b3):
        assert np.allclose(np.linalg.eigvalsh(b3), [-2.0, -1.0], atol=1e-12)

    def test_5bus_matrix_rounds_to_nominal(self, b5):
        assert np.array_equal(np.round(b5, 2), B5_NOMINAL)
        assert np.max(np.abs(b5 - B5_NOMINAL)) < 5e-3

    def test_5bus_eigenvalues_exact(self, b5):
        assert np.allclose(
            np.linalg.eigvalsh(b5), [-4.0, -3.0, -2.0, -1.0], atol=1e-9
        )

    def test_b_prime_symmetric(self, b5):
        assert np.array_equal(b5, b5.T)

    def test_restriction_drops_slack_row(self, case3_net):
        y = build_ybus(case3_net)
        mats = build_b_matrices(case3_net, y)
        nonslack = list(case3_net.non_slack_indices)
        assert np.array_equal(
            mats.b_prime, y.y.imag[np.ix_(nonslack, nonslack)]
        )
