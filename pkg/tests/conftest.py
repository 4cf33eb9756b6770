import numpy as np
import pytest

from qpflow import fdlf, netmodel

# Converged reference trajectory of the bundled 3-bus case at tol=1e-5:
# (V2, theta2_deg, V3, theta3_deg) after each iteration.
REFERENCE_TRAJECTORY_3BUS = (
    (1.01750000, 2.14859173, 0.99250000, -5.01338071),
    (1.01198104, 2.08682333, 0.98513520, -4.94593291),
    (1.01210909, 2.10823443, 0.98510531, -4.99645096),
    (1.01200181, 2.10832465, 0.98496362, -4.99531212),
    (1.01200181, 2.10872362, 0.98496362, -4.99629051),
)

B3_EXPECTED = np.array([[-1.5, 0.5], [0.5, -1.5]])

B5_NOMINAL = np.array(
    [
        [-4.00, 0.03, 0.00, 0.00],
        [0.03, -3.00, 0.02, 0.00],
        [0.00, 0.02, -1.55, 0.50],
        [0.00, 0.00, 0.50, -1.45],
    ]
)


@pytest.fixture(scope="session")
def case3_net():
    return netmodel.load_bundled_case("case3")


@pytest.fixture(scope="session")
def case5_net():
    return netmodel.load_bundled_case("case5")


@pytest.fixture(scope="session")
def b3(case3_net):
    return fdlf.decoupled_matrices(case3_net).b_prime


@pytest.fixture(scope="session")
def b5(case5_net):
    return fdlf.decoupled_matrices(case5_net).b_prime


def scale_branch(net, from_bus, to_bus, factor):
    """Copy of the network with one branch reactance scaled."""
    branches = tuple(
        netmodel.BranchRecord(b.from_bus, b.to_bus, b.r_pu, b.x_pu * factor)
        if {b.from_bus, b.to_bus} == {from_bus, to_bus}
        else b
        for b in net.branches
    )
    return netmodel.PowerNetwork(
        base_mva=net.base_mva, buses=net.buses, branches=branches
    )


def random_symmetric_with_eigs(rng, eigs):
    """Random orthogonal conjugation of diag(eigs)."""
    eigs = np.asarray(eigs, dtype=float)
    q, _ = np.linalg.qr(rng.normal(size=(len(eigs), len(eigs))))
    return (q * eigs) @ q.T
