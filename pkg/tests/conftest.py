import numpy as np
import pytest

import causalis as cs


@pytest.fixture(scope="session")
def switch():
    """Equal-amplitude qubit switch, validated once per session."""
    qs = cs.make_quantum_switch([1.0, 0.0], 1 / np.sqrt(2), 1 / np.sqrt(2))
    return cs.validate_process(qs.to_matrix())


@pytest.fixture(scope="session")
def qubit_parties():
    return (
        cs.Party("A", cs.LabeledSpace("A_I", 2), cs.LabeledSpace("A_O", 2)),
        cs.Party("B", cs.LabeledSpace("B_I", 2), cs.LabeledSpace("B_O", 2)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unitary_channel_mixture(parties, rng, weight=0.5):
    """Mixture of two ordered processes built from unitary links.

    Unitary-channel mixtures converge quickly under alternating projections,
    unlike generic random-channel mixtures; use these for fast separability
    tests.
    """
    a, b = parties
    chois = {}
    for src, dst, key in ((a, b, "ab"), (b, a, "ba")):
        u = cs.random_unitary(2, rng)
        rho = cs.HermitianOperator(src.input_space, cs.random_density(2, rng))
        ch = cs.choi_of_kraus([u], src.output_space, dst.input_space)
        chois[key] = cs.make_ordered_process([src, dst], rho, [ch], validate=False)
    w = chois["ab"].w * weight + chois["ba"].w * (1 - weight)
    return cs.ProcessMatrix((a, b), w)
