import itertools

import numpy as np
import pytest

from parity_probe import oracle
from parity_probe.acceptance import record_gap
from parity_probe.pauli import (
    PauliElementError,
    PauliGroupElement,
    cyclic_transform,
    measure_pauli_element,
    pauli_distribution,
    staged_entangle,
)
from parity_probe.protocol import parity_distribution
from parity_probe.register import AxisKet, RegisterShape, adjoin_probe, basis_state, random_state, reduced_density

SX = np.array([[0, 1], [1, 0]])
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1, -1])


@pytest.mark.parametrize("axis,sigma", [("x", SX), ("y", SY)])
def test_cyclic_transform(axis, sigma):
    R = cyclic_transform(axis)
    np.testing.assert_allclose(R @ SZ @ R.conj().T, sigma, atol=1e-12)
    np.testing.assert_allclose(R.conj().T @ R, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("axis", ["z", "e"])
def test_cyclic_transform_rejects(axis):
    with pytest.raises(PauliElementError):
        cyclic_transform(axis)


def test_element_parsing():
    assert str(PauliGroupElement.from_string("xXeZy")) == "XXEZY"
    with pytest.raises(PauliElementError, match="unknown axis character"):
        PauliGroupElement.from_string("XYQ")
    with pytest.raises(PauliElementError):
        PauliGroupElement.from_string("EE")


@pytest.mark.parametrize("text,outcome", [("XX", 0), ("YY", 1), ("ZZ", 0)])
def test_bell_spot_checks(bell00, text, outcome):
    dist = pauli_distribution(bell00, PauliGroupElement.from_string(text))
    assert dist[outcome].probability == pytest.approx(1, abs=1e-10)
    assert measure_pauli_element(bell00, PauliGroupElement.from_string(text), rng=0).outcome == outcome


def test_single_z_matches_parity():
    zero = basis_state(RegisterShape(2, 1), [0])
    a = pauli_distribution(zero, PauliGroupElement.from_string("Z"))
    assert a[0].probability == pytest.approx(1, abs=1e-12)
    assert record_gap(a, parity_distribution(zero)) <= 1e-12


def test_all_z_reduces_to_parity():
    for seed in range(20):
        psi = random_state(RegisterShape(2, 4), seed)
        assert record_gap(pauli_distribution(psi, PauliGroupElement(("z",) * 4)), parity_distribution(psi)) <= 1e-12


def test_random_elements_five_qubits():
    rng = np.random.default_rng(0)
    for _ in range(200):
        axes = tuple(rng.choice(list("xyze"), size=5))
        if set(axes) == {"e"}:
            continue
        psi = random_state(RegisterShape(2, 5), int(rng.integers(2**32)))
        exact = oracle.projector_distribution(psi, oracle.pauli_projectors(axes))
        assert record_gap(pauli_distribution(psi, PauliGroupElement(axes)), exact) <= 1e-10


@pytest.mark.parametrize("text", ["XYZE", "YXEZ", "EZXX", "YYYE"])
def test_net_unitary_is_controlled_element(text):
    element = PauliGroupElement.from_string(text)
    n = element.n_sites
    shape = RegisterShape(2, n)
    C = oracle.build_controlled_element(element.axes)
    for seed in range(5):
        psi = random_state(shape, seed)
        ref = C @ adjoin_probe(AxisKet("x", 0), psi).amplitudes
        np.testing.assert_allclose(staged_entangle(psi, element).amplitudes, ref, atol=1e-12)


def test_stage_order_independence():
    element = PauliGroupElement.from_string("XYZEY")
    psi = random_state(RegisterShape(2, 5), 8)
    base = pauli_distribution(psi, element)
    for order in itertools.permutations("xyz"):
        assert record_gap(pauli_distribution(psi, element, stage_order=order), base) <= 1e-10


def test_spectator_sites():
    element = PauliGroupElement.from_string("XEZE")
    psi = random_state(RegisterShape(2, 4), 21)
    dist = pauli_distribution(psi, element)
    # reduced state on the spectators is untouched by the measurement on average
    before = reduced_density(psi, [1, 3])
    after = sum(r.probability * reduced_density(r.post_state, [1, 3]) for r in dist)
    np.testing.assert_allclose(after, before, atol=1e-10)
    # per outcome, tracing spectators before or after gives the same active-site state
    active = oracle.pauli_projectors(["x", "z"])
    rho_active = reduced_density(psi, [0, 2])
    for r, P in zip(dist, active):
        expected = P @ rho_active @ P / np.trace(P @ rho_active @ P)
        np.testing.assert_allclose(reduced_density(r.post_state, [0, 2]), expected, atol=1e-10)


@pytest.mark.parametrize("n", range(1, 9))
def test_oracle_projectors_idempotent_complementary(n):
    rng = np.random.default_rng(n)
    axes = ["x", "y", "z"][int(rng.integers(3))] + "".join(rng.choice(list("xyze"), size=n - 1))
    plus, minus = oracle.pauli_projectors(axes)
    for P in (plus, minus):
        assert np.max(np.abs(P @ P - P)) <= 1e-12
    np.testing.assert_allclose(plus + minus, np.eye(2**n), atol=1e-12)


def test_site_count_mismatch():
    with pytest.raises(PauliElementError):
        pauli_distribution(random_state(RegisterShape(2, 3), 0), PauliGroupElement.from_string("XX"))
