import itertools
import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parity_probe import oracle
from parity_probe.collective import (
    DiagonalUnitary,
    all_pairs,
    collective_phase_operator,
    collective_phase_unitary,
    collective_phase_weights,
    collective_rotation,
    collective_twist,
    collective_xy_rotation,
    pairwise_phase_gate,
    phase_gate_network,
)
from parity_probe.register import RegisterError, RegisterShape, basis_state, random_state, roots_of_unity


def _brute_weight_phase(n, k):
    """Phase of the all-pairs network on one weight-k basis ket, by explicit pair loop."""
    bits = [1] * k + [0] * (n - k)
    return (-1) ** sum(bits[i] * bits[j] for i, j in itertools.combinations(range(n), 2))


def test_pairwise_gate_qubits():
    shape = RegisterShape(2, 2)
    assert pairwise_phase_gate(basis_state(shape, [1, 1]), 0, 1).amplitudes[3] == -1
    for digits in ([0, 0], [0, 1], [1, 0]):
        psi = basis_state(shape, digits)
        np.testing.assert_array_equal(pairwise_phase_gate(psi, 0, 1).amplitudes, psi.amplitudes)


def test_pairwise_gate_qutrit():
    q = roots_of_unity(3)[1]
    shape = RegisterShape(3, 2)
    out = pairwise_phase_gate(basis_state(shape, [2, 2]), 0, 1)
    assert out.amplitudes[8] == pytest.approx(q, abs=1e-15)


def test_pairwise_gate_rejects_same_site():
    with pytest.raises(RegisterError):
        pairwise_phase_gate(random_state(RegisterShape(2, 2), 0), 1, 1)


def test_network_involution_and_empty():
    psi = random_state(RegisterShape(2, 5), 1)
    pairs = all_pairs(range(5))
    twice = phase_gate_network(phase_gate_network(psi, pairs), pairs)
    np.testing.assert_array_equal(twice.amplitudes, psi.amplitudes)
    np.testing.assert_array_equal(phase_gate_network(psi, []).amplitudes, psi.amplitudes)


@pytest.mark.parametrize("N", range(1, 6))
def test_graph_cancellation_leaves_star(N):
    shape = RegisterShape(2, N + 1)
    full = oracle.dense_network(shape, all_pairs(range(N + 1)))
    system = oracle.dense_network(shape, all_pairs(range(1, N + 1)))
    star = oracle.dense_network(shape, [(0, i) for i in range(1, N + 1)])
    np.testing.assert_allclose(system @ full, star, atol=1e-12)


def test_weights_small_cases():
    w = collective_phase_weights(3)
    assert w[0] == 1 and w[1] == 1
    assert w[2] == _brute_weight_phase(3, 2) == -1
    assert collective_phase_weights(6)[4] == _brute_weight_phase(6, 4) == 1


@pytest.mark.parametrize("n", range(1, 13))
def test_weights_match_pair_count(n):
    expected = [_brute_weight_phase(n, k) for k in range(n + 1)]
    assert list(collective_phase_weights(n)) == expected
    assert expected == [(-1) ** comb(k, 2) for k in range(n + 1)]


def test_weights_reject_empty_support():
    with pytest.raises(RegisterError):
        collective_phase_weights(0)


def test_collective_on_pair_is_phase_gate():
    shape = RegisterShape(2, 2)
    out = collective_phase_unitary(basis_state(shape, [1, 1]), [0, 1])
    assert out.amplitudes[3] == -1
    psi = random_state(shape, 5)
    np.testing.assert_array_equal(
        collective_phase_unitary(psi, [0, 1]).amplitudes, pairwise_phase_gate(psi, 0, 1).amplitudes
    )


def test_collective_single_site_is_identity():
    psi = random_state(RegisterShape(2, 3), 2)
    np.testing.assert_array_equal(collective_phase_unitary(psi, [1]).amplitudes, psi.amplitudes)


def test_collective_matches_network_random_five():
    psi = random_state(RegisterShape(2, 5), 9)
    a = collective_phase_unitary(psi, range(5))
    b = phase_gate_network(psi, all_pairs(range(5)))
    np.testing.assert_allclose(a.amplitudes, b.amplitudes, atol=1e-12)


@pytest.mark.parametrize("n", range(1, 11))
def test_exact_equivalence_with_bruteforce(n):
    shape = RegisterShape(2, n)
    table = collective_phase_operator(shape, range(n)).expand()
    brute = oracle.network_phases_bruteforce(shape, all_pairs(range(n)))
    assert np.max(np.abs(table - brute)) <= 1e-12


def test_collective_on_subset_support():
    shape = RegisterShape(2, 5)
    support = [0, 2, 3]
    table = collective_phase_operator(shape, support).expand()
    np.testing.assert_array_equal(table, oracle.network_phases_bruteforce(shape, all_pairs(support)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), perm=st.permutations(range(5)))
def test_collective_is_diagonal_and_permutation_symmetric(seed, perm):
    psi = random_state(RegisterShape(2, 5), seed)
    out = collective_phase_unitary(psi, range(5))
    np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), atol=1e-15)
    # relabel sites, apply, relabel back
    permuted = psi.with_amplitudes(np.transpose(psi.tensor(), perm).reshape(-1))
    applied = collective_phase_unitary(permuted, range(5))
    back = np.transpose(applied.tensor(), np.argsort(perm)).reshape(-1)
    np.testing.assert_allclose(back, out.amplitudes, atol=1e-15)


def test_weight_table_and_per_basis_forms_agree():
    shape = RegisterShape(2, 4)
    weights = collective_phase_weights(4)
    w_form = DiagonalUnitary(shape, (0, 1, 2, 3), weights=weights)
    p_form = DiagonalUnitary(shape, (0, 1, 2, 3), phases=w_form.expand())
    psi = random_state(shape, 0)
    np.testing.assert_array_equal(w_form.apply(psi).amplitudes, p_form.apply(psi).amplitudes)
    with pytest.raises(ValueError):
        DiagonalUnitary(shape, (0,), weights=np.array([1.0, 0.5]))


def test_collective_rejects_qudits_and_empty_support():
    with pytest.raises(RegisterError):
        collective_phase_unitary(random_state(RegisterShape(3, 2), 0), [0, 1])
    with pytest.raises(RegisterError):
        collective_phase_unitary(random_state(RegisterShape(2, 2), 0), [])


def test_rotation_basics():
    psi = random_state(RegisterShape(2, 3), 4)
    np.testing.assert_allclose(collective_rotation(psi, range(3), "x", 0.0).amplitudes, psi.amplitudes)
    zero = basis_state(RegisterShape(2, 1), [0])
    flipped = collective_rotation(zero, [0], "y", math.pi)
    assert flipped.fidelity(basis_state(RegisterShape(2, 1), [1])) == pytest.approx(1, abs=1e-15)
    with pytest.raises(RegisterError):
        collective_rotation(random_state(RegisterShape(3, 1), 0), [0], "x", 1.0)


def _dense_state_op(fn, n):
    shape = RegisterShape(2, n)
    cols = [fn(basis_state(shape, [int(b) for b in format(i, f"0{n}b")])).amplitudes for i in range(2**n)]
    return np.array(cols).T


@pytest.mark.parametrize("n", range(1, 7))
def test_rotation_sandwich_gives_jz(n):
    theta = 0.731
    sandwich = _dense_state_op(
        lambda s: collective_rotation(
            collective_rotation(collective_rotation(s, range(n), "y", -math.pi / 2), range(n), "x", theta),
            range(n), "y", math.pi / 2,
        ),
        n,
    )
    _, _, Jz = oracle.spin_operators(n)
    np.testing.assert_allclose(sandwich, oracle.collective_exp(Jz, 1j * theta), atol=1e-10)


@pytest.mark.parametrize("n", [1, 3, 4])
def test_xy_rotation_and_twist_match_expm(n):
    Jx, Jy, Jz = oracle.spin_operators(n)
    rot = _dense_state_op(lambda s: collective_xy_rotation(s, range(n), 0.4, -1.1), n)
    np.testing.assert_allclose(rot, oracle.collective_exp(0.4 * Jx - 1.1 * Jy, 1j), atol=1e-12)
    for axis, J in (("x", Jx), ("z", Jz)):
        tw = _dense_state_op(lambda s: collective_twist(s, range(n), axis, 0.9), n)
        np.testing.assert_allclose(tw, oracle.collective_exp(J @ J, 0.9j), atol=1e-12)
