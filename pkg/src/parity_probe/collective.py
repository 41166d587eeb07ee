"""Collective-spin diagonal unitaries, pairwise phase gates and global rotations.

For qubits the all-pairs phase-gate network on a support of ``n`` sites depends
only on the Hamming weight ``k`` of each basis state on that support, so it is
stored as a weight table of ``n + 1`` phases. The table is derived from the
one-step collective Hamiltonian

    H(n, J_z) = J_z**2 / 2 - ((n - 1) / 2) J_z + ((n - 1)**2 - 1) / 8,
    U = exp(-i pi H),

with ``J_z = (n - 2k) / 2`` on weight-k states, keeping the constant term so
the result is exact, global phase included.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .register import (
    QuditState,
    RegisterError,
    RegisterShape,
    apply_sites,
    roots_of_unity,
    site_digits,
)

_SQRT1_2 = 1 / math.sqrt(2)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def exp_minus_i_pi(exponent: Fraction) -> complex:
    """exp(-i pi E), exact when 2E is an integer."""
    e = Fraction(exponent) % 2
    if (2 * e).denominator == 1:
        return (1, -1j, -1, 1j)[int(2 * e)]
    return cmath.exp(-1j * math.pi * float(e))


def _validate_support(shape: RegisterShape, support: Iterable[int]) -> tuple[int, ...]:
    support = tuple(support)
    if not support:
        raise RegisterError("empty support")
    if len(set(support)) != len(support):
        raise RegisterError("repeated site in support")
    for s in support:
        shape.check_site(s)
    return support


def hamming_weights(shape: RegisterShape, support: Sequence[int]) -> np.ndarray:
    """Number of 1-digits on ``support`` for every basis index (qubits)."""
    if shape.d != 2:
        raise RegisterError("Hamming-weight form is defined for qubits only")
    mask = 0
    for s in support:
        mask |= 1 << (shape.n_sites - 1 - s)
    idx = np.arange(shape.dim, dtype=np.uint64)
    return np.bitwise_count(idx & np.uint64(mask)).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DiagonalUnitary:
    """Diagonal unitary given per basis index or, for qubits, per Hamming weight on ``support``."""

    shape: RegisterShape
    support: tuple[int, ...]
    phases: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.phases is None) == (self.weights is None):
            raise ValueError("give exactly one of phases or weights")
        table = self.phases if self.phases is not None else self.weights
        if np.max(np.abs(np.abs(table) - 1.0)) > 1e-12:
            raise ValueError("diagonal entries must have unit modulus")
        if self.weights is not None and len(self.weights) != len(self.support) + 1:
            raise ValueError("weight table needs |support| + 1 entries")
        if self.phases is not None and len(self.phases) != self.shape.dim:
            raise ValueError(f"phase vector needs {self.shape.dim} entries")

    def expand(self) -> np.ndarray:
        if self.phases is not None:
            return self.phases
        return self.weights[hamming_weights(self.shape, self.support)]

    def apply(self, state: QuditState) -> QuditState:
        if state.shape != self.shape:
            raise RegisterError("diagonal unitary and state have different shapes")
        return state.with_amplitudes(state.amplitudes * self.expand())


def _pair_phases(shape: RegisterShape, i: int, j: int, power: int) -> np.ndarray:
    q = roots_of_unity(shape.d)
    prod = site_digits(shape, i) * site_digits(shape, j)
    return q[(power * prod) % shape.d]


def pairwise_phase_gate(state: QuditState, i: int, j: int, power: int = 1) -> QuditState:
    """Multiply each amplitude by q**(power * a_i * a_j); q = -1 for qubits."""
    state.shape.check_site(i)
    state.shape.check_site(j)
    if i == j:
        raise RegisterError("phase gate needs two distinct sites")
    return state.with_amplitudes(state.amplitudes * _pair_phases(state.shape, i, j, power))


def all_pairs(sites: Iterable[int]) -> list[tuple[int, int]]:
    return list(itertools.combinations(sorted(sites), 2))


def phase_gate_network(
    state: QuditState, pairs: Iterable[tuple[int, int]], power: int = 1
) -> QuditState:
    out = state
    for i, j in pairs:
        out = pairwise_phase_gate(out, i, j, power)
    return out


def collective_phase_exponent(n_support: int, k: int) -> Fraction:
    """H(n, J_z) evaluated on a weight-k state, in units where U = exp(-i pi H)."""
    m = Fraction(n_support - 2 * k, 2)
    return m * m / 2 - Fraction(n_support - 1, 2) * m + Fraction((n_support - 1) ** 2 - 1, 8)


def collective_phase_weights(n_support: int) -> np.ndarray:
    if n_support < 1:
        raise RegisterError(f"support size must be >= 1, got {n_support}")
    return np.array(
        [exp_minus_i_pi(collective_phase_exponent(n_support, k)) for k in range(n_support + 1)],
        dtype=complex,
    )


def collective_phase_operator(shape: RegisterShape, support: Iterable[int]) -> DiagonalUnitary:
    support = _validate_support(shape, support)
    return DiagonalUnitary(shape, support, weights=collective_phase_weights(len(support)))


def collective_phase_unitary(state: QuditState, support: Iterable[int]) -> QuditState:
    """One-step realization of the all-pairs phase-gate network on ``support`` (qubits)."""
    if state.d != 2:
        raise RegisterError("collective phase unitary is qubit-only; use phase_gate_network")
    return collective_phase_operator(state.shape, support).apply(state)


def site_rotation(axis: str, angle: float) -> np.ndarray:
    """exp(i angle sigma_axis / 2)."""
    sigma = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}[axis]
    return math.cos(angle / 2) * np.eye(2) + 1j * math.sin(angle / 2) * sigma


def collective_rotation(state: QuditState, support: Iterable[int], axis: str, angle: float) -> QuditState:
    """exp(i angle J_axis) on ``support``, factorized over sites."""
    if state.d != 2:
        raise RegisterError("collective rotations are defined for qubits only")
    if axis not in ("x", "y"):
        raise RegisterError(f"collective rotation axis must be x or y, got {axis!r}")
    support = _validate_support(state.shape, support)
    return apply_sites(state, support, site_rotation(axis, angle))


def collective_xy_rotation(state: QuditState, support: Iterable[int], alpha: float, beta: float) -> QuditState:
    """exp(i (alpha J_x + beta J_y)) on ``support``."""
    if state.d != 2:
        raise RegisterError("collective rotations are defined for qubits only")
    support = _validate_support(state.shape, support)
    theta = math.hypot(alpha, beta)
    if theta == 0.0:
        return state
    gen = (alpha * PAULI_X + beta * PAULI_Y) / theta
    U = math.cos(theta / 2) * np.eye(2) + 1j * math.sin(theta / 2) * gen
    return apply_sites(state, support, U)


def collective_twist(state: QuditState, support: Iterable[int], axis: str, chi: float) -> QuditState:
    """exp(i chi J_axis**2) on ``support`` for axis in {x, z}."""
    if state.d != 2:
        raise RegisterError("collective twists are defined for qubits only")
    support = _validate_support(state.shape, support)
    n = len(support)
    k = np.arange(n + 1)
    m = (n - 2 * k) / 2
    diag = DiagonalUnitary(state.shape, support, weights=np.exp(1j * chi * m * m))
    if axis == "z":
        return diag.apply(state)
    if axis != "x":
        raise RegisterError(f"twist axis must be x or z, got {axis!r}")
    out = apply_sites(state, support, HADAMARD)
    out = diag.apply(out)
    return apply_sites(out, support, HADAMARD)
