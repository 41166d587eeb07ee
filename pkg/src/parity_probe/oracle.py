"""Brute-force dense-matrix ground truth.

Everything here is built from Kronecker products and explicit loops over
basis states. It deliberately shares no gate-application code with the
protocol modules and imports only from the register layer.
"""
from __future__ import annotations

import itertools
from functools import reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .records import MeasurementRecord, conditioned_record
from .register import (
    QuditState,
    RegisterError,
    RegisterShape,
    as_rng,
    decode,
    generalized_pauli,
    roots_of_unity,
    sample_index,
)

MAX_MATRIX_DIM = 2**12
HERMITIAN_TOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_SIGMA = {
    "e": _I2,
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OracleError(ValueError):
    pass


def _check_dim(dim: int) -> None:
    if dim > MAX_MATRIX_DIM:
        raise OracleError(f"dense dimension {dim} exceeds the oracle cap {MAX_MATRIX_DIM}")


def _check_unitary(U: np.ndarray) -> np.ndarray:
    err = np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))
    if err > HERMITIAN_TOL:
        raise OracleError(f"oracle operator not unitary (error {err:.3g})")
    return U


def _check_hermitian(A: np.ndarray) -> np.ndarray:
    err = np.max(np.abs(A - A.conj().T))
    if err > HERMITIAN_TOL:
        raise OracleError(f"oracle operator not Hermitian (error {err:.3g})")
    return A


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, ops, np.ones((1, 1), dtype=complex))


def embed(op: np.ndarray, site: int, n_sites: int, d: int = 2) -> np.ndarray:
    _check_dim(d**n_sites)
    eye = np.eye(d, dtype=complex)
    return kron_all([op if s == site else eye for s in range(n_sites)])


def build_parity_operator(shape: RegisterShape) -> np.ndarray:
    """Product of Z over every site of ``shape``."""
    _check_dim(shape.dim)
    _, Z = generalized_pauli(shape.d)
    return _check_unitary(kron_all([Z] * shape.n_sites))


def parity_eigenvalues(d: int) -> np.ndarray:
    return roots_of_unity(d)


def build_projectors(operator: np.ndarray, eigenvalues: Iterable[complex]) -> list[np.ndarray]:
    """Spectral projectors by Lagrange interpolation over the declared spectrum."""
    eigenvalues = list(eigenvalues)
    dim = operator.shape[0]
    eye = np.eye(dim, dtype=complex)
    projectors = []
    for lam in eigenvalues:
        P = eye.copy()
        for mu in eigenvalues:
            if mu != lam:
                P = P @ (operator - mu * eye) / (lam - mu)
        if abs(np.trace(P)) < 0.5:
            raise OracleError(f"eigenvalue {lam} is not in the operator spectrum")
        if np.max(np.abs(P @ P - P)) > 1e-10:
            raise OracleError("operator is not diagonalizable with the declared spectrum")
        projectors.append(P)
    return projectors


def parity_projectors(shape: RegisterShape) -> list[np.ndarray]:
    """Eigenprojectors of the parity operator, indexed by outcome n (eigenvalue q**n)."""
    Pz = build_parity_operator(shape)
    if shape.d == 2:
        eye = np.eye(shape.dim)
        return [(eye + Pz) / 2, (eye - Pz) / 2]
    return build_projectors(Pz, parity_eigenvalues(shape.d))


def projector_distribution(state: QuditState, projectors: Sequence[np.ndarray]) -> list[MeasurementRecord]:
    records = []
    for n, P in enumerate(projectors):
        branch = P @ state.amplitudes
        p = float(np.vdot(branch, branch).real)
        records.append(conditioned_record(n, p, branch, state.shape))
    return records


def oracle_parity_distribution(state: QuditState) -> list[MeasurementRecord]:
    return projector_distribution(state, parity_projectors(state.shape))


def build_pauli_operator(axes: Sequence[str]) -> np.ndarray:
    axes = [a.lower() for a in axes]
    _check_dim(2 ** len(axes))
    return _check_hermitian(kron_all([_SIGMA[a] for a in axes]))


def pauli_projectors(axes: Sequence[str]) -> list[np.ndarray]:
    P = build_pauli_operator(axes)
    eye = np.eye(P.shape[0])
    return [(eye + P) / 2, (eye - P) / 2]


def build_controlled_element(axes: Sequence[str]) -> np.ndarray:
    """|0><0| (x) I + |1><1| (x) P with the control on site 0."""
    P = build_pauli_operator(axes)
    _check_dim(2 * P.shape[0])
    P0 = np.diag([1, 0]).astype(complex)
    P1 = np.diag([0, 1]).astype(complex)
    return _check_unitary(np.kron(P0, np.eye(P.shape[0])) + np.kron(P1, P))


def build_number_operator(n_sites: int) -> np.ndarray:
    """Count of 1s: sum over sites of (1 - sigma_z) / 2."""
    eye = np.eye(2**n_sites, dtype=complex)
    terms = [(eye - embed(_SIGMA["z"], s, n_sites)) / 2 for s in range(n_sites)]
    return _check_hermitian(sum(terms))


def spin_operators(n_sites: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Dense J_x, J_y, J_z = sum over sites of sigma / 2."""
    return tuple(
        sum(embed(_SIGMA[a], s, n_sites) for s in range(n_sites)) / 2 for a in ("x", "y", "z")
    )


def collective_exp(generator: np.ndarray, coeff: complex) -> np.ndarray:
    """expm(coeff * generator) with a unitarity check."""
    return _check_unitary(expm(coeff * generator))


def dense_phase_gate(shape: RegisterShape, i: int, j: int) -> np.ndarray:
    """sum_{a,b} q**(ab) |a><a|_i |b><b|_j as a dense matrix."""
    _check_dim(shape.dim)
    d = shape.d
    q = roots_of_unity(d)
    eye = np.eye(d, dtype=complex)
    U = np.zeros((shape.dim, shape.dim), dtype=complex)
    for a in range(d):
        for b in range(d):
            proj_a = np.outer(eye[a], eye[a])
            proj_b = np.outer(eye[b], eye[b])
            factors = [eye] * shape.n_sites
            factors[i], factors[j] = proj_a, proj_b
            U += q[(a * b) % d] * kron_all(factors)
    return _check_unitary(U)


def dense_network(shape: RegisterShape, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    U = np.eye(shape.dim, dtype=complex)
    for i, j in pairs:
        U = dense_phase_gate(shape, i, j) @ U
    return U


def network_phases_bruteforce(shape: RegisterShape, pairs: Iterable[tuple[int, int]]) -> np.ndarray:
    """Per-basis phase of a pairwise network, by looping over every basis ket."""
    pairs = list(pairs)
    q = roots_of_unity(shape.d)
    out = np.empty(shape.dim, dtype=complex)
    for index in range(shape.dim):
        digits = decode(shape, index)
        exponent = sum(digits[i] * digits[j] for i, j in pairs)
        out[index] = q[exponent % shape.d]
    return out


def complete_pairs(sites: Iterable[int]) -> list[tuple[int, int]]:
    return list(itertools.combinations(sorted(sites), 2))


def cnot_matrix(control: int, target: int, n_sites: int) -> np.ndarray:
    P0 = np.diag([1, 0]).astype(complex)
    P1 = np.diag([0, 1]).astype(complex)
    return _check_unitary(
        embed(P0, control, n_sites) + embed(P1, control, n_sites) @ embed(_SIGMA["x"], target, n_sites)
    )


def cnot_distribution(state: QuditState) -> list[MeasurementRecord]:
    """Intuitive scheme: probe |0^z>, C-NOT from every system qubit onto it, read probe in z."""
    if state.d != 2:
        raise OracleError("sequential C-NOT scheme is qubit-only")
    if state.shape.probe_present:
        raise RegisterError("state already carries a probe")
    n = state.n_sites + 1
    _check_dim(2**n)
    joint = np.kron(np.array([1, 0], dtype=complex), state.amplitudes)
    for i in range(1, n):
        joint = cnot_matrix(i, 0, n) @ joint
    block = joint.reshape(2, -1)
    records = []
    for label in (0, 1):
        p = float(np.vdot(block[label], block[label]).real)
        records.append(conditioned_record(label, p, block[label], state.shape, probe_outcome=label))
    return records


def sequential_cnot_reference(state: QuditState, rng) -> MeasurementRecord:
    records = cnot_distribution(state)
    k = sample_index([r.probability for r in records], as_rng(rng))
    return records[k]


def expectation(state: QuditState, operator: np.ndarray) -> complex:
    return complex(np.vdot(state.amplitudes, operator @ state.amplitudes))
