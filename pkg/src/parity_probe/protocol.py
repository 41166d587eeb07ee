"""Ancilla-assisted projective parity measurement.

The protocol is simulated literally: a probe prepared in an x-basis ket is
prepended as site 0, the all-pairs phase network runs over probe plus system,
the inverse network runs over the system alone, and the probe is read out in
the x basis. Projector formulas are used only for cross-checks, via ``oracle``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracle
from .collective import (
    PAULI_X,
    PAULI_Z,
    all_pairs,
    collective_phase_unitary,
    phase_gate_network,
)
from .records import MeasurementRecord, conditioned_record
from .register import (
    AxisKet,
    QuditState,
    RegisterError,
    RegisterShape,
    adjoin_probe,
    apply_single_site,
    as_rng,
    basis_state,
    decode,
    fourier_matrix,
    measure_site0_branches,
    product_state,
    sample_index,
)

PATHS = ("auto", "collective", "network")


def _check_system(state: QuditState) -> None:
    if state.shape.probe_present:
        raise RegisterError("parity is measured on a system-only state; probe already present")


def entangle_probe(joint: QuditState, path: str = "auto") -> QuditState:
    """Steps (ii) and (iii): all-pairs network on probe+system, inverse network on the system.

    For qubits the inverse network equals the network itself. The ``collective``
    path uses the one-step weight-table unitary; ``network`` applies the
    pairwise gates explicitly and is the only path for d > 2.
    """
    if path not in PATHS:
        raise ValueError(f"unknown path {path!r}")
    if path == "auto":
        path = "collective" if joint.d == 2 else "network"
    everything = range(joint.n_sites)
    system = range(1, joint.n_sites)
    if path == "collective":
        out = collective_phase_unitary(joint, everything)
        if joint.n_sites > 1:
            out = collective_phase_unitary(out, system)
        return out
    out = phase_gate_network(joint, all_pairs(everything))
    return phase_gate_network(out, all_pairs(system), power=-1)


def probe_readout(joint: QuditState) -> list[tuple[int, float, np.ndarray]]:
    """Rotate the probe x basis onto z, then measure site 0 in the computational basis."""
    rotated = apply_single_site(joint, 0, fourier_matrix(joint.d).conj().T)
    return measure_site0_branches(rotated)


def parity_distribution(
    state: QuditState, probe_label: int = 0, path: str = "auto"
) -> list[MeasurementRecord]:
    """Exact outcome distribution of the probe protocol, one record per outcome n.

    ``probe_label`` selects the initial probe ket |b^x>; a probe readout
    label ``m`` then signals parity outcome ``(m - b) mod d``.
    """
    _check_system(state)
    if not 0 <= probe_label < state.d:
        raise RegisterError(f"probe label {probe_label} outside [0, {state.d})")
    joint = adjoin_probe(AxisKet("x", probe_label), state)
    joint = entangle_probe(joint, path)
    records = []
    for label, p, branch in probe_readout(joint):
        outcome = (label - probe_label) % state.d
        records.append(conditioned_record(outcome, p, branch, state.shape, probe_outcome=label))
    records.sort(key=lambda r: r.outcome)
    total = sum(r.probability for r in records)
    if abs(total - 1) > 1e-9:
        raise ArithmeticError(f"outcome probabilities sum to {total!r}")
    return records


def sample_record(records: list[MeasurementRecord], rng) -> MeasurementRecord:
    k = sample_index([r.probability for r in records], as_rng(rng))
    record = records[k]
    if record.post_state is None:
        raise ArithmeticError("sampled an outcome with zero-norm projection")
    return record


def measure_parity(
    state: QuditState, probe_label: int = 0, rng=None, path: str = "auto"
) -> MeasurementRecord:
    """Run the protocol once and Born-sample the probe readout."""
    return sample_record(parity_distribution(state, probe_label, path), rng)


def destructive_parity_baseline(state: QuditState, rng=None) -> tuple[int, QuditState]:
    """Measure every qubit in z and report (-1)**(number of ones) with the collapsed basis state."""
    if state.d != 2:
        raise RegisterError("destructive counting baseline is qubit-only")
    index = sample_index(state.probabilities(), as_rng(rng))
    digits = decode(state.shape, index)
    return (-1) ** sum(digits), basis_state(state.shape, digits)


def baseline_ensemble(state: QuditState, parity: int, shots: Optional[int] = None, rng=None) -> np.ndarray:
    """Average of |collapsed><collapsed| over baseline runs that reported ``parity``.

    With ``shots=None`` the average is taken exactly over every collapse
    outcome weighted by its Born probability.
    """
    dim = state.shape.dim
    rho = np.zeros((dim, dim), dtype=complex)
    weight = 0.0
    if shots is None:
        probs = state.probabilities()
        for index in np.flatnonzero(probs):
            digits = decode(state.shape, int(index))
            if (-1) ** sum(digits) == parity:
                rho[index, index] += probs[index]
                weight += probs[index]
    else:
        rng = as_rng(rng)
        for _ in range(shots):
            got, collapsed = destructive_parity_baseline(state, rng)
            if got == parity:
                rho += np.outer(collapsed.amplitudes, collapsed.amplitudes.conj())
                weight += 1.0
    if weight == 0:
        raise ArithmeticError(f"baseline never reported parity {parity}")
    return rho / weight


@dataclass(frozen=True)
class CoherenceReport:
    outcome: int
    probability: float
    protocol_fidelity: float
    input_fidelity: float
    protocol_offdiag_max: float
    baseline_offdiag_max: float
    commutator_norm: Optional[float]
    baseline_agrees: bool


def _offdiag_across_counts(rho: np.ndarray, shape: RegisterShape) -> float:
    """Largest |rho[b, b']| with b, b' having different numbers of ones."""
    counts = np.array([sum(decode(shape, i)) for i in range(shape.dim)])
    mask = counts[:, None] != counts[None, :]
    return float(np.max(np.abs(rho[mask]), initial=0.0))


def coherence_report(state: QuditState, rng=None) -> CoherenceReport:
    """Contrast the probe protocol with per-qubit counting on the dominant parity sector."""
    if state.d != 2:
        raise RegisterError("coherence report is qubit-only")
    records = parity_distribution(state)
    dominant = max(records, key=lambda r: r.probability)
    exact = oracle.oracle_parity_distribution(state)[dominant.outcome]
    post = dominant.post_state
    protocol_rho = np.outer(post.amplitudes, post.amplitudes.conj())
    baseline_rho = baseline_ensemble(state, dominant.sign)
    commutator = None
    if state.n_sites <= 8:
        Nm = oracle.build_number_operator(state.n_sites)
        Pz = oracle.build_parity_operator(state.shape)
        commutator = float(np.linalg.norm(Nm @ Pz - Pz @ Nm))
    agrees = True
    if dominant.probability > 1 - 1e-10:
        parity, _ = destructive_parity_baseline(state, rng)
        agrees = parity == dominant.sign
    return CoherenceReport(
        outcome=dominant.outcome,
        probability=dominant.probability,
        protocol_fidelity=post.fidelity(exact.post_state),
        input_fidelity=post.fidelity(state),
        protocol_offdiag_max=_offdiag_across_counts(protocol_rho, state.shape),
        baseline_offdiag_max=_offdiag_across_counts(baseline_rho, state.shape),
        commutator_norm=commutator,
        baseline_agrees=agrees,
    )


def complete_graph_state(n: int) -> QuditState:
    """Product of |0^x> kets followed by the one-step all-pairs phase unitary."""
    shape = RegisterShape(2, n)
    plus = product_state(shape, [AxisKet("x", 0)] * n)
    return collective_phase_unitary(plus, range(n))


def stabilizer_expectations(state: QuditState) -> np.ndarray:
    """<K_i> for K_i = X_i prod_{j != i} Z_j, evaluated by applying site operators."""
    out = []
    for i in range(state.n_sites):
        phi = apply_single_site(state, i, PAULI_X)
        for j in range(state.n_sites):
            if j != i:
                phi = apply_single_site(phi, j, PAULI_Z)
        out.append(state.inner(phi).real)
    return np.array(out)


def cluster_generation_check(n: int) -> np.ndarray:
    if not 2 <= n <= 12:
        raise ValueError(f"cluster check needs 2 <= N <= 12, got {n}")
    return stabilizer_expectations(complete_graph_state(n))
