"""Simulation and verification of ancilla-assisted parity measurement."""
from .collective import (
    DiagonalUnitary,
    collective_phase_unitary,
    collective_phase_weights,
    collective_rotation,
    pairwise_phase_gate,
    phase_gate_network,
)
from .pauli import PauliGroupElement, cyclic_transform, measure_pauli_element, pauli_distribution
from .protocol import (
    cluster_generation_check,
    coherence_report,
    destructive_parity_baseline,
    measure_parity,
    parity_distribution,
)
from .records import MeasurementRecord
from .register import (
    AxisKet,
    QuditState,
    RegisterShape,
    apply_single_site,
    basis_state,
    product_state,
    random_state,
    reduced_density,
)

__version__ = "0.1.0"

__all__ = [
    "AxisKet",
    "DiagonalUnitary",
    "MeasurementRecord",
    "PauliGroupElement",
    "QuditState",
    "RegisterShape",
    "apply_single_site",
    "basis_state",
    "cluster_generation_check",
    "coherence_report",
    "collective_phase_unitary",
    "collective_phase_weights",
    "collective_rotation",
    "cyclic_transform",
    "destructive_parity_baseline",
    "measure_parity",
    "measure_pauli_element",
    "pairwise_phase_gate",
    "parity_distribution",
    "pauli_distribution",
    "phase_gate_network",
    "product_state",
    "random_state",
    "reduced_density",
]
