"""Projective measurement of a Pauli-group element with one probe qubit.

Sites are grouped by axis. Each x or y group is conjugated into the z frame by
a fixed single-site rotation, entangled with the probe by the collective phase
unitaries restricted to {probe} plus that group, then rotated back. The net
pre-readout operation is controlled-P on the probe, so a single probe x
readout at the end projects onto the +1 or -1 eigenspace of P.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .collective import HADAMARD, collective_phase_unitary
from .protocol import probe_readout, sample_record
from .records import MeasurementRecord, conditioned_record
from .register import AxisKet, QuditState, RegisterError, adjoin_probe, apply_sites

PAULI_AXES = ("x", "y", "z", "e")
STAGE_ORDER = ("x", "y", "z")

_PHASE_S = np.diag([1, 1j]).astype(complex)


class PauliElementError(ValueError):
    pass


@dataclass(frozen=True)
class PauliGroupElement:
    axes: tuple[str, ...]

    def __post_init__(self):
        axes = tuple(a.lower() for a in self.axes)
        for a in axes:
            if a not in PAULI_AXES:
                raise PauliElementError(f"unknown axis character {a!r}")
        if not axes:
            raise PauliElementError("empty Pauli element")
        if all(a == "e" for a in axes):
            raise PauliElementError("identity element cannot be measured")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def from_string(cls, text: str) -> "PauliGroupElement":
        """Parse one character per site from {X, Y, Z, E}, e.g. ``"XXEZY"``."""
        bad = [c for c in text if c.upper() not in "XYZE"]
        if bad:
            raise PauliElementError(f"unknown axis character {bad[0]!r} in {text!r}")
        return cls(tuple(text.lower()))

    def __str__(self) -> str:
        return "".join(self.axes).upper()

    @property
    def n_sites(self) -> int:
        return len(self.axes)

    def group(self, axis: str) -> tuple[int, ...]:
        """Register sites (probe at 0, system site i at i+1) carrying ``axis``."""
        return tuple(i + 1 for i, a in enumerate(self.axes) if a == axis)


def cyclic_transform(axis: str) -> np.ndarray:
    """R with R sigma_z R^dagger = sigma_axis."""
    if axis == "x":
        return HADAMARD.copy()
    if axis == "y":
        return _PHASE_S @ HADAMARD
    raise PauliElementError(f"no cyclic transform needed for axis {axis!r}")


def _stage(joint: QuditState, sites: Sequence[int], axis: str) -> QuditState:
    if axis != "z":
        R = cyclic_transform(axis)
        joint = apply_sites(joint, sites, R.conj().T)
    joint = collective_phase_unitary(joint, (0, *sites))
    if len(sites) > 1:
        joint = collective_phase_unitary(joint, sites)
    if axis != "z":
        joint = apply_sites(joint, sites, R)
    return joint


def _check(state: QuditState, element: PauliGroupElement) -> None:
    if state.d != 2:
        raise RegisterError("Pauli-group measurement is qubit-only")
    if state.shape.probe_present:
        raise RegisterError("state already carries a probe")
    if element.n_sites != state.n_sites:
        raise PauliElementError(
            f"element has {element.n_sites} sites but the state has {state.n_sites}"
        )


def staged_entangle(
    state: QuditState, element: PauliGroupElement, probe_label: int = 0,
    stage_order: Sequence[str] = STAGE_ORDER,
) -> QuditState:
    """Joint probe+system state just before the probe readout."""
    _check(state, element)
    if sorted(stage_order) != sorted(STAGE_ORDER):
        raise ValueError(f"stage order must permute {STAGE_ORDER}")
    joint = adjoin_probe(AxisKet("x", probe_label), state)
    for axis in stage_order:
        sites = element.group(axis)
        if sites:
            joint = _stage(joint, sites, axis)
    return joint


def pauli_distribution(
    state: QuditState, element: PauliGroupElement, probe_label: int = 0,
    stage_order: Sequence[str] = STAGE_ORDER,
) -> list[MeasurementRecord]:
    """Outcome 0 is eigenvalue +1 of the element, outcome 1 is -1."""
    joint = staged_entangle(state, element, probe_label, stage_order)
    records = []
    for label, p, branch in probe_readout(joint):
        outcome = label ^ probe_label
        records.append(conditioned_record(outcome, p, branch, state.shape, probe_outcome=label))
    records.sort(key=lambda r: r.outcome)
    total = sum(r.probability for r in records)
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise ArithmeticError(f"outcome probabilities sum to {total!r}")
    return records


def measure_pauli_element(
    state: QuditState, element: PauliGroupElement, rng=None, probe_label: int = 0,
    stage_order: Sequence[str] = STAGE_ORDER,
) -> MeasurementRecord:
    return sample_record(pauli_distribution(state, element, probe_label, stage_order), rng)
