"""Lowering the protocol onto a two-zone trapped-ion primitive set.

Available pulses act on every ion in the interaction zone (zone 2):
``GlobalJx2`` is exp(i chi J_x^2) and ``GlobalRot`` is exp(i(alpha J_x + beta J_y)).
J_z-generated factors are obtained by sandwiching between quarter turns about y,

    exp(i pi/2 J_y) exp(i chi J_x^2) exp(-i pi/2 J_y) = exp(i chi J_z^2),
    exp(i pi/2 J_y) exp(i a J_x)     exp(-i pi/2 J_y) = exp(i a J_z).

The collective phase unitary on n ions factorizes as
global_phase * exp(-i pi J_z^2 / 2) * exp(i pi (n - 1) J_z / 2), with the
global phase kept in sequence metadata instead of being realized by a pulse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import oracle
from .collective import (
    collective_phase_operator,
    collective_twist,
    collective_xy_rotation,
    exp_minus_i_pi,
)
from .protocol import probe_readout
from .records import MeasurementRecord, conditioned_record
from .register import AxisKet, QuditState, RegisterShape, adjoin_probe

GATE_KINDS = ("GlobalJx2", "GlobalRot")
KINDS = GATE_KINDS + ("MoveProbe", "ProbePrep", "ProbeMeasure")
VERIFY_MAX_SITES = 8
STORAGE_ZONE, INTERACTION_ZONE = 1, 2


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Pulse:
    kind: str
    params: dict = field(default_factory=dict)
    step: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown pulse kind {self.kind!r}")

    @property
    def is_gate(self) -> bool:
        return self.kind in GATE_KINDS

    def to_json(self) -> dict:
        out = {"kind": self.kind, "params": dict(self.params)}
        if self.step is not None:
            out["step"] = self.step
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Pulse":
        params = dict(obj.get("params", {}))
        for key in ("chi", "alpha", "beta"):
            if key in params:
                params[key] = float(params[key])
        for key in ("zone", "label"):
            if key in params:
                params[key] = int(params[key])
        return cls(obj["kind"], params, obj.get("step"))


def global_jx2(chi: float, step=None) -> Pulse:
    return Pulse("GlobalJx2", {"chi": float(chi)}, step)


def global_rot(alpha: float, beta: float, step=None) -> Pulse:
    return Pulse("GlobalRot", {"alpha": float(alpha), "beta": float(beta)}, step)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple[Pulse, ...]
    global_phase: complex = 1.0 + 0j
    init_zones: dict = field(default_factory=lambda: {"probe": STORAGE_ZONE, "system": INTERACTION_ZONE})
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pulses)

    def to_json(self) -> dict:
        return {
            "init_zones": dict(self.init_zones),
            "pulses": [p.to_json() for p in self.pulses],
            "global_phase": [self.global_phase.real, self.global_phase.imag],
            "meta": dict(self.meta),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PulseSequence":
        try:
            re, im = obj.get("global_phase", [1.0, 0.0])
            return cls(
                pulses=tuple(Pulse.from_json(p) for p in obj["pulses"]),
                global_phase=complex(float(re), float(im)),
                init_zones={k: int(v) for k, v in obj.get("init_zones", {"probe": 1, "system": 2}).items()},
                meta=dict(obj.get("meta", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ScheduleError):
                raise
            raise ScheduleError(f"malformed pulse sequence: {exc}") from exc


def _sandwich_y(inner: Pulse) -> list[Pulse]:
    """Time-ordered pulses for exp(i pi/2 J_y) . inner . exp(-i pi/2 J_y)."""
    return [global_rot(0.0, -math.pi / 2, inner.step), inner, global_rot(0.0, math.pi / 2, inner.step)]


def _collective_global_phase(n: int) -> complex:
    return complex(exp_minus_i_pi(Fraction((n - 1) ** 2 - 1, 8)))


def lower_collective_phase(
    n_support: int, optimize: bool = True, no_verify: bool = False, step: Optional[str] = None
) -> PulseSequence:
    """Pulse sequence realizing the one-step all-pairs phase unitary on ``n_support`` ions."""
    if n_support < 1:
        raise ScheduleError(f"support size must be >= 1, got {n_support}")
    if n_support > VERIFY_MAX_SITES and not no_verify:
        raise ScheduleError(
            f"n_support={n_support} exceeds the verification bound {VERIFY_MAX_SITES}; pass no_verify"
        )
    pulses = _sandwich_y(global_jx2(-math.pi / 2, step))
    pulses += _sandwich_y(global_rot(math.pi * (n_support - 1) / 2, 0.0, step))
    seq = PulseSequence(
        tuple(pulses),
        global_phase=_collective_global_phase(n_support),
        meta={"n_support": n_support},
    )
    return peephole(seq) if optimize else seq


def _pure_axis(p: Pulse) -> Optional[str]:
    if p.kind != "GlobalRot":
        return None
    if p.params["alpha"] == 0.0:
        return "y"
    if p.params["beta"] == 0.0:
        return "x"
    return None


def _is_trivial(p: Pulse) -> bool:
    if p.kind == "GlobalRot":
        return p.params["alpha"] == 0.0 and p.params["beta"] == 0.0
    if p.kind == "GlobalJx2":
        return p.params["chi"] == 0.0
    return False


def peephole(seq: PulseSequence) -> PulseSequence:
    """Merge adjacent same-axis rotations and drop zero-angle pulses."""
    out: list[Pulse] = []
    for p in seq.pulses:
        if _is_trivial(p):
            continue
        axis = _pure_axis(p)
        if out and axis is not None and _pure_axis(out[-1]) == axis:
            prev = out.pop()
            merged = global_rot(
                prev.params["alpha"] + p.params["alpha"],
                prev.params["beta"] + p.params["beta"],
                prev.step,
            )
            if not _is_trivial(merged):
                out.append(merged)
            continue
        out.append(p)
    return replace(seq, pulses=tuple(out))


def schedule_protocol(n_system: int) -> PulseSequence:
    """Four-step schedule; the probe visits the interaction zone only for step (ii)."""
    if n_system < 1:
        raise ScheduleError(f"need at least one system ion, got {n_system}")
    both = lower_collective_phase(n_system + 1, no_verify=True, step="ii")
    system = lower_collective_phase(n_system, no_verify=True, step="iii")
    pulses = [
        Pulse("ProbePrep", {"axis": "x", "label": 0}, "i"),
        Pulse("MoveProbe", {"zone": INTERACTION_ZONE}, "ii"),
        *both.pulses,
        Pulse("MoveProbe", {"zone": STORAGE_ZONE}, "ii"),
        *system.pulses,
        Pulse("ProbeMeasure", {"axis": "x"}, "iv"),
    ]
    seq = PulseSequence(
        tuple(pulses),
        global_phase=both.global_phase * system.global_phase,
        meta={"n_system": n_system},
    )
    check_zone_consistency(seq)
    return seq


def check_zone_consistency(seq: PulseSequence) -> None:
    """Structural check of probe shuttling against the step labels.

    Gate pulses of step (ii) must see the probe in the interaction zone and
    every other gate pulse must see it in storage; preparation and readout
    happen in storage.
    """
    zone = seq.init_zones.get("probe", STORAGE_ZONE)
    if seq.init_zones.get("system", INTERACTION_ZONE) != INTERACTION_ZONE:
        raise ScheduleError("system ions must start in the interaction zone")
    for k, p in enumerate(seq.pulses):
        if p.kind == "MoveProbe":
            target = p.params["zone"]
            if target not in (STORAGE_ZONE, INTERACTION_ZONE):
                raise ScheduleError(f"pulse {k}: unknown zone {target}")
            if target == zone:
                raise ScheduleError(f"pulse {k}: probe already in zone {zone}")
            zone = target
        elif p.kind in ("ProbePrep", "ProbeMeasure"):
            if zone != STORAGE_ZONE:
                raise ScheduleError(f"pulse {k}: {p.kind} requires the probe in zone 1")
        else:
            wanted = INTERACTION_ZONE if p.step == "ii" else STORAGE_ZONE
            if zone != wanted:
                raise ScheduleError(f"pulse {k}: step {p.step} gate with probe in zone {zone}")
    if zone != STORAGE_ZONE:
        raise ScheduleError("probe does not return to zone 1")


def _apply_gate(joint: QuditState, p: Pulse, occupants) -> QuditState:
    if p.kind == "GlobalJx2":
        return collective_twist(joint, occupants, "x", p.params["chi"])
    return collective_xy_rotation(joint, occupants, p.params["alpha"], p.params["beta"])


def simulate_schedule(seq: PulseSequence, state: QuditState) -> list[MeasurementRecord]:
    """Exact outcome distribution of a scheduled protocol run on a system-only state."""
    check_zone_consistency(seq)
    n = state.n_sites
    zone = seq.init_zones.get("probe", STORAGE_ZONE)
    joint = None
    prep_label = 0
    records = None
    for p in seq.pulses:
        if p.kind == "ProbePrep":
            prep_label = p.params.get("label", 0)
            joint = adjoin_probe(AxisKet(p.params.get("axis", "x"), prep_label), state)
        elif p.kind == "MoveProbe":
            zone = p.params["zone"]
        elif p.kind == "ProbeMeasure":
            if joint is None or p.params.get("axis", "x") != "x":
                raise ScheduleError("readout needs a prepared probe and an x-basis measurement")
            joint = joint.with_amplitudes(joint.amplitudes * seq.global_phase)
            records = []
            for label, prob, branch in probe_readout(joint):
                outcome = label ^ prep_label
                records.append(conditioned_record(outcome, prob, branch, state.shape, probe_outcome=label))
        else:
            if joint is None:
                raise ScheduleError("gate pulse before probe preparation")
            occupants = range(0 if zone == INTERACTION_ZONE else 1, n + 1)
            joint = _apply_gate(joint, p, occupants)
    if records is None:
        raise ScheduleError("schedule has no probe readout")
    return sorted(records, key=lambda r: r.outcome)


def pulse_matrix(p: Pulse, n_sites: int, spins=None) -> np.ndarray:
    """Dense unitary of a gate pulse acting on ``n_sites`` ions, via matrix exponentials."""
    Jx, Jy, _ = spins if spins is not None else oracle.spin_operators(n_sites)
    if p.kind == "GlobalJx2":
        return oracle.collective_exp(Jx @ Jx, 1j * p.params["chi"])
    if p.kind == "GlobalRot":
        return oracle.collective_exp(p.params["alpha"] * Jx + p.params["beta"] * Jy, 1j)
    raise ScheduleError(f"{p.kind} has no unitary")


def compose_sequence(seq: PulseSequence, n_sites: int) -> tuple[np.ndarray, float]:
    """Product of the pulse unitaries (latest on the left) and the worst unitarity error."""
    spins = oracle.spin_operators(n_sites)
    dim = 2**n_sites
    M = np.eye(dim, dtype=complex)
    worst = 0.0
    for p in seq.pulses:
        if not p.is_gate:
            raise ScheduleError(f"cannot compose non-gate pulse {p.kind}; simulate the schedule instead")
        U = pulse_matrix(p, n_sites, spins)
        worst = max(worst, float(np.max(np.abs(U.conj().T @ U - np.eye(dim)))))
        M = U @ M
    return M, worst


@dataclass(frozen=True)
class VerificationReport:
    distance: float
    recorded_phase_distance: float
    unitarity_error: float
    n_pulses: int

    def ok(self, tol: float = 1e-9, unitary_tol: float = 1e-10) -> bool:
        return self.distance <= tol and self.unitarity_error <= unitary_tol


def phase_min_distance(A: np.ndarray, B: np.ndarray) -> float:
    """min over phi of ||A - exp(i phi) B||_F."""
    overlap = np.vdot(B, A)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(A - phase * B))


def verify_sequence(seq: PulseSequence, target: np.ndarray, n_sites: int) -> VerificationReport:
    if n_sites > VERIFY_MAX_SITES:
        raise ScheduleError(f"verification is bounded to {VERIFY_MAX_SITES} sites")
    target = np.asarray(target, dtype=complex)
    if target.shape != (2**n_sites, 2**n_sites):
        raise ScheduleError(f"target shape {target.shape} does not match {n_sites} sites")
    M, worst = compose_sequence(seq, n_sites)
    return VerificationReport(
        distance=phase_min_distance(M, target),
        recorded_phase_distance=float(np.linalg.norm(seq.global_phase * M - target)),
        unitarity_error=worst,
        n_pulses=len(seq),
    )


def collective_target(n_sites: int) -> np.ndarray:
    """Dense matrix of the weight-table collective phase unitary on all ``n_sites``."""
    shape = RegisterShape(2, n_sites)
    return np.diag(collective_phase_operator(shape, range(n_sites)).expand())
