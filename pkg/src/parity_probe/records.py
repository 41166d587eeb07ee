from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .register import CHAIN_NORM_TOL, QuditState, RegisterShape, roots_of_unity

# Outcomes rarer than this carry no post-measurement state.
CONDITIONING_THRESHOLD = 1e-12


@dataclass(frozen=True)
class MeasurementRecord:
    """One measurement outcome.

    ``outcome`` is the integer n of the eigenvalue q**n; for qubits n=0 is
    parity +1 and n=1 is parity -1. ``probe_outcome`` is the raw probe label
    when the record came from a probe readout.
    """

    outcome: int
    probability: float
    post_state: Optional[QuditState]
    d: int = 2
    probe_outcome: Optional[int] = None

    @property
    def eigenvalue(self) -> complex:
        return complex(roots_of_unity(self.d)[self.outcome])

    @property
    def sign(self) -> int:
        """+1/-1 eigenvalue for two-outcome measurements."""
        if self.d != 2:
            raise ValueError("sign is defined for two-outcome measurements only")
        return 1 - 2 * self.outcome

    def to_json(self, include_post: bool = True) -> dict:
        ev = self.eigenvalue
        post = None
        if include_post and self.post_state is not None:
            post = self.post_state.to_json()
        return {
            "outcome": self.outcome,
            "eigenvalue": [ev.real, ev.imag],
            "prob": self.probability,
            "post": post,
        }


def clamp_probability(p: float) -> float:
    if p < -1e-12 or p > 1 + 1e-12:
        raise ArithmeticError(f"probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def conditioned_record(
    outcome: int,
    probability: float,
    branch: np.ndarray,
    shape: RegisterShape,
    probe_outcome: Optional[int] = None,
) -> MeasurementRecord:
    """Record with ``branch`` normalized, or a null post-state below the threshold."""
    p = clamp_probability(probability)
    post = None
    if p > CONDITIONING_THRESHOLD:
        post = QuditState(shape, branch / np.sqrt(p))
        assert abs(post.norm() - 1) <= CHAIN_NORM_TOL
    return MeasurementRecord(outcome, p, post, d=shape.d, probe_outcome=probe_outcome)
