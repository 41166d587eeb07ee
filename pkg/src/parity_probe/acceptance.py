"""Exit criteria, shared by ``tests/test_acceptance.py`` and ``parity-probe selftest``.

Each check returns a :class:`CriterionResult`; tolerances and runtime limits
are fixed here and are not configurable.
"""
from __future__ import annotations

import math
import time
import tracemalloc
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import ion, oracle
from .collective import collective_phase_operator
from .pauli import PauliGroupElement, pauli_distribution
from .protocol import (
    baseline_ensemble,
    cluster_generation_check,
    coherence_report,
    measure_parity,
    parity_distribution,
)
from .records import MeasurementRecord
from .register import QuditState, RegisterShape, encode, random_state


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _seeds(master: int):
    rng = np.random.default_rng(master)
    while True:
        yield int(rng.integers(2**63))


def record_gap(a: list[MeasurementRecord], b: list[MeasurementRecord]) -> float:
    """Largest probability or post-state amplitude difference between two distributions.

    A missing post-state on one side only counts as an infinite gap.
    """
    if [r.outcome for r in a] != [r.outcome for r in b]:
        return math.inf
    worst = 0.0
    for x, y in zip(a, b):
        worst = max(worst, abs(x.probability - y.probability))
        if (x.post_state is None) != (y.post_state is None):
            return math.inf
        if x.post_state is not None:
            diff = np.max(np.abs(x.post_state.amplitudes - y.post_state.amplitudes))
            worst = max(worst, float(diff))
    return worst


def criterion_1() -> tuple[bool, str]:
    worst = 0.0
    t0 = time.perf_counter()
    for n in range(1, 13):
        shape = RegisterShape(2, n)
        table = collective_phase_operator(shape, range(n)).expand()
        brute = oracle.network_phases_bruteforce(shape, oracle.complete_pairs(range(n)))
        worst = max(worst, float(np.max(np.abs(table - brute))))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-12 and elapsed < 10, f"max |weight - network| = {worst:.2e} over n=1..12, {elapsed:.1f}s < 10s"


def criterion_2() -> tuple[bool, str]:
    seeds = _seeds(2)
    worst = 0.0
    t0 = time.perf_counter()
    for n in range(1, 9):
        shape = RegisterShape(2, n)
        projectors = oracle.parity_projectors(shape)
        for _ in range(200):
            psi = random_state(shape, next(seeds))
            worst = max(worst, record_gap(parity_distribution(psi), oracle.projector_distribution(psi, projectors)))
    elapsed = time.perf_counter() - t0
    return worst <= 1e-10 and elapsed < 60, f"max gap {worst:.2e} over 1600 states N=1..8, {elapsed:.1f}s < 60s"


def criterion_3() -> tuple[bool, str]:
    seeds = _seeds(3)
    worst = 0.0
    labels_ok = True
    for n in range(1, 7):
        shape = RegisterShape(2, n)
        for _ in range(50):
            psi = random_state(shape, next(seeds))
            plus = parity_distribution(psi, probe_label=0)
            minus = parity_distribution(psi, probe_label=1)
            worst = max(worst, record_gap(plus, minus))
            labels_ok &= all(a.probe_outcome == 1 - b.probe_outcome for a, b in zip(plus, minus))
    return worst <= 1e-10 and labels_ok, f"max gap {worst:.2e}, probe labels flipped: {labels_ok}"


def criterion_4() -> tuple[bool, str]:
    rng = np.random.default_rng(4)
    shape = RegisterShape(2, 2)
    i00, i11 = encode(shape, [0, 0]), encode(shape, [1, 1])
    worst_fid = 0.0
    worst_off = 0.0
    for _ in range(20):
        ab = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        ab /= np.linalg.norm(ab)
        amps = np.zeros(4, dtype=complex)
        amps[i00], amps[i11] = ab
        psi = QuditState(shape, amps)
        rep = coherence_report(psi, rng)
        worst_fid = max(worst_fid, abs(1 - rep.protocol_fidelity), abs(1 - rep.input_fidelity))
        sampled = baseline_ensemble(psi, +1, shots=200, rng=rng)
        worst_off = max(worst_off, rep.baseline_offdiag_max, abs(sampled[i00, i11]))
    comm = max(
        float(np.linalg.norm(
            oracle.build_number_operator(n) @ oracle.build_parity_operator(RegisterShape(2, n))
            - oracle.build_parity_operator(RegisterShape(2, n)) @ oracle.build_number_operator(n)
        ))
        for n in range(1, 9)
    )
    ok = worst_fid <= 1e-10 and worst_off <= 1e-10 and comm == 0.0
    return ok, f"|1-F| max {worst_fid:.2e}, baseline |<00|rho|11>| max {worst_off:.2e}, ||[N-,Pz]|| = {comm}"


def criterion_5() -> tuple[bool, str]:
    seeds = _seeds(5)
    worst = 0.0
    for n in range(1, 7):
        shape = RegisterShape(2, n)
        for _ in range(200):
            psi = random_state(shape, next(seeds))
            worst = max(worst, record_gap(parity_distribution(psi), oracle.cnot_distribution(psi)))
    return worst <= 1e-10, f"max gap {worst:.2e} over 1200 states N=1..6"


def _bell_spot_checks() -> bool:
    r = 1 / math.sqrt(2)
    bell = QuditState(RegisterShape(2, 2), [r, 0, 0, r])
    expected = {"XX": 0, "YY": 1, "ZZ": 0}
    for text, outcome in expected.items():
        dist = pauli_distribution(bell, PauliGroupElement.from_string(text))
        if abs(dist[outcome].probability - 1) > 1e-10:
            return False
    return True


def criterion_6() -> tuple[bool, str]:
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        axes = rng.choice(list("xyze"), size=n)
        if all(a == "e" for a in axes):
            axes[int(rng.integers(n))] = "xyz"[int(rng.integers(3))]
        element = PauliGroupElement(tuple(axes))
        psi = random_state(RegisterShape(2, n), int(rng.integers(2**63)))
        exact = oracle.projector_distribution(psi, oracle.pauli_projectors(element.axes))
        worst = max(worst, record_gap(pauli_distribution(psi, element), exact))
    bell_ok = _bell_spot_checks()
    return worst <= 1e-10 and bell_ok, f"max gap {worst:.2e} over 200 (state, P) pairs; Bell XX/YY/ZZ ok: {bell_ok}"


def criterion_7() -> tuple[bool, str]:
    seeds = _seeds(7)
    worst = 0.0
    worst_d2 = 0.0
    for d in (2, 3, 4):
        for n in range(1, 5):
            shape = RegisterShape(d, n)
            projectors = oracle.parity_projectors(shape)
            for _ in range(100):
                psi = random_state(shape, next(seeds))
                got = parity_distribution(psi, path="network")
                worst = max(worst, record_gap(got, oracle.projector_distribution(psi, projectors)))
                if d == 2:
                    worst_d2 = max(worst_d2, record_gap(got, parity_distribution(psi, path="collective")))
    ok = worst <= 1e-10 and worst_d2 <= 1e-12
    return ok, f"max gap vs eigenprojectors {worst:.2e}; d=2 network vs collective {worst_d2:.2e}"


def criterion_8() -> tuple[bool, str]:
    t0 = time.perf_counter()
    worst_dist = 0.0
    worst_unit = 0.0
    for n in range(2, 9):
        rep = ion.verify_sequence(ion.lower_collective_phase(n), ion.collective_target(n), n)
        worst_dist = max(worst_dist, rep.distance)
        worst_unit = max(worst_unit, rep.unitarity_error)
    worst_sandwich = 0.0
    for n in range(1, 9):
        Jx, Jy, Jz = oracle.spin_operators(n)
        Yp = oracle.collective_exp(Jy, 1j * math.pi / 2)
        Ym = oracle.collective_exp(Jy, -1j * math.pi / 2)
        for chi in (math.pi / 2, math.pi / 4, 1.0):
            lhs = Yp @ oracle.collective_exp(Jx @ Jx, 1j * chi) @ Ym
            worst_sandwich = max(worst_sandwich, float(np.max(np.abs(lhs - oracle.collective_exp(Jz @ Jz, 1j * chi)))))
            lhs = Yp @ oracle.collective_exp(Jx, 1j * chi) @ Ym
            worst_sandwich = max(worst_sandwich, float(np.max(np.abs(lhs - oracle.collective_exp(Jz, 1j * chi)))))
    seq = ion.schedule_protocol(2)
    shape = RegisterShape(2, 2)
    r = 1 / math.sqrt(2)
    inputs = [QuditState(shape, [0, r, r, 0])] + [random_state(shape, s) for s in range(20)]
    worst_e2e = max(record_gap(ion.simulate_schedule(seq, psi), parity_distribution(psi)) for psi in inputs)
    elapsed = time.perf_counter() - t0
    ok = (
        worst_dist <= 1e-9 and worst_unit <= 1e-10 and worst_sandwich <= 1e-10
        and worst_e2e <= 1e-9 and elapsed < 30
    )
    return ok, (
        f"lowering distance {worst_dist:.2e}, sandwich {worst_sandwich:.2e}, "
        f"end-to-end N=2 gap {worst_e2e:.2e}, {elapsed:.1f}s < 30s"
    )


def criterion_9() -> tuple[bool, str]:
    worst = max(float(np.max(np.abs(cluster_generation_check(n) - 1))) for n in range(2, 11))
    return worst <= 1e-10, f"max |<K_i> - 1| = {worst:.2e} over N=2..10"


def criterion_10() -> tuple[bool, str]:
    shape = RegisterShape(2, 20)
    psi = random_state(shape, 10)
    tracemalloc.start()
    t0 = time.perf_counter()
    try:
        dist = parity_distribution(psi)
        record = measure_parity(psi, rng=10)
        elapsed = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    total = sum(r.probability for r in dist)
    ok = abs(total - 1) <= 1e-9 and elapsed < 30 and peak < 2**30 and record.post_state is not None
    return ok, f"N=20: sum p = {total:.15f}, {elapsed:.1f}s < 30s, peak {peak / 2**20:.0f} MiB < 1024 MiB"


CRITERIA: dict[int, tuple[str, Callable[[], tuple[bool, str]]]] = {
    1: ("collective weights == pairwise network", criterion_1),
    2: ("protocol == parity projectors", criterion_2),
    3: ("probe initialization duality", criterion_3),
    4: ("coherence vs destructive counting", criterion_4),
    5: ("sequential C-NOT cross-route", criterion_5),
    6: ("Pauli-group element measurement", criterion_6),
    7: ("qudit parity", criterion_7),
    8: ("ion compiler", criterion_8),
    9: ("complete-graph stabilizers", criterion_9),
    10: ("N=20 scale smoke test", criterion_10),
}


def run_criterion(number: int) -> CriterionResult:
    name, check = CRITERIA[number]
    t0 = time.perf_counter()
    try:
        passed, detail = check()
    except Exception as exc:  # a crash is a failed criterion, not a crashed suite
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)


def run_all(numbers: Optional[list[int]] = None, echo: Callable[[str], None] = print) -> list[CriterionResult]:
    results = []
    for number in numbers or sorted(CRITERIA):
        result = run_criterion(number)
        echo(result.line())
        results.append(result)
    return results
