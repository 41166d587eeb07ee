"""Command-line entry point: ``parity-probe <command> [options]``.

Exit codes: 0 success, 1 invalid input, 2 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import acceptance, ion, jsonio, oracle
from .pauli import PauliElementError, PauliGroupElement, pauli_distribution
from .protocol import parity_distribution
from .register import AxisKet, QuditState, RegisterError, RegisterShape, product_state, random_state

log = logging.getLogger("parity_probe")

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2
RENORMALIZE_TOL = 1e-6
DEFAULT_PROTOCOL_TOL = 1e-10
DEFAULT_COMPILER_TOL = 1e-9


class UsageError(Exception):
    pass


def inline_state(spec: str, d: int, n: Optional[int], seed: int) -> QuditState:
    """Build a state from ``zero``, ``plus``, ``ghz``, ``bell01``, ``random`` or ``basis:DIGITS``."""
    name, _, arg = spec.partition(":")
    if name == "basis":
        digits = [int(c) for c in arg]
        shape = RegisterShape(d, len(digits))
        return product_state(shape, [AxisKet("z", a) for a in digits])
    if name == "bell01":
        r = 1 / math.sqrt(2)
        return QuditState(RegisterShape(2, 2), [0, r, r, 0])
    if n is None:
        raise UsageError(f"inline state {spec!r} needs --n")
    shape = RegisterShape(d, n)
    if name == "zero":
        return product_state(shape, [AxisKet("z", 0)] * n)
    if name == "plus":
        return product_state(shape, [AxisKet("x", 0)] * n)
    if name == "ghz":
        amps = np.zeros(shape.dim, dtype=complex)
        step = sum(d**k for k in range(n))
        amps[[a * step for a in range(d)]] = 1 / math.sqrt(d)
        return QuditState(shape, amps)
    if name == "random":
        return random_state(shape, int(arg) if arg else seed)
    raise UsageError(f"unknown inline state {spec!r}")


def load_state(spec: Optional[str], d: int, n: Optional[int], seed: int) -> QuditState:
    if spec is None:
        raise UsageError("--state is required")
    if spec.lstrip().startswith("{"):
        obj = json.loads(spec)
    elif Path(spec).is_file():
        obj = json.loads(Path(spec).read_text())
    else:
        return inline_state(spec, d, n, seed)
    amps = np.array([complex(re, im) for re, im in obj.get("amps", [])])
    norm = float(np.linalg.norm(amps)) if amps.size else 0.0
    state = QuditState.from_json(obj, renormalize_tol=RENORMALIZE_TOL)
    if abs(norm - 1) > 1e-12:
        log.warning("input state norm %.17g renormalized to 1", norm)
    return state


def _distribution_report(records, args, d: int) -> dict:
    probs = [r.probability for r in records]
    report = {"d": d, "mode": "exact" if args.shots == 0 else "sampled"}
    if args.shots == 0:
        report["distribution"] = [r.to_json(include_post=args.emit_post_states) for r in records]
        return report
    rng = np.random.default_rng(args.seed)
    draws = rng.choice(len(records), size=args.shots, p=np.array(probs) / sum(probs))
    counts = np.bincount(draws, minlength=len(records))
    report.update(
        shots=args.shots,
        seed=args.seed,
        counts=[int(c) for c in counts],
        frequencies=[float(c) / args.shots for c in counts],
        exact_prob=probs,
    )
    if args.emit_post_states:
        report["records"] = [r.to_json() for r in records]
    return report


def _oracle_gap(records, exact) -> float:
    return acceptance.record_gap(records, exact)


def cmd_parity(args) -> tuple[dict, int]:
    d = getattr(args, "d", 2)
    state = load_state(args.state, d, args.n, args.seed)
    if args.command == "parity" and state.d != 2:
        raise UsageError("parity is qubit-only; use qudit-parity")
    records = parity_distribution(state, probe_label=args.probe_label)
    report = {"command": args.command, "n": state.n_sites, "probe_label": args.probe_label}
    report.update(_distribution_report(records, args, state.d))
    if state.shape.dim <= oracle.MAX_MATRIX_DIM:
        report["oracle_gap"] = _oracle_gap(records, oracle.oracle_parity_distribution(state))
    return report, EXIT_OK


def cmd_pauli(args) -> tuple[dict, int]:
    if args.element is None:
        raise UsageError("--element is required")
    element = PauliGroupElement.from_string(args.element)
    state = load_state(args.state, 2, args.n if args.n is not None else element.n_sites, args.seed)
    records = pauli_distribution(state, element, probe_label=args.probe_label)
    report = {"command": "pauli", "element": str(element), "n": state.n_sites}
    report.update(_distribution_report(records, args, 2))
    if state.shape.dim <= oracle.MAX_MATRIX_DIM:
        exact = oracle.projector_distribution(state, oracle.pauli_projectors(element.axes))
        report["oracle_gap"] = _oracle_gap(records, exact)
    return report, EXIT_OK


def _need_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    return args.n


def cmd_compile(args) -> tuple[dict, int]:
    seq = ion.lower_collective_phase(_need_n(args), optimize=not args.raw, no_verify=args.no_verify)
    return seq.to_json(), EXIT_OK


def cmd_schedule(args) -> tuple[dict, int]:
    return ion.schedule_protocol(_need_n(args)).to_json(), EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    tol = args.tol if args.tol is not None else DEFAULT_COMPILER_TOL
    if args.sequence:
        seq = ion.PulseSequence.from_json(json.loads(Path(args.sequence).read_text()))
    else:
        seq = ion.lower_collective_phase(_need_n(args))
    if all(p.is_gate for p in seq.pulses):
        n = args.n if args.n is not None else int(seq.meta.get("n_support", 0))
        if n < 1:
            raise UsageError("cannot infer the ion count; pass --n")
        rep = ion.verify_sequence(seq, ion.collective_target(n), n)
        report = {
            "command": "verify", "kind": "unitary", "n": n, "tol": tol,
            "distance": rep.distance,
            "recorded_phase_distance": rep.recorded_phase_distance,
            "unitarity_error": rep.unitarity_error,
            "pulses": rep.n_pulses,
            "ok": rep.ok(tol),
        }
    else:
        n = args.n if args.n is not None else int(seq.meta.get("n_system", 0))
        if n < 1:
            raise UsageError("cannot infer the system size; pass --n")
        state = load_state(args.state, 2, n, args.seed) if args.state else random_state(RegisterShape(2, n), args.seed)
        gap = acceptance.record_gap(ion.simulate_schedule(seq, state), parity_distribution(state))
        report = {"command": "verify", "kind": "schedule", "n": n, "tol": tol, "gap": gap, "ok": gap <= tol}
    return report, EXIT_OK if report["ok"] else EXIT_VERIFY


def cmd_selftest(args) -> tuple[dict, int]:
    results = acceptance.run_all(echo=lambda line: print(line, file=sys.stderr))
    report = {
        "command": "selftest",
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail} for r in results
        ],
        "passed": all(r.passed for r in results),
    }
    return report, EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {
    "parity": cmd_parity,
    "qudit-parity": cmd_parity,
    "pauli": cmd_pauli,
    "compile": cmd_compile,
    "schedule": cmd_schedule,
    "verify": cmd_verify,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parity-probe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, state=True):
        if state:
            p.add_argument("--state", help="state JSON file, JSON text, or inline spec (zero, plus, ghz, bell01, random[:seed], basis:DIGITS)")
            p.add_argument("--shots", type=int, default=0, help="0 = exact distribution")
            p.add_argument("--emit-post-states", action="store_true")
            p.add_argument("--probe-label", type=int, default=0, help="initial probe x-basis label")
        p.add_argument("--n", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float)
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    common(sub.add_parser("parity", help="qubit parity measurement"))
    qp = sub.add_parser("qudit-parity", help="qudit parity measurement")
    common(qp)
    qp.add_argument("--d", type=int, default=3)
    pp = sub.add_parser("pauli", help="Pauli-group element measurement")
    common(pp)
    pp.add_argument("--element", help="one of X, Y, Z, E per site, e.g. XXEZY")
    cp = sub.add_parser("compile", help="lower the collective phase unitary to ion pulses")
    common(cp, state=False)
    cp.add_argument("--raw", action="store_true", help="skip the peephole pass")
    cp.add_argument("--no-verify", action="store_true", help="allow sizes beyond the verification bound")
    common(sub.add_parser("schedule", help="emit the two-zone protocol schedule"), state=False)
    vp = sub.add_parser("verify", help="verify a pulse sequence or schedule")
    common(vp, state=False)
    vp.add_argument("--sequence", help="pulse sequence JSON to check")
    vp.add_argument("--state", help="input state for schedule verification")
    common(sub.add_parser("selftest", help="run the acceptance criteria"), state=False)
    return parser


def run(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "shots", 0) < 0:
        print("error: --shots must be >= 0", file=sys.stderr)
        return EXIT_INVALID
    try:
        report, code = COMMANDS[args.command](args)
    except (UsageError, RegisterError, PauliElementError, ion.ScheduleError, oracle.OracleError,
            json.JSONDecodeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = jsonio.dumps(report) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
