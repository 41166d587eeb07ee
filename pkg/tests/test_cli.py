import json
import math

import pytest

from parity_probe.cli import run
from parity_probe.register import RegisterShape, random_state


def _run(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out


def test_parity_exact_bell(tmp_path, capsys):
    path = tmp_path / "bell01.json"
    r = 1 / math.sqrt(2)
    path.write_text(json.dumps({"d": 2, "n": 2, "probe": False, "amps": [[0, 0], [r, 0], [r, 0], [0, 0]]}))
    code, out = _run(["parity", "--state", str(path), "--shots", "0"], capsys)
    assert code == 0
    report = json.loads(out.out)
    assert report["distribution"][1]["prob"] == pytest.approx(1.0, abs=1e-12)
    assert report["distribution"][1]["eigenvalue"] == [-1, 0]


def test_unknown_axis_character(capsys):
    code, out = _run(["pauli", "--element", "XYQ", "--state", "zero", "--n", "3"], capsys)
    assert code == 1
    assert "unknown axis character" in out.err


def test_malformed_and_unnormalized_inputs(tmp_path, capsys, caplog):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(["parity", "--state", str(bad)], capsys)[0] == 1
    far = tmp_path / "far.json"
    far.write_text(json.dumps({"d": 2, "n": 1, "amps": [[1.1, 0], [0, 0]]}))
    assert _run(["parity", "--state", str(far)], capsys)[0] == 1
    near = tmp_path / "near.json"
    near.write_text(json.dumps({"d": 2, "n": 1, "amps": [[1 + 5e-7, 0], [0, 0]]}))
    code, out = _run(["parity", "--state", str(near)], capsys)
    assert code == 0 and "renormalized" in caplog.text


def test_state_json_file_roundtrip(tmp_path, capsys):
    psi = random_state(RegisterShape(2, 3), 4)
    path = tmp_path / "psi.json"
    path.write_text(json.dumps(psi.to_json()))
    code, out = _run(["parity", "--state", str(path), "--emit-post-states"], capsys)
    assert code == 0
    report = json.loads(out.out)
    assert report["oracle_gap"] <= 1e-10
    assert report["distribution"][0]["post"]["n"] == 3


def test_determinism(tmp_path, capsys):
    argv = ["parity", "--state", "random:7", "--n", "4", "--shots", "1000", "--seed", "3"]
    _, first = _run(argv, capsys)
    _, second = _run(argv, capsys)
    assert first.out == second.out


def test_sampling_converges_to_exact(capsys):
    shots = 100_000
    code, out = _run(["parity", "--state", "random:2", "--n", "5", "--shots", str(shots), "--seed", "9"], capsys)
    report = json.loads(out.out)
    for p, f in zip(report["exact_prob"], report["frequencies"]):
        assert abs(f - p) <= 5 * math.sqrt(p * (1 - p) / shots)


def test_qudit_parity(capsys):
    code, out = _run(["qudit-parity", "--d", "3", "--state", "basis:12"], capsys)
    report = json.loads(out.out)
    assert code == 0 and report["distribution"][0]["prob"] == pytest.approx(1, abs=1e-12)


def test_pauli_bell_yy(capsys):
    state = json.dumps({"d": 2, "n": 2, "amps": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]]})
    code, out = _run(["pauli", "--element", "YY", "--state", state], capsys)
    report = json.loads(out.out)
    assert report["distribution"][1]["prob"] == pytest.approx(1, abs=1e-10)


def test_compile_verify_roundtrip(tmp_path, capsys):
    seq = tmp_path / "seq.json"
    assert run(["compile", "--n", "4", "--out", str(seq)]) == 0
    code, out = _run(["verify", "--sequence", str(seq)], capsys)
    assert code == 0 and json.loads(out.out)["ok"]


def test_verify_fails_on_corrupted_sequence(tmp_path, capsys):
    seq = tmp_path / "seq.json"
    run(["compile", "--n", "3", "--out", str(seq)])
    obj = json.loads(seq.read_text())
    obj["pulses"][1]["params"]["chi"] += 0.01
    seq.write_text(json.dumps(obj))
    code, out = _run(["verify", "--sequence", str(seq)], capsys)
    assert code == 2 and not json.loads(out.out)["ok"]


def test_schedule_verify(tmp_path, capsys):
    sch = tmp_path / "sch.json"
    assert run(["schedule", "--n", "3", "--out", str(sch)]) == 0
    code, out = _run(["verify", "--sequence", str(sch), "--seed", "4"], capsys)
    assert code == 0 and json.loads(out.out)["gap"] <= 1e-9


def test_negative_shots(capsys):
    assert _run(["parity", "--state", "zero", "--n", "2", "--shots", "-1"], capsys)[0] == 1


def test_size_cap_env(monkeypatch, capsys):
    monkeypatch.setenv("PARITY_PROBE_MAX_QUBITS", "3")
    assert _run(["parity", "--state", "zero", "--n", "4"], capsys)[0] == 1
