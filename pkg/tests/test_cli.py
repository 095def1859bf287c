import json
import math

import pytest

from stabent.cli import main
from stabent.protocol import injection_program, program_to_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_entropy_named_states(capsys):
    code, out, _ = run(capsys, "entropy", "--state", "T", "--alpha", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["entropy_bits"] == pytest.approx(math.log2(4 / 3), abs=1e-12)
    code, out, _ = run(capsys, "entropy", "--state", "ccz", "--alpha", "2,3")
    lines = [json.loads(x) for x in out.splitlines()]
    assert [r["purity"] for r in lines] == pytest.approx([11 / 32, 23 / 128], abs=1e-12)
    code, out, _ = run(capsys, "entropy", "--state", "zeros:4", "--alpha", "2")
    assert json.loads(out)["entropy_bits"] == 0.0


def test_entropy_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "entropy", "--state-file", str(bad))[0] == 2
    unnorm = tmp_path / "u.json"
    unnorm.write_text(json.dumps({"n": 1, "amplitudes": [[1, 0], [1, 0]]}))
    code, _, err = run(capsys, "entropy", "--state-file", str(unnorm))
    assert code == 2 and "normalised" in err
    code, _, err = run(capsys, "entropy", "--state", "haar:6:0", "--max-qubits", "5")
    assert code == 2 and "4^6" in err
    assert run(capsys, "entropy")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["entropy", "--bogus"])
    assert exc.value.code == 2


def test_spectrum(capsys):
    code, out, _ = run(capsys, "spectrum", "--state", "ccz", "--entries")
    rep = json.loads(out)
    assert rep["support"] == 29 and len(rep["entries"]) == 29
    assert dict(rep["entries"])["III"] == pytest.approx(1 / 8)


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_protocol_injection(capsys, tmp_path):
    run(capsys, "state", "gen", "T", "--out", str(tmp_path / "t.json"))
    t = json.loads((tmp_path / "t.json").read_text())["amplitudes"]
    plus = [[2**-0.5, 0.0], [2**-0.5, 0.0]]
    amps = []
    for a in t:
        for b in plus:
            z = complex(*a) * complex(*b)
            amps.append([z.real, z.imag])
    state = _write(tmp_path, "tp.json", {"n": 2, "amplitudes": amps})
    prog = _write(tmp_path, "inj.json", program_to_json(injection_program()))
    code, out, _ = run(capsys, "protocol", "--state-file", state, "--program", prog, "--report", "monotones")
    rep = json.loads(out)
    assert code == 0 and len(rep["collection"]) == 1
    assert rep["collection"][0]["monotones"]["2.0"] == pytest.approx(math.log2(4 / 3), abs=1e-12)


def test_protocol_measure_all_and_empty(capsys, tmp_path):
    prog = _write(tmp_path, "m.json", [{"op": "measure", "qubit": 0, "keep": True}, {"op": "measure", "qubit": 1, "keep": True}])
    code, out, _ = run(capsys, "protocol", "--state", "haar:2:1", "--program", prog, "--report", "monotones")
    rep = json.loads(out)
    assert code == 0 and len(rep["collection"]) == 4
    assert all(abs(e["monotones"]["2.0"]) < 1e-12 for e in rep["collection"])
    code, out, _ = run(capsys, "protocol", "--state", "T")
    rep = json.loads(out)
    assert len(rep["collection"]) == 1 and rep["collection"][0]["weight"] == 1.0


def test_protocol_ill_typed(capsys, tmp_path):
    prog = _write(tmp_path, "bad.json", [{"op": "clifford", "gates": [["H", 0]]}, {"op": "trace_out", "qubit": 3}])
    code, _, err = run(capsys, "protocol", "--state", "ccz", "--program", prog)
    assert code == 2 and "step 1" in err


def test_roof_pure_equals_plain(capsys):
    code, out, _ = run(capsys, "roof", "--state", "ccz", "--alpha", "2")
    rep = json.loads(out)
    assert code == 0 and rep["value"] == pytest.approx(math.log2(32 / 11), abs=1e-10)


def test_roof_density_file(capsys, tmp_path):
    mixed = _write(tmp_path, "mm.json", {"n": 1, "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]})
    code, out, _ = run(capsys, "roof", "--state-file", mixed, "--restarts", "4", "--quantity", "purity")
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(1.0, abs=1e-9)
    assert run(capsys, "roof", "--state", "T", "--alpha", "1")[0] == 2


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--alpha", "2")
    rows = json.loads(out)
    assert code == 0
    assert [r["rounded_up"] for r in rows if "rounded_up" in r] == [0.9, 0.5, 0.8, 0.5]
    code, out, _ = run(capsys, "bounds", "--format", "text")
    assert "197/512" in out
    code, out, _ = run(capsys, "bounds", "--source", "C^3Z", "--target", "CCZ")
    assert json.loads(out)[0]["prob_bound"] == 0.9375
    assert run(capsys, "bounds", "--source", "ccz", "--target", "cz")[0] == 2


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "lemma2,theorem2", "--trials", "10", "--seed", "1")
    assert code == 0 and json.loads(out)["passed"]
    assert run(capsys, "verify", "--suite", "nope")[0] == 2


def test_verify_reports_failure(capsys, monkeypatch):
    from stabent import cli
    from stabent.verify import TrialReport

    def failing(names, trials=None, seed=0, alphas=(2, 3)):
        rep = TrialReport("fake")
        rep.record(-1.0, 0, "forced", {})
        return [rep]

    monkeypatch.setattr(cli, "run_suites", failing)
    assert run(capsys, "verify", "--suite", "lemma2")[0] == 1


def test_output_is_byte_identical(capsys):
    a = run(capsys, "verify", "--suite", "theorem1", "--trials", "5", "--seed", "3")[1]
    b = run(capsys, "verify", "--suite", "theorem1", "--trials", "5", "--seed", "3")[1]
    assert a == b
    a = run(capsys, "bounds")[1]
    assert a == run(capsys, "bounds")[1]


def test_threads_flag(capsys):
    assert run(capsys, "entropy", "--state", "T", "--threads", "1")[0] == 0
