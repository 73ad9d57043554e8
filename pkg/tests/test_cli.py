import json

import pytest

from braidkit.cli import VerificationReport, emit_report, main, run_verify_suite
from braidkit.operators import SuiteEntry


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes_on_euclidean(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = _run(capsys, "verify", "q_euclidean_4", "--max-degree", "2", "--report", str(path))
    assert code == 0
    obj = json.loads(path.read_text())
    assert obj["passed"] and obj["config"] == {"lambda_nu": True, "max_degree": 2}
    assert all(e["status"] == "pass" and e["residual"] == "0" for e in obj["entries"])
    assert "timings" not in obj


def test_verify_is_byte_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    _run(capsys, "verify", "quantum_plane:3", "--max-degree", "2", "--report", str(a))
    _run(capsys, "verify", "quantum_plane:3", "--max-degree", "2", "--report", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_verify_suite_order(capsys):
    rep = run_verify_suite("q_minkowski_4", 2)
    ids = [e.identity for e in rep.entries]
    firsts = [ids.index(x) for x in ("qybe", "braiding well defined", "leib", "intertwiner", "cross l+ p", "twisting",
                                      "theta_v star = star_unitary lambda_nu^m", "adjointness of d and -dbar",
                                      "conj Z(c,b) = lambda_nu ratio Z(b,c)")]
    assert firsts == sorted(firsts)


def test_verify_reports_structural_failures_on_plane(capsys):
    code, out, _ = _run(capsys, "verify", "quantum_plane:2", "--max-degree", "1", "--format", "text")
    assert code == 1
    assert "FAIL" in out and "SKIP  adjointness" in out


def test_plane3_skips_metric_suites():
    rep = run_verify_suite("quantum_plane:3", 2)
    assert rep.passed
    assert [s for s, _ in rep.skipped] == ["theta-star", "adjointness", "conj-symmetry"]


def test_env_cutoff(monkeypatch, capsys):
    monkeypatch.setenv("BRAIDKIT_MAX_DEGREE", "1")
    code, out, _ = _run(capsys, "verify", "quantum_plane:3")
    assert code == 0
    assert json.loads(out)["config"]["max_degree"] == 1


def test_bad_env_cutoff(monkeypatch, capsys):
    monkeypatch.setenv("BRAIDKIT_MAX_DEGREE", "four")
    with pytest.raises(SystemExit):
        main(["verify", "quantum_plane:3"])


def test_no_lambda_nu_flag(capsys):
    code, out, _ = _run(capsys, "verify", "q_euclidean_4", "--max-degree", "1", "--no-lambda-nu")
    obj = json.loads(out)
    assert obj["config"]["lambda_nu"] is False
    # the derivative adjointness needs the weight
    assert code == 1


def test_usage_and_model_errors(capsys):
    assert _run(capsys, "verify", "nope")[0] == 2
    assert _run(capsys, "frobnicate")[0] == 2
    assert _run(capsys, "ztable", "quantum_plane:3", "--degree", "2")[0] == 2
    assert _run(capsys, "opmatrix", "q_euclidean_4", "--op", "partial")[0] == 2
    assert _run(capsys, "specialize", "quantum_plane:2", "--q", "0")[0] == 2


def test_ztable(capsys):
    code, out, _ = _run(capsys, "ztable", "q_euclidean_4", "--degree", "2")
    obj = json.loads(out)
    assert code == 0 and obj["moments"]["0,3"] != "0" and obj["moments"]["1"] == "0"


@pytest.mark.parametrize("op", ["partial", "partialbar", "lplus", "lminus", "dilaton", "antipode", "theta-v",
                                "theta-u"])
def test_opmatrix(capsys, op):
    code, out, _ = _run(capsys, "opmatrix", "q_minkowski_4", "--op", op, "--degree", "1")
    obj = json.loads(out)
    assert code == 0 and obj["op"] == op
    assert len(obj["blocks"]) in (1, 4, 16)


def test_theta_command(capsys):
    code, out, _ = _run(capsys, "theta", "q_minkowski_4")
    obj = json.loads(out)
    assert obj["lambda_nu"] == "q^-4"
    assert [obj["v"][i][i] for i in range(4)] == ["q^-4", "q^-6", "q^-2", "q^-4"]


def test_specialize_command(capsys):
    code, out, _ = _run(capsys, "specialize", "q_euclidean_4", "--q", "1")
    obj = json.loads(out)
    assert code == 0 and obj["lambda_nu"] == "1"
    code, out, _ = _run(capsys, "specialize", "quantum_plane:2", "--q", "2/3")
    assert json.loads(out)["lambda_squared"] == "27/8"


def test_emit_text_has_anchor_lines(tmp_path):
    rep = VerificationReport("m", 1, True, [SuiteEntry("qybe", "anchor text", 0, "0"),
                                            SuiteEntry("x", "other", 1, "q")])
    text = emit_report(rep, "text", str(tmp_path / "r.txt"))
    lines = text.splitlines()
    assert lines[1].startswith("PASS  qybe  [anchor text]")
    assert lines[2].startswith("FAIL") and lines[-1] == "FAILURES"


def test_emit_json_round_trip(tmp_path):
    rep = VerificationReport("m", 2, False, [SuiteEntry("a", "b", 0, "0")])
    text = emit_report(rep, "json", str(tmp_path / "r.json"))
    assert json.loads(text) == rep.to_json_obj()
    with pytest.raises(ValueError):
        emit_report(rep, "yaml", str(tmp_path / "r.yaml"))
