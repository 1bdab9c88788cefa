import json
import subprocess
import sys

import pytest

from cesaro_spaces.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_norm_basis_d2(capsys):
    code, out, _ = run(capsys, "norm", "--seq", '{"family":"basis","n":4}', "--space", "d:2")
    assert code == 0
    doc = json.loads(out)
    assert (doc["lo"], doc["hi"], doc["method"]) == (2.0, 2.0, "EXACT_FINITE")


def test_norm_graded_space_gives_schedule(capsys):
    code, out, _ = run(capsys, "norm", "--seq", '{"family":"powerlog","a":1,"b":0}', "--space", "ces:2+", "--N", "1000")
    assert code == 0
    doc = json.loads(out)
    assert doc["space"] == "ces:2+"
    assert [row["p"] for row in doc["schedule"]][:2] == [3.0, 2.5]


def test_norm_divergent_emits_null_hi(capsys):
    code, out, _ = run(capsys, "norm", "--seq", '{"family":"powerlog","a":0.5,"b":0}', "--space", "ell:2", "--N", "1e4")
    assert code == 0
    doc = json.loads(out)
    assert doc["hi"] is None and doc["method"] == "DIVERGENT_LOWER_BOUND"


def test_classify_example(capsys):
    code, out, _ = run(capsys, "classify", "--seq", '{"family":"powerlog","a":0.5,"b":0}', "--space", "ell:2+")
    assert code == 0
    doc = json.loads(out)
    assert doc["status"] == "IN" and doc["crit"] == 2.0 and doc["attained"] is False


def test_cesaro_and_envelope(capsys):
    code, out, _ = run(capsys, "cesaro", "--seq", '{"family":"basis","n":1}', "--N", "4")
    assert code == 0
    assert json.loads(out)["terms"] == [1.0, 0.5, 1 / 3, 0.25]
    code, out, _ = run(capsys, "cesaro", "--seq", '{"family":"finite","values":[2,0,0]}', "--N", "3", "--iterate", "2")
    assert code == 0
    assert json.loads(out)["iterate"] == 2
    code, out, _ = run(capsys, "envelope", "--seq", '{"family":"finite","values":[0,3,1,2]}', "--N", "6")
    assert code == 0
    assert json.loads(out)["terms"] == [3.0, 3.0, 2.0, 2.0, 0.0, 0.0]


def test_witness_commands(capsys):
    code, out, _ = run(capsys, "witness", "--list")
    assert code == 0
    assert len(json.loads(out)) == 19
    code, out, _ = run(capsys, "witness", "--claim", "d-plus-proper", "--p", "2", "--q", "3")
    assert code == 0
    assert json.loads(out)["sequence"] == {"family": "powerlog", "a": 0.4, "b": 0.0}


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--check", "V99"],
        ["norm", "--seq", "not json", "--space", "d:2"],
        ["norm", "--seq", '{"family":"basis","n":4}', "--space", "d:0.5"],
        ["classify", "--seq", '{"family":"basis","n":0}', "--space", "ell:2"],
        ["envelope", "--seq", '{"family":"spike","gamma":0.5,"delta":0}', "--N", "8"],
        ["witness", "--claim", "no-such-claim"],
        ["witness", "--claim", "ces-proper", "--p", "3", "--q", "2"],
        ["witness"],
        ["cesaro", "--seq", '{"family":"basis","n":1}', "--N", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert err.strip()


def test_verify_single_check_and_out_file(capsys, tmp_path):
    target = tmp_path / "report.md"
    code, out, _ = run(capsys, "verify", "--check", "V3", "--format", "markdown", "--out", str(target))
    assert code == 0 and out == ""
    assert "| V3 | PASS |" in target.read_text()


def test_verify_output_is_byte_identical():
    cmd = [sys.executable, "-m", "cesaro_spaces", "verify", "--check", "V2", "--seed", "3"]
    one = subprocess.run(cmd, capture_output=True, check=True).stdout
    two = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert one == two
    assert json.loads(one)["checks"][0]["status"] == "PASS"


def test_verify_failure_exits_1(capsys, monkeypatch):
    from cesaro_spaces import norms

    real = norms.conjugate
    monkeypatch.setattr(norms, "conjugate", lambda p: norms.ConjugateExponent(p, real(p).p_prime * 0.5))
    code, out, _ = run(capsys, "verify", "--check", "V1")
    assert code == 1
    assert json.loads(out)["checks"][0]["status"] == "FAIL"
