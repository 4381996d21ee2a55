import json
import subprocess
import sys

import jsonschema
import pytest

from itoseries.cli import run
from itoseries.io import emit, parse_records

TENSOR_SCHEMA = {
    "type": "object",
    "required": ["format_version", "basis", "interval", "k", "truncation", "weights", "values"],
    "properties": {
        "format_version": {"const": 1},
        "basis": {"enum": ["legendre", "trig"]},
        "interval": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        "k": {"type": "integer", "minimum": 1},
        "truncation": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "weights": {"type": "array", "items": {"type": "object", "required": ["kind"]}},
        "values": {"type": "array", "items": {"type": "number"}},
    },
}


def invoke(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_partitions(capsys):
    code, out, _ = invoke(capsys, "partitions", "--k", "4", "--r", "2")
    assert code == 0
    assert out.splitlines() == ["12,34|", "13,24|", "14,23|"]


def test_coeffs_json(capsys):
    code, out, _ = invoke(capsys, "coeffs", "--k", "2", "--p", "0,0", "--weights", "const", "--interval", "0,1")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, TENSOR_SCHEMA)
    assert doc["values"] == [pytest.approx(0.5, abs=1e-12)]


def test_coeffs_mixed_weights(capsys):
    code, out, _ = invoke(capsys, "coeffs", "--k", "2", "--p", "2", "--weights", "pow:1/const:2", "--basis", "trig")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, TENSOR_SCHEMA)
    assert doc["truncation"] == [2, 2] and len(doc["values"]) == 9
    assert doc["weights"][0] == {"kind": "pow", "q": 1, "scale": 1.0}


@pytest.mark.parametrize("argv", [
    ["partitions", "--k", "4", "--r", "2", "--bogus"],
    ["partitions", "--k", "4", "--r", "3"],
    ["coeffs", "--k", "2", "--p", "1,2,3"],
    ["coeffs", "--k", "2", "--p", "1", "--interval", "1,0"],
    ["coeffs", "--k", "2", "--p", "1", "--weights", "pow:x"],
    ["sample", "--mi", "1,2", "--p", "1", "--trials", "3"],
    ["sample", "--mi", "1,2", "--p", "1", "--trials", "3", "--seed", "-1"],
    ["term", "--mi", "1,2", "--j", "0", "--seed", "1"],
    ["convergence", "--mi", "1,2", "--pmax", "1", "--n-grid", "10", "--trials", "5", "--seed", "1"],
    ["sde-demo", "--system", "scalar2", "--scheme", "euler", "--h", "0.3", "--trials", "5", "--seed", "1"],
    ["sde-demo", "--system", "bilinear2d", "--scheme", "euler", "--h", "0.25", "--trials", "5", "--seed", "1",
     "--reference", "exact"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 2
    assert out == ""
    assert "usage" in err or "error" in err


def test_runtime_failure_exit_1(capsys, tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "x.json"
    code, _, err = invoke(capsys, "coeffs", "--k", "1", "--p", "0", "--out", str(missing))
    assert code == 1 and "failed" in err


def test_sample_and_term(capsys):
    code, out, _ = invoke(capsys, "sample", "--mi", "1,2", "--p", "2", "--trials", "4", "--seed", "5")
    assert code == 0
    rows = parse_records(out, "csv")
    assert [r["trial"] for r in rows] == [0, 1, 2, 3]
    code, out, _ = invoke(capsys, "term", "--mi", "1,1", "--j", "0,0", "--seed", "5", "--format", "json")
    rec = json.loads(out)[0]
    assert code == 0 and rec["form"] == "hermite" and isinstance(rec["value"], float)


def test_convergence_and_sde_demo(capsys):
    code, out, _ = invoke(capsys, "convergence", "--mi", "1,2", "--pmax", "2", "--n-grid", "200",
                          "--trials", "100", "--seed", "3")
    rows = parse_records(out, "csv")
    assert code == 0 and [r["p"] for r in rows] == [0, 1, 2]
    assert rows[0]["analytic_residual"] == pytest.approx(0.25)
    code, out, _ = invoke(capsys, "sde-demo", "--system", "scalar2", "--scheme", "milstein", "--h", "0.25,0.125",
                          "--trials", "20", "--seed", "3", "--reference", "exact")
    rows = parse_records(out, "csv")
    assert code == 0 and [r["h"] for r in rows] == [0.25, 0.125]


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nk=2\np=0\nweights=const:2\n")
    code, out, _ = invoke(capsys, "--config", str(cfg), "coeffs")
    assert code == 0 and json.loads(out)["values"] == [pytest.approx(2.0)]
    # explicit flags override the file
    code, out, _ = invoke(capsys, "--config", str(cfg), "coeffs", "--weights", "const")
    assert json.loads(out)["values"] == [pytest.approx(0.5)]
    bad = tmp_path / "bad.cfg"
    bad.write_text("no equals sign\n")
    assert invoke(capsys, "--config", str(bad), "coeffs")[0] == 2
    assert invoke(capsys, "--config", str(tmp_path / "missing.cfg"), "coeffs")[0] == 2


DETERMINISM_CASES = [
    ["sample", "--mi", "1,2,1", "--p", "2", "--trials", "5", "--seed", "18446744073709551615"],
    ["term", "--mi", "1,1,2", "--j", "1,1,0", "--seed", "7", "--format", "json"],
    ["convergence", "--mi", "1,2", "--pmax", "1", "--n-grid", "64", "--trials", "100", "--seed", "2"],
    ["sde-demo", "--system", "bilinear2d", "--scheme", "milstein", "--h", "0.25", "--p", "2", "--trials", "8",
     "--seed", "4", "--ref-factor", "4"],
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES)
def test_byte_identical_across_processes(argv):
    cmd = [sys.executable, "-m", "itoseries", *argv]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a and a == b


def test_emit_roundtrip_and_empty(tmp_path):
    assert emit([], "csv", None, columns=["p", "value"]) == "p,value\n"
    rec = {"p": 3, "value": 0.1 + 0.2, "name": "x"}
    for fmt in ("csv", "json"):
        path = tmp_path / f"r.{fmt}"
        text = emit([rec], fmt, path)
        assert path.read_text() == text
        assert parse_records(text, fmt) == [rec]
    with pytest.raises(ValueError):
        emit([{"a": 1}, {"b": 2}], "csv", None)
