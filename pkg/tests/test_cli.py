import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from krivine.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from krivine.kernel import KRIVINE_BOUND

SCHEMA = json.loads(resources.files("krivine").joinpath("schema.json").read_text())
H2 = "2 2\n1 1\n1 -1\n"


def run_json(capsys, *argv):
    code = main([*argv, "--json"])
    out = capsys.readouterr().out
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return code, doc, out


@pytest.fixture
def h2(tmp_path):
    p = tmp_path / "h2.txt"
    p.write_text(H2)
    return str(p)


def test_verify_passes(capsys):
    code, doc, _ = run_json(capsys, "verify")
    assert code == EXIT_OK and doc["passed"]
    names = [c["name"] for c in doc["checks"]]
    assert "orthonormality(10)" in names
    assert all(c["pass"] for c in doc["checks"])


def test_verify_crippled_budget_fails(capsys):
    code, doc, _ = run_json(capsys, "verify", "--nodes", "4")
    assert code == EXIT_FAIL and not doc["passed"]
    assert doc["first_failure"] == "orthonormality(10)"


def test_verify_text_names_failure(capsys):
    assert main(["verify", "--nodes", "4"]) == EXIT_FAIL
    assert "first failing check: orthonormality(10)" in capsys.readouterr().out


def test_constants_cached(capsys):
    code, doc, _ = run_json(capsys, "constants", "--cached")
    assert code == EXIT_OK
    assert doc["krivine_bound"] == KRIVINE_BOUND
    assert doc["gamma_p"] > doc["log1p_sqrt2"]
    assert doc["new_bound"] < KRIVINE_BOUND
    assert doc["margin"] > 10 * doc["uncertainty"]


def test_tiger_outputs(tmp_path, capsys):
    out = tmp_path / "t"
    args = ["tiger", "--steps", "3", "--res", "64", "--seed", "2", "--out"]
    code, doc, first = run_json(capsys, *args, str(out))
    assert code == EXIT_OK
    assert len(doc["values"]) == 3 and len(doc["images"]) == 4
    assert (out / "iter_003.pgm").exists()
    assert (out / "values.csv").read_text().startswith("step,value")
    _, _, again = run_json(capsys, *args, str(out))
    assert again == first


def test_tiger_zero_steps(tmp_path, capsys):
    code, doc, _ = run_json(capsys, "tiger", "--steps", "0", "--res", "32", "--out", str(tmp_path))
    assert code == EXIT_OK and doc["values"] == [] and doc["images"] == ["iter_000.pgm"]


@pytest.mark.parametrize("scheme", ["krivine", "mixed", "hyperplane"])
def test_round_two_by_two(h2, capsys, scheme, tmp_path):
    rep = tmp_path / "r.json"
    code, doc, _ = run_json(capsys, "round", "--matrix", h2, "--scheme", scheme,
                            "--trials", "2000", "--out", str(rep))
    assert code == EXIT_OK
    assert doc["best_value"] == 2.0 == doc["opt"]
    assert doc["sdp"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert json.loads(rep.read_text())["best_value"] == 2.0


def test_round_scheme_file(h2, capsys, tmp_path):
    from krivine.config import shipped_scheme_path
    code, doc, _ = run_json(capsys, "round", "--matrix", h2, "--scheme",
                            str(shipped_scheme_path()), "--trials", "500")
    assert code == EXIT_OK and doc["best_value"] == 2.0


def test_round_one_by_one(tmp_path, capsys):
    p = tmp_path / "one.txt"
    p.write_text("1 1\n1\n")
    code, doc, _ = run_json(capsys, "round", "--matrix", str(p), "--scheme", "krivine",
                            "--trials", "100000")
    assert code == EXIT_OK
    assert abs(doc["mean"] - 0.5611) < 4 * doc["stderr"] + 1e-4


def test_compare_two_by_two(h2, capsys):
    code, doc, _ = run_json(capsys, "compare", "--matrix", h2, "--trials", "2000")
    assert code == EXIT_OK
    assert doc["opt"] == 2.0
    assert doc["sdp"] == pytest.approx(2 * math.sqrt(2), abs=1e-6)
    assert [r["scheme"] for r in doc["rows"]] == ["hyperplane", "krivine", "mixed"]
    assert all(r["best"] == 2.0 for r in doc["rows"])


def test_threads_bit_identical(h2, capsys):
    outs = []
    for t in ("1", "3"):
        main(["--threads", t, "compare", "--matrix", h2, "--trials", "9000", "--json"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_missing_file_is_usage_error(tmp_path, capsys):
    assert main(["round", "--matrix", str(tmp_path / "none.txt")]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_malformed_file_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("2 2\n1 1\n1 x\n")
    assert main(["round", "--matrix", str(p)]) == EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_bad_threads(capsys):
    assert main(["--threads", "0", "verify"]) == EXIT_USAGE


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "krivine", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout
