import csv
import io
import json
import math
import subprocess
import sys

import pytest

from lpvol.cli import run

KEYS = {"command", "params", "value", "err_estimate", "method"}


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv, "--format", "json")
    assert code == 0, text
    return json.loads(text)


def test_diagonal_section_beats_a2():
    big = call_json("section", "--n", "100", "--p", "3", "--dir", "diag:100")
    small = call_json("section", "--n", "100", "--p", "3", "--dir", "diag:2")
    assert big["value"] > small["value"]
    assert big["method"] == "quadrature"


def test_a2_closed_form():
    rec = call_json("section", "--n", "7", "--p", "4", "--dir", "diag:2")
    assert rec["value"] == pytest.approx(2 ** 0.25, abs=1e-8)


def test_roots_default_json():
    code, text = call("roots")
    assert code == 0
    rec = json.loads(text)
    assert rec["value"]["p0"] == pytest.approx(26.265, abs=0.01)
    assert KEYS <= set(rec)


@pytest.mark.parametrize("argv", [
    ["section", "--n", "5", "--p", "3"],
    ["projection", "--n", "5", "--q", "1.5", "--dir", "vec:0.6,0.8,0,0,0"],
    ["kernel", "--q", "1.5", "--s", "0.5,2"],
    ["kernel", "--p", "4", "--s", "1"],
    ["roots"],
    ["verify"],
    ["crossover", "--q", "1.6", "--n-max", "30"],
    ["oracle", "--n", "4", "--p", "3", "--samples", "20000", "--seed", "3"],
    ["scan", "--n", "8", "--q", "1.5"],
])
def test_json_schema(argv):
    rec = call_json(*argv)
    assert KEYS <= set(rec)
    assert rec["command"] == argv[0]


def test_csv_is_parseable_with_full_precision():
    code, text = call("kernel", "--q", "1.3333333333333333", "--s", "1.92,3.2", "--format", "csv")
    assert code == 0
    assert "\r\n" in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["s"] for r in rows] == [format(1.92, ".17g"), format(3.2, ".17g")]
    assert float(rows[0]["value"]) > 0.0026
    assert -0.588 < float(rows[1]["value"]) < 0


def test_csv_single_value_row():
    code, text = call("section", "--n", "5", "--p", "3", "--dir", "diag:2", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["value"]) == pytest.approx(2 ** (0.5 - 1 / 3), abs=1e-8)
    assert row["method"] == "quadrature"


def test_table_output():
    code, text = call("scan", "--n", "6", "--p", "3")
    assert code == 0
    assert text.startswith("scan")


def test_out_path(tmp_path):
    target = tmp_path / "res.json"
    code, text = call("roots", "--out", str(target))
    assert code == 0 and text == ""
    assert json.loads(target.read_text())["command"] == "roots"


@pytest.mark.parametrize("argv", [
    ["section", "--n", "5", "--p", "3", "--bogus"],
    ["section", "--n", "1", "--p", "3"],
    ["section", "--n", "5", "--p", "0.5"],
    ["projection", "--n", "5", "--q", "2.5"],
    ["kernel", "--p", "3", "--q", "1.5", "--s", "1"],
    ["section", "--n", "5", "--p", "3", "--dir", "diag:9"],
    ["section", "--n", "5", "--p", "3", "--dir", "vec:1,1,0,0,0"],
    ["section", "--n", "3", "--p", "3", "--dir", "vec:0.6,0.8"],
    ["section", "--n", "3", "--p", "3", "--dir", "ray:2"],
    ["crossover", "--p", "30", "--n-max", "100"],
    ["crossover", "--p", "3", "--n-max", "9000"],
    ["oracle", "--n", "3", "--p", "3", "--samples", "10"],
    ["oracle", "--n", "3", "--p", "3", "--seed", "-4"],
    ["verify", "--density", "10"],
    ["nonsense"],
])
def test_usage_errors_exit_2(argv):
    code, _ = call(*argv)
    assert code == 2


def test_unwritable_output_exit_2(tmp_path):
    code, _ = call("roots", "--out", str(tmp_path / "missing" / "x.json"))
    assert code == 2


def test_non_convergence_exit_1():
    code, text = call("section", "--n", "50", "--p", "3", "--tol", "1e-15")
    assert code == 1
    assert "value" in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "lpvol", "roots"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert math.isclose(json.loads(proc.stdout)["value"]["q1_projection"], 1.612, abs_tol=0.005)
