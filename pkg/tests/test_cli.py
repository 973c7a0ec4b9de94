import csv
import io
import json
from fractions import Fraction

import pytest

from bratteli import catalog
from bratteli.cli import main


@pytest.fixture(scope="module")
def specs(tmp_path_factory):
    root = tmp_path_factory.mktemp("specs")
    out = {}
    for name in catalog.names():
        path = root / f"{name}.json"
        path.write_text(catalog.emit(name))
        out[name] = str(path)
    return out


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_stochastic_matrix(capsys, specs):
    code, out, _ = run(capsys, "stochastic", "--spec", specs["odometer3"], "--level", 1)
    assert code == 0
    assert json.loads(out) == [["1", "0"], ["1/3", "2/3"]]


def test_heights_and_telescope(capsys, specs):
    code, out, _ = run(capsys, "heights", "--spec", specs["pascal"], "--level", 4)
    assert code == 0 and json.loads(out)["heights"]["4"] == [1, 4, 6, 4, 1]
    code, out, _ = run(capsys, "telescope", "--spec", specs["b1"], "--levels", "0,2,4")
    assert code == 0
    report = json.loads(out)
    assert report["root"] == [2, 2] and report["matrices"] == [[[7, 5], [5, 7]]]


def test_zero_column_is_an_input_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generator": "explicit", "root_edges": [1, 1], "matrices": [[[1, 0], [1, 0]]]}))
    code, _, err = run(capsys, "validate", "--spec", bad)
    assert code == 1
    assert "level 1" in err and "vertex 1" in err


@pytest.mark.parametrize(
    "argv",
    [
        ("validate",),
        ("frobnicate",),
        ("heights", "--spec", "/nonexistent/spec.json"),
        ("catalog", "emit", "klein-bottle"),
    ],
)
def test_input_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as info:
        code = main(list(argv))
        raise SystemExit(code)
    assert info.value.code == 1


def test_unique_exit_codes_follow_the_verdict(capsys, specs):
    code, out, _ = run(capsys, "unique", "--spec", specs["odometer3"])
    report = json.loads(out)
    assert code == 0 and report["status"] == "Certified"
    assert report["replay"]["ok"]
    code, out, _ = run(capsys, "unique", "--spec", specs["b2"], "--budget", 20)
    assert code == 2 and json.loads(out)["status"] == "Undetermined"


def test_reports_are_byte_identical(capsys, specs):
    argv = ("count", "--spec", specs["b2"], "--level", 2, "--m", 20)
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    report = json.loads(first[1])
    assert report["count"] == 2 and report["separated"]
    # keys sorted, rationals as strings
    assert first[1] == json.dumps(report, sort_keys=True, indent=2) + "\n"
    Fraction(report["gap"])


def test_simplex_csv(capsys, specs):
    code, out, _ = run(capsys, "simplex", "--spec", specs["b1"], "--level", 2, "--m", 4, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["step"] for r in rows] == ["0", "1", "2", "3", "4"]
    for r in rows[1:]:
        m = int(r["step"]) - 1
        assert Fraction(int(r["diameter_num"]), int(r["diameter_den"])) == Fraction(4, (2 + m) * (3 + m))


def test_simplex_vertex_csv(capsys, specs):
    code, out, _ = run(
        capsys, "simplex", "--spec", specs["pascal"], "--level", 2, "--m", 1, "--format", "csv", "--vertices"
    )
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    step1 = [r for r in rows if r["step"] == "1"]
    # the step-1 vertices are the four rows of F_2, three coordinates each
    assert len(step1) == 12
    vec = [Fraction(int(r["numerator"]), int(r["denominator"])) for r in step1 if r["vertex"] == "1"]
    assert vec == [Fraction(1, 3), Fraction(2, 3), 0]


def test_out_file(capsys, specs, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "heights", "--spec", specs["odometer3"], "--level", 3, "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["heights"]["3"] == [27, 27]


def test_float_mode_labels_scaled_heights(capsys, specs):
    code, out, _ = run(capsys, "heights", "--spec", specs["odometer3"], "--level", 20, "--mode", "float")
    assert code == 0 and json.loads(out) == {"heights_scaled": {"20": [1.0, 1.0]}}


def test_catalog_round_trip(capsys, specs):
    code, out, _ = run(capsys, "catalog", "emit", "countable")
    assert code == 0 and out == catalog.emit("countable")
    via_file = run(capsys, "stochastic", "--spec", specs["countable"], "--level", 3)
    assert json.loads(via_file[1])[0][:2] == ["29/32", "1/32"]


def test_stationary_and_chains(capsys, specs):
    code, out, _ = run(capsys, "stationary", "--spec", specs["two-classes"], "--m", 30)
    report = json.loads(out)
    assert code == 0 and [c["status"] for c in report["classes"]] == ["distinguished", "distinguished"]
    code, out, _ = run(capsys, "chains", "--spec", specs["pascal"])
    assert code == 2 and json.loads(out)["result"] == "NoAdmissiblePartition"


def test_code_window(capsys, tmp_path):
    spec = tmp_path / "two.json"
    spec.write_text(json.dumps({"generator": "stationary", "matrix": [[2]], "root_edges": [2], "depth": 6}))
    code, out, _ = run(capsys, "code", "--spec", spec, "--radius", 3, "--format", "compact")
    assert code == 0 and out.strip() in ("0101010", "1010101")


def test_toeplitz_window(capsys, specs):
    code, out, _ = run(capsys, "toeplitz", "--spec", specs["toeplitz"], "--radius", 3)
    assert code == 0
    window = json.loads(out)["window"]
    assert len(window) == 7 and None not in window


def test_extend_reports_divergence(capsys, specs):
    code, out, _ = run(capsys, "extend", "--spec", specs["odometer3"], "--W", "[1]", "--depth", 10)
    report = json.loads(out)
    assert code == 2
    assert report["mass"]["flag"] == "diverging-evidence"
