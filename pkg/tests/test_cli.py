import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from u2casimir.cli import (EXIT_PHYSICS, EXIT_VALIDATION, SCHEMA, JobSpec, complex_entry, main,
                           parse_axis, parse_matrix, real_expr)
from u2casimir.errors import ValidationError


def run_cli(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(text):
    lines = text.splitlines()
    assert lines[0].startswith(f"# {SCHEMA} ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


@pytest.mark.parametrize("text,value", [("1.5", 1.5), ("pi", math.pi), ("3*pi/2", 1.5 * math.pi),
                                        ("-tau/4", -math.pi / 2), ("2**-3", 0.125), ("1e-3", 1e-3)])
def test_real_expr(text, value):
    assert real_expr(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text", ["__import__('os')", "x", "1/0", "", "inf", "1e400", "[1]"])
def test_real_expr_rejects(text):
    with pytest.raises(ValidationError):
        real_expr(text)


@pytest.mark.parametrize("text,value", [("1", 1), ("-0.5+0.5i", -0.5 + 0.5j), ("i", 1j), ("-i", -1j),
                                        ("2i", 2j), ("1e-3-2e-3i", 1e-3 - 2e-3j), ("1e+2i", 100j),
                                        ("0.5-i", 0.5 - 1j)])
def test_complex_entry(text, value):
    assert complex_entry(text) == pytest.approx(value)


def test_parse_matrix():
    assert np.allclose(parse_matrix("0,i;i,0"), [[0, 1j], [1j, 0]])
    for bad in ("1,0", "1,0;0", "1,0;0,1;1,1", "a,0;0,1"):
        with pytest.raises(ValidationError):
            parse_matrix(bad)


def test_parse_axis():
    assert parse_axis("L=0.5:2:4") == ("L", 0.5, 2.0, 4)
    for bad in ("L=0.5:2", "L0.5:2:4", "L=0:1:x"):
        with pytest.raises(ValidationError):
            parse_axis(bad)


finite = st.floats(-10, 10, allow_nan=False)


@given(st.sampled_from(["plates", "comb", "sweep"]), st.floats(0.01, 100), finite, finite,
       st.sampled_from(["free", "delta:w0=2.0", "barrier:v0=1.0,a=0.25"]),
       st.lists(st.tuples(st.sampled_from(["L", "theta", "alpha"]), finite, finite, st.integers(1, 9)),
                max_size=3, unique_by=lambda a: a[0]),
       st.sampled_from(["csv", "json"]), st.integers(1, 8))
@settings(max_examples=60)
def test_ini_round_trip(mode, L, alpha, theta, potential, axes, fmt, jobs):
    job = JobSpec(mode, L=L, alpha=alpha, beta=0.25, theta=theta, potential=potential,
                  axes=axes, format=fmt, jobs=jobs)
    assert JobSpec.from_ini(job.to_ini()) == job


def test_ini_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        JobSpec.from_ini("[job]\nmode = plates\nwidth = 3\n")
    with pytest.raises(ValidationError):
        JobSpec.from_ini("[job]\nL = 1\n")


def test_plates_dirichlet(capsys):
    code, out, _ = run_cli(capsys, "plates", "--alpha", "pi", "--beta", "0", "--L", "1")
    assert code == 0
    (row,) = rows_of(out)
    assert float(row["value"]) == pytest.approx(-math.pi / 24, abs=1e-12)


def test_plates_matrix_and_theta(capsys):
    _, a, _ = run_cli(capsys, "plates", "--matrix", "0,i;-i,0", "--L", "2")
    _, b, _ = run_cli(capsys, "plates", "--theta", "pi/2", "--L", "2")
    assert float(rows_of(a)[0]["value"]) == pytest.approx(float(rows_of(b)[0]["value"]), abs=1e-13)


def test_json_output(capsys):
    code, out, _ = run_cli(capsys, "plates", "--alpha", "pi", "--beta", "0", "--D", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == SCHEMA and doc["mode"] == "plates"
    assert doc["rows"][0]["value"] == pytest.approx(-math.pi ** 2 / 1440, abs=1e-12)


def test_comb_single_angle_and_average(capsys):
    _, a, _ = run_cli(capsys, "comb", "--potential", "free", "--theta", "0.4")
    assert float(rows_of(a)[0]["value"]) == pytest.approx(-(math.pi) * ((0.4 / (2 * math.pi)) ** 2 - 0.4 / (2 * math.pi) + 1 / 6), abs=1e-10)
    _, b, _ = run_cli(capsys, "comb", "--potential", "free", "--L", "2")
    assert abs(float(rows_of(b)[0]["value"])) < 1e-10


def test_bands(capsys):
    code, out, _ = run_cli(capsys, "bands", "--potential", "delta:w0=10", "--kmax", "13")
    rows = rows_of(out)
    assert code == 0 and len(rows) == 4
    assert all(float(r["abs_error"]) < 1e-10 for r in rows)


def test_spectrum(capsys):
    _, out, _ = run_cli(capsys, "spectrum", "--alpha", "pi", "--beta", "0", "--L", "1", "--kmax", "10")
    ks = [float(r["k"]) for r in rows_of(out)]
    assert np.allclose(ks, [math.pi, 2 * math.pi, 3 * math.pi], rtol=1e-12)


def test_output_is_bit_identical(tmp_path, capsys):
    argv = ["sweep", "--over", "plates", "--theta", "0.5", "--vary", "L=0.5:2:4", "--vary", "theta=0.1:3:3"]
    outputs = []
    for i, jobs in enumerate(["1", "1", "3"]):
        path = tmp_path / f"out{i}.csv"
        assert run_cli(capsys, *argv, "--jobs", jobs, "--out", str(path))[0] == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    rows = rows_of(outputs[0].decode())
    assert [(float(r["L"]), float(r["theta"])) for r in rows][:3] == [(0.5, 0.1), (0.5, 1.55), (0.5, 3.0)]


def test_potential_sweep(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--over", "comb", "--potential", "delta:w0=1", "--theta", "0",
                           "--vary", "w0=1:3:3")
    values = [float(r["value"]) for r in rows_of(out)]
    # at theta = 0 a stronger delta pushes the cell towards the Dirichlet value
    assert code == 0 and values[0] < values[1] < values[2] < -math.pi / 24


def test_config_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "job.ini"
    cfg.write_text("[job]\nL = 1\nalpha = pi\nbeta = 0\nD = 3\n")
    _, a, _ = run_cli(capsys, "plates", "--config", str(cfg))
    _, b, _ = run_cli(capsys, "plates", "--config", str(cfg), "--L", "2")
    va, vb = float(rows_of(a)[0]["value"]), float(rows_of(b)[0]["value"])
    assert va == pytest.approx(-math.pi ** 2 / 1440, abs=1e-12)
    assert vb == pytest.approx(va / 8, rel=1e-10)


@pytest.mark.parametrize("argv", [
    ["plates", "--L", "-1", "--alpha", "pi", "--beta", "0"],
    ["plates", "--L", "one"],
    ["plates", "--alpha", "0", "--beta", "0", "--n1", "1", "--n3", "1"],
    ["plates", "--matrix", "1,1;1,1"],
    ["plates", "--theta", "1", "--matrix", "1,0;0,1"],
    ["comb", "--potential", "coulomb:z=1"],
    ["sweep", "--over", "plates", "--theta", "1"],
    ["sweep", "--over", "plates", "--theta", "1", "--vary", "w9=0:1:2"],
    ["plates", "--config", "/nonexistent/job.ini"],
    ["plates", "--format", "xml"],
    [],
])
def test_validation_errors(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == EXIT_VALIDATION
    assert out == "" and err.count("\n") == 1 and err.startswith("u2casimir: error: validation:")


@pytest.mark.parametrize("argv", [
    ["plates", "--alpha=-pi/2", "--beta", "0"],
    ["plates", "--matrix", "0,i;i,0", "--L", "2"],
    ["comb", "--potential", "delta:w0=-5"],
])
def test_physics_errors(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == EXIT_PHYSICS and err.count("\n") == 1 and "BoundStateError" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "u2casimir", "plates", "--theta", "pi", "--format", "json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["rows"][0]["value"] == pytest.approx(math.pi / 12, abs=1e-12)
