import json
import subprocess
import sys

import numpy as np
import pytest

from heunhk.cli import main
from heunhk.elliptic import lattice_from_tau


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def as_c(v):
    return complex(v[0], v[1])


def test_lattice_command(capsys):
    code, out, _ = run(capsys, "lattice", "--omega1", "0.5,0", "--omega3", "0,0.5")
    assert code == 0
    doc = json.loads(out)
    assert doc["legendre_residual"] < 1e-12
    assert doc["config"]["cmd"] == "lattice"
    assert doc["config"]["omega1"] == [0.5, 0.0]


def test_p6_hitchin_check(capsys):
    code, out, _ = run(capsys, "p6", "hitchin", "--C1", "0.31,0.07", "--C3", "0.54,-0.11", "--tau", "0,0.8", "--check")
    assert code == 0
    doc = json.loads(out)
    assert doc["residual_p6"] < 1e-6


def test_finitegap_m0(capsys):
    code, out, _ = run(capsys, "finitegap", "m0", "--l", "1,0,0,0", "--tau", "0,1")
    assert code == 0
    doc = json.loads(out)
    L = lattice_from_tau(1j)
    want = np.poly([-e for e in L.e])[::-1]  # increasing degree
    got = np.array([as_c(c) for c in doc["Q_coeffs"]])
    assert np.max(np.abs(got - want)) < 1e-8


def test_xi_and_monodromy(capsys):
    args = ["--tau", "0.3,1.1", "--l", "0,0,0,0", "--r", "1", "--b", "0.3,0.4", "--mu1", "0.7,-0.2"]
    code, out, _ = run(capsys, "xi", *args)
    assert code == 0
    code, out, _ = run(capsys, "monodromy", *args)
    assert code == 0
    doc = json.loads(out)
    assert "alpha" in json.dumps(doc)


def test_solve_csv(capsys):
    code, out, _ = run(capsys, "solve", "--tau", "0,1", "--l", "1,0,0,0", "--E", "0.3,0.1", "--n", "4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",") == ["x_re", "x_im", "lambda_re", "lambda_im", "residual"]
    assert len(lines) == 5
    assert max(float(r.split(",")[-1]) for r in lines[1:]) < 1e-7


@pytest.mark.parametrize(
    "argv",
    [
        ["lattice", "--tau", "0,-1"],
        ["lattice", "--tau", "0,1", "--bogus"],
        ["nosuchcommand"],
        ["lattice", "--tau", "zz"],
        ["xi", "--tau", "0,1", "--r", "1", "--b", "0.3,0.4", "--s", "0.1", "--E", "1"],
    ],
)
def test_validation_exit_code(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    doc = json.loads(err)
    assert doc["error"] == "validation" and doc["message"]


def test_numerical_exit_code(capsys):
    code, _, err = run(capsys, "finitegap", "m0", "--l", "3,0,0,0", "--tau", "0,1")
    assert code == 0
    # genus 3 cannot be found when the search stops at 1
    code, out, err = run(capsys, "finitegap", "m0", "--l", "3,0,0,0", "--tau", "0,1", "--g-max", "1")
    assert code == 3
    assert out == ""
    doc = json.loads(err)
    assert doc["error"] == "numerical" and doc["type"] == "DegreeDetectionFailed"


def test_determinism_and_seed_env(capsys, monkeypatch, tmp_path):
    argv = ["xi", "--tau", "0.3,1.1", "--l", "1,0,0,0", "--r", "1", "--b", "0.3,0.4", "--mu1", "0.7,-0.2"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b
    monkeypatch.setenv("HEUNHK_SEED", "77")
    c = run(capsys, *argv)[1]
    assert json.loads(c)["config"]["seed"] == 77
    out = tmp_path / "x.json"
    assert main(argv + ["--output", str(out)]) == 0
    assert out.read_text() == c


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "heunhk", "lattice", "--tau", "0.2,0.9"], capture_output=True, text=True, check=False
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["legendre_residual"] < 1e-12
