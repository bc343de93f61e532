import json
import math

import pytest

from yamabe_torus import records, solver
from yamabe_torus.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_kv(line):
    return {k: float(v) for k, v in (item.split("=") for item in line.split())}


def test_period_commands(capsys):
    code, out, _ = run(capsys, "period", "--lambda", "1", "--K", "0.4999999999")
    assert code == 0 and parse_kv(out)["eta"] == pytest.approx(math.pi / 2, abs=1e-6)
    code, out, err = run(capsys, "period", "--lambda", "1", "--K", "0.25")
    assert code == 0 and parse_kv(out)["eta"] == pytest.approx(1.854074677301372, abs=1e-12)
    code, out, err = run(capsys, "period", "--lambda", "1", "--K", "0.6")
    assert code == 2 and "K outside (0, λ/2]" in err and len(err.strip().splitlines()) == 1
    code, _, err = run(capsys, "period", "--lambda", "-1", "--K", "0.1")
    assert code == 2
    code, _, err = run(capsys, "period", "--lambda", "1")
    assert code == 2 and "--K" in err


def test_solve_commands(capsys, tmp_path):
    out_file = tmp_path / "s.json"
    code, out, _ = run(capsys, "solve", "--lambda", "1", "--ell", "1", "--k", "1", "--out", str(out_file))
    assert code == 0 and parse_kv(out)["residual_sup"] < 1e-8
    sol = records.solution_from_json(out_file.read_text(encoding="utf-8"))
    assert sol.residual_sup < 1e-8 and solver.validate(sol) == []
    code, _, err = run(capsys, "solve", "--lambda", "1", "--ell", "0.4", "--k", "1")
    assert code == 3 and "d+1 inequivalent solutions" in err
    code, out, err = run(capsys, "solve", "--lambda", "1", "--ell", "1", "--k", "0")
    assert code == 0
    record = json.loads(out)
    assert record["volume"] == pytest.approx(4 * math.pi**2)
    code, _, _ = run(capsys, "solve", "--lambda", "1", "--ell", "1", "--k", "1", "--grid", "100")
    assert code == 2


def test_determinism(capsys, tmp_path):
    files = []
    for i in range(2):
        path = tmp_path / f"run{i}.json"
        run(capsys, "solve", "--lambda", "0.5", "--ell", "3", "--k", "2", "--grid", "512", "--out", str(path))
        files.append(path.read_bytes())
    assert files[0] == files[1]
    outs = []
    for i in range(2):
        path = tmp_path / f"g{i}.json"
        run(capsys, "galerkin", "--lambda", "1", "--ell", "0.8", "--modes", "16", "--restarts", "2", "--seed", "5", "--out", str(path))
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_bifurcate_and_sweep(capsys):
    code, out, _ = run(capsys, "bifurcate", "--lambda", "1", "--ell", "1.6")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 5 and lines[0].startswith("lambda,ell,branch_kind")
    code, out, _ = run(capsys, "bifurcate", "--lambda", "1", "--ell", "1.6", "--format", "json")
    assert code == 0 and len(json.loads(out)["rows"]) == 4
    code, out, _ = run(capsys, "sweep", "--lambda", "1", "--ells", "0.6,1,2,5,20")
    vols = [float(line.split(",")[4]) for line in out.strip().splitlines()[1:]]
    assert code == 0 and vols == sorted(vols) and len(set(vols)) == 5
    code, _, _ = run(capsys, "sweep", "--lambda", "1", "--ells", "2,1")
    assert code == 2
    code, out, _ = run(capsys, "sweep", "--lambda", "2", "--format", "json")
    assert code == 0 and len(json.loads(out)["rows"]) == 5


def test_verify_subset_and_margins(capsys):
    code, out, _ = run(capsys, "verify", "--only", "bounds", "13")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert [r.split()[1] for r in rows] == ["bounds", "spectral"]
    code, out, _ = run(capsys, "verify", "--only", "degenerate", "scaling", "--tolerance", "1e-30")
    assert code == 1
    assert all("FAIL" in r for r in out.strip().splitlines()[1:])
    code, _, err = run(capsys, "verify", "--only", "nonsense")
    assert code == 2


def test_galerkin_command(capsys):
    code, out, _ = run(capsys, "galerkin", "--lambda", "1", "--ell", "0.4", "--modes", "16", "--restarts", "2")
    record = json.loads(out)
    assert code == 0 and record["energy"] == pytest.approx(0.2 * math.pi, abs=1e-9)


def test_defaults():
    from yamabe_torus.cli import DEFAULTS

    assert DEFAULTS == {"grid": 1024, "modes": 64, "restarts": 8, "seed": 0, "tolerance": 1e-10}


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "yamabe_torus", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
