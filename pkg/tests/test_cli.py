import csv
import json

import numpy as np
import pytest

from tlasso.cli import main


def run(argv):
    return main(argv)


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.txt"
    assert run(["gen", "--n", "12", "--m", "32", "--s", "2", "--k", "2",
                "--amplitude", "4", "--link", "identity", "--seed", "5",
                "-o", str(path)]) == 0
    return path


def test_gen_and_solve(instance_file, capsys):
    from tlasso.model import load_instance
    inst = load_instance(str(instance_file))
    rx = float(np.abs(inst.x_star).sum())
    rv = float(np.abs(inst.v_star).sum())
    code = run(["solve", str(instance_file), "--set-x", f"l1:{rx}",
                "--set-v", f"l1:{rv}"])
    out = capsys.readouterr().out
    assert code == 0
    line = [l for l in out.splitlines() if l.startswith("seed=")][0]
    fields = dict(kv.split("=") for kv in line.split())
    assert fields["seed"] == "5"
    assert float(fields["joint_error"]) < 1e-3


def test_solve_trace_file(instance_file, tmp_path):
    trace = tmp_path / "trace.txt"
    assert run(["solve", str(instance_file), "--set-x", "l2:1", "--set-v", "l2:1",
                "--trace", str(trace)]) == 0
    vals = [float(line.split()[1]) for line in trace.read_text().splitlines()]
    assert len(vals) > 1
    assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))


def test_width_csv_output(tmp_path):
    out = tmp_path / "width.csv"
    assert run(["width", "--set", "l2:1", "--dim", "50", "--trials", "500",
                "--seed", "1", "-o", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert rows[0]["quantity"] == "width"
    assert float(rows[0]["mean"]) == pytest.approx(7.0, rel=0.1)


def test_local_width_cli(tmp_path):
    out = tmp_path / "lw.csv"
    assert run(["local-width", "--set", "l1:1", "--dim", "8", "--t", "0.5",
                "--trials", "300", "--seed", "2", "-o", str(out)]) == 0
    with open(out) as fh:
        row = next(csv.DictReader(fh))
    assert row["quantity"] == "local_width"
    assert float(row["t"]) == 0.5


def test_rsv_check_cli(instance_file, capsys):
    from tlasso.model import load_instance
    inst = load_instance(str(instance_file))
    rx = float(np.abs(inst.x_star).sum())
    rv = float(np.abs(inst.v_star).sum())
    assert run(["rsv-check", str(instance_file), "--set-x", f"l1:{rx}",
                "--set-v", f"l1:{rv}", "--directions", "100", "--trials", "200"]) == 0
    out = capsys.readouterr().out
    assert "empirical_min=" in out and "implied_C=" in out


def test_sweep_from_config(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(f"""kind = error_vs_m
m_grid = 32,64,128
n = 12
s = 2
k = 1
amplitude = 3
link = identity
trials = 2
seed = 7
out = {out}
""")
    assert run(["sweep", str(cfg)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    manifest = json.loads((tmp_path / "rows.csv.manifest.json").read_text())
    assert manifest["library_version"]
    assert "wall_time_s" in manifest


def test_config_error_exit_code(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kind = error_vs_m\nm_grid = 64,32\nn = 8\nout = x.csv\n")
    assert run(["sweep", str(cfg)]) == 2
    assert run(["sweep", str(tmp_path / "missing.cfg")]) == 2


def test_numerical_failure_exit_code(tmp_path):
    path = tmp_path / "cubic.txt"
    assert run(["gen", "--n", "4", "--m", "8", "--s", "1", "--link", "cubic",
                "--seed", "1", "-o", str(path)]) == 0
    # solve reports link parameters, and the cubic link has no finite psi
    assert run(["solve", str(path), "--set-x", "l2:1", "--set-v", "l2:1"]) == 3
