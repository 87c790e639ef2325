import csv
import json
import shutil
from pathlib import Path

import pytest

from curvimg.cli import main
from curvimg.output import snapshot_steps

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def copy_config(name, tmp_path, **overrides):
    text = (CONFIGS / name).read_text()
    lines = [line for line in text.splitlines() if not line.startswith("out_dir")]
    target = tmp_path / name
    target.write_text("\n".join(lines) + f'\nout_dir = "out"\n' + "".join(
        f"{k} = {v}\n" for k, v in overrides.items()))
    return target


def test_run_disk(tmp_path, capsys):
    assert main(["run", str(copy_config("disk_p0.toml", tmp_path))]) == 0
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "converged" and summary["iterations"] == 1
    header = (out / "trace.csv").read_text().splitlines()[0]
    assert header == "iter,volume,A_p,B_p,Omega_p,vol_product,hausdorff_step,residual,vol_ratio,h_min,h_max,ms"
    assert (out / "snapshots" / "body_00000.csv").exists()
    assert (out / "functionals.svg").exists() and (out / "outlines.svg").exists()


def test_run_classical_ellipse(tmp_path):
    assert main(["run", str(copy_config("classical_ellipse.toml", tmp_path))]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["limit"]["shape"] == "ball"


def test_run_3d_writes_off(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('dim = 3\np = 0.0\ninit = "ball 1"\nout_dir = "out"\n')
    assert main(["run", str(cfg)]) == 0
    snap = tmp_path / "out" / "snapshots"
    assert (snap / "body_00000.off").read_text().startswith("OFF")
    header = (snap / "body_00000.csv").read_text().splitlines()[0]
    assert header == "ux,uy,uz,h,A"


def test_run_max_iter_exit_code(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('dim = 2\np = 0.0\ninit = "random 1 8 0.3 even"\nmax_iter = 2\nout_dir = "out"\n')
    assert main(["run", str(cfg)]) == 2


def test_run_error_exit_code(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('dim = 2\np = 0.0\nphi = "1 + 0.3*cos(theta)"\ninit = "random 1"\nout_dir = "out"\n')
    assert main(["run", str(cfg)]) == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["status"] == "error" and "AssumptionError" in summary["error"]
    assert main(["run", "--unsafe", str(cfg)]) in (0, 2)


def test_malformed_config_message(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('dim = 2\np = 0.0\ninit = "disk 1" x\n')
    assert main(["run", str(cfg)]) == 1
    assert main(["sweep", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert err.count("line 3, column 17") == 2


def test_sweep(tmp_path, monkeypatch):
    monkeypatch.setenv("CURVIMG_THREADS", "1")
    assert main(["sweep", str(copy_config("sweep_balls.toml", tmp_path))]) == 0
    rows = list(csv.DictReader(open(tmp_path / "out" / "sweep.csv")))
    assert len(rows) == 5
    assert all(r["status"] == "converged" and r["limit_shape"] == "ball" for r in rows)
    assert len({r["out_dir"] for r in rows}) == 5


def test_sweep_empty(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text('dim = 2\np = []\ninit = "disk 1"\nout_dir = "out"\n')
    assert main(["sweep", str(cfg)]) == 1
    assert "empty sweep" in capsys.readouterr().err


def test_sweep_with_failure(tmp_path, monkeypatch):
    monkeypatch.setenv("CURVIMG_THREADS", "2")
    cfg = tmp_path / "c.toml"
    cfg.write_text('dim = 2\np = 0.0\nphi = ["1", "1 + 0.3*cos(theta)"]\n'
                   'init = "random 1"\nmax_iter = 200\nout_dir = "out"\n')
    assert main(["sweep", str(cfg)]) == 2
    rows = list(csv.DictReader(open(tmp_path / "out" / "sweep.csv")))
    assert [r["status"] for r in rows] == ["converged", "error"]


def test_check_single_suite(capsys):
    assert main(["check", "--only", "blaschke-santalo"]) == 0
    out = capsys.readouterr().out
    assert "blaschke-santalo" in out and "1/1 suites passed" in out


def test_check_all(capsys):
    assert main(["check"]) == 0
    assert "8/8 suites passed" in capsys.readouterr().out


def test_check_extended():
    assert main(["check", "--seeds", "100"]) == 0


def test_plots_are_reproducible(tmp_path):
    cfg = copy_config("disk_p0.toml", tmp_path)
    main(["run", str(cfg)])
    first = (tmp_path / "out" / "functionals.svg").read_bytes()
    outlines = (tmp_path / "out" / "outlines.svg").read_bytes()
    shutil.rmtree(tmp_path / "out")
    main(["run", str(cfg)])
    assert (tmp_path / "out" / "functionals.svg").read_bytes() == first
    assert (tmp_path / "out" / "outlines.svg").read_bytes() == outlines


def test_snapshot_steps():
    assert snapshot_steps(120) == [0, 1, 2, 5, 10, 20, 50, 100]
