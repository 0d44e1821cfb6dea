import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from cavitychain.config import load_config, merge_options, parse_config_text
from cavitychain.errors import ConfigError
from cavitychain.models import ModelPreset
from cavitychain.scf import ScfConfig
from cavitychain.spins import SolverConfig
from cavitychain.sweep import (Axis, SweepPlan, default_backend, run_point,
                               run_scaling, run_sweep)
from cavitychain.cli import main


def test_config_parsing():
    text = """
    # a point
    preset = dicke
    N = 12
    g = 0.4    # inline comment
    out = results/run1
    """
    opts = parse_config_text(text)
    assert opts == {"preset": "dicke", "N": 12, "g": 0.4, "out": "results/run1"}


def test_config_rejects_unknown_keys_and_bad_values():
    with pytest.raises(ConfigError):
        parse_config_text("frobnicate = 3")
    with pytest.raises(ConfigError):
        parse_config_text("N = twelve")
    with pytest.raises(ConfigError):
        parse_config_text("just a line")


def test_merge_precedence():
    merged = merge_options({"g": 0.0, "N": 8}, {"g": 0.5}, {"g": None, "N": 12})
    assert merged == {"g": 0.5, "N": 12}


def test_axis_parsing_and_values():
    ax = Axis.parse("g=0:0.1:0.02")
    assert ax.values() == pytest.approx([0.0, 0.02, 0.04, 0.06, 0.08, 0.1])
    with pytest.raises(ConfigError):
        Axis.parse("g=0:0.1")
    with pytest.raises(ConfigError):
        Axis("g", 0.0, 1.0, -0.1).values()


def test_default_backend_choice():
    assert default_backend(ModelPreset(kind="dicke", N=100, g=0.1).build()) == "collective"
    assert default_backend(ModelPreset(kind="dicke-xxz", N=12, g=0.1, Jz=1.0).build()) == "dense"
    assert default_backend(ModelPreset(kind="dicke-xxz", N=40, g=0.1, Jz=1.0).build()) == "mps"


def test_run_point_writes_outputs(tmp_path):
    spec = ModelPreset(kind="dicke", N=50, g=0.25).build()
    rep, obs = run_point(spec, tmp_path / "pt", solver=SolverConfig(backend="collective"))
    assert (tmp_path / "pt" / "report.json").exists()
    csv_text = (tmp_path / "pt" / "observables.csv").read_text()
    header = csv_text.splitlines()[0]
    assert header == ("N,g,Jx,Jy,Jz,E0,n_mean,Mz,zz_bulk,stag_bulk,"
                      "alpha,xx_class,phase,branch")
    payload = json.loads((tmp_path / "pt" / "report.json").read_text())
    assert payload["selected"] in ("normal", "superradiant")
    assert rep.energy_per_particle == pytest.approx(-0.5, abs=1e-3)


def test_sweep_outputs_and_determinism(tmp_path):
    plan = SweepPlan(preset="dicke", N=40,
                     axis1=Axis("J", 0.0, 0.0, 1.0),
                     axis2=Axis("g", 0.3, 0.7, 0.05),
                     solver=SolverConfig(backend="collective"),
                     out_dir=str(tmp_path / "s1"))
    rows, boundary = run_sweep(plan)
    assert len(rows) == 9
    assert all(r["status"] == "ok" for r in rows)
    assert len(boundary) == 1
    assert abs(boundary[0].crossing - 0.5) < 0.1
    assert boundary[0].order == "second"

    plan2 = SweepPlan(preset="dicke", N=40,
                      axis1=Axis("J", 0.0, 0.0, 1.0),
                      axis2=Axis("g", 0.3, 0.7, 0.05),
                      solver=SolverConfig(backend="collective"),
                      out_dir=str(tmp_path / "s2"))
    run_sweep(plan2)
    assert ((tmp_path / "s1" / "results.csv").read_bytes()
            == (tmp_path / "s2" / "results.csv").read_bytes())
    meta = json.loads((tmp_path / "s1" / "metadata.json").read_text())
    assert meta["jump_threshold"] == 0.1


def test_sweep_independent_of_parallelism(tmp_path):
    def plan(out, workers):
        return SweepPlan(preset="dicke", N=30,
                         axis1=Axis("J", 0.0, 0.0, 1.0),
                         axis2=Axis("g", 0.4, 0.6, 0.05),
                         solver=SolverConfig(backend="collective"),
                         out_dir=str(out), workers=workers)

    run_sweep(plan(tmp_path / "w1", 1))
    run_sweep(plan(tmp_path / "w2", 2))
    assert ((tmp_path / "w1" / "results.csv").read_bytes()
            == (tmp_path / "w2" / "results.csv").read_bytes())


def test_scaling_runner(tmp_path):
    table = run_scaling("dicke-xxz", [(0.01, 10.0)], [8, 10, 12, 14],
                        tmp_path / "sc")
    assert len(table) == 1
    assert abs(table[0]["alpha"] - 1.0) < 0.2
    assert (tmp_path / "sc" / "scaling.csv").exists()


def test_cli_point_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "cli-pt"
    code = main(["point", "--preset", "dicke", "--N", "50", "--g", "0.25",
                 "--backend", "collective", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "E0 = -0.50" in printed
    assert (out / "observables.csv").exists()


def test_cli_deep_afm_point(tmp_path, capsys):
    out = tmp_path / "afm"
    code = main(["point", "--preset", "dicke-xxz", "--N", "12", "--g", "0",
                 "--Jz", "-10", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "phase = AFM-NP" in printed
    row = (out / "observables.csv").read_text().splitlines()[1].split(",")
    assert float(row[6]) < 1e-10          # n_mean column


def test_cli_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense_key = 1\n")
    code = main(["point", "--config", str(bad)])
    assert code == 2


def test_cli_oracle(tmp_path, capsys):
    out = tmp_path / "cli-or"
    code = main(["oracle", "--preset", "dicke", "--N", "2", "--g", "0.0",
                 "--n-max", "8", "--out", str(out), "--dump-vector"])
    assert code == 0
    assert (out / "oracle.json").exists()
    assert (out / "eigenvector.npz").exists()
    payload = json.loads((out / "oracle.json").read_text())
    assert payload["energy"] == pytest.approx(-0.5, abs=1e-10)


def test_cli_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("preset = dicke\nN = 50\ng = 0.1\nbackend = collective\n")
    out = tmp_path / "cli-cfg"
    code = main(["point", "--config", str(cfg), "--g", "0.25", "--out", str(out)])
    assert code == 0
    csv_text = (out / "observables.csv").read_text().splitlines()[1]
    assert csv_text.split(",")[1] == "0.25"   # flag overrode the config g


def test_cli_entrypoint_subprocess(tmp_path):
    # the installed console script runs end to end
    out = tmp_path / "sub"
    proc = subprocess.run(
        [sys.executable, "-m", "cavitychain.cli", "point", "--preset", "dicke",
         "--N", "40", "--g", "0.6", "--backend", "collective", "--out", str(out)],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert "phase = PM-SP" in proc.stdout
