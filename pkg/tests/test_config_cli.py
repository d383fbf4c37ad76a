"""Configuration parsing and the command-line interface (run in process)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from mhdbox.cli import main
from mhdbox.compressible import COMPRESSIBLE_CSV_COLUMNS, CompressibleParams
from mhdbox.config import (
    MODES,
    config_digest,
    default_config,
    dump_config,
    load_config,
    parse_config,
)
from mhdbox.diagnostics import CSV_COLUMNS
from mhdbox.errors import ConfigError
from mhdbox.grid import fft_workers, set_fft_workers
from mhdbox.incompressible import SolverParams
from mhdbox.snapshots import load_compressible, load_incompressible, \
    save_incompressible
from mhdbox.presets import alfven


def _write_yaml(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return path


def _inc_run_config(**overrides):
    data = {
        "mode": "incompressible",
        "grid": {"n": 8},
        "initial": {"preset": "alfven", "amplitude": 0.01, "mode": [1, 1, 1]},
        "solver": {"lambda": 0.3, "dt": 0.01, "t_end": 0.05},
        "output": {"figures": False},
    }
    for key, value in overrides.items():
        section, _, sub = key.partition(".")
        if sub:
            data.setdefault(section, {})[sub] = value
        else:
            data[key] = value
    return data


# -- parsing ----------------------------------------------------------------------

def test_parse_minimal_defaults():
    cfg = parse_config({"mode": "incompressible"})
    assert cfg.mode == "incompressible"
    assert cfg.n == 32
    assert cfg.initial.preset == "alfven"
    assert cfg.solver == SolverParams()
    assert cfg.compressible == CompressibleParams()
    assert cfg.output.directory == "out"
    assert cfg.output.figures is True


@pytest.mark.parametrize("data, fragment", [
    ({}, "mode"),
    ({"mode": "spectral"}, "mode"),
    ({"mode": 42}, "mode"),
    ({"mode": "incompressible", "extra": {}}, "extra"),
    ({"mode": "incompressible", "grid": {"n": 9}}, "grid.n"),
    ({"mode": "incompressible", "grid": {"n": 2}}, "grid.n"),
    ({"mode": "incompressible", "grid": {"n": True}}, "grid.n"),
    ({"mode": "incompressible", "grid": {"m": 8}}, "grid.m"),
    ({"mode": "incompressible", "solver": {"viscosity": 1.0}},
     "solver.viscosity"),
    ({"mode": "incompressible", "solver": {"lambda": -1.0}}, "solver"),
    ({"mode": "incompressible", "solver": {"dealias": "yes"}},
     "solver.dealias"),
    ({"mode": "incompressible", "solver": {"H_tilde": [1, 2]}},
     "solver.H_tilde"),
    ({"mode": "incompressible", "solver": 7}, "solver"),
    ({"mode": "incompressible", "initial": {"preset": "vortex"}},
     "initial.preset"),
    ({"mode": "incompressible", "initial": {"amplitude": -0.1}},
     "initial.amplitude"),
    ({"mode": "incompressible", "initial": {"norm_order": 5}},
     "initial.norm_order"),
    ({"mode": "incompressible", "initial": {"mode": [1, 1, 1.5]}},
     "initial.mode"),
    ({"mode": "compressible", "compressible": {"eps": "small"}},
     "compressible.eps"),
    ({"mode": "sweep", "sweep": {"eps_list": 0.2}}, "sweep.eps_list"),
    ({"mode": "sweep", "sweep": {"eps_list": [0.1, 0.2]}}, "sweep"),
    ({"mode": "incompressible",
      "output": {"checkpoint_every": -1}}, "output.checkpoint_every"),
    ({"mode": "incompressible", "output": {"snapshot_times": "later"}},
     "output.snapshot_times"),
    ("not a mapping", "top level"),
])
def test_parse_errors_name_the_key(data, fragment):
    with pytest.raises(ConfigError, match=None) as exc_info:
        parse_config(data)
    assert fragment in str(exc_info.value)


def test_dump_parse_fixed_point():
    data = {
        "mode": "sweep",
        "grid": {"n": 16},
        "initial": {"preset": "random-bandlimited", "amplitude": 0.02,
                    "seed": 3, "kmax": 5, "norm_order": 1},
        "solver": {"lambda": 0.25, "dt": 0.005, "t_end": 0.2,
                   "H_tilde": [0.0, 1.0, 2.0]},
        "compressible": {"mu": 0.5, "lambda_c": 2.0, "eps": 0.05,
                         "gamma": 1.4},
        "sweep": {"eps_list": [0.4, 0.2, 0.1], "T": 0.25, "workers": 2,
                  "h3_bound": 10.0},
        "output": {"directory": "results", "snapshot_times": [0.1, 0.2],
                   "checkpoint_every": 5, "figures": False},
    }
    cfg = parse_config(data)
    dumped = dump_config(cfg)
    again = parse_config(yaml.safe_load(dumped))
    assert again == cfg
    assert dump_config(again) == dumped
    assert config_digest(again) == config_digest(cfg)


def test_default_config_all_modes():
    for mode in MODES:
        cfg = default_config(mode)
        assert cfg.mode == mode
        assert parse_config(yaml.safe_load(dump_config(cfg))) == cfg


def test_parse_mode_alias_and_verify():
    assert parse_config({"mode": "limit-sweep"}).mode == "sweep"
    assert parse_config({"mode": "verify"}).mode == "verify"


def test_config_digest_tracks_content():
    a = parse_config({"mode": "incompressible"})
    b = parse_config({"mode": "incompressible", "grid": {"n": 16}})
    assert config_digest(a) != config_digest(b)
    assert config_digest(a) == config_digest(
        parse_config({"mode": "incompressible"})
    )


def test_load_config_errors(tmp_path):
    missing = tmp_path / "nope.yaml"
    with pytest.raises(OSError):
        load_config(missing)
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    with pytest.raises(ConfigError, match="empty"):
        load_config(empty)
    broken = tmp_path / "broken.yaml"
    broken.write_text("mode: [unclosed\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_config(broken)
    good = tmp_path / "good.yaml"
    good.write_text("mode: compressible\n")
    assert load_config(good).mode == "compressible"


def test_shipped_configs_parse():
    shipped = sorted((Path(__file__).parent.parent / "configs").glob("*.yaml"))
    assert len(shipped) == 4
    for path in shipped:
        cfg = load_config(path)
        assert cfg.mode in MODES


# -- CLI: dump-config ----------------------------------------------------------------

def test_cli_dump_config_default(capsys):
    assert main(["dump-config"]) == 0
    out = capsys.readouterr().out
    cfg = parse_config(yaml.safe_load(out))
    assert cfg.mode == "incompressible"
    assert main(["dump-config", "--mode", "sweep"]) == 0
    assert parse_config(yaml.safe_load(capsys.readouterr().out)).mode == "sweep"


def test_cli_dump_config_echo_is_canonical(tmp_path, capsys):
    path = _write_yaml(tmp_path, "c.yaml", _inc_run_config())
    assert main(["dump-config", str(path)]) == 0
    first = capsys.readouterr().out
    echo = _write_yaml(tmp_path, "echo.yaml", yaml.safe_load(first))
    assert main(["dump-config", str(echo)]) == 0
    assert capsys.readouterr().out == first


# -- CLI: run -----------------------------------------------------------------------

def test_cli_run_artifacts(tmp_path):
    data = _inc_run_config(**{
        "output.figures": True,
        "output.snapshot_times": [0.02],
        "output.checkpoint_every": 2,
    })
    path = _write_yaml(tmp_path, "run.yaml", data)
    outdir = tmp_path / "out"
    assert main(["run", str(path), "--output", str(outdir)]) == 0

    csv_lines = (outdir / "diagnostics.csv").read_text().splitlines()
    assert csv_lines[0] == ",".join(CSV_COLUMNS)
    assert len(csv_lines) == 1 + 6        # header + records at every step

    final = load_incompressible(outdir / "final_state.bin")
    assert final.t == pytest.approx(0.05)
    snap = load_incompressible(outdir / "snapshot_000.bin")
    assert snap.t == pytest.approx(0.02)
    assert (outdir / "checkpoint_000002.bin").exists()
    assert (outdir / "checkpoint_000004.bin").exists()

    for name in ("energy_history.png", "budget.png", "norms.png",
                 "stability.png", "residuals.png"):
        assert (outdir / name).stat().st_size > 0

    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["completed"] is True
    assert manifest["mode"] == "incompressible"
    assert manifest["config_sha256"] == config_digest(load_config(path))
    assert manifest["t_final"] == pytest.approx(0.05)
    assert "diagnostics.csv" in manifest["outputs"]
    assert "energy_history.png" in manifest["outputs"]
    assert manifest["versions"]["mhdbox"]


def test_cli_run_is_reproducible(tmp_path):
    path = _write_yaml(tmp_path, "run.yaml", _inc_run_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(path), "--output", str(out1)]) == 0
    assert main(["run", str(path), "--output", str(out2)]) == 0
    assert (out1 / "diagnostics.csv").read_bytes() == \
        (out2 / "diagnostics.csv").read_bytes()
    assert (out1 / "final_state.bin").read_bytes() == \
        (out2 / "final_state.bin").read_bytes()


def test_cli_run_default_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    data = _inc_run_config(**{"output.directory": "nested/out",
                              "solver.t_end": 0.01})
    path = _write_yaml(tmp_path, "run.yaml", data)
    assert main(["run", str(path)]) == 0
    assert (tmp_path / "nested" / "out" / "diagnostics.csv").exists()


def test_cli_checkpoint_restart(tmp_path):
    full = _write_yaml(tmp_path, "full.yaml",
                       _inc_run_config(**{"solver.t_end": 0.06}))
    half = _write_yaml(tmp_path, "half.yaml",
                       _inc_run_config(**{"solver.t_end": 0.03}))
    out_full, out_half = tmp_path / "full", tmp_path / "half"
    assert main(["run", str(full), "--output", str(out_full)]) == 0
    assert main(["run", str(half), "--output", str(out_half)]) == 0

    resume_data = _inc_run_config(**{"solver.t_end": 0.06})
    resume_data["initial"] = {
        "snapshot": str(out_half / "final_state.bin"),
    }
    resume = _write_yaml(tmp_path, "resume.yaml", resume_data)
    out_resume = tmp_path / "resume"
    assert main(["run", str(resume), "--output", str(out_resume)]) == 0

    a = load_incompressible(out_full / "final_state.bin")
    b = load_incompressible(out_resume / "final_state.bin")
    assert b.t == pytest.approx(a.t)
    np.testing.assert_allclose(b.u_hat.data, a.u_hat.data, atol=1e-12)
    np.testing.assert_allclose(b.B_hat.data, a.B_hat.data, atol=1e-12)


def test_cli_snapshot_resolution_mismatch(tmp_path, grid8):
    snap = tmp_path / "state8.bin"
    save_incompressible(snap, alfven(grid8, amplitude=0.01))
    data = _inc_run_config(**{"grid.n": 16})
    data["initial"] = {"snapshot": str(snap)}
    path = _write_yaml(tmp_path, "mismatch.yaml", data)
    assert main(["run", str(path), "--output", str(tmp_path / "o")]) == 1


def test_cli_run_blowup_exit_code(tmp_path, capsys):
    data = {
        "mode": "incompressible",
        "grid": {"n": 8},
        "initial": {"preset": "taylor-green-mhd", "amplitude": 30.0},
        "solver": {"lambda": 1e-4, "dt": 0.3, "t_end": 3.0,
                   "cfl_action": "off"},
        "output": {"figures": False},
    }
    path = _write_yaml(tmp_path, "blowup.yaml", data)
    outdir = tmp_path / "out"
    with pytest.warns(RuntimeWarning):
        assert main(["run", str(path), "--output", str(outdir)]) == 2
    assert "run failed" in capsys.readouterr().err
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["completed"] is False
    assert manifest["blowup_t"] > 0
    # partial diagnostics still land on disk
    lines = (outdir / "diagnostics.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) >= 2


def test_cli_run_compressible(tmp_path):
    data = {
        "mode": "compressible",
        "grid": {"n": 8},
        "initial": {"preset": "alfven", "amplitude": 0.01},
        "compressible": {"eps": 0.2, "t_end": 0.05, "C_prep": 0.05},
        "output": {"figures": True},
    }
    path = _write_yaml(tmp_path, "comp.yaml", data)
    outdir = tmp_path / "out"
    assert main(["run", str(path), "--output", str(outdir)]) == 0
    lines = (outdir / "diagnostics.csv").read_text().splitlines()
    assert lines[0] == ",".join(COMPRESSIBLE_CSV_COLUMNS)
    state = load_compressible(outdir / "final_state.bin")
    assert state.t == pytest.approx(0.05)
    assert np.all(state.rho > 0)
    for name in ("compressible_energy.png", "compressible_invariants.png"):
        assert (outdir / name).stat().st_size > 0


def _sweep_config(tmp_path, name="sweep.yaml", **extra):
    data = {
        "mode": "sweep",
        "grid": {"n": 8},
        "initial": {"preset": "alfven", "amplitude": 0.01},
        "sweep": {"eps_list": [0.2, 0.1], "T": 0.02, "C_prep": 0.05},
        "output": {"figures": True},
    }
    data.update(extra)
    return _write_yaml(tmp_path, name, data)


def test_cli_sweep_subcommand(tmp_path, capsys):
    path = _sweep_config(tmp_path)
    outdir = tmp_path / "out"
    assert main(["sweep", str(path), "--output", str(outdir)]) == 0
    out = capsys.readouterr().out
    assert "eps = 0.2" in out and "sweep completed" in out
    lines = (outdir / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("eps,e_u,e_H,e_rho")
    assert len(lines) == 3
    assert (outdir / "convergence.png").stat().st_size > 0
    manifest = json.loads((outdir / "manifest.json").read_text())
    assert manifest["eps"] == [0.2, 0.1]


def test_cli_run_dispatches_sweep_mode(tmp_path):
    path = _sweep_config(tmp_path, output={"figures": False})
    outdir = tmp_path / "out"
    assert main(["run", str(path), "--output", str(outdir)]) == 0
    assert (outdir / "sweep.csv").exists()


def test_cli_sweep_rejects_other_modes(tmp_path, capsys):
    path = _write_yaml(tmp_path, "inc.yaml", _inc_run_config())
    assert main(["sweep", str(path)]) == 1
    assert "configuration error" in capsys.readouterr().err


# -- CLI: error handling and exit codes ----------------------------------------------

def test_cli_missing_config_is_io_error(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.yaml")]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_cli_bad_config_is_config_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("mode: [unclosed\n")
    assert main(["run", str(path)]) == 1
    assert "configuration error" in capsys.readouterr().err


def test_cli_usage_errors_exit_1():
    with pytest.raises(SystemExit) as exc_info:
        main([])
    assert exc_info.value.code == 1
    with pytest.raises(SystemExit) as exc_info:
        main(["frobnicate"])
    assert exc_info.value.code == 1


def test_cli_verify():
    assert main(["verify"]) == 0


def test_cli_run_verify_mode(tmp_path):
    path = _write_yaml(tmp_path, "v.yaml", {"mode": "verify"})
    assert main(["run", str(path)]) == 0


def test_cli_config_flag(tmp_path, capsys):
    path = _write_yaml(tmp_path, "t.yaml",
                       _inc_run_config(**{"solver.t_end": 0.0}))
    out = tmp_path / "o"
    assert main(["run", "--config", str(path), "--output", str(out)]) == 0
    assert (out / "diagnostics.csv").exists()
    # both spellings at once, or neither, is a usage error
    assert main(["run", str(path), "--config", str(path)]) == 1
    assert "not both" in capsys.readouterr().err
    assert main(["run"]) == 1
    assert "config file is required" in capsys.readouterr().err


# -- CLI: threading ----------------------------------------------------------------------

def test_cli_threads_flag(tmp_path):
    path = _write_yaml(tmp_path, "t.yaml",
                       _inc_run_config(**{"solver.t_end": 0.0}))
    try:
        code = main(["run", str(path), "--output", str(tmp_path / "o"),
                     "--threads", "2"])
        assert code == 0
        assert fft_workers() == 2
    finally:
        set_fft_workers(1)


def test_cli_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MHDBOX_THREADS", "3")
    path = _write_yaml(tmp_path, "t.yaml",
                       _inc_run_config(**{"solver.t_end": 0.0}))
    try:
        assert main(["run", str(path), "--output", str(tmp_path / "o")]) == 0
        assert fft_workers() == 3
        # the flag wins over the environment
        assert main(["run", str(path), "--output", str(tmp_path / "o2"),
                     "--threads", "2"]) == 0
        assert fft_workers() == 2
    finally:
        set_fft_workers(1)


def test_cli_threads_invalid(tmp_path, monkeypatch, capsys):
    path = _write_yaml(tmp_path, "t.yaml", _inc_run_config())
    assert main(["run", str(path), "--threads", "0"]) == 1
    monkeypatch.setenv("MHDBOX_THREADS", "many")
    assert main(["run", str(path)]) == 1
    assert "MHDBOX_THREADS" in capsys.readouterr().err
