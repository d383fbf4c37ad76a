"""Command-line interface.

Subcommands::

    mhdbox run CONFIG.yaml [--output DIR] [--threads N]
    mhdbox sweep CONFIG.yaml [--output DIR] [--threads N]
    mhdbox verify
    mhdbox dump-config [CONFIG.yaml] [--mode MODE]

``run`` and ``sweep`` also accept the config path as ``--config PATH`` in
place of the positional argument.  ``run`` dispatches on the config's
``mode`` (a sweep config is forwarded to the sweep path, a verify config
runs the self-checks); ``sweep`` insists on mode "sweep".  Every run writes
its delimited output, a ``manifest.json`` (config digest, library versions,
wall time, completion flag), binary state files, and, unless disabled,
rendered figures, all into the output directory.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 the
integration failed (blow-up, CFL violation, aborted sweep; partial output
is still written), 3 I/O failure.  The ``MHDBOX_THREADS`` environment
variable (overridden by ``--threads``) sets the FFT worker count and the
sweep's process-local parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__, diagnostics, report, snapshots
from .compressible import run_compressible, well_prepared_init, \
    write_compressible_csv
from .config import (
    MODES,
    RunConfig,
    config_digest,
    default_config,
    dump_config,
    load_config,
)
from .errors import BlowupError, CFLError, ConfigError, SweepAborted
from .grid import make_grid, set_fft_workers
from .incompressible import run as run_incompressible
from .presets import make_preset
from .sweep import run_sweep, write_sweep_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with the config exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mhdbox",
                     description="Periodic-box MHD solvers and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate per a config file")
    p_run.add_argument("config", type=Path, nargs="?", default=None)
    p_run.add_argument("--config", type=Path, default=None, dest="config_opt",
                       metavar="PATH", help="alternative to the positional "
                       "config path")
    p_run.add_argument("--output", type=Path, default=None,
                       help="override output.directory")
    p_run.add_argument("--threads", type=int, default=None,
                       help="FFT/sweep worker count (default MHDBOX_THREADS)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a Mach-number sweep config")
    p_sweep.add_argument("config", type=Path, nargs="?", default=None)
    p_sweep.add_argument("--config", type=Path, default=None,
                         dest="config_opt", metavar="PATH")
    p_sweep.add_argument("--output", type=Path, default=None)
    p_sweep.add_argument("--threads", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify",
                              help="run the fast invariant self-checks")
    p_verify.set_defaults(func=cmd_verify)

    p_dump = sub.add_parser("dump-config",
                            help="print a canonical config YAML")
    p_dump.add_argument("config", type=Path, nargs="?", default=None,
                        help="echo this file in canonical form "
                             "(defaults otherwise)")
    p_dump.add_argument("--mode", choices=MODES, default="incompressible")
    p_dump.set_defaults(func=cmd_dump_config)
    return parser


def _config_path(args) -> Path:
    if args.config is not None and args.config_opt is not None:
        raise ConfigError(
            "give the config path either positionally or via --config, "
            "not both"
        )
    path = args.config_opt if args.config_opt is not None else args.config
    if path is None:
        raise ConfigError("a config file is required (positional or --config)")
    return path


def _apply_threads(args) -> int:
    threads = args.threads
    if threads is None:
        raw = os.environ.get("MHDBOX_THREADS", "").strip()
        if raw:
            try:
                threads = int(raw)
            except ValueError:
                raise ConfigError(
                    f"MHDBOX_THREADS: expected an integer, got {raw!r}"
                ) from None
    if threads is None:
        return 1
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    set_fft_workers(threads)
    return threads


def _manifest(outdir: Path, cfg: RunConfig, t0: float, completed: bool,
              reason: str, outputs: list[str], extra: dict | None = None):
    import numpy
    import scipy

    payload = {
        "mode": cfg.mode,
        "completed": completed,
        "reason": reason,
        "config_sha256": config_digest(cfg),
        "config": dump_config(cfg),
        "versions": {
            "mhdbox": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": round(time.monotonic() - t0, 3),
        "outputs": sorted(outputs),
    }
    if extra:
        payload.update(extra)
    (outdir / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n")


def _initial_state(cfg: RunConfig):
    """Incompressible base state: snapshot if named, preset otherwise."""
    if cfg.initial.snapshot is not None:
        state = snapshots.load_incompressible(cfg.initial.snapshot)
        if state.grid.n != cfg.n:
            raise ConfigError(
                f"initial.snapshot: resolution {state.grid.n} does not match "
                f"grid.n = {cfg.n}"
            )
        return state
    grid = make_grid(cfg.n)
    return make_preset(cfg.initial.preset, grid, **cfg.initial.preset_kwargs())


def _run_incompressible(cfg: RunConfig, outdir: Path, t0: float) -> int:
    state = _initial_state(cfg)
    outputs = ["diagnostics.csv", "manifest.json"]

    checkpoints: list[str] = []

    def on_step(s, i):
        if cfg.output.checkpoint_every and i % cfg.output.checkpoint_every == 0:
            name = f"checkpoint_{i:06d}.bin"
            snapshots.save_incompressible(outdir / name, s)
            checkpoints.append(name)

    hook = on_step if cfg.output.checkpoint_every else None
    try:
        traj = run_incompressible(state, cfg.solver,
                                  snapshot_times=cfg.output.snapshot_times,
                                  on_step=hook)
    except BlowupError as err:
        if err.records:
            diagnostics.write_records_csv(outdir / "diagnostics.csv",
                                          err.records)
        _manifest(outdir, cfg, t0, False, f"blowup: {err}",
                  outputs + checkpoints, {"blowup_t": err.t})
        print(f"run failed: {err}", file=sys.stderr)
        return EXIT_SOLVER

    diagnostics.write_records_csv(outdir / "diagnostics.csv", traj.records)
    snapshots.save_incompressible(outdir / "final_state.bin", traj.final)
    outputs += ["final_state.bin"] + checkpoints
    for i, snap in enumerate(traj.snapshots):
        name = f"snapshot_{i:03d}.bin"
        snapshots.save_incompressible(outdir / name, snap)
        outputs.append(name)
    if cfg.output.figures:
        outputs += [p.name for p in
                    report.render_run_figures(traj.records, outdir)]
    _manifest(outdir, cfg, t0, True, "completed", outputs,
              {"t_final": traj.final.t,
               "snapshot_times": [s.t for s in traj.snapshots]})
    print(f"completed: t = {traj.final.t:.6g}, "
          f"{len(traj.records)} records -> {outdir}")
    return EXIT_OK


def _run_compressible(cfg: RunConfig, outdir: Path, t0: float) -> int:
    params = cfg.compressible
    if cfg.initial.snapshot is not None:
        state = snapshots.load_compressible(cfg.initial.snapshot)
        if state.grid.n != cfg.n:
            raise ConfigError(
                f"initial.snapshot: resolution {state.grid.n} does not match "
                f"grid.n = {cfg.n}"
            )
    else:
        grid = make_grid(cfg.n)
        base = make_preset(cfg.initial.preset, grid,
                           **cfg.initial.preset_kwargs())
        state = well_prepared_init(base, params)
    outputs = ["diagnostics.csv", "manifest.json"]

    checkpoints: list[str] = []

    def on_step(s, i):
        if cfg.output.checkpoint_every and i % cfg.output.checkpoint_every == 0:
            name = f"checkpoint_{i:06d}.bin"
            snapshots.save_compressible(outdir / name, s)
            checkpoints.append(name)

    hook = on_step if cfg.output.checkpoint_every else None
    try:
        traj = run_compressible(state, params,
                                snapshot_times=cfg.output.snapshot_times,
                                on_step=hook)
    except BlowupError as err:
        if err.records:
            write_compressible_csv(outdir / "diagnostics.csv", err.records)
        _manifest(outdir, cfg, t0, False, f"blowup: {err}",
                  outputs + checkpoints, {"blowup_t": err.t})
        print(f"run failed: {err}", file=sys.stderr)
        return EXIT_SOLVER

    write_compressible_csv(outdir / "diagnostics.csv", traj.records)
    snapshots.save_compressible(outdir / "final_state.bin", traj.final)
    outputs += ["final_state.bin"] + checkpoints
    for i, snap in enumerate(traj.snapshots):
        name = f"snapshot_{i:03d}.bin"
        snapshots.save_compressible(outdir / name, snap)
        outputs.append(name)
    if cfg.output.figures:
        outputs += [p.name for p in
                    report.render_compressible_figures(traj.records, outdir)]
    _manifest(outdir, cfg, t0, True, "completed", outputs,
              {"t_final": traj.final.t,
               "snapshot_times": [s.t for s in traj.snapshots]})
    print(f"completed: t = {traj.final.t:.6g}, "
          f"{len(traj.records)} records -> {outdir}")
    return EXIT_OK


def _run_sweep(cfg: RunConfig, outdir: Path, t0: float, threads: int) -> int:
    sweep_cfg = cfg.sweep
    if threads > 1 and sweep_cfg.workers == 1:
        sweep_cfg = replace(sweep_cfg, workers=threads)
    initial = _initial_state(cfg)
    outputs = ["sweep.csv", "manifest.json"]
    try:
        result = run_sweep(initial, sweep_cfg)
    except SweepAborted as err:
        write_sweep_csv(outdir / "sweep.csv", err.partial)
        if cfg.output.figures and err.partial.rows:
            outputs += [p.name for p in
                        report.render_sweep_figures(err.partial, outdir)]
        _manifest(outdir, cfg, t0, False, f"aborted: {err.cause}", outputs,
                  {"completed_eps": [r.eps for r in err.partial.rows]})
        print(f"sweep aborted: {err.cause}", file=sys.stderr)
        return EXIT_SOLVER

    write_sweep_csv(outdir / "sweep.csv", result)
    if cfg.output.figures:
        outputs += [p.name for p in report.render_sweep_figures(result, outdir)]
    _manifest(outdir, cfg, t0, True, "completed", outputs,
              {"eps": [r.eps for r in result.rows],
               "orders_u": result.orders_u})
    for row, order in zip(result.rows,
                          ["-"] + [f"{o:.3f}" for o in result.orders_u]):
        print(f"eps = {row.eps:<8g} e_u = {row.e_u:.6e}  "
              f"e_H = {row.e_H:.6e}  e_rho = {row.e_rho:.6e}  "
              f"order(e_u) = {order}")
    print(f"sweep completed -> {outdir}")
    return EXIT_OK


def _prepare_outdir(cfg: RunConfig, override: Path | None) -> Path:
    outdir = Path(override) if override is not None else Path(
        cfg.output.directory
    )
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def cmd_run(args) -> int:
    threads = _apply_threads(args)
    cfg = load_config(_config_path(args))
    if cfg.mode == "verify":
        return cmd_verify(args)
    outdir = _prepare_outdir(cfg, args.output)
    t0 = time.monotonic()
    if cfg.mode == "incompressible":
        return _run_incompressible(cfg, outdir, t0)
    if cfg.mode == "compressible":
        return _run_compressible(cfg, outdir, t0)
    return _run_sweep(cfg, outdir, t0, threads)


def cmd_sweep(args) -> int:
    threads = _apply_threads(args)
    cfg = load_config(_config_path(args))
    if cfg.mode != "sweep":
        raise ConfigError(
            f"mode: the sweep subcommand needs mode 'sweep', got {cfg.mode!r}"
        )
    outdir = _prepare_outdir(cfg, args.output)
    return _run_sweep(cfg, outdir, time.monotonic(), threads)


def cmd_verify(args) -> int:
    from .verify import run_verify

    return EXIT_OK if run_verify() else EXIT_CONFIG


def cmd_dump_config(args) -> int:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = default_config(args.mode)
    sys.stdout.write(dump_config(cfg))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowupError, CFLError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, snapshots.SnapshotFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
