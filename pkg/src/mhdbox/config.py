"""Run configuration: strict YAML in, frozen dataclasses out.

The file is a mapping with a required top-level ``mode`` plus optional
sections; every key is type-checked and unknown keys are rejected, with
error messages naming the full key path (e.g. ``solver.cfl_safety``).

Sections and their targets:

=============  ==================================================
mode           "incompressible" | "compressible" | "sweep"
               (alias "limit-sweep") | "verify"
grid           resolution (grid.n)
initial        preset name and its arguments, or a snapshot path
solver         incompressible SolverParams ("lambda" -> viscosity)
compressible   CompressibleParams
sweep          SweepConfig
output         directory, snapshot times, checkpointing, figures
=============  ==================================================

Each mode reads only its own solver section (plus ``grid``, ``initial``,
``output``), so a single file can drive all three.  ``dump_config``
serializes a configuration back to YAML such that parsing the dump
reproduces it exactly; ``config_digest`` hashes that canonical form.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .compressible import CompressibleParams
from .errors import ConfigError
from .incompressible import SolverParams
from .presets import PRESETS
from .sweep import SweepConfig

__all__ = [
    "InitialConfig",
    "OutputConfig",
    "RunConfig",
    "MODES",
    "parse_config",
    "load_config",
    "default_config",
    "dump_config",
    "config_digest",
]

MODES = ("incompressible", "compressible", "sweep", "verify")

# Accepted spellings that normalize to a canonical mode at parse time.
_MODE_ALIASES = {"limit-sweep": "sweep"}


@dataclass(frozen=True)
class InitialConfig:
    """Initial-state selection: a preset by name, or a snapshot file."""

    preset: str = "alfven"
    amplitude: float = 0.01
    seed: int = 0
    mode: tuple[int, int, int] = (1, 1, 1)
    kmax: int = 4
    norm_order: int = 2
    phase: float = 0.0
    snapshot: str | None = None

    def preset_kwargs(self) -> dict:
        """Arguments the named preset actually accepts."""
        if self.preset == "steady":
            return {}
        if self.preset == "alfven":
            return {"amplitude": self.amplitude, "mode": self.mode,
                    "phase": self.phase}
        if self.preset == "taylor-green-mhd":
            return {"amplitude": self.amplitude}
        if self.preset == "random-bandlimited":
            return {"amplitude": self.amplitude, "seed": self.seed,
                    "kmax": self.kmax, "norm_order": self.norm_order}
        raise ConfigError(f"initial.preset: unknown preset {self.preset!r}")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshot_times: tuple[float, ...] = ()
    checkpoint_every: int = 0
    figures: bool = True


@dataclass(frozen=True)
class RunConfig:
    mode: str
    n: int = 32
    initial: InitialConfig = field(default_factory=InitialConfig)
    solver: SolverParams = field(default_factory=SolverParams)
    compressible: CompressibleParams = field(default_factory=CompressibleParams)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# -- typed readers ----------------------------------------------------------

def _type_name(value) -> str:
    return type(value).__name__


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {_type_name(value)}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {_type_name(value)}")
    return value


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected a boolean, got {_type_name(value)}")
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string, got {_type_name(value)}")
    return value


def _as_vec3(value, path: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of 3 numbers")
    return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _as_int3(value, path: str) -> tuple[int, int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path}: expected a list of 3 integers")
    return tuple(_as_int(v, f"{path}[{i}]") for i, v in enumerate(value))


def _as_float_list(value, path: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigError(f"{path}: expected a list of numbers")
    return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _optional(reader):
    def read(value, path):
        return None if value is None else reader(value, path)
    return read


def _read_section(data: dict, name: str, spec: dict) -> dict:
    """Read one section dict against {yaml_key: (reader, kwarg_name)}."""
    section = data.get(name)
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"{name}: expected a mapping")
    unknown = set(section) - set(spec)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{name}.{key}: unknown key")
    out = {}
    for key, value in section.items():
        reader, kwarg = spec[key]
        out[kwarg] = reader(value, f"{name}.{key}")
    return out


_SOLVER_SPEC = {
    "lambda": (_as_float, "lam"),
    "H_tilde": (_as_vec3, "H_tilde"),
    "dt": (_as_float, "dt"),
    "t_end": (_as_float, "t_end"),
    "dealias": (_as_bool, "dealias"),
    "record_every": (_as_int, "record_every"),
    "cfl_safety": (_as_float, "cfl_safety"),
    "cfl_action": (_as_str, "cfl_action"),
    "project_B": (_as_bool, "project_B"),
}

_COMPRESSIBLE_SPEC = {
    "mu": (_as_float, "mu"),
    "lambda_c": (_as_float, "lambda_c"),
    "K": (_as_float, "K"),
    "gamma": (_as_float, "gamma"),
    "eps": (_as_float, "eps"),
    "rho_tilde": (_as_float, "rho_tilde"),
    "H_tilde": (_as_vec3, "H_tilde"),
    "C_prep": (_as_float, "C_prep"),
    "dt": (_optional(_as_float), "dt"),
    "t_end": (_as_float, "t_end"),
    "dealias": (_as_bool, "dealias"),
    "record_every": (_as_int, "record_every"),
    "cfl_safety": (_as_float, "cfl_safety"),
    "cfl_action": (_as_str, "cfl_action"),
}

_SWEEP_SPEC = {
    "eps_list": (_as_float_list, "eps_list"),
    "T": (_as_float, "T"),
    "mu": (_as_float, "mu"),
    "lambda_c": (_optional(_as_float), "lambda_c"),
    "K": (_as_float, "K"),
    "gamma": (_as_float, "gamma"),
    "C_prep": (_as_float, "C_prep"),
    "H_tilde": (_as_vec3, "H_tilde"),
    "rho_tilde": (_as_float, "rho_tilde"),
    "dt_inc": (_optional(_as_float), "dt_inc"),
    "dt_comp": (_optional(_as_float), "dt_comp"),
    "dealias": (_as_bool, "dealias"),
    "record_every": (_as_int, "record_every"),
    "cfl_safety": (_as_float, "cfl_safety"),
    "h3_bound": (_optional(_as_float), "h3_bound"),
    "workers": (_as_int, "workers"),
}

_INITIAL_SPEC = {
    "preset": (_as_str, "preset"),
    "amplitude": (_as_float, "amplitude"),
    "seed": (_as_int, "seed"),
    "mode": (_as_int3, "mode"),
    "kmax": (_as_int, "kmax"),
    "norm_order": (_as_int, "norm_order"),
    "phase": (_as_float, "phase"),
    "snapshot": (_optional(_as_str), "snapshot"),
}

_OUTPUT_SPEC = {
    "directory": (_as_str, "directory"),
    "snapshot_times": (_as_float_list, "snapshot_times"),
    "checkpoint_every": (_as_int, "checkpoint_every"),
    "figures": (_as_bool, "figures"),
}

_SECTIONS = ("mode", "grid", "initial", "solver", "compressible", "sweep",
             "output")


def parse_config(data: dict) -> RunConfig:
    """Validate a parsed YAML mapping and build the configuration tree."""
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown key")
    if "mode" not in data:
        raise ConfigError("mode: missing required key")
    mode = _as_str(data["mode"], "mode")
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ConfigError(f"mode: must be one of {MODES}, got {mode!r}")

    grid_kwargs = _read_section(data, "grid", {"n": (_as_int, "n")})
    n = grid_kwargs.get("n", 32)
    if n < 4 or n % 2:
        raise ConfigError(f"grid.n: must be an even integer >= 4, got {n}")

    initial = InitialConfig(**_read_section(data, "initial", _INITIAL_SPEC))
    if initial.preset not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(
            f"initial.preset: unknown preset {initial.preset!r} (known: {known})"
        )
    if initial.amplitude < 0:
        raise ConfigError(
            f"initial.amplitude: must be >= 0, got {initial.amplitude}"
        )
    if not 0 <= initial.norm_order <= 3:
        raise ConfigError(
            f"initial.norm_order: must be in [0, 3], got {initial.norm_order}"
        )

    def build(section, cls, kwargs):
        try:
            return cls(**kwargs)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{section}: {exc}") from None

    solver = build("solver", SolverParams,
                   _read_section(data, "solver", _SOLVER_SPEC))
    compressible = build("compressible", CompressibleParams,
                         _read_section(data, "compressible",
                                       _COMPRESSIBLE_SPEC))
    sweep = build("sweep", SweepConfig,
                  _read_section(data, "sweep", _SWEEP_SPEC))

    output_kwargs = _read_section(data, "output", _OUTPUT_SPEC)
    output = OutputConfig(**output_kwargs)
    if output.checkpoint_every < 0:
        raise ConfigError(
            f"output.checkpoint_every: must be >= 0, got "
            f"{output.checkpoint_every}"
        )

    return RunConfig(mode=mode, n=n, initial=initial, solver=solver,
                     compressible=compressible, sweep=sweep, output=output)


def load_config(path) -> RunConfig:
    """Parse a YAML file into a RunConfig."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    if data is None:
        raise ConfigError(f"{path}: empty configuration")
    return parse_config(data)


def default_config(mode: str = "incompressible") -> RunConfig:
    """The all-defaults configuration for a given mode."""
    return parse_config({"mode": mode})


def _dump_section(obj, spec: dict) -> dict:
    by_kwarg = {kwarg: key for key, (_, kwarg) in spec.items()}
    out = {}
    for f in fields(obj):
        key = by_kwarg[f.name]
        value = getattr(obj, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def dump_config(cfg: RunConfig) -> str:
    """Serialize to YAML; parsing the result reproduces cfg exactly."""
    data = {
        "mode": cfg.mode,
        "grid": {"n": cfg.n},
        "initial": _dump_section(cfg.initial, _INITIAL_SPEC),
        "solver": _dump_section(cfg.solver, _SOLVER_SPEC),
        "compressible": _dump_section(cfg.compressible, _COMPRESSIBLE_SPEC),
        "sweep": _dump_section(cfg.sweep, _SWEEP_SPEC),
        "output": _dump_section(cfg.output, _OUTPUT_SPEC),
    }
    return yaml.safe_dump(data, sort_keys=False)


def config_digest(cfg: RunConfig) -> str:
    """SHA-256 of the canonical YAML dump."""
    return hashlib.sha256(dump_config(cfg).encode()).hexdigest()
