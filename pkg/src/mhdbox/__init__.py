"""Pseudo-spectral periodic-box solvers for viscous, zero-resistivity MHD
and its low-Mach compressible counterpart, with an identity-checking
diagnostics engine and a Mach-number sweep harness."""

from .errors import (
    BlowupError,
    CFLError,
    ConfigError,
    MhdboxError,
    SweepAborted,
)
from .grid import (
    Grid,
    RealVectorField,
    SpectralVectorField,
    fft_workers,
    fftv,
    ifftv,
    make_grid,
    sample_field,
    set_fft_workers,
)
from .operators import (
    curl,
    dealias_two_thirds,
    derivative,
    divergence,
    gradient,
    laplacian,
    leray_project,
    multiply_pointwise,
)
from .incompressible import (
    SimState,
    SolverParams,
    Trajectory,
    advective_dt_limit,
    make_state,
    recover_pressure,
    rhs_incompressible,
    run,
    step,
)
from .diagnostics import (
    DiagnosticsRecord,
    compute_record,
    dissipation_budget,
    energy,
    energy_balance_residual,
    identity_residual,
    interpolation_ratio,
    l2_norm,
    read_records_csv,
    sobolev_norm,
    tail_fraction,
    write_records_csv,
    x_functional,
)
from .presets import PRESETS, make_preset
from .compressible import (
    CompressibleParams,
    CompressibleState,
    CompressibleTrajectory,
    run_compressible,
    stable_dt,
    step_compressible,
    well_prepared_init,
    write_compressible_csv,
)
from .sweep import (
    SweepConfig,
    SweepResult,
    SweepRow,
    observed_order,
    run_sweep,
    write_sweep_csv,
)
from .snapshots import (
    load_compressible,
    load_incompressible,
    read_snapshot,
    save_compressible,
    save_incompressible,
    write_snapshot,
)
from .config import (
    RunConfig,
    config_digest,
    default_config,
    dump_config,
    load_config,
    parse_config,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "MhdboxError", "ConfigError", "CFLError", "BlowupError", "SweepAborted",
    # grid and fields
    "Grid", "make_grid", "RealVectorField", "SpectralVectorField",
    "sample_field", "fftv", "ifftv", "set_fft_workers", "fft_workers",
    # operators
    "derivative", "gradient", "divergence", "curl", "laplacian",
    "leray_project", "dealias_two_thirds", "multiply_pointwise",
    # incompressible solver
    "SolverParams", "SimState", "Trajectory", "make_state",
    "rhs_incompressible", "step", "run", "recover_pressure",
    "advective_dt_limit",
    # diagnostics
    "DiagnosticsRecord", "compute_record", "energy", "l2_norm",
    "sobolev_norm", "x_functional", "identity_residual", "tail_fraction",
    "interpolation_ratio", "energy_balance_residual", "dissipation_budget",
    "write_records_csv", "read_records_csv",
    # presets
    "PRESETS", "make_preset",
    # compressible solver
    "CompressibleParams", "CompressibleState", "CompressibleTrajectory",
    "step_compressible", "run_compressible", "stable_dt",
    "well_prepared_init", "write_compressible_csv",
    # sweep
    "SweepConfig", "SweepRow", "SweepResult", "run_sweep", "observed_order",
    "write_sweep_csv",
    # snapshots
    "write_snapshot", "read_snapshot", "save_incompressible",
    "load_incompressible", "save_compressible", "load_compressible",
    # config
    "RunConfig", "parse_config", "load_config", "default_config",
    "dump_config", "config_digest",
]
