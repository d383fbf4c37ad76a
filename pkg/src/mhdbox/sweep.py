"""Mach-number sweep: compressible runs against an incompressible reference.

For a sequence of decreasing eps values, the sweep builds well-prepared
compressible data on top of a shared incompressible initial state, runs both
solvers to the same final time on the same grid, and measures

    e_u(eps)   = || u_eps(T) - u(T) ||_{L2}
    e_H(eps)   = || H_eps(T) - (B(T) + H_tilde) ||_{L2}
    e_rho(eps) = || rho_eps(T) - rho_tilde ||_{L2}

Both solvers share the spatial discretization, so the measured errors
isolate the eps-dependence (plus the tiny RK4-in-time floor).  The
correspondence requires rho_tilde = 1 and the compressible shear viscosity
mu equal to the incompressible viscosity; the config enforces both.

Empirical convergence orders are reported pairwise as
log(e_i / e_{i+1}) / log(eps_i / eps_{i+1}); a vanishing finer error yields
the sentinel +inf (and -inf for a vanishing coarser error).

Runs for different eps are independent, so they may execute on a thread
pool (``workers > 1``) with bit-identical results.  If any run blows up or
trips its CFL guard, the sweep raises SweepAborted carrying a SweepResult
of the rows that did complete.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compressible import (
    CompressibleParams,
    run_compressible,
    well_prepared_init,
)
from .errors import BlowupError, CFLError, ConfigError, SweepAborted
from .grid import fftv
from .incompressible import SimState, SolverParams, advective_dt_limit, run
from . import diagnostics

__all__ = [
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "observed_order",
    "run_sweep",
    "write_sweep_csv",
    "SWEEP_CSV_COLUMNS",
]


@dataclass(frozen=True)
class SweepConfig:
    """Sweep parameters; eps_list must be positive and strictly decreasing.

    ``lambda_c=None`` reuses ``mu`` for the dilatational viscosity.
    ``dt_inc``/``dt_comp=None`` pick stable steps automatically (rounded so
    an integer number of steps lands exactly on T).  ``h3_bound``, if set,
    rejects initial data whose combined H^3 size exceeds it, since the
    sweep's premise is a fixed Sobolev budget as eps varies.
    """

    eps_list: tuple[float, ...] = (0.2, 0.1, 0.05)
    T: float = 0.5
    mu: float = 1.0
    lambda_c: float | None = None
    K: float = 1.0
    gamma: float = 2.0
    C_prep: float = 0.05
    H_tilde: tuple[float, float, float] = (1.0, 1.0, 1.0)
    rho_tilde: float = 1.0
    dt_inc: float | None = None
    dt_comp: float | None = None
    dealias: bool = True
    record_every: int = 1
    cfl_safety: float = 0.5
    h3_bound: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "eps_list",
                           tuple(float(e) for e in self.eps_list))
        object.__setattr__(self, "H_tilde",
                           tuple(float(h) for h in self.H_tilde))
        if not self.eps_list:
            raise ConfigError("eps_list must not be empty")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError(f"eps_list entries must be > 0, got {self.eps_list}")
        if any(a <= b for a, b in zip(self.eps_list, self.eps_list[1:])):
            raise ConfigError(
                f"eps_list must be strictly decreasing, got {self.eps_list}"
            )
        if self.T < 0:
            raise ConfigError(f"T must be >= 0, got {self.T}")
        if self.mu <= 0:
            raise ConfigError(f"mu must be > 0, got {self.mu}")
        if self.rho_tilde != 1.0:
            raise ConfigError(
                "rho_tilde must be 1 for the incompressible reference to "
                f"match the limit dynamics, got {self.rho_tilde}"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def compressible_params(self, eps: float) -> CompressibleParams:
        return CompressibleParams(
            mu=self.mu,
            lambda_c=self.mu if self.lambda_c is None else self.lambda_c,
            K=self.K,
            gamma=self.gamma,
            eps=eps,
            rho_tilde=self.rho_tilde,
            H_tilde=self.H_tilde,
            C_prep=self.C_prep,
            dt=self.dt_comp,
            t_end=self.T,
            dealias=self.dealias,
            record_every=self.record_every,
            cfl_safety=self.cfl_safety,
            cfl_action="error",
        )


@dataclass
class SweepRow:
    eps: float
    e_u: float
    e_H: float
    e_rho: float


@dataclass
class SweepResult:
    rows: list
    orders_u: list
    orders_H: list
    orders_rho: list
    inc_records: list
    comp_records: dict      # eps -> list[CompressibleRecord]


def observed_order(errors, eps_list) -> list[float]:
    """Pairwise empirical orders log(e_i/e_j) / log(eps_i/eps_j).

    A vanishing finer error gives +inf (converged to rounding), a vanishing
    coarser one -inf; both vanishing gives nan.
    """
    if len(errors) != len(eps_list):
        raise ValueError("errors and eps_list must have equal length")
    out = []
    for (e1, ep1), (e2, ep2) in zip(zip(errors, eps_list),
                                    zip(errors[1:], eps_list[1:])):
        if e1 == 0.0 and e2 == 0.0:
            out.append(math.nan)
        elif e2 == 0.0:
            out.append(math.inf)
        elif e1 == 0.0:
            out.append(-math.inf)
        else:
            out.append(math.log(e1 / e2) / math.log(ep1 / ep2))
    return out


def _l2_of(c: np.ndarray, volume: float) -> float:
    return float(np.sqrt(volume * np.sum(c.real**2 + c.imag**2)))


def _sweep_row(initial: SimState, ref_final: SimState, eps: float,
               config: SweepConfig):
    """One compressible run and its errors against the reference final state."""
    params = config.compressible_params(eps)
    state0 = well_prepared_init(initial, params)
    traj = run_compressible(state0, params)
    grid = initial.grid
    vol = grid.volume

    du = fftv(traj.final.u.data) - ref_final.u_hat.data
    target_H = ref_final.B_hat.data.copy()
    target_H[:, 0, 0, 0] += np.array(config.H_tilde, dtype=complex)
    dH = traj.final.H_hat.data - target_H
    drho = fftv(traj.final.rho)
    drho[0, 0, 0] -= config.rho_tilde

    row = SweepRow(
        eps=eps,
        e_u=_l2_of(du, vol),
        e_H=_l2_of(dH, vol),
        e_rho=_l2_of(drho, vol),
    )
    return row, traj.records


def run_sweep(initial: SimState, config: SweepConfig) -> SweepResult:
    """Run the full sweep off a shared incompressible initial state.

    The reference incompressible run uses viscosity mu and the same grid,
    background field, dealiasing, and final time.  Raises SweepAborted
    (carrying the completed rows as a partial SweepResult) if any
    compressible run fails.
    """
    if config.h3_bound is not None:
        size = math.hypot(diagnostics.sobolev_norm(initial.u_hat, 3),
                          diagnostics.sobolev_norm(initial.B_hat, 3))
        if size > config.h3_bound:
            raise ConfigError(
                f"initial data H^3 size {size:.6g} exceeds h3_bound "
                f"{config.h3_bound:.6g}"
            )

    t_end = initial.t + config.T
    dt_inc = config.dt_inc
    inc_params = SolverParams(
        lam=config.mu,
        H_tilde=config.H_tilde,
        dt=dt_inc if dt_inc is not None else 1.0,
        t_end=t_end,
        dealias=config.dealias,
        record_every=config.record_every,
        cfl_safety=config.cfl_safety,
        cfl_action="error",
    )
    if dt_inc is None and config.T > 0:
        # Comfortably inside the advective limit and fine enough that the
        # reference's time error sits far below the eps-driven differences.
        dt_inc = min(advective_dt_limit(initial, inc_params), config.T / 50.0)
        dt_inc = config.T / math.ceil(config.T / dt_inc)
        inc_params = SolverParams(
            lam=config.mu, H_tilde=config.H_tilde, dt=dt_inc, t_end=t_end,
            dealias=config.dealias, record_every=config.record_every,
            cfl_safety=config.cfl_safety, cfl_action="error",
        )
    ref = run(initial, inc_params)

    outcomes: dict[float, tuple] = {}
    failure: BaseException | None = None
    if config.workers == 1:
        for eps in config.eps_list:
            try:
                outcomes[eps] = _sweep_row(initial, ref.final, eps, config)
            except (BlowupError, CFLError) as exc:
                failure = exc
                break
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = {
                eps: pool.submit(_sweep_row, initial, ref.final, eps, config)
                for eps in config.eps_list
            }
            for eps in config.eps_list:
                try:
                    outcomes[eps] = futures[eps].result()
                except (BlowupError, CFLError) as exc:
                    if failure is None:
                        failure = exc

    done = [eps for eps in config.eps_list if eps in outcomes]
    rows = [outcomes[eps][0] for eps in done]
    result = SweepResult(
        rows=rows,
        orders_u=observed_order([r.e_u for r in rows], done),
        orders_H=observed_order([r.e_H for r in rows], done),
        orders_rho=observed_order([r.e_rho for r in rows], done),
        inc_records=ref.records,
        comp_records={eps: outcomes[eps][1] for eps in done},
    )
    if failure is not None:
        raise SweepAborted(result, failure)
    return result


SWEEP_CSV_COLUMNS = ("eps", "e_u", "e_H", "e_rho",
                     "order_u", "order_H", "order_rho")


def write_sweep_csv(path, result: SweepResult) -> None:
    """One row per eps; order columns refer to the step from the row above
    (blank on the first row)."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_COLUMNS)
        for i, row in enumerate(result.rows):
            cells = [format(v, ".17g")
                     for v in (row.eps, row.e_u, row.e_H, row.e_rho)]
            if i == 0:
                cells += ["", "", ""]
            else:
                cells += [format(o, ".17g")
                          for o in (result.orders_u[i - 1],
                                    result.orders_H[i - 1],
                                    result.orders_rho[i - 1])]
            writer.writerow(cells)
