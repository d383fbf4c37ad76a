"""Barotropic compressible flow coupled to a transported magnetic field.

The unknowns are density rho, velocity u, and the full magnetic field H on
the periodic box, with the acoustic stiffness controlled by a Mach-like
parameter eps:

    d/dt rho + div(rho u) = 0
    d/dt (rho u) + div(rho u x u) + eps^-2 grad P(rho)
        = (curl H) x H + mu Lap(u) + lambda_c grad(div u)
    d/dt H = curl(u x H),    div H = 0
    P(rho) = K rho^gamma

The Lorentz force and induction terms are integrated in conservative form,
(curl H) x H = div(H x H) - grad(|H|^2 / 2) and curl(u x H)_j =
-d_i (H_j u_i - u_j H_i), which makes the total mass, the total momentum,
the mean of H, and div H = 0 exact invariants of the scheme (the induction
flux tensor is antisymmetric, so its double divergence cancels termwise).

Discretization: collocation products in real space, derivatives in spectral
space, optional 2/3-rule masking of every product (including the pointwise
quotient u = m / rho and the pressure), classical RK4 in time on the
conservative spectral variables (rho_hat, m_hat, H_hat).  H is re-projected
after every full step so its divergence stays at rounding level rather than
accumulating drift.

The acoustic time-step limit scales like eps: explicitly,

    dt <= cfl_safety * dx * eps / (eps * (|u|_max + |H|_max)
                                   + sqrt(P'(rho_max)))

and an explicit-diffusion bound dt <= 2.5 * rho_min / ((2 mu + lambda_c+)
* |k|^2_max) guards the RK4 stability region; stable_dt returns the smaller.

`well_prepared_init` builds initial data that converge to a prescribed
incompressible state as eps -> 0: density rho_tilde + eps^2 * phi, velocity
u_inc + eps * C_prep * psi, field B_inc + H_tilde + eps * C_prep * chi, with
fixed analytic profiles phi, psi, chi of unit Sobolev size (psi deliberately
not divergence-free, chi divergence-free).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BlowupError, CFLError, ConfigError
from .grid import Grid, RealVectorField, SpectralVectorField, fftv, ifftv
from .incompressible import SimState, _plan_steps
from .operators import project_arr
from . import diagnostics

__all__ = [
    "CompressibleParams",
    "CompressibleState",
    "CompressibleRecord",
    "CompressibleTrajectory",
    "COMPRESSIBLE_CSV_COLUMNS",
    "pressure",
    "rhs_compressible",
    "acoustic_dt_limit",
    "stable_dt",
    "step_compressible",
    "run_compressible",
    "compressible_record",
    "well_prepared_init",
    "write_compressible_csv",
]

_CFL_ACTIONS = ("error", "warn", "off")


@dataclass(frozen=True)
class CompressibleParams:
    """Physical and numerical parameters for the compressible solver.

    ``lambda_c`` is the dilatational (second) viscosity coefficient; it may
    be negative as long as mu + lambda_c > 0.  ``dt=None`` lets the run loop
    pick a stable step from the initial data (see stable_dt).
    """

    mu: float = 1.0
    lambda_c: float = 1.0
    K: float = 1.0
    gamma: float = 2.0
    eps: float = 0.1
    rho_tilde: float = 1.0
    H_tilde: tuple[float, float, float] = (1.0, 1.0, 1.0)
    C_prep: float = 0.05
    dt: float | None = None
    t_end: float = 1.0
    dealias: bool = True
    record_every: int = 1
    cfl_safety: float = 0.5
    cfl_action: str = "error"

    def __post_init__(self):
        object.__setattr__(self, "H_tilde", tuple(float(h) for h in self.H_tilde))
        if len(self.H_tilde) != 3:
            raise ConfigError("H_tilde must have exactly 3 components")
        if self.mu <= 0:
            raise ConfigError(f"mu must be > 0, got {self.mu}")
        if self.mu + self.lambda_c <= 0:
            raise ConfigError(
                f"mu + lambda_c must be > 0, got {self.mu + self.lambda_c}"
            )
        if self.K <= 0:
            raise ConfigError(f"K must be > 0, got {self.K}")
        if self.gamma < 1:
            raise ConfigError(f"gamma must be >= 1, got {self.gamma}")
        if self.eps < 0:
            raise ConfigError(f"eps must be >= 0, got {self.eps}")
        if self.rho_tilde <= 0:
            raise ConfigError(f"rho_tilde must be > 0, got {self.rho_tilde}")
        if self.C_prep < 0:
            raise ConfigError(f"C_prep must be >= 0, got {self.C_prep}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        if self.record_every < 1:
            raise ConfigError(f"record_every must be >= 1, got {self.record_every}")
        if not 0 < self.cfl_safety <= 1:
            raise ConfigError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.cfl_action not in _CFL_ACTIONS:
            raise ConfigError(
                f"cfl_action must be one of {_CFL_ACTIONS}, got {self.cfl_action!r}"
            )

    @property
    def H_tilde_arr(self) -> np.ndarray:
        return np.array(self.H_tilde, dtype=float)


@dataclass
class CompressibleState:
    """Primitive-variable snapshot: density, velocity, full magnetic field."""

    t: float
    rho: np.ndarray                 # (n, n, n) real
    u: RealVectorField
    H_hat: SpectralVectorField

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def copy(self) -> "CompressibleState":
        return CompressibleState(
            t=self.t, rho=self.rho.copy(), u=self.u.copy(),
            H_hat=self.H_hat.copy(),
        )


@dataclass
class CompressibleRecord:
    """Conserved-quantity and positivity monitors at one time."""

    t: float
    E_kin: float                    # 0.5 * integral rho |u|^2
    E_mag: float                    # 0.5 * ||H||^2 (full field)
    mass: float
    momentum: tuple[float, float, float]
    div_H_rel: float
    rho_min: float
    rho_max: float

    def row(self) -> list[float]:
        return [
            self.t, self.E_kin, self.E_mag, self.mass, *self.momentum,
            self.div_H_rel, self.rho_min, self.rho_max,
        ]


COMPRESSIBLE_CSV_COLUMNS = (
    "t", "E_kin", "E_mag", "mass", "mom1", "mom2", "mom3",
    "div_H_rel", "rho_min", "rho_max",
)


@dataclass
class CompressibleTrajectory:
    records: list
    snapshots: list
    final: CompressibleState


def pressure(rho: np.ndarray, params: CompressibleParams,
             t: float = 0.0) -> np.ndarray:
    """Barotropic law K * rho^gamma; nonpositive density is a blow-up."""
    rho_min = float(rho.min())
    if not math.isfinite(rho_min) or rho_min <= 0.0:
        raise BlowupError(t, f"density reached {rho_min:.6g}")
    return params.K * rho**params.gamma


def _mask(c: np.ndarray, grid: Grid, on: bool) -> np.ndarray:
    return c * grid.dealias_mask if on else c


def _rhs_cons(t, rho_hat, m_hat, H_hat, grid: Grid, p: CompressibleParams):
    """Time derivative of the conservative spectral variables.

    Returns (drho_hat, dm_hat, dH_hat, info) with info carrying the
    pointwise extremes needed by the CFL monitor.
    """
    ik = grid.ik_grad
    da = p.dealias

    rho = ifftv(rho_hat)
    m = ifftv(m_hat)
    H = ifftv(H_hat)
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(m))
            and np.all(np.isfinite(H))):
        raise BlowupError(t, "non-finite fields")

    pres = pressure(rho, p, t)
    u = m / rho

    # Total pressure-like scalar; the constant P(rho_tilde) has zero
    # gradient, so subtracting it before the eps^-2 amplification keeps the
    # transform well scaled at small eps.
    ptot = (pres - p.K * p.rho_tilde**p.gamma) / p.eps**2 + 0.5 * np.sum(
        H**2, axis=0
    )
    ptot_hat = _mask(fftv(ptot), grid, da)

    u_hat = _mask(fftv(u), grid, da)

    # Momentum flux rho u x u and magnetic tension H x H, both symmetric:
    # six independent components each.
    dm = np.empty_like(m_hat)
    flux_hat = {}
    for i in range(3):
        for j in range(i, 3):
            f = _mask(fftv(rho * u[i] * u[j] - H[i] * H[j]), grid, da)
            flux_hat[(i, j)] = f
            flux_hat[(j, i)] = f
    divu_hat = ik[0] * u_hat[0] + ik[1] * u_hat[1] + ik[2] * u_hat[2]
    for j in range(3):
        adv = sum(ik[i] * flux_hat[(j, i)] for i in range(3))
        dm[j] = (
            -adv
            - ik[j] * ptot_hat
            - p.mu * grid.k2 * u_hat[j]
            + p.lambda_c * ik[j] * divu_hat
        )

    drho = -(ik[0] * m_hat[0] + ik[1] * m_hat[1] + ik[2] * m_hat[2])

    # Induction flux T_ji = H_j u_i - u_j H_i is antisymmetric: three
    # independent components, and d_j d_i T_ji = 0 identically, so div H
    # never drifts beyond rounding.
    T12 = _mask(fftv(H[0] * u[1] - u[0] * H[1]), grid, da)
    T13 = _mask(fftv(H[0] * u[2] - u[0] * H[2]), grid, da)
    T23 = _mask(fftv(H[1] * u[2] - u[1] * H[2]), grid, da)
    dH = np.stack([
        -(ik[1] * T12 + ik[2] * T13),
        -(-ik[0] * T12 + ik[2] * T23),
        -(-ik[0] * T13 - ik[1] * T23),
    ])

    info = {
        "umax": float(np.sqrt(np.sum(u**2, axis=0).max())),
        "hmax": float(np.sqrt(np.sum(H**2, axis=0).max())),
        "rho_min": float(rho.min()),
        "rho_max": float(rho.max()),
    }
    return drho, dm, dH, info


def rhs_compressible(state: CompressibleState, params: CompressibleParams):
    """Primitive-variable time derivatives (d rho, d m, d H) as arrays.

    Exposed for verification; the run loop uses the spectral internals
    directly.  Returns real-space d(rho)/dt and d(m)/dt plus the spectral
    d(H_hat)/dt.
    """
    if params.eps <= 0:
        raise ConfigError("eps must be > 0 to evaluate the dynamics")
    grid = state.grid
    rho_hat, m_hat, H_hat = _to_conservative(state, params)
    drho, dm, dH, _ = _rhs_cons(state.t, rho_hat, m_hat, H_hat, grid, params)
    return ifftv(drho), ifftv(dm), dH


def _to_conservative(state: CompressibleState, params: CompressibleParams):
    grid = state.grid
    rho_hat = _mask(fftv(state.rho), grid, params.dealias)
    u = state.u.data
    m_hat = _mask(fftv(state.rho * u), grid, params.dealias)
    H_hat = project_arr(_mask(state.H_hat.data, grid, params.dealias), grid)
    return rho_hat, m_hat, H_hat


def _to_primitive(t, rho_hat, m_hat, H_hat, grid: Grid,
                  params: CompressibleParams) -> CompressibleState:
    rho = ifftv(rho_hat)
    rho_min = float(rho.min())
    if not math.isfinite(rho_min) or rho_min <= 0.0:
        raise BlowupError(t, f"density reached {rho_min:.6g}")
    u = ifftv(m_hat) / rho
    return CompressibleState(
        t=t,
        rho=rho,
        u=RealVectorField(u, grid),
        H_hat=SpectralVectorField(H_hat.copy(), grid, div_free=True),
    )


def acoustic_dt_limit(info: dict, grid: Grid,
                      params: CompressibleParams) -> float:
    """Acoustic CFL bound from pointwise extremes of the current fields."""
    pprime = params.K * params.gamma * info["rho_max"] ** (params.gamma - 1.0)
    speed = params.eps * (info["umax"] + info["hmax"]) + math.sqrt(pprime)
    if speed == 0.0:
        return math.inf
    return params.cfl_safety * grid.dx * params.eps / speed


def _viscous_dt_limit(info: dict, grid: Grid,
                      params: CompressibleParams) -> float:
    k2max = float(grid.k2.max())
    nu = (2.0 * params.mu + max(params.lambda_c, 0.0)) / info["rho_min"]
    return 2.5 / (nu * k2max)


def stable_dt(state: CompressibleState, params: CompressibleParams) -> float:
    """Explicit-stability step from the initial data (acoustic and viscous)."""
    grid = state.grid
    rho_hat, m_hat, H_hat = _to_conservative(state, params)
    _, _, _, info = _rhs_cons(state.t, rho_hat, m_hat, H_hat, grid, params)
    return min(acoustic_dt_limit(info, grid, params),
               _viscous_dt_limit(info, grid, params))


def _check_acoustic_cfl(dt, info, grid, params, t):
    limit = acoustic_dt_limit(info, grid, params)
    if dt <= limit * (1.0 + 1e-12) or params.cfl_action == "off":
        return
    msg = (f"dt={dt:.6g} exceeds the acoustic CFL limit {limit:.6g} "
           f"at t={t:.6g}")
    if params.cfl_action == "error":
        raise CFLError(msg)
    warnings.warn(msg, RuntimeWarning, stacklevel=3)


def _rk4_step(t, Y, dt, grid, params):
    """One classical RK4 step on Y = (rho_hat, m_hat, H_hat)."""
    r0, m0, H0 = Y
    k1 = _rhs_cons(t, r0, m0, H0, grid, params)
    _check_acoustic_cfl(dt, k1[3], grid, params, t)
    h = dt / 2.0
    k2 = _rhs_cons(t + h, r0 + h * k1[0], m0 + h * k1[1], H0 + h * k1[2],
                   grid, params)
    k3 = _rhs_cons(t + h, r0 + h * k2[0], m0 + h * k2[1], H0 + h * k2[2],
                   grid, params)
    k4 = _rhs_cons(t + dt, r0 + dt * k3[0], m0 + dt * k3[1], H0 + dt * k3[2],
                   grid, params)
    w = dt / 6.0
    r1 = r0 + w * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0])
    m1 = m0 + w * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1])
    H1 = H0 + w * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2])
    H1 = project_arr(H1, grid)
    for arr in (r1, m1, H1):
        if not np.all(np.isfinite(arr)):
            raise BlowupError(t + dt, "non-finite fields")
    return r1, m1, H1


def step_compressible(state: CompressibleState,
                      params: CompressibleParams) -> CompressibleState:
    """Advance one step of params.dt (must be set) and return the new state."""
    if params.dt is None:
        raise ConfigError("step_compressible requires an explicit dt")
    if params.eps <= 0:
        raise ConfigError("eps must be > 0 to integrate")
    grid = state.grid
    Y = _to_conservative(state, params)
    Y = _rk4_step(state.t, Y, params.dt, grid, params)
    return _to_primitive(state.t + params.dt, *Y, grid, params)


def compressible_record(t, rho_hat, m_hat, H_hat, grid: Grid,
                        params: CompressibleParams) -> CompressibleRecord:
    vol = grid.volume
    rho = ifftv(rho_hat)
    m = ifftv(m_hat)
    rho_min = float(rho.min())
    if rho_min > 0.0:
        e_kin = 0.5 * float(np.sum(m**2 / rho)) * grid.dx**3
    else:
        e_kin = float("nan")
    e_mag = 0.5 * vol * float(np.sum(H_hat.real**2 + H_hat.imag**2))
    f = SpectralVectorField(H_hat, grid)
    return CompressibleRecord(
        t=t,
        E_kin=e_kin,
        E_mag=e_mag,
        mass=vol * float(rho_hat[0, 0, 0].real),
        momentum=tuple(vol * float(m_hat[j, 0, 0, 0].real) for j in range(3)),
        div_H_rel=f.divergence_defect(),
        rho_min=rho_min,
        rho_max=float(rho.max()),
    )


def run_compressible(initial: CompressibleState, params: CompressibleParams,
                     snapshot_times=(), on_step=None) -> CompressibleTrajectory:
    """Integrate to params.t_end; records/snapshots mirror the other solver.

    Raises BlowupError (with the records so far attached) on loss of
    positivity or non-finite fields, CFLError per cfl_action.  ``on_step``,
    if given, is called as ``on_step(state, step_index)`` after every step.
    """
    if params.eps <= 0:
        raise ConfigError("eps must be > 0 to integrate")
    grid = initial.grid
    dt = params.dt
    span = params.t_end - initial.t
    if dt is None:
        dt = stable_dt(initial, params)
        if span > 0:
            dt = span / math.ceil(span / dt)
    steps = _plan_steps(span, dt)

    Y = _to_conservative(initial, params)
    t = initial.t
    records = [compressible_record(t, *Y, grid, params)]
    snapshots: list[CompressibleState] = []
    pending = sorted(float(s) for s in snapshot_times)
    while pending and t >= pending[0] - 1e-12:
        snapshots.append(_to_primitive(t, *Y, grid, params))
        pending.pop(0)
    try:
        for i, dt_i in enumerate(steps):
            Y = _rk4_step(t, Y, dt_i, grid, params)
            t += dt_i
            if on_step is not None:
                on_step(_to_primitive(t, *Y, grid, params), i + 1)
            while pending and t >= pending[0] - 1e-12:
                snapshots.append(_to_primitive(t, *Y, grid, params))
                pending.pop(0)
            if (i + 1) % params.record_every == 0 or i + 1 == len(steps):
                records.append(compressible_record(t, *Y, grid, params))
    except BlowupError as exc:
        exc.records = records
        raise
    final = _to_primitive(t, *Y, grid, params)
    return CompressibleTrajectory(records=records, snapshots=snapshots,
                                  final=final)


# -- well-prepared initial data --------------------------------------------------

def _unit_profile(grid: Grid, raw: np.ndarray, s: int) -> np.ndarray:
    """Scale a sampled vector profile to unit H^s norm."""
    f = SpectralVectorField(fftv(raw), grid)
    return raw / diagnostics.sobolev_norm(f, s)


def well_prepared_init(inc_state: SimState,
                       params: CompressibleParams) -> CompressibleState:
    """Compressible data an O(eps^2)/O(eps) perturbation off a target state.

    Given an incompressible state (u, B), returns::

        rho = rho_tilde + eps^2 * phi        ||phi||_{H^3} = C_prep
        u   = u_inc + eps * C_prep * psi     ||psi||_{H^4} = 1
        H   = B_inc + H_tilde + eps * C_prep * chi   ||chi||_{H^3} = 1

    with fixed analytic profiles phi = c*(2 + sin x1), psi = (sin x2
    - 0.5 sin x1, sin x3, sin x1) (deliberately not divergence-free), and
    chi = (sin 2x3, sin 2x1, sin 2x2) (divergence-free).  At eps = 0 this
    reduces exactly to (rho_tilde, u_inc, B_inc + H_tilde).

    Raises ValueError when the target u or B is not divergence-free.
    """
    for name, f in (("u", inc_state.u_hat), ("B", inc_state.B_hat)):
        defect = f.divergence_defect()
        if defect > 1e-10:
            raise ValueError(
                f"well-prepared data needs divergence-free {name} "
                f"(defect {defect:.3e})"
            )

    grid = inc_state.grid
    x1, x2, x3 = grid.coords
    eps, c = params.eps, params.C_prep

    phi_raw = 2.0 + np.sin(x1)
    h3 = float(np.sqrt(grid.volume * np.sum(
        (1.0 + grid.k2) ** 3
        * np.abs(fftv(phi_raw)) ** 2
    )))
    rho = params.rho_tilde + eps**2 * (c / h3) * phi_raw

    psi = _unit_profile(grid, np.stack([
        np.sin(x2) - 0.5 * np.sin(x1),
        np.sin(x3),
        np.sin(x1),
    ]), s=4)
    chi = _unit_profile(grid, np.stack([
        np.sin(2.0 * x3),
        np.sin(2.0 * x1),
        np.sin(2.0 * x2),
    ]), s=3)

    u = ifftv(inc_state.u_hat.data) + eps * c * psi
    H = (ifftv(inc_state.B_hat.data)
         + params.H_tilde_arr[:, None, None, None]
         + eps * c * chi)
    H_hat = project_arr(fftv(H), grid)
    return CompressibleState(
        t=inc_state.t,
        rho=rho,
        u=RealVectorField(u, grid),
        H_hat=SpectralVectorField(H_hat, grid, div_free=True),
    )


def write_compressible_csv(path, records) -> None:
    """Write compressible records with the fixed column header."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COMPRESSIBLE_CSV_COLUMNS)
        for rec in records:
            writer.writerow(format(float(v), ".17g") for v in rec.row())
