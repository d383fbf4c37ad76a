"""Monitored quantities: energies, Sobolev norms, exact-identity residuals.

Everything here is read-only on solver state, and every norm is evaluated
through the Parseval convention documented in :mod:`mhdbox.grid`::

    ||f||_{L2}^2  = (2*pi)^3 * sum_k |c(k)|^2
    ||f||_{H^s}^2 = (2*pi)^3 * sum_k (1 + |k|^2)^s |c(k)|^2

Quantities tracked per record (and written as CSV columns, in order):

==================  =====================================================
t                   time
E_kin, E_mag        0.5*||u||^2, 0.5*||B||^2
dissipation         lam * ||grad u||^2 (instantaneous viscous sink)
cum_dissipation     trapezoidal integral of the dissipation over records
u_h0..u_h3          H^s norms of u, s = 0..3 (s = 0 is the L2 norm)
B_h0..B_h3          H^s norms of B
X                   ||Lap B||^2 + ||grad B||^2 + ||grad u||^2 + ||du/dt||^2
w1, w2, w3, w       L2 norms of the auxiliary combinations (see compute_w)
div_u, div_B        max_k |k.c(k)| relative to max |c| per field
identity_residual   curl-curl identity residual of B (see identity_residual)
tail_fraction       spectral energy fraction with any |k_j| > n/3
gn_linf_u, gn_l4_u  interpolation-ratio monitors for u (see
gn_linf_B, gn_l4_B  interpolation_ratio); NaN for a zero field
==================  =====================================================

Floats are written with 17 significant digits so records round-trip exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .grid import Grid, SpectralVectorField, ifftv
from .incompressible import SimState, SolverParams, rhs_incompressible
from .operators import cross_const, curl_arr, div_arr

__all__ = [
    "DiagnosticsRecord",
    "CSV_COLUMNS",
    "energy",
    "l2_norm",
    "sobolev_norm",
    "dissipation_rate",
    "energy_balance_residual",
    "dissipation_budget",
    "x_functional",
    "compute_w",
    "identity_residual",
    "tail_fraction",
    "interpolation_ratio",
    "compute_record",
    "write_records_csv",
    "read_records_csv",
]


# -- norms -------------------------------------------------------------------

def _sum_sq(c: np.ndarray, weight=None) -> float:
    mag2 = (c.real**2 + c.imag**2) if np.iscomplexobj(c) else c**2
    if weight is not None:
        mag2 = mag2 * weight
    return float(np.sum(mag2))


def l2_norm(f: SpectralVectorField) -> float:
    """L2 norm over the box via Parseval."""
    return float(np.sqrt(f.grid.volume * _sum_sq(f.data)))


def _sobolev_arr(c: np.ndarray, grid: Grid, s: int) -> float:
    w = (1.0 + grid.k2) ** s
    return float(np.sqrt(grid.volume * _sum_sq(c, w)))


def sobolev_norm(f: SpectralVectorField, s: int) -> float:
    """H^s norm, (sum_k (1+|k|^2)^s |c|^2)^(1/2) under Parseval; s >= 0."""
    s = int(s)
    if s < 0:
        raise ValueError(f"Sobolev order must be >= 0, got {s}")
    return _sobolev_arr(f.data, f.grid, s)


def _grad_sq(c: np.ndarray, grid: Grid) -> float:
    """||grad f||^2 = (2*pi)^3 sum |k|^2 |c|^2."""
    return grid.volume * _sum_sq(c, grid.k2)


def _lap_sq(c: np.ndarray, grid: Grid) -> float:
    """||Lap f||^2 = (2*pi)^3 sum |k|^4 |c|^2 (= ||D^2 f||^2 on the torus)."""
    return grid.volume * _sum_sq(c, grid.k2**2)


def energy(state: SimState) -> tuple[float, float]:
    """Kinetic and magnetic energy, (0.5*||u||^2, 0.5*||B||^2)."""
    vol = state.grid.volume
    return (
        0.5 * vol * _sum_sq(state.u_hat.data),
        0.5 * vol * _sum_sq(state.B_hat.data),
    )


def dissipation_rate(state: SimState, lam: float) -> float:
    """Instantaneous viscous dissipation lam * ||grad u||^2."""
    return lam * _grad_sq(state.u_hat.data, state.grid)


# -- exact-identity monitors ---------------------------------------------------

def x_functional(state: SimState, params: SolverParams) -> float:
    """Composite stability functional.

    ``X = ||Lap B||^2 + ||grad B||^2 + ||grad u||^2 + ||du/dt||^2`` with the
    time derivative taken from the semi-discrete right-hand side (so X
    vanishes identically on the zero steady state).
    """
    grid = state.grid
    du, _ = rhs_incompressible(state, params)
    B = state.B_hat.data
    return (
        _lap_sq(B, grid)
        + _grad_sq(B, grid)
        + _grad_sq(state.u_hat.data, grid)
        + grid.volume * _sum_sq(du.data)
    )


_UNIT_VECTORS = (np.array([1.0, 0.0, 0.0]),
                 np.array([0.0, 1.0, 0.0]),
                 np.array([0.0, 0.0, 1.0]))


def compute_w(state: SimState, params: SolverParams):
    """Auxiliary dissipative combinations.

    ``w_j = Lap u + (3/lam) * (curl B) x e_j`` for the three coordinate unit
    vectors, and ``w = w_1 + w_2 + w_3``.  Returns the tuple
    ``(w_1, w_2, w_3, w)`` of spectral fields.
    """
    grid = state.grid
    lap_u = -grid.k2 * state.u_hat.data
    curlB = curl_arr(state.B_hat.data, grid)
    coef = 3.0 / params.lam
    parts = [lap_u + coef * cross_const(curlB, e) for e in _UNIT_VECTORS]
    total = parts[0] + parts[1] + parts[2]
    return tuple(
        SpectralVectorField(w, grid) for w in (*parts, total)
    )


def identity_residual(B_hat: SpectralVectorField) -> float:
    """Residual of the curl-curl identity for divergence-free fields.

    For div B = 0 each component satisfies
    ``Lap B_j = -div[(curl B) x e_j]`` exactly; the residual returned is::

        max_j ||Lap B_j + div[(curl B) x e_j]||_{L2} / max(1, ||Lap B||_{L2})

    It sits at rounding level for divergence-free inputs and is O(1)
    otherwise, which makes it a sharp drift detector for the induction
    update.
    """
    grid = B_hat.grid
    lap = -grid.k2 * B_hat.data
    curlB = curl_arr(B_hat.data, grid)
    denom = max(1.0, float(np.sqrt(_lap_sq(B_hat.data, grid))))
    worst = 0.0
    for j, e in enumerate(_UNIT_VECTORS):
        res = lap[j] + div_arr(cross_const(curlB, e), grid)
        worst = max(worst, float(np.sqrt(grid.volume * _sum_sq(res))))
    return worst / denom


def tail_fraction(state: SimState) -> float:
    """Spectral energy fraction in the top third of wavenumbers.

    The tail is the 2/3-rule complement, modes with any |k_j| > n/3, summed
    over both fields.  Returns 0 for zero fields.
    """
    grid = state.grid
    tail_mask = ~grid.dealias_mask
    total = _sum_sq(state.u_hat.data) + _sum_sq(state.B_hat.data)
    if total == 0.0:
        return 0.0
    tail = (
        _sum_sq(state.u_hat.data * tail_mask)
        + _sum_sq(state.B_hat.data * tail_mask)
    )
    return tail / total


def interpolation_ratio(f: SpectralVectorField, which: str) -> float:
    """Gagliardo-Nirenberg ratio monitors (logged, never asserted).

    ``which = "Linf"``: ``||f||_inf / (||f||_2^(1/4) * ||D^2 f||_2^(3/4))``;
    ``which = "L4"``:  ``||f||_4  / (||f||_2^(5/8) * ||D^2 f||_2^(3/8))``.

    Left-hand norms use grid values with the pointwise Euclidean magnitude;
    right-hand norms are spectral (||D^2 f||_2 = |||k|^2 c||_2 on the torus).
    Raises ValueError on the zero field.
    """
    grid = f.grid
    l2 = np.sqrt(grid.volume * _sum_sq(f.data))
    d2 = np.sqrt(_lap_sq(f.data, grid))
    if l2 == 0.0 or d2 == 0.0:
        raise ValueError("interpolation ratio is undefined for a zero field")
    mag2 = np.sum(ifftv(f.data) ** 2, axis=0)
    dv = grid.dx**3
    if which == "Linf":
        return float(np.sqrt(mag2.max()) / (l2**0.25 * d2**0.75))
    if which == "L4":
        l4 = float(np.sum(mag2**2) * dv) ** 0.25
        return float(l4 / (l2**0.625 * d2**0.375))
    raise ValueError(f'which must be "Linf" or "L4", got {which!r}')


# -- records and the CSV schema ------------------------------------------------

CSV_COLUMNS = (
    "t", "E_kin", "E_mag", "dissipation", "cum_dissipation",
    "u_h0", "u_h1", "u_h2", "u_h3", "B_h0", "B_h1", "B_h2", "B_h3",
    "X", "w1", "w2", "w3", "w",
    "div_u", "div_B", "identity_residual", "tail_fraction",
    "gn_linf_u", "gn_l4_u", "gn_linf_B", "gn_l4_B",
)


@dataclass
class DiagnosticsRecord:
    """One row of monitored quantities at a fixed time."""

    t: float
    E_kin: float
    E_mag: float
    dissipation: float
    cum_dissipation: float
    hs_norms: dict          # (field, s) -> H^s norm, field in {"u", "B"}
    X: float
    w_norms: tuple          # (||w1||, ||w2||, ||w3||, ||w||)
    div_u: float
    div_B: float
    identity_res: float
    tail_fraction: float
    interp_ratios: dict     # {"linf_u", "l4_u", "linf_B", "l4_B"} -> float

    def row(self) -> list[float]:
        h = self.hs_norms
        g = self.interp_ratios
        return [
            self.t, self.E_kin, self.E_mag, self.dissipation,
            self.cum_dissipation,
            h[("u", 0)], h[("u", 1)], h[("u", 2)], h[("u", 3)],
            h[("B", 0)], h[("B", 1)], h[("B", 2)], h[("B", 3)],
            self.X, *self.w_norms,
            self.div_u, self.div_B, self.identity_res, self.tail_fraction,
            g["linf_u"], g["l4_u"], g["linf_B"], g["l4_B"],
        ]


def _safe_ratio(f: SpectralVectorField, which: str) -> float:
    try:
        return interpolation_ratio(f, which)
    except ValueError:
        return float("nan")


def compute_record(state: SimState, params: SolverParams,
                   prev: DiagnosticsRecord | None = None) -> DiagnosticsRecord:
    """Evaluate every monitored quantity at the current state.

    ``prev`` carries the running trapezoidal dissipation integral forward;
    pass None at the initial time.
    """
    e_kin, e_mag = energy(state)
    diss = dissipation_rate(state, params.lam)
    if prev is None:
        cum = 0.0
    else:
        cum = prev.cum_dissipation + 0.5 * (prev.dissipation + diss) * (
            state.t - prev.t
        )
    hs = {}
    for name, f in (("u", state.u_hat), ("B", state.B_hat)):
        for s in range(4):
            hs[(name, s)] = sobolev_norm(f, s)
    w_fields = compute_w(state, params)
    return DiagnosticsRecord(
        t=state.t,
        E_kin=e_kin,
        E_mag=e_mag,
        dissipation=diss,
        cum_dissipation=cum,
        hs_norms=hs,
        X=x_functional(state, params),
        w_norms=tuple(l2_norm(w) for w in w_fields),
        div_u=state.u_hat.divergence_defect(),
        div_B=state.B_hat.divergence_defect(),
        identity_res=identity_residual(state.B_hat),
        tail_fraction=tail_fraction(state),
        interp_ratios={
            "linf_u": _safe_ratio(state.u_hat, "Linf"),
            "l4_u": _safe_ratio(state.u_hat, "L4"),
            "linf_B": _safe_ratio(state.B_hat, "Linf"),
            "l4_B": _safe_ratio(state.B_hat, "L4"),
        },
    )


# -- conservation bookkeeping ---------------------------------------------------

def energy_balance_residual(records: Sequence[DiagnosticsRecord]) -> float:
    """|E(t2) - E(t1) + integral(dissipation)| over a record segment.

    The time integral is trapezoidal over the records provided, so the
    residual measures how well the semi-discrete energy law is honored at
    the recording cadence.
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    t = np.array([r.t for r in records])
    d = np.array([r.dissipation for r in records])
    heat = float(np.sum(0.5 * (d[1:] + d[:-1]) * np.diff(t)))
    e_first = records[0].E_kin + records[0].E_mag
    e_last = records[-1].E_kin + records[-1].E_mag
    return abs(e_last - e_first + heat)


def dissipation_budget(records: Sequence[DiagnosticsRecord]):
    """Return ``(cum_dissipation, E0, ok)`` for a completed run.

    ``ok`` holds iff the cumulative dissipation never exceeds the initial
    energy beyond rounding (factor 1 + 1e-6) and the budget closes:
    |E0 - E(T) - cum| <= 1e-5 * E0.
    """
    if not records:
        raise ValueError("need at least one record")
    e0 = records[0].E_kin + records[0].E_mag
    e_final = records[-1].E_kin + records[-1].E_mag
    cum = records[-1].cum_dissipation
    if e0 == 0.0:
        return cum, e0, cum <= 1e-12
    ok = (cum <= e0 * (1.0 + 1e-6)) and (
        abs(e0 - e_final - cum) <= 1e-5 * e0
    )
    return cum, e0, ok


# -- CSV I/O --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_records_csv(path, records: Sequence[DiagnosticsRecord]) -> None:
    """Write records with the fixed :data:`CSV_COLUMNS` header."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow(_fmt(v) for v in rec.row())


def read_records_csv(path) -> np.ndarray:
    """Read a diagnostics CSV back as a structured array keyed by column."""
    return np.genfromtxt(path, delimiter=",", names=True)
