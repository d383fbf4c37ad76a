"""Figure rendering for runs and sweeps (headless, PNG files).

Every renderer takes records (or a sweep result) plus an output directory,
writes a fixed set of PNG files next to the CSV output, and returns the
paths it wrote.  Zero or negative values are clipped to a tiny floor before
log-scale plotting so empty channels render instead of erroring.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "render_run_figures",
    "render_compressible_figures",
    "render_sweep_figures",
]

_FLOOR = 1e-18


def _col(records, attr) -> np.ndarray:
    return np.array([getattr(r, attr) for r in records], dtype=float)


def _floor(a: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(a), _FLOOR)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_run_figures(records, outdir) -> list[Path]:
    """Incompressible-run figures: energies, budget, norms, stability,
    residuals."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = _col(records, "t")
    e_kin = _col(records, "E_kin")
    e_mag = _col(records, "E_mag")
    cum = _col(records, "cum_dissipation")
    written = []

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(t, e_kin, label="kinetic")
    ax.plot(t, e_mag, label="magnetic")
    ax.plot(t, e_kin + e_mag, "k--", label="total")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend()
    ax.set_title("Energy history")
    written.append(_save(fig, outdir / "energy_history.png"))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    drop = (e_kin[0] + e_mag[0]) - (e_kin + e_mag)
    ax.plot(t, drop, label="energy drop")
    ax.plot(t, cum, "--", label="cumulative dissipation")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend()
    ax.set_title("Dissipation budget")
    written.append(_save(fig, outdir / "budget.png"))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for field_name, key in (("u", "u"), ("B", "B")):
        for s in range(4):
            ax.semilogy(
                t,
                _floor(np.array([r.hs_norms[(key, s)] for r in records])),
                label=f"||{field_name}||_H{s}",
            )
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(ncol=2, fontsize=8)
    ax.set_title("Sobolev norms")
    written.append(_save(fig, outdir / "norms.png"))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.semilogy(t, _floor(_col(records, "X")), label="X")
    for i, name in enumerate(("w1", "w2", "w3", "w")):
        ax.semilogy(
            t,
            _floor(np.array([r.w_norms[i] for r in records])),
            label=f"||{name}||",
        )
    ax.set_xlabel("t")
    ax.set_ylabel("value")
    ax.legend()
    ax.set_title("Stability functionals")
    written.append(_save(fig, outdir / "stability.png"))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for attr, label in (
        ("div_u", "div u (rel)"),
        ("div_B", "div B (rel)"),
        ("identity_res", "curl-curl identity"),
        ("tail_fraction", "spectral tail"),
    ):
        ax.semilogy(t, _floor(_col(records, attr)), label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("residual")
    ax.legend()
    ax.set_title("Exactness residuals")
    written.append(_save(fig, outdir / "residuals.png"))
    return written


def render_compressible_figures(records, outdir) -> list[Path]:
    """Compressible-run figures: energies and conserved-quantity drift."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    t = _col(records, "t")
    written = []

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(t, _col(records, "E_kin"), label="kinetic")
    ax.plot(t, _col(records, "E_mag"), label="magnetic")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.legend()
    ax.set_title("Compressible energy history")
    written.append(_save(fig, outdir / "compressible_energy.png"))

    fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2))
    mass = _col(records, "mass")
    mom = np.array([r.momentum for r in records], dtype=float)
    axes[0].semilogy(t, _floor(mass - mass[0]), label="mass drift")
    for j in range(3):
        axes[0].semilogy(t, _floor(mom[:, j] - mom[0, j]),
                         label=f"momentum {j + 1} drift")
    axes[0].semilogy(t, _floor(_col(records, "div_H_rel")), label="div H (rel)")
    axes[0].set_xlabel("t")
    axes[0].legend(fontsize=8)
    axes[0].set_title("Invariant drift")
    axes[1].plot(t, _col(records, "rho_min"), label="min rho")
    axes[1].plot(t, _col(records, "rho_max"), label="max rho")
    axes[1].set_xlabel("t")
    axes[1].legend()
    axes[1].set_title("Density bounds")
    written.append(_save(fig, outdir / "compressible_invariants.png"))
    return written


def render_sweep_figures(result, outdir) -> list[Path]:
    """Sweep figure: log-log error curves against reference slopes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    eps = np.array([r.eps for r in result.rows])
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for attr, label in (("e_u", "velocity error"),
                        ("e_H", "magnetic error"),
                        ("e_rho", "density error")):
        ax.loglog(eps, _floor(np.array([getattr(r, attr)
                                        for r in result.rows])),
                  "o-", label=label)
    if len(eps) >= 2 and eps.min() > 0:
        anchor = max(_FLOOR, result.rows[0].e_u)
        for order, style in ((1, ":"), (2, "--")):
            ax.loglog(eps, anchor * (eps / eps[0]) ** order, "k" + style,
                      lw=0.8, label=f"slope {order}")
    ax.invert_xaxis()
    ax.set_xlabel("eps")
    ax.set_ylabel("final-time error")
    ax.legend()
    ax.set_title("Incompressible-limit convergence")
    written = [_save(fig, outdir / "convergence.png")]
    return written
