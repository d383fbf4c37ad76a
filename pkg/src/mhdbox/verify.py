"""Fast self-checks: exact structural invariants on small grids.

Each check exercises one property the discretization is supposed to honor
exactly (to rounding) and prints one PASS/FAIL line; :func:`run_verify`
returns True iff everything passed.  The whole battery runs in seconds on a
16^3 grid, which makes it a cheap install check and a first stop when a
longer run misbehaves.
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from . import diagnostics, snapshots
from .compressible import (
    CompressibleParams,
    run_compressible,
    well_prepared_init,
)
from .config import default_config, dump_config, load_config
from .grid import SpectralVectorField, fftv, ifftv, make_grid
from .incompressible import SimState, SolverParams, run, step
from .operators import gradient, leray_project
from .presets import alfven, random_bandlimited, steady, taylor_green_mhd

__all__ = ["CHECKS", "run_verify"]


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_parseval():
    """Volume integral of |f|^2 equals the weighted coefficient sum."""
    grid = make_grid(16)
    rng = np.random.default_rng(7)
    f = rng.standard_normal((3, 16, 16, 16))
    c = fftv(f)
    quad = float(np.sum(f**2)) * grid.dx**3
    spec = grid.volume * float(np.sum(c.real**2 + c.imag**2))
    err = _rel(quad, spec)
    return err < 1e-12, f"relative mismatch {err:.2e}"


def check_derivative_exactness():
    """d/dx2 of sin(x1)cos(3 x2) recovered to rounding."""
    grid = make_grid(16)
    x1, x2, _ = grid.coords
    c = fftv(np.sin(x1) * np.cos(3.0 * x2))
    got = ifftv(grid.ik_grad[1] * c)
    want = -3.0 * np.sin(x1) * np.sin(3.0 * x2)
    err = float(np.max(np.abs(got - want)))
    return err < 1e-12, f"max error {err:.2e}"


def check_projection():
    """Leray projection is idempotent and annihilates gradients."""
    grid = make_grid(16)
    state = random_bandlimited(grid, amplitude=1.0, seed=3)
    f = state.u_hat
    x1, x2, x3 = grid.coords
    phi = fftv(np.sin(x1) + np.cos(2.0 * x2) * np.sin(x3))
    g = leray_project(gradient(phi, grid))
    once = leray_project(f)
    twice = leray_project(once)
    idem = float(np.max(np.abs(once.data - twice.data)))
    killed = float(np.max(np.abs(g.data)))
    ok = idem < 1e-14 and killed < 1e-14
    return ok, f"idempotence {idem:.2e}, gradient residual {killed:.2e}"


def check_dealias_band():
    """The 2/3-rule mask keeps |k_j| <= n/3 and only that band."""
    grid = make_grid(18)
    keep = grid.dealias_mask
    kmax = np.max(np.abs(grid.kvec), axis=0)
    ok = bool(np.all(keep == (kmax <= 6.0)))
    return ok, f"band edge n/3 = {grid.n / 3:.1f}"


def check_divfree_fixed():
    """Projection leaves an already divergence-free field unchanged."""
    grid = make_grid(16)
    f = random_bandlimited(grid, amplitude=1.0, seed=11).B_hat
    moved = float(np.max(np.abs(leray_project(f).data - f.data)))
    return moved < 1e-14, f"max change {moved:.2e}"


def check_zero_steady():
    """The zero state is an exact fixed point of a full step."""
    grid = make_grid(16)
    params = SolverParams(lam=0.7, dt=1e-2, t_end=1e-2)
    state = step(steady(grid), params)
    size = float(np.max(np.abs(state.u_hat.data))
                 + np.max(np.abs(state.B_hat.data)))
    return size == 0.0, f"final amplitude {size:.2e}"


def check_viscous_decay():
    """With B = 0 and tiny u the integrating factor is exact."""
    grid = make_grid(16)
    lam, dt = 0.9, 0.05
    state = alfven(grid, amplitude=1e-9, mode=(1, 0, 0))
    state = SimState(0.0, state.u_hat,
                     SpectralVectorField(np.zeros_like(state.u_hat.data),
                                         grid, div_free=True))
    params = SolverParams(lam=lam, H_tilde=(0.0, 0.0, 0.0), dt=dt, t_end=dt)
    out = run(state, params).final
    # At amplitude 1e-9 the quadratic terms sit at 1e-18, far below the
    # linear decay, so the update should match exp(-lam |k|^2 dt).
    want = state.u_hat.data * np.exp(-lam * grid.k2 * dt)
    err = float(np.max(np.abs(out.u_hat.data - want)))
    return err < 1e-17, f"max deviation {err:.2e}"


def check_energy_balance():
    """Energy drop matches integrated dissipation over a nonlinear run.

    The residual is fourth order in dt from the stepper plus second order
    from the trapezoidal heat integral; at dt = 2e-3 the quadrature part
    sits near 5e-7 of the initial energy.
    """
    grid = make_grid(16)
    params = SolverParams(lam=0.5, dt=2e-3, t_end=0.1)
    traj = run(alfven(grid, amplitude=0.05), params)
    res = diagnostics.energy_balance_residual(traj.records)
    e0 = traj.records[0].E_kin + traj.records[0].E_mag
    return res / e0 < 2e-6, f"relative residual {res / e0:.2e}"


def check_div_preservation():
    """div u and div B stay at rounding level over a nonlinear run."""
    grid = make_grid(16)
    params = SolverParams(lam=0.5, dt=2e-3, t_end=0.1)
    traj = run(taylor_green_mhd(grid, amplitude=0.2), params)
    worst = max(max(r.div_u for r in traj.records),
                max(r.div_B for r in traj.records))
    return worst < 1e-12, f"worst relative divergence {worst:.2e}"


def check_curlcurl_identity():
    """Lap B_j = -div[(curl B) x e_j] for divergence-free B."""
    grid = make_grid(16)
    f = random_bandlimited(grid, amplitude=1.0, seed=23).B_hat
    res = diagnostics.identity_residual(f)
    return res < 1e-12, f"residual {res:.2e}"


def check_mean_conservation():
    """The k = 0 modes of u and B stay put to rounding.

    The nonlinear terms are exact divergences, so their means vanish
    analytically; pointwise products leave rounding-level residue there.
    """
    grid = make_grid(16)
    params = SolverParams(lam=0.5, dt=2e-3, t_end=0.05)
    state = taylor_green_mhd(grid, amplitude=0.2)
    out = run(state, params).final
    drift = float(np.max(np.abs(out.u_hat.data[:, 0, 0, 0]
                                - state.u_hat.data[:, 0, 0, 0]))
                  + np.max(np.abs(out.B_hat.data[:, 0, 0, 0]
                                  - state.B_hat.data[:, 0, 0, 0])))
    return drift < 1e-15, f"mean drift {drift:.2e}"


def check_compressible_invariants():
    """Mass, momentum, and mean H are conserved exactly; div H at rounding."""
    grid = make_grid(16)
    params = CompressibleParams(mu=1.0, lambda_c=1.0, eps=0.2, t_end=0.05,
                                record_every=5)
    base = taylor_green_mhd(grid, amplitude=0.05)
    traj = run_compressible(well_prepared_init(base, params), params)
    r0, r1 = traj.records[0], traj.records[-1]
    mass = abs(r1.mass - r0.mass)
    mom = max(abs(a - b) for a, b in zip(r1.momentum, r0.momentum))
    divh = max(r.div_H_rel for r in traj.records)
    ok = mass == 0.0 and mom < 1e-14 and divh < 1e-12
    return ok, f"mass {mass:.1e}, momentum {mom:.1e}, div H {divh:.1e}"


def check_snapshot_roundtrip():
    """Raw snapshot bytes survive read/write unchanged; states to 1e-12."""
    grid = make_grid(16)
    state = taylor_green_mhd(grid, amplitude=0.3)
    with tempfile.TemporaryDirectory() as tmp:
        p1, p2 = Path(tmp) / "a.bin", Path(tmp) / "b.bin"
        snapshots.save_incompressible(p1, state)
        t, comps = snapshots.read_snapshot(p1)
        snapshots.write_snapshot(p2, t, comps)
        same = p1.read_bytes() == p2.read_bytes()
        loaded = snapshots.load_incompressible(p1)
        close = float(np.max(np.abs(loaded.u_hat.data - state.u_hat.data)))
    return same and close < 1e-12, (
        f"bytes {'identical' if same else 'DIFFER'}, state delta {close:.2e}"
    )


def check_config_roundtrip():
    """dump -> parse -> dump is a fixed point for every mode."""
    for mode in ("incompressible", "compressible", "sweep"):
        cfg = default_config(mode)
        text = dump_config(cfg)
        with tempfile.TemporaryDirectory() as tmp:
            p = Path(tmp) / "cfg.yaml"
            p.write_text(text)
            if dump_config(load_config(p)) != text:
                return False, f"round trip drifted for mode {mode}"
    return True, "all modes stable"


def check_pressure_gauge():
    """N - grad p equals the projected forcing (pressure closes the gap)."""
    from .incompressible import recover_pressure, _rhs_terms
    from .operators import grad_arr, project_arr

    grid = make_grid(16)
    state = taylor_green_mhd(grid, amplitude=0.3)
    params = SolverParams(lam=1.0)
    Nu, _, _, _ = _rhs_terms(state.u_hat.data, state.B_hat.data, grid, params)
    p_hat = recover_pressure(state, params)
    gap = Nu - grad_arr(p_hat, grid) - project_arr(Nu, grid)
    err = float(np.max(np.abs(gap)))
    return err < 1e-13, f"max residual {err:.2e}"


CHECKS = (
    ("parseval", check_parseval),
    ("derivative-exactness", check_derivative_exactness),
    ("projection", check_projection),
    ("dealias-band", check_dealias_band),
    ("divfree-fixed-point", check_divfree_fixed),
    ("zero-steady-state", check_zero_steady),
    ("viscous-decay-exact", check_viscous_decay),
    ("energy-balance", check_energy_balance),
    ("div-preservation", check_div_preservation),
    ("curlcurl-identity", check_curlcurl_identity),
    ("mean-conservation", check_mean_conservation),
    ("compressible-invariants", check_compressible_invariants),
    ("snapshot-roundtrip", check_snapshot_roundtrip),
    ("config-roundtrip", check_config_roundtrip),
    ("pressure-gauge", check_pressure_gauge),
)


def run_verify(out=None) -> bool:
    """Run every check, print one line each, return True iff all passed."""
    import sys

    out = out if out is not None else sys.stdout
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:26s} {detail}", file=out)
    print(f"{'all checks passed' if all_ok else 'CHECKS FAILED'}", file=out)
    return all_ok
