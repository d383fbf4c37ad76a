"""Initial-condition presets.

Every preset returns a ready-to-run :class:`~mhdbox.incompressible.SimState`
whose velocity and magnetic perturbation are divergence-free band-limited
fields.  Presets are registered in :data:`PRESETS` by name:

``steady``
    The zero state (u = B = 0), an exact fixed point of the dynamics.

``alfven``
    A single circularly-transverse mode pair: u along one unit polarization
    perpendicular to k, B along the other.  At small amplitude this is the
    textbook transverse-wave initial condition for a uniform background
    field, and the linearized evolution is known in closed form, which makes
    it the workhorse for validation runs.

``taylor-green-mhd``
    The magnetized Taylor-Green vortex, a fully three-dimensional
    deterministic field that activates the quadratic terms immediately.

``random-bandlimited``
    Seeded random Fourier coefficients supported on 0 < |k|_inf <= kmax,
    Hermitian-symmetrized, Leray-projected, and rescaled so u and B each
    carry amplitude/2 in a chosen Sobolev norm.  Deterministic per seed.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, SpectralVectorField, fftv, sample_field
from .incompressible import SimState, make_state
from .operators import project_arr
from . import diagnostics

__all__ = [
    "steady",
    "alfven",
    "taylor_green_mhd",
    "random_bandlimited",
    "PRESETS",
    "make_preset",
]


def steady(grid: Grid) -> SimState:
    """The zero state; stays identically zero under the flow."""
    z = np.zeros((3, grid.n, grid.n, grid.n))
    return SimState(
        t=0.0,
        u_hat=SpectralVectorField(z.astype(complex), grid, div_free=True),
        B_hat=SpectralVectorField(z.astype(complex), grid, div_free=True),
    )


def _transverse_frame(mode: tuple[int, int, int]):
    """Orthonormal pair (e1, e2) spanning the plane perpendicular to mode."""
    k = np.array(mode, dtype=float)
    if not np.any(k):
        raise ValueError("alfven mode must be a nonzero integer wavevector")
    # Cross with whichever axis vector is least aligned with k.
    trial = np.zeros(3)
    trial[int(np.argmin(np.abs(k)))] = 1.0
    e1 = np.cross(k, trial)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(k, e1)
    e2 /= np.linalg.norm(e2)
    return e1, e2


def alfven(grid: Grid, amplitude: float = 1e-2,
           mode: tuple[int, int, int] = (1, 1, 1),
           phase: float = 0.0) -> SimState:
    """Single transverse mode: u on one polarization, B on the other.

    ``u = amplitude * cos(k.x + phase) * e1`` and
    ``B = amplitude * sin(k.x + phase) * e2`` with (e1, e2, k) a right-handed
    orthogonal frame, so both fields are exactly divergence-free.
    """
    e1, e2 = _transverse_frame(mode)
    k = np.array(mode, dtype=float)

    def u_fn(x1, x2, x3):
        ph = k[0] * x1 + k[1] * x2 + k[2] * x3 + phase
        c = amplitude * np.cos(ph)
        return np.stack([c * e1[0], c * e1[1], c * e1[2]])

    def B_fn(x1, x2, x3):
        ph = k[0] * x1 + k[1] * x2 + k[2] * x3 + phase
        s = amplitude * np.sin(ph)
        return np.stack([s * e2[0], s * e2[1], s * e2[2]])

    return make_state(sample_field(grid, u_fn), sample_field(grid, B_fn))


def taylor_green_mhd(grid: Grid, amplitude: float = 0.1) -> SimState:
    """Magnetized Taylor-Green vortex.

    ``u = a (sin x1 cos x2 cos x3, -cos x1 sin x2 cos x3, 0)`` and
    ``B = a (cos x1 sin x2 sin x3, sin x1 cos x2 sin x3,
    -2 sin x1 sin x2 cos x3)``; both divergence-free by construction.
    """
    a = amplitude

    def u_fn(x1, x2, x3):
        return np.stack([
            a * np.sin(x1) * np.cos(x2) * np.cos(x3),
            -a * np.cos(x1) * np.sin(x2) * np.cos(x3),
            np.zeros_like(x1),
        ])

    def B_fn(x1, x2, x3):
        return np.stack([
            a * np.cos(x1) * np.sin(x2) * np.sin(x3),
            a * np.sin(x1) * np.cos(x2) * np.sin(x3),
            -2.0 * a * np.sin(x1) * np.sin(x2) * np.cos(x3),
        ])

    return make_state(sample_field(grid, u_fn), sample_field(grid, B_fn))


def _random_divfree(grid: Grid, rng: np.random.Generator,
                    kmax: int) -> np.ndarray:
    """Hermitian, divergence-free coefficients on 0 < |k|_inf <= kmax."""
    n = grid.n
    if not 1 <= kmax <= n // 2 - 1:
        raise ValueError(f"kmax must be in [1, {n // 2 - 1}], got {kmax}")
    # Random smooth real field, then band-limit and project in spectral space.
    raw = rng.standard_normal((3, n, n, n))
    c = fftv(raw)
    band = np.all(np.abs(grid.kvec) <= kmax, axis=0) & (grid.k2 > 0)
    c *= band
    return project_arr(c, grid)


def random_bandlimited(grid: Grid, amplitude: float = 0.1, seed: int = 0,
                       kmax: int = 4, norm_order: int = 2) -> SimState:
    """Seeded random divergence-free fields of prescribed Sobolev size.

    u and B are drawn independently and each rescaled so its H^norm_order
    norm equals amplitude / 2 (total "size" amplitude when added in
    quadrature would be amplitude / sqrt(2); the split keeps the two fields
    comparable).  Identical (grid, seed, kmax, norm_order, amplitude) inputs
    reproduce the state bit for bit.
    """
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(2):
        c = _random_divfree(grid, rng, kmax)
        f = SpectralVectorField(c, grid, div_free=True)
        size = diagnostics.sobolev_norm(f, norm_order)
        if size == 0.0:
            raise ValueError("random draw produced a zero field")
        fields.append(
            SpectralVectorField(c * (amplitude / 2.0 / size), grid,
                                div_free=True)
        )
    return SimState(t=0.0, u_hat=fields[0], B_hat=fields[1])


PRESETS = {
    "steady": steady,
    "alfven": alfven,
    "taylor-green-mhd": taylor_green_mhd,
    "random-bandlimited": random_bandlimited,
}


def make_preset(name: str, grid: Grid, **kwargs) -> SimState:
    """Instantiate a preset by registry name; unknown names raise ValueError."""
    try:
        fn = PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown preset {name!r} (known: {known})") from None
    return fn(grid, **kwargs)
