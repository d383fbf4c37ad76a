"""Periodic-box discretization and vector-field containers.

Conventions, fixed here and relied on by every other module:

* Domain: the cube [0, 2*pi)^3 with n collocation points per axis
  (n even, n >= 4), spacing dx = 2*pi/n.  Real-space arrays are indexed
  ``[i1, i2, i3]`` along (x1, x2, x3), component axis first for vector
  fields: shape (3, n, n, n).
* Spectral storage is the full complex FFT cube with *forward*
  normalization::

      c(k) = n**-3 * sum_x f(x) * exp(-i k.x)

  so a single mode ``a*exp(i k.x) + c.c.`` carries coefficient ``a`` at +k
  and ``conj(a)`` at -k, and real fields satisfy the Hermitian symmetry
  ``c(-k) = conj(c(k))``.
* Integer wavenumbers per axis: {-n/2, ..., n/2 - 1} in FFT layout.
* Parseval under this convention::

      integral |f|^2 dx = (2*pi)^3 * sum_k |c(k)|^2

  which is what every norm in :mod:`mhdbox.diagnostics` uses.
* First-derivative operators zero the k = -n/2 Nyquist planes (the sign of
  those modes is ambiguous); even powers of k keep them.

All cached grid arrays are marked read-only, and transforms use serial
deterministic reductions unless a worker count is set explicitly, so
identical inputs give bitwise-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import fft as _fft

__all__ = [
    "TWO_PI",
    "Grid",
    "RealVectorField",
    "SpectralVectorField",
    "make_grid",
    "sample_field",
    "fftv",
    "ifftv",
    "set_fft_workers",
    "fft_workers",
]

TWO_PI = 2.0 * np.pi

_FFT_AXES = (-3, -2, -1)
_workers = 1


def set_fft_workers(count: int) -> None:
    """Set the worker count handed to scipy.fft (1 = fully serial)."""
    global _workers
    count = int(count)
    if count < 1:
        raise ValueError("FFT worker count must be >= 1")
    _workers = count


def fft_workers() -> int:
    return _workers


def fftv(a: np.ndarray) -> np.ndarray:
    """Forward transform over the trailing three axes, forward-normalized.

    Works on any array whose last three axes are the spatial ones, so a
    (3, n, n, n) vector field or a (3, 3, n, n, n) gradient stack transform
    in a single call.
    """
    return _fft.fftn(a, axes=_FFT_AXES, norm="forward", workers=_workers)


def ifftv(a: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fftv`, returning the real part."""
    return _fft.ifftn(a, axes=_FFT_AXES, norm="forward", workers=_workers).real


@dataclass(frozen=True)
class Grid:
    """Cubic periodic grid on [0, 2*pi)^3.

    Derived arrays (coordinates, wavenumbers, masks) are materialized lazily,
    cached, and frozen read-only.  Two grids compare equal iff they have the
    same resolution.
    """

    n: int
    L: float = field(default=TWO_PI, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"grid resolution must be an integer, got {self.n!r}")
        if self.n % 2 != 0 or self.n < 4:
            raise ValueError(
                f"grid resolution must be an even integer >= 4, got {self.n}"
            )

    # -- geometry ---------------------------------------------------------

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def volume(self) -> float:
        return self.L**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @cached_property
    def x1d(self) -> np.ndarray:
        x = self.dx * np.arange(self.n)
        x.setflags(write=False)
        return x

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape (3, n, n, n); axis 0 is the component."""
        c = np.stack(np.meshgrid(self.x1d, self.x1d, self.x1d, indexing="ij"))
        c.setflags(write=False)
        return c

    # -- spectral layout ----------------------------------------------------

    @cached_property
    def k1d(self) -> np.ndarray:
        """Integer wavenumbers {-n/2 .. n/2-1} in FFT layout, as float64."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        k.setflags(write=False)
        return k

    @cached_property
    def kvec(self) -> np.ndarray:
        """Wavenumber vectors, shape (3, n, n, n)."""
        kx = self.k1d[:, None, None]
        ky = self.k1d[None, :, None]
        kz = self.k1d[None, None, :]
        k = np.stack(np.broadcast_arrays(kx, ky, kz)).astype(np.float64)
        k.setflags(write=False)
        return k

    @cached_property
    def k2(self) -> np.ndarray:
        """|k|^2 per mode, shape (n, n, n)."""
        k2 = np.sum(self.kvec**2, axis=0)
        k2.setflags(write=False)
        return k2

    @cached_property
    def inv_k2(self) -> np.ndarray:
        """1/|k|^2 with the k = 0 entry zeroed (for zero-mean inversions)."""
        k2 = self.k2.copy()
        k2[0, 0, 0] = 1.0
        inv = 1.0 / k2
        inv[0, 0, 0] = 0.0
        inv.setflags(write=False)
        return inv

    @cached_property
    def ik_grad(self) -> np.ndarray:
        """i*k used by first derivatives; each axis' Nyquist plane is zeroed."""
        ik = 1j * self.kvec
        m = self.n // 2  # index of the k = -n/2 plane in FFT layout
        ik[0, m, :, :] = 0.0
        ik[1, :, m, :] = 0.0
        ik[2, :, :, m] = 0.0
        ik.setflags(write=False)
        return ik

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean keep-mask of the 2/3 rule: True iff max_j |k_j| <= n/3."""
        keep = np.abs(self.k1d) <= self.n / 3.0
        mask = keep[:, None, None] & keep[None, :, None] & keep[None, None, :]
        mask.setflags(write=False)
        return mask


def make_grid(n: int) -> Grid:
    """Build the n^3 periodic grid; rejects odd or too-small n."""
    return Grid(n)


@dataclass
class RealVectorField:
    """Three-component field sampled on grid nodes, shape (3, n, n, n)."""

    data: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.float64)
        expected = (3, *self.grid.shape)
        if self.data.shape != expected:
            raise ValueError(
                f"expected field shape {expected}, got {self.data.shape}"
            )

    def copy(self) -> "RealVectorField":
        return RealVectorField(self.data.copy(), self.grid)

    def validate(self) -> None:
        """Raise ValueError if any sample is non-finite."""
        if not np.isfinite(self.data).all():
            raise ValueError("real field contains non-finite values")

    def to_spectral(self) -> "SpectralVectorField":
        return SpectralVectorField(fftv(self.data), self.grid)

    def max_magnitude(self) -> float:
        """Largest pointwise Euclidean magnitude, max_x |f(x)|."""
        return float(np.sqrt(np.sum(self.data**2, axis=0)).max())


@dataclass
class SpectralVectorField:
    """Spectral coefficients of a real three-component field.

    ``div_free`` asserts that the coefficients satisfy k . c(k) = 0 for every
    mode (checked by :meth:`validate`, not enforced on mutation).
    """

    data: np.ndarray
    grid: Grid
    div_free: bool = False

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data, dtype=np.complex128)
        expected = (3, *self.grid.shape)
        if self.data.shape != expected:
            raise ValueError(
                f"expected field shape {expected}, got {self.data.shape}"
            )

    def copy(self) -> "SpectralVectorField":
        return SpectralVectorField(self.data.copy(), self.grid, self.div_free)

    def to_real(self) -> RealVectorField:
        return RealVectorField(ifftv(self.data), self.grid)

    def hermitian_defect(self) -> float:
        """max_k |c(k) - conj(c(-k))| relative to max |c| (0 for zero field)."""
        scale = float(np.abs(self.data).max())
        if scale == 0.0:
            return 0.0
        r = self.data[..., ::-1, ::-1, ::-1]
        r = np.roll(r, (1, 1, 1), axis=(-3, -2, -1))
        return float(np.abs(self.data - np.conj(r)).max() / scale)

    def divergence_defect(self) -> float:
        """max_k |k . c(k)| relative to max |c| (0 for the zero field)."""
        scale = float(np.abs(self.data).max())
        if scale == 0.0:
            return 0.0
        kd = np.abs(np.sum(self.grid.kvec * self.data, axis=0)).max()
        return float(kd / scale)

    def validate(self, tol: float = 1e-12) -> None:
        """Check finiteness, Hermitian symmetry, and the div-free flag."""
        if not np.isfinite(self.data).all():
            raise ValueError("spectral field contains non-finite values")
        herm = self.hermitian_defect()
        if herm > tol:
            raise ValueError(
                f"spectral field breaks Hermitian symmetry (defect {herm:.3e})"
            )
        if self.div_free:
            div = self.divergence_defect()
            if div > tol:
                raise ValueError(
                    f"field flagged divergence-free has defect {div:.3e}"
                )


def sample_field(grid: Grid, f: Callable) -> RealVectorField:
    """Sample an analytic vector field ``f(x1, x2, x3) -> (f1, f2, f3)``.

    ``f`` receives three (n, n, n) coordinate arrays and must return three
    broadcastable components.  Non-finite samples are rejected.
    """
    x1, x2, x3 = grid.coords
    values = f(x1, x2, x3)
    data = np.empty((3, *grid.shape))
    for j in range(3):
        data[j] = np.broadcast_to(np.asarray(values[j], dtype=np.float64),
                                  grid.shape)
    out = RealVectorField(data, grid)
    out.validate()
    return out
