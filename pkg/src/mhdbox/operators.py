"""Spectral differential operators, projection, dealiasing, and products.

Every function here is pure: arguments are never mutated and outputs depend
only on inputs through serial deterministic numpy reductions, so the module
is safe to use from concurrent runs.

Two layers are provided: ``*_arr`` functions acting on raw coefficient
arrays (used heavily by the time steppers), and thin typed wrappers on
:class:`~mhdbox.grid.SpectralVectorField` for everything with a public
contract.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid, RealVectorField, SpectralVectorField

__all__ = [
    "derivative",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "leray_project",
    "dealias_two_thirds",
    "multiply_pointwise",
]


# -- array layer -----------------------------------------------------------

def deriv_arr(c: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    """d/dx_axis in spectral space (axis 0..2); Nyquist plane zeroed."""
    return grid.ik_grad[axis] * c


def grad_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient of a spectral scalar (n,n,n) -> (3,n,n,n)."""
    return grid.ik_grad * c[None]


def div_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Divergence of a spectral vector (3,n,n,n) -> (n,n,n)."""
    return np.sum(grid.ik_grad * c, axis=0)


def curl_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    ik = grid.ik_grad
    return np.stack(
        (
            ik[1] * c[2] - ik[2] * c[1],
            ik[2] * c[0] - ik[0] * c[2],
            ik[0] * c[1] - ik[1] * c[0],
        )
    )


def laplacian_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    # Even derivative: no sign ambiguity, so Nyquist modes are kept.
    return -grid.k2 * c


def project_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Remove the gradient part per mode: c - k (k.c)/|k|^2; k=0 untouched."""
    kd = np.sum(grid.kvec * c, axis=0) * grid.inv_k2
    return c - grid.kvec * kd[None]


def dealias_arr(c: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero every coefficient with any |k_j| > n/3 (2/3 rule)."""
    return c * grid.dealias_mask


def cross_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of two (3, ...) stacks along axis 0."""
    return np.stack(
        (
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        )
    )


def cross_const(a: np.ndarray, v) -> np.ndarray:
    """Cross product a x v of a (3, ...) stack with a constant 3-vector."""
    v = np.asarray(v, dtype=np.float64)
    return np.stack(
        (
            a[1] * v[2] - a[2] * v[1],
            a[2] * v[0] - a[0] * v[2],
            a[0] * v[1] - a[1] * v[0],
        )
    )


# -- typed layer -----------------------------------------------------------

def derivative(f: SpectralVectorField, axis: int) -> SpectralVectorField:
    """Partial derivative along axis 1, 2, or 3 (multiplication by i*k).

    The k = -n/2 Nyquist plane of the chosen axis is zeroed.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2, or 3, got {axis}")
    return SpectralVectorField(deriv_arr(f.data, f.grid, axis - 1), f.grid)


def gradient(c: np.ndarray, grid: Grid) -> SpectralVectorField:
    """Gradient of a spectral scalar field as a spectral vector field."""
    c = np.asarray(c)
    if c.shape != grid.shape:
        raise ValueError(f"expected scalar shape {grid.shape}, got {c.shape}")
    return SpectralVectorField(grad_arr(c, grid), grid)


def divergence(f: SpectralVectorField) -> np.ndarray:
    """Divergence as a spectral scalar coefficient array."""
    return div_arr(f.data, f.grid)


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """Curl, i k x c(k) per mode.  The curl of any field is divergence-free."""
    return SpectralVectorField(curl_arr(f.data, f.grid), f.grid, div_free=True)


def laplacian(f: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(
        laplacian_arr(f.data, f.grid), f.grid, div_free=f.div_free
    )


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Project onto divergence-free fields, c(k) - k (k.c)/|k|^2.

    The k = 0 mode (the spatial mean) passes through unchanged.  The
    projection is idempotent and annihilates gradients of zero-mean scalars.
    """
    return SpectralVectorField(project_arr(f.data, f.grid), f.grid,
                               div_free=True)


def dealias_two_thirds(f: SpectralVectorField) -> SpectralVectorField:
    """Apply the 2/3-rule mask; modes with every |k_j| <= n/3 are kept."""
    return SpectralVectorField(dealias_arr(f.data, f.grid), f.grid,
                               div_free=f.div_free)


def multiply_pointwise(f, g):
    """Pointwise real-space product.

    Accepts two :class:`RealVectorField` on the same grid (componentwise
    product), a field and a scalar (n,n,n) array, or two scalar arrays.
    The result has the type of the field argument (or ndarray for
    scalar-scalar).
    """
    f_is_field = isinstance(f, RealVectorField)
    g_is_field = isinstance(g, RealVectorField)
    if f_is_field and g_is_field:
        if f.grid != g.grid:
            raise ValueError("grid mismatch in pointwise product")
        return RealVectorField(f.data * g.data, f.grid)
    if f_is_field:
        return RealVectorField(f.data * _scalar_on(f.grid, g)[None], f.grid)
    if g_is_field:
        return RealVectorField(_scalar_on(g.grid, f)[None] * g.data, g.grid)
    fa, ga = np.asarray(f), np.asarray(g)
    if fa.shape != ga.shape:
        raise ValueError("grid mismatch in pointwise product")
    return fa * ga


def _scalar_on(grid: Grid, c) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    if c.shape != grid.shape:
        raise ValueError("grid mismatch in pointwise product")
    return c
