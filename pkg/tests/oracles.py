"""Independent reference computations used by the test suite.

Nothing in this module calls into the solver's spectral operators.  The
finite-difference oracle assembles its own periodic stencils and a sparse
Poisson solve; the single-mode oracle builds a dense 6x6 generator evolved
with a matrix exponential.  Agreement between these and the spectral code is
therefore a genuine cross-check rather than a self-comparison.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# high-order periodic finite differences
# ---------------------------------------------------------------------------

def fornberg_weights(z: float, x, m: int) -> np.ndarray:
    """Finite-difference weights on arbitrary nodes (Fornberg's recursion).

    Returns an array of shape ``(len(x), m + 1)`` whose column ``d`` holds
    the weights that combine samples at nodes ``x`` into the ``d``-th
    derivative at the point ``z``.
    """
    x = np.asarray(x, dtype=float)
    npts = len(x)
    c = np.zeros((npts, m + 1))
    c1 = 1.0
    c4 = x[0] - z
    c[0, 0] = 1.0
    for i in range(1, npts):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 = c2 * c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def periodic_diff_matrix(n: int, deriv: int, halfwidth: int = 5) -> np.ndarray:
    """Dense circulant matrix applying a centred FD derivative on [0, 2pi).

    An ``n``-point periodic grid and a ``2 * halfwidth + 1``-point centred
    stencil give a scheme of order ``2 * halfwidth`` for both first and
    second derivatives.
    """
    h = TWO_PI / n
    offsets = np.arange(-halfwidth, halfwidth + 1)
    w = fornberg_weights(0.0, offsets * h, deriv)[:, deriv]
    col = np.zeros(n)
    for off, weight in zip(offsets, w):
        col[(-off) % n] += weight
    return scipy.linalg.circulant(col)


def ns_rhs_fd_2d(u_fn, lam: float, n: int = 128, halfwidth: int = 5):
    """Velocity tendency of incompressible Navier-Stokes for a planar field.

    ``u_fn(X, Y) -> (u1, u2)`` describes a field that depends only on
    (x1, x2), so the problem reduces to a plane.  The advective and viscous
    terms are formed with order-10 periodic finite differences on an
    ``n x n`` grid, and the gradient part is removed through a sparse
    periodic Poisson solve pinned to the zero-mean gauge.

    Returns ``(du1, du2)`` plane arrays indexed ``[i1, i2]``.
    """
    x = TWO_PI * np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    u1, u2 = u_fn(X, Y)

    D1 = periodic_diff_matrix(n, 1, halfwidth)
    D2 = periodic_diff_matrix(n, 2, halfwidth)

    def dx(f):
        return D1 @ f

    def dy(f):
        return f @ D1.T

    def lap(f):
        return D2 @ f + f @ D2.T

    N1 = -(u1 * dx(u1) + u2 * dy(u1)) + lam * lap(u1)
    N2 = -(u1 * dx(u2) + u2 * dy(u2)) + lam * lap(u2)

    # Poisson solve for the gauge-fixed pressure-like potential:
    # lap(phi) = div(N), with phi pinned at the first node (the gradient is
    # unaffected by the gauge constant).
    L = (sp.kron(sp.csr_matrix(D2), sp.identity(n, format="csr"))
         + sp.kron(sp.identity(n, format="csr"), sp.csr_matrix(D2))).tolil()
    rhs = (dx(N1) + dy(N2)).ravel()
    rhs = rhs - rhs.mean()
    L[0] = 0.0
    L[0, 0] = 1.0
    rhs[0] = 0.0
    phi = spla.spsolve(L.tocsc(), rhs).reshape(n, n)

    return N1 - dx(phi), N2 - dy(phi)


# ---------------------------------------------------------------------------
# single-mode linearised dynamics
# ---------------------------------------------------------------------------

def _cross_with(v: np.ndarray) -> np.ndarray:
    """Matrix of the map a -> v x a."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def alfven_generator(k, lam: float, h_tilde) -> np.ndarray:
    """6x6 generator of the mode-k dynamics linearised about (0, H_tilde).

    State layout is ``(u_hat(k), B_hat(k))``.  The velocity block carries
    the viscous damping and the solenoidal projection of the background
    Lorentz force ``(i k x B) x H_tilde``; the induction block is the
    background stretching ``i (H_tilde . k) u``.
    """
    k = np.asarray(k, dtype=float)
    h = np.asarray(h_tilde, dtype=float)
    k2 = float(k @ k)
    if k2 == 0.0:
        raise ValueError("mode must be nonzero")
    proj = np.eye(3) - np.outer(k, k) / k2
    curl = 1j * _cross_with(k)                   # B_hat -> i k x B_hat
    lorentz = -_cross_with(h) @ curl             # (i k x B) x H = -H x (...)
    gen = np.zeros((6, 6), dtype=complex)
    gen[:3, :3] = -lam * k2 * np.eye(3)
    gen[:3, 3:] = proj @ lorentz
    gen[3:, :3] = 1j * float(h @ k) * np.eye(3)
    return gen


def alfven_linear_solution(u0, b0, k, lam: float, h_tilde, t: float):
    """Evolve one mode's (u_hat, B_hat) pair for time t via expm."""
    gen = alfven_generator(k, lam, h_tilde)
    y0 = np.concatenate([np.asarray(u0, complex), np.asarray(b0, complex)])
    y = scipy.linalg.expm(gen * t) @ y0
    return y[:3], y[3:]


# ---------------------------------------------------------------------------
# acoustics
# ---------------------------------------------------------------------------

def acoustic_period(k, pressure_K: float, gamma: float, rho_tilde: float,
                    eps: float) -> float:
    """Period of a linear sound wave on mode k at scaled sound speed."""
    kmag = math.sqrt(sum(float(ki) ** 2 for ki in k))
    sound = math.sqrt(pressure_K * gamma * rho_tilde ** (gamma - 1.0)) / eps
    return TWO_PI / (kmag * sound)
