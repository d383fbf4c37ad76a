"""Spectral differential operators against symbolic references."""

from __future__ import annotations

import numpy as np
import pytest
import sympy as sp

from conftest import rel_err
from mhdbox import make_grid
from mhdbox.grid import RealVectorField, SpectralVectorField, fftv, ifftv, sample_field
from mhdbox.operators import (
    cross_arr,
    cross_const,
    curl,
    dealias_two_thirds,
    derivative,
    divergence,
    gradient,
    laplacian,
    leray_project,
    multiply_pointwise,
)

X1, X2, X3 = sp.symbols("x1 x2 x3")

# a nontrivial band-limited field used throughout: trig polynomial up to |k|=3
FIELD = (
    sp.sin(X2) + sp.Rational(1, 2) * sp.cos(2 * X1) * sp.sin(X3),
    sp.cos(X1) * sp.sin(X2) * sp.cos(X3),
    sp.sin(3 * X3) - sp.cos(X1 + 2 * X2),
)


def _sample(grid, exprs):
    """Evaluate a sympy component tuple on the grid, spectrally transformed."""
    fns = [sp.lambdify((X1, X2, X3), e, "numpy") for e in exprs]
    f = sample_field(grid, lambda a, b, c: tuple(fn(a, b, c) for fn in fns))
    return SpectralVectorField(fftv(f.data), grid)


def _check_against(grid, got_hat, exprs, tol=1e-12):
    expect = _sample(grid, exprs)
    scale = max(np.max(np.abs(ifftv(expect.data))), 1e-30)
    err = np.max(np.abs(ifftv(got_hat) - ifftv(expect.data))) / scale
    assert err < tol, err


# -- derivatives vs symbolic differentiation ----------------------------------

@pytest.mark.parametrize("axis", [1, 2, 3])
def test_derivative_matches_sympy(grid16, axis):
    f = _sample(grid16, FIELD)
    var = (X1, X2, X3)[axis - 1]
    expect = tuple(sp.diff(e, var) for e in FIELD)
    _check_against(grid16, derivative(f, axis).data, expect)


def test_derivative_axis_validation(grid8):
    f = _sample(grid8, FIELD)
    for axis in (0, 4, -1):
        with pytest.raises(ValueError):
            derivative(f, axis)


def test_curl_matches_sympy(grid16):
    f = _sample(grid16, FIELD)
    f1, f2, f3 = FIELD
    expect = (
        sp.diff(f3, X2) - sp.diff(f2, X3),
        sp.diff(f1, X3) - sp.diff(f3, X1),
        sp.diff(f2, X1) - sp.diff(f1, X2),
    )
    got = curl(f)
    assert got.div_free
    _check_against(grid16, got.data, expect)


def test_divergence_matches_sympy(grid16):
    f = _sample(grid16, FIELD)
    expect = (sp.diff(FIELD[0], X1) + sp.diff(FIELD[1], X2)
              + sp.diff(FIELD[2], X3),
              sp.Integer(0), sp.Integer(0))
    div3 = np.stack([divergence(f), np.zeros(grid16.shape, complex),
                     np.zeros(grid16.shape, complex)])
    _check_against(grid16, div3, expect)


def test_laplacian_matches_sympy(grid16):
    f = _sample(grid16, FIELD)
    expect = tuple(sp.diff(e, X1, 2) + sp.diff(e, X2, 2) + sp.diff(e, X3, 2)
                   for e in FIELD)
    _check_against(grid16, laplacian(f).data, expect)


def test_gradient_of_scalar(grid16):
    expr = sp.sin(X1) * sp.cos(2 * X3)
    fn = sp.lambdify((X1, X2, X3), expr, "numpy")
    x1, x2, x3 = grid16.coords
    c = fftv(fn(x1, x2, x3))
    expect = (sp.diff(expr, X1), sp.diff(expr, X2), sp.diff(expr, X3))
    _check_against(grid16, gradient(c, grid16).data, expect)


# -- Nyquist handling ----------------------------------------------------------

def test_nyquist_first_derivative_vanishes(grid8):
    # cos(4 x1) lives on the n=8 Nyquist plane: its odd derivative has no
    # consistent spectral representative and is zeroed
    f = _sample(grid8, (sp.cos(4 * X1), 0, 0))
    assert np.max(np.abs(derivative(f, 1).data)) == 0.0


def test_nyquist_even_derivative_kept(grid8):
    f = _sample(grid8, (sp.cos(4 * X1), 0, 0))
    _check_against(grid8, laplacian(f).data, (-16 * sp.cos(4 * X1), 0, 0))


# -- Leray projection ----------------------------------------------------------

def _random_spectral(grid, seed=0):
    rng = np.random.default_rng(seed)
    f = RealVectorField(rng.standard_normal((3,) + grid.shape), grid)
    return f.to_spectral()


def test_projection_idempotent(grid16):
    p1 = leray_project(_random_spectral(grid16))
    p2 = leray_project(p1)
    assert np.max(np.abs(p2.data - p1.data)) / np.max(np.abs(p1.data)) < 1e-13


def test_projection_output_divergence_free(grid16):
    p = leray_project(_random_spectral(grid16, seed=2))
    assert p.div_free
    assert p.divergence_defect() < 1e-12


def test_projection_annihilates_gradients(grid16):
    # (sin x1, 0, 0) = grad(-cos x1) is a pure gradient
    f = _sample(grid16, (sp.sin(X1), 0, 0))
    p = leray_project(f)
    assert np.max(np.abs(p.data)) < 1e-14


def test_projection_keeps_mean_flow(grid8):
    f = sample_field(grid8, lambda a, b, c: (1.0 + 0 * a, 2.0 + 0 * a, -3.0 + 0 * a))
    p = leray_project(f.to_spectral())
    assert rel_err(ifftv(p.data), f.data) < 1e-14


def test_projection_commutes_with_derivative_on_div_free(grid16):
    f = leray_project(_random_spectral(grid16, seed=7))
    a = derivative(leray_project(f), 2).data
    b = leray_project(derivative(f, 2)).data
    assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-12


# -- chained identities ---------------------------------------------------------

def test_curl_of_gradient_vanishes(grid16):
    expr = sp.sin(X1) * sp.cos(X2) + sp.cos(2 * X3)
    fn = sp.lambdify((X1, X2, X3), expr, "numpy")
    x1, x2, x3 = grid16.coords
    g = gradient(fftv(fn(x1, x2, x3)), grid16)
    scale = np.max(np.abs(g.data))
    assert np.max(np.abs(curl(g).data)) / scale < 1e-13


def test_divergence_of_curl_vanishes(grid16):
    f = _random_spectral(grid16, seed=9)
    c = curl(f)
    assert np.max(np.abs(divergence(c))) / np.max(np.abs(c.data)) < 1e-13


def test_lorentz_force_identity(grid32):
    # (curl B) x B = (B . grad) B - grad(|B|^2 / 2), checked pseudo-spectrally
    # on band-limited data so the products are alias-free
    rng = np.random.default_rng(21)
    raw = np.zeros((3,) + grid32.shape, dtype=complex)
    mask = grid32.k2 <= 16.0
    for j in range(3):
        coeffs = rng.standard_normal(grid32.shape) * mask
        raw[j] = fftv(ifftv(coeffs.astype(complex)))   # hermitianize
    B = leray_project(SpectralVectorField(raw, grid32))
    b = ifftv(B.data)
    curl_b = ifftv(curl(B).data)
    lhs = cross_arr(curl_b, b)

    adv = np.zeros_like(b)
    for j in range(3):
        gb = ifftv(derivative(B, j + 1).data)
        adv += b[j] * gb
    half_b2 = fftv(0.5 * np.sum(b * b, axis=0))
    rhs = adv - ifftv(gradient(half_b2, grid32).data)
    assert np.max(np.abs(lhs - rhs)) / np.max(np.abs(lhs)) < 1e-11


# -- dealiasing ------------------------------------------------------------------

def test_dealias_band_examples(grid32):
    # n = 32: |k| = 10 is inside the 2/3 band, |k| = 11 outside
    data = np.zeros((3,) + grid32.shape, dtype=complex)
    data[0, 10, 0, 0] = 1.0
    data[0, -10, 0, 0] = 1.0
    data[1, 11, 0, 0] = 1.0
    data[1, -11, 0, 0] = 1.0
    out = dealias_two_thirds(SpectralVectorField(data, grid32)).data
    assert out[0, 10, 0, 0] == 1.0
    assert np.max(np.abs(out[1])) == 0.0


def test_dealias_of_zero_is_zero(grid8):
    z = SpectralVectorField(np.zeros((3,) + grid8.shape, complex), grid8)
    assert np.max(np.abs(dealias_two_thirds(z).data)) == 0.0


# -- pointwise products ------------------------------------------------------------

def test_multiply_pointwise_trig_identity(grid16):
    # sin^2(x1) = 1/2 - cos(2 x1)/2
    f = sample_field(grid16, lambda a, b, c: (np.sin(a), 0.0, 0.0))
    prod = multiply_pointwise(f, f)
    x1 = grid16.coords[0]
    np.testing.assert_allclose(prod.data[0], 0.5 - 0.5 * np.cos(2 * x1),
                               atol=1e-15)


def test_multiply_pointwise_field_scalar(grid8):
    f = sample_field(grid8, lambda a, b, c: (np.cos(a), np.sin(b), 0.0))
    w = np.full(grid8.shape, 2.0)
    prod = multiply_pointwise(f, w)
    np.testing.assert_allclose(prod.data, 2.0 * f.data, atol=0.0)


def test_multiply_pointwise_grid_mismatch(grid8, grid16):
    f8 = sample_field(grid8, lambda a, b, c: (np.cos(a), 0.0, 0.0))
    f16 = sample_field(grid16, lambda a, b, c: (np.cos(a), 0.0, 0.0))
    with pytest.raises(ValueError):
        multiply_pointwise(f8, f16)


def test_cross_products_match_numpy():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((3, 5, 5, 5))
    b = rng.standard_normal((3, 5, 5, 5))
    got = cross_arr(a, b)
    expect = np.cross(a, b, axisa=0, axisb=0, axisc=0)
    np.testing.assert_allclose(got, expect, atol=1e-15)
    v = (0.3, -1.2, 0.7)
    got_c = cross_const(a, v)
    expect_c = np.cross(a, np.asarray(v), axisa=0, axisb=0, axisc=0)
    np.testing.assert_allclose(got_c, expect_c, atol=1e-15)
