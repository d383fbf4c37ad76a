"""Grid construction, FFT conventions, and field container contracts."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import rel_err
from mhdbox import make_grid
from mhdbox.grid import (
    Grid,
    RealVectorField,
    SpectralVectorField,
    fft_workers,
    fftv,
    ifftv,
    sample_field,
    set_fft_workers,
)

TWO_PI = 2.0 * math.pi


# -- construction ------------------------------------------------------------

def test_grid_basic_geometry(grid8):
    assert grid8.n == 8
    assert grid8.shape == (8, 8, 8)
    assert grid8.dx == pytest.approx(TWO_PI / 8, abs=0.0)
    assert grid8.volume == pytest.approx(TWO_PI**3)
    assert grid8.x1d[0] == 0.0
    assert grid8.x1d[1] == pytest.approx(grid8.dx, abs=0.0)


@pytest.mark.parametrize("bad", [7, 2, 0, -8, 8.0, True, "8"])
def test_grid_rejects_bad_sizes(bad):
    with pytest.raises((ValueError, TypeError)):
        Grid(bad)


def test_wavenumber_layout(grid8):
    # standard FFT ordering: 0, 1, ..., n/2 - 1, -n/2, ..., -1
    assert list(grid8.k1d.astype(int)) == [0, 1, 2, 3, -4, -3, -2, -1]
    k1, k2, k3 = grid8.kvec
    assert k1[3, 0, 0] == 3.0
    assert k2[0, 5, 0] == -3.0
    assert k3[0, 0, 7] == -1.0
    np.testing.assert_allclose(grid8.k2, k1**2 + k2**2 + k3**2)


def test_inverse_k2_zero_mode(grid8):
    assert grid8.inv_k2[0, 0, 0] == 0.0
    prod = grid8.k2 * grid8.inv_k2
    prod[0, 0, 0] = 1.0
    np.testing.assert_allclose(prod, 1.0, atol=1e-15)


def test_gradient_symbol_zeroes_nyquist(grid8):
    # the odd-derivative symbol has no consistent sign at the Nyquist plane
    g1, g2, g3 = grid8.ik_grad
    assert np.all(g1[4, :, :] == 0.0)
    assert np.all(g2[:, 4, :] == 0.0)
    assert np.all(g3[:, :, 4] == 0.0)
    assert g1[3, 0, 0] == 3.0j


def test_dealias_mask_band(grid32):
    # two-thirds rule at n = 32 keeps |k| <= 10 and zeroes |k| = 11
    m = grid32.dealias_mask
    assert m[10, 0, 0]
    assert not m[11, 0, 0]
    assert m[0, -10, 0]
    assert not m[0, 0, -11]


def test_grid_arrays_are_read_only(grid8):
    for arr in (grid8.k1d, grid8.k2, grid8.inv_k2, grid8.dealias_mask):
        with pytest.raises(ValueError):
            arr[0] = 1  # type: ignore[index]


# -- FFT conventions ---------------------------------------------------------

def test_forward_normalization_single_mode(grid8):
    # c(k) = n^-3 sum f e^{-ik.x}: a*sin(k.x) has coefficients -+ i a/2
    x1 = grid8.coords[0]
    f = np.zeros((3,) + grid8.shape)
    f[0] = 0.7 * np.sin(2 * x1)
    c = fftv(f)
    assert c[0, 2, 0, 0] == pytest.approx(-0.35j, abs=1e-15)
    assert c[0, -2, 0, 0] == pytest.approx(+0.35j, abs=1e-15)
    other = c.copy()
    other[0, 2, 0, 0] = 0
    other[0, -2, 0, 0] = 0
    assert np.max(np.abs(other)) < 1e-15


def test_fft_roundtrip_identity(grid16):
    rng = np.random.default_rng(3)
    f = rng.standard_normal((3,) + grid16.shape)
    back = ifftv(fftv(f))
    assert rel_err(back, f) < 1e-13


def test_parseval(grid16):
    # (2pi)^-3 integral |f|^2 dx equals sum over modes of |c|^2
    rng = np.random.default_rng(11)
    f = rng.standard_normal((3,) + grid16.shape)
    c = fftv(f)
    lhs = np.mean(np.sum(f * f, axis=0))
    rhs = np.sum(np.abs(c) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_fft_workers_bitwise_independent():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((3, 16, 16, 16))
    set_fft_workers(1)
    base = fftv(f)
    try:
        set_fft_workers(4)
        assert fft_workers() == 4
        np.testing.assert_array_equal(fftv(f), base)
    finally:
        set_fft_workers(1)


def test_fft_workers_validation():
    with pytest.raises(ValueError):
        set_fft_workers(0)
    assert fft_workers() == 1


# -- containers --------------------------------------------------------------

def test_real_field_shape_check(grid8):
    with pytest.raises(ValueError):
        RealVectorField(np.zeros((2, 8, 8, 8)), grid8)
    with pytest.raises(ValueError):
        RealVectorField(np.zeros((3, 8, 8, 4)), grid8)


def test_real_field_max_magnitude(grid8):
    data = np.zeros((3,) + grid8.shape)
    data[0] = 3.0
    data[1] = 4.0
    f = RealVectorField(data, grid8)
    assert f.max_magnitude() == pytest.approx(5.0, abs=0.0)


def test_spectral_roundtrip_and_defects(grid16):
    rng = np.random.default_rng(5)
    f = RealVectorField(rng.standard_normal((3,) + grid16.shape), grid16)
    c = f.to_spectral()
    assert c.hermitian_defect() < 1e-13
    assert rel_err(c.to_real().data, f.data) < 1e-13


def test_zero_field_defects_are_zero(grid8):
    c = SpectralVectorField(np.zeros((3,) + grid8.shape, dtype=complex), grid8,
                            div_free=True)
    assert c.hermitian_defect() == 0.0
    assert c.divergence_defect() == 0.0
    c.validate()


def test_validate_flags_divergence(grid8):
    data = np.zeros((3,) + grid8.shape, dtype=complex)
    data[0, 1, 0, 0] = 1.0  # k parallel to the only nonzero component
    data[0, -1, 0, 0] = 1.0
    bad = SpectralVectorField(data, grid8, div_free=True)
    assert bad.divergence_defect() > 0.5
    with pytest.raises(ValueError):
        bad.validate()


def test_sample_field(grid8):
    f = sample_field(grid8, lambda x1, x2, x3: (np.sin(x2), 0.0, np.cos(x3)))
    assert f.data.shape == (3,) + grid8.shape
    x2 = grid8.coords[1]
    np.testing.assert_allclose(f.data[0], np.sin(x2), atol=1e-15)
    assert np.all(f.data[1] == 0.0)


def test_sample_field_rejects_nonfinite(grid8):
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        sample_field(grid8, lambda x1, x2, x3: (1.0 / np.sin(x1), 0.0, 0.0))
