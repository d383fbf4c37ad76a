"""Shared fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from mhdbox import make_grid


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8)


@pytest.fixture(scope="session")
def grid16():
    return make_grid(16)


@pytest.fixture(scope="session")
def grid32():
    return make_grid(32)


def rel_err(a, b) -> float:
    """Max-norm error of `a` against reference `b`, relative to max|b|."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.max(np.abs(b))
    if scale == 0.0:
        return float(np.max(np.abs(a)))
    return float(np.max(np.abs(a - b)) / scale)
