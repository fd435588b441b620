"""Bessel zero finder against an independent series-bisection oracle."""

import numpy as np
import pytest

from spectral_mirror.specfun import bessel_j, bessel_j_prime, bessel_zero


def j0_series(x, terms=60):
    """J_0 by its power series; independent of scipy (converges fast for
    x < 10, terms decay factorially)."""
    total, term = 1.0, 1.0
    q = 0.25 * x * x
    for m in range(1, terms):
        term *= -q / (m * m)
        total += term
    return total


def test_first_j0_zero_matches_series_bisection():
    lo, hi = 2.0, 3.0
    assert j0_series(lo) > 0 > j0_series(hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if j0_series(mid) > 0:
            lo = mid
        else:
            hi = mid
    oracle = 0.5 * (lo + hi)
    assert abs(bessel_zero(0, 1) - oracle) < 1e-12
    assert abs(oracle - 2.404825557695773) < 1e-12


def test_half_order_zeros_are_k_pi():
    # J_{1/2}(x) ~ sin(x): zeros exactly at k*pi
    for k in range(1, 21):
        assert abs(bessel_zero(0.5, k) - k * np.pi) < 1e-10


def test_zeros_are_zeros():
    for nu in list(range(0, 21)) + [2.5, 7.25, np.pi]:
        for k in range(1, 21):
            z = bessel_zero(nu, k)
            assert abs(bessel_j(nu, z)) < 1e-10


def test_zero_interlacing():
    # z_{nu,k} < z_{nu+1,k} < z_{nu,k+1}
    for nu in range(0, 12):
        for k in range(1, 12):
            a = bessel_zero(nu, k)
            b = bessel_zero(nu + 1, k)
            c = bessel_zero(nu, k + 1)
            assert a < b < c


def test_zeros_strictly_increasing_in_k():
    z = [bessel_zero(3.7, k) for k in range(1, 30)]
    assert all(b > a + 1.0 for a, b in zip(z, z[1:]))  # spacing tends to pi


def test_derivative_consistent_with_difference_quotient():
    for nu in (0.0, 1.0, 4.5):
        x = 7.3
        h = 1e-6
        fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2 * h)
        assert abs(bessel_j_prime(nu, x) - fd) < 1e-8


def test_order_guard():
    with pytest.raises(ValueError):
        bessel_j(-1.0, 1.0)
    with pytest.raises(ValueError):
        bessel_j(500.0, 1.0)
    with pytest.raises(ValueError):
        bessel_zero(0, 0)
