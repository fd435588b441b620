"""Bessel-function kernel: J_nu, J_nu' and positive zeros for real order.

Evaluation is delegated to scipy.special (jv / jvp); the zero finder is
implemented here because no library routine covers the fractional orders
nu = pi*n/(2*theta1) needed by the angular sector.  Zeros are located by a
McMahon / uniform-asymptotic seed followed by a sign-change scan and Brent
bracketing; consecutive zeros of J_nu are separated by more than pi for
nu >= 1/2, so a 0.5-step scan cannot skip one.  Results are memoized per
(order, index).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize, special

_MAX_ORDER = 200.0


def bessel_j(nu, x):
    """J_nu(x) for real nu >= 0 (scalar or array x)."""
    if nu < 0 or nu > _MAX_ORDER:
        raise ValueError(f"order nu={nu} outside supported range [0, {_MAX_ORDER}]")
    out = special.jv(nu, x)
    if np.any(~np.isfinite(out)):
        raise FloatingPointError(f"J_nu evaluation overflowed (nu={nu})")
    return out


def bessel_j_prime(nu, x):
    """J_nu'(x) via the recurrence (J_{nu-1} - J_{nu+1})/2."""
    if nu < 0 or nu > _MAX_ORDER:
        raise ValueError(f"order nu={nu} outside supported range [0, {_MAX_ORDER}]")
    out = special.jvp(nu, x)
    if np.any(~np.isfinite(out)):
        raise FloatingPointError(f"J_nu' evaluation overflowed (nu={nu})")
    return out


def _first_zero_seed(nu):
    """Lower bound / estimate for z_{nu,1}."""
    if nu == 0.0:
        return 2.0
    # uniform asymptotic: z_{nu,1} ~ nu + 1.8557571 nu^(1/3) + 1.033150 nu^(-1/3)
    return nu + 1.8557571 * nu ** (1.0 / 3.0)


@lru_cache(maxsize=None)
def bessel_zero(nu, k):
    """k-th positive zero of J_nu (k >= 1), abs error ~1e-13.

    Scan-and-bracket: start just past the previous zero (or just below the
    first-zero estimate), advance in 0.5 steps until J_nu changes sign, then
    Brent to machine precision.
    """
    nu = float(nu)
    k = int(k)
    if k < 1:
        raise ValueError("zero index k must be >= 1")
    if nu < 0 or nu > _MAX_ORDER:
        raise ValueError(f"order nu={nu} outside supported range [0, {_MAX_ORDER}]")
    if k == 1:
        lo = max(0.5 * _first_zero_seed(nu), nu, 1e-3)
    else:
        lo = bessel_zero(nu, k - 1) + 1e-9
    f_lo = special.jv(nu, lo)
    if f_lo == 0.0:  # pathologically exact hit
        lo += 1e-9
        f_lo = special.jv(nu, lo)
    step = 0.5
    hi = lo
    for _ in range(100000):
        hi = hi + step
        f_hi = special.jv(nu, hi)
        if np.sign(f_hi) != np.sign(f_lo):
            break
        lo, f_lo = hi, f_hi
    else:  # pragma: no cover
        raise RuntimeError(f"failed to bracket zero {k} of J_{nu}")
    z = optimize.brentq(lambda x: special.jv(nu, x), lo, hi,
                        xtol=1e-14, rtol=8.9e-16, maxiter=200)
    # one Newton step to polish
    fp = special.jvp(nu, z)
    if fp != 0.0:
        z = z - special.jv(nu, z) / fp
    return float(z)
