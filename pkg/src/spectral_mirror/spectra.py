"""Dirichlet eigenmodes and squared Neumann boundary traces.

For each model domain the first N eigenvalues are enumerated with a
geometrically grown cutoff (no mode of the true spectrum can be skipped) and
the boundary quantity used throughout,

    t_j(x) = (1/lambda_j) * (d phi_j / d nu)^2 (x),   x in dOmega,

is evaluated in closed form:

  rectangle (-a*pi/2,a*pi/2)x(-b*pi/2,b*pi/2), a=alpha, b=beta:
      phi_{n,k} = 2/(pi sqrt(ab)) sin(n(x+pi a/2)/a) sin(k(y+pi b/2)/b),
      lambda = n^2/a^2 + k^2/b^2;
      on a vertical side  t = (4/(pi^2 ab)) (n^2/a^2) sin^2(k(y+pi b/2)/b)/lambda,
      on a horizontal side the roles of (n,a,x) and (k,b,y) swap.

  disk radius R: indices (j,k,m), m=1 cosine / m=2 sine (j=0 collapses m):
      lambda = (z_{j,k}/R)^2, z the Bessel zeros;
      t = 1/(pi R^2) for j=0,  (2/(pi R^2)) cos^2(j theta) resp. sin^2(j theta).

  sector half-angle theta1, radius R, order nu_n = pi n/(2 theta1):
      lambda = (z_{nu_n,k}/R)^2;
      on the arc      t = (2/(R^2 theta1)) sin^2(nu_n (theta + theta1)),
      on the edges    t = (1/theta1) Phi_{n,k}(r/R),
      Phi_{n,k}(u) = (n^2 pi^2/(2 z^2 theta1^2)) (J_nu(z u)/(R u J_nu'(z)))^2.

All t_j integrate the Rellich identity exactly:
int_dOmega t_j <x - x0, nu> dH^1 = 2 for every interior (indeed every) x0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Disk, Rectangle, Sector
from .specfun import bessel_j, bessel_j_prime, bessel_zero


@dataclass(frozen=True)
class EigenMode:
    """One Dirichlet eigenmode, identified by its domain and index tuple.

    indices: rectangle (n, k); disk (j, k, m) with m=1 cos, m=2 sin;
    sector (n, k).
    """
    domain: object
    indices: tuple
    lam: float


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def _rect_modes(dom, N):
    out = []
    cut = 4.0 * (1.0 / dom.alpha ** 2 + 1.0 / dom.beta ** 2)
    while True:
        out.clear()
        nmax = int(math.ceil(dom.alpha * math.sqrt(cut))) + 1
        kmax = int(math.ceil(dom.beta * math.sqrt(cut))) + 1
        for n in range(1, nmax + 1):
            for k in range(1, kmax + 1):
                lam = (n / dom.alpha) ** 2 + (k / dom.beta) ** 2
                if lam <= cut:
                    out.append(EigenMode(dom, (n, k), lam))
        if len(out) >= N:
            break
        cut *= 2.0
    out.sort(key=lambda m: (m.lam, m.indices))
    return out[:N]


def _disk_modes(dom, N):
    R = dom.radius
    z_cut = 2.0 * bessel_zero(0.0, max(1, int(math.isqrt(N)) + 2))
    while True:
        out = []
        j = 0
        while j <= z_cut:  # z_{j,1} > j, so higher j cannot contribute
            k = 1
            while True:
                z = bessel_zero(float(j), k)
                if z > z_cut:
                    break
                lam = (z / R) ** 2
                if j == 0:
                    out.append(EigenMode(dom, (0, k, 0), lam))
                else:
                    out.append(EigenMode(dom, (j, k, 1), lam))
                    out.append(EigenMode(dom, (j, k, 2), lam))
                k += 1
            j += 1
        if len(out) >= N:
            break
        z_cut *= 1.5
    out.sort(key=lambda m: (m.lam, m.indices))
    return out[:N]


def _sector_modes(dom, N):
    t1, R = dom.theta1, dom.radius
    # Weyl estimate: #\{z_{nu_n,k} <= Z\} ~ t1 Z^2/(4 pi); pad by 1.5
    z_cut = 1.5 * math.sqrt(4.0 * np.pi * N / t1) + bessel_zero(
        np.pi / (2 * t1), 1)
    while True:
        out = []
        n = 1
        while True:
            nu = np.pi * n / (2.0 * t1)
            if nu > z_cut:  # z_{nu,1} > nu
                break
            k = 1
            while True:
                z = bessel_zero(nu, k)
                if z > z_cut:
                    break
                out.append(EigenMode(dom, (n, k), (z / R) ** 2))
                k += 1
            n += 1
        if len(out) >= N:
            break
        z_cut *= 1.5
    out.sort(key=lambda m: (m.lam, m.indices))
    return out[:N]


def modes(domain, N):
    """First N Dirichlet modes sorted by (eigenvalue, index tuple)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if isinstance(domain, Rectangle):
        return _rect_modes(domain, N)
    if isinstance(domain, Disk):
        return _disk_modes(domain, N)
    if isinstance(domain, Sector):
        return _sector_modes(domain, N)
    raise TypeError(f"no explicit spectral basis for domain {domain!r}")


# ---------------------------------------------------------------------------
# boundary traces
# ---------------------------------------------------------------------------

def _rect_trace(mode, positions, segment_ids):
    dom = mode.domain
    n, k = mode.indices
    a, b = dom.alpha, dom.beta
    x = positions[:, 0]
    y = positions[:, 1]
    amp = 4.0 / (np.pi ** 2 * a * b) / mode.lam
    vertical = (segment_ids == 0) | (segment_ids == 2)
    out = np.empty(len(positions))
    out[vertical] = amp * (n / a) ** 2 * np.sin(
        k * (y[vertical] + np.pi * b / 2.0) / b) ** 2
    horiz = ~vertical
    out[horiz] = amp * (k / b) ** 2 * np.sin(
        n * (x[horiz] + np.pi * a / 2.0) / a) ** 2
    return out


def _disk_trace(mode, positions):
    dom = mode.domain
    j, _, m = mode.indices
    R = dom.radius
    if j == 0:
        return np.full(len(positions), 1.0 / (np.pi * R ** 2))
    theta = np.arctan2(positions[:, 1], positions[:, 0])
    ang = np.cos(j * theta) if m == 1 else np.sin(j * theta)
    return (2.0 / (np.pi * R ** 2)) * ang ** 2


def _sector_trace(mode, positions, segment_ids):
    dom = mode.domain
    n, k = mode.indices
    t1, R = dom.theta1, dom.radius
    nu = np.pi * n / (2.0 * t1)
    z = bessel_zero(nu, k)
    out = np.empty(len(positions))
    on_arc = segment_ids == 1
    theta = np.arctan2(positions[on_arc, 1], positions[on_arc, 0])
    out[on_arc] = (2.0 / (R ** 2 * t1)) * np.sin(nu * (theta + t1)) ** 2
    edge = ~on_arc
    u = np.hypot(positions[edge, 0], positions[edge, 1]) / R
    jp = bessel_j_prime(nu, z)
    phi = (n ** 2 * np.pi ** 2 / (2.0 * z ** 2 * t1 ** 2)) * \
        (bessel_j(nu, z * u) / (R * u * jp)) ** 2
    out[edge] = phi / t1
    return out


def trace_sq_matrix(domain, mode_list, mesh):
    """(N, nodes) array of t_j at the mesh nodes (vectorized)."""
    rows = []
    for mode in mode_list:
        if isinstance(domain, Rectangle):
            rows.append(_rect_trace(mode, mesh.positions, mesh.segment_ids))
        elif isinstance(domain, Disk):
            rows.append(_disk_trace(mode, mesh.positions))
        elif isinstance(domain, Sector):
            rows.append(_sector_trace(mode, mesh.positions, mesh.segment_ids))
        else:
            raise TypeError(f"no boundary traces for domain {domain!r}")
    return np.array(rows)


def neumann_trace_sq_over_lambda(mode, point):
    """t_j at a single BoundaryPoint."""
    pos = np.asarray(point.position, dtype=float)[None, :]
    sid = np.array([point.segment_id])
    dom = mode.domain
    if isinstance(dom, Rectangle):
        return float(_rect_trace(mode, pos, sid)[0])
    if isinstance(dom, Disk):
        return float(_disk_trace(mode, pos)[0])
    if isinstance(dom, Sector):
        return float(_sector_trace(mode, pos, sid)[0])
    raise TypeError(f"no boundary traces for domain {dom!r}")


def sector_phi(domain, n, k, u):
    """Radial edge profile Phi_{n,k}(u), u in (0, 1]."""
    t1, R = domain.theta1, domain.radius
    nu = np.pi * n / (2.0 * t1)
    z = bessel_zero(nu, k)
    jp = bessel_j_prime(nu, z)
    u = np.asarray(u, dtype=float)
    return (n ** 2 * np.pi ** 2 / (2.0 * z ** 2 * t1 ** 2)) * \
        (bessel_j(nu, z * u) / (R * u * jp)) ** 2


def cesaro_mean(domain, N, mesh):
    """Cesaro mean (1/N) sum_{j<=N} t_j at the mesh nodes.

    Returns (nodal_means, sup_deviation) where the deviation is measured
    against the ergodic constant 2/(n |Omega|) = 1/area (n = 2).
    """
    T = trace_sq_matrix(domain, modes(domain, N), mesh)
    mean = T.mean(axis=0)
    dev = float(np.max(np.abs(mean - 1.0 / domain.area())))
    return mean, dev
