"""Closed-form optimal values, explicit solution sets, and the constructive
homogenization sequence that closes the relaxation gap on the disk.

On the circle the relaxed optimum 2LM (raw units; L*M*H^1/|Omega| in general)
is approached by characteristic functions chi_Gamma - chi_Gamma^c: each step
splits Gamma and its complement into small cells, removes a centered arc of
measure eps*h_i from each Gamma-cell and adds a centered arc of measure
eps*l_i inside each complement cell, with

    h_i = |F_i| (1 - target/2) / 2,    l_i = |F~_i| (1 + target/2) / 2,

so that sum eps*h_i = sum eps*l_i and the mass is preserved exactly.  The
proof's step size eps = C1 * min(C2, gap) (C1 = 1/(8 A^2 H^1(dOmega)), A the
uniform trace bound) guarantees an increase but is extremely conservative; it
is kept as the floor of a short monotone line search.

The module also houses the rectangle / sector two-branch closed forms, the
rectangle maximizer family, the finite rectangle solution set, the disk
solution-existence test with witnesses, and the F_s measure family of the
sector lemma (K(a) = inf_s (1/F_s(1)) int a / (u^2 sqrt(u^2 - s^2)) du has
value 1 at a = 1 and sup over unit-mass densities equal to 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .functional import ArcSet, Density
from .geometry import Disk, Rectangle, Sector, critical_L
from .specfun import bessel_j, bessel_j_prime, bessel_zero


# ---------------------------------------------------------------------------
# disk: omega_N and solution existence
# ---------------------------------------------------------------------------

def disk_omega_N(N, L):
    """Evenly spaced arcs on the unit circle cancelling cos(2n.) for n <= N.

    Uses p equal arcs of measure (L+1)pi/p centered at 2*pi*i/p with p the
    smallest integer dividing no 2n, n <= N (p = N+1 for even N, N+2 for odd
    N): the arc sum over the p-th roots of unity kills every harmonic whose
    doubled index is not a multiple of p.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not (0.0 <= L < 1.0):
        raise ValueError("L must lie in [0, 1)")
    p = N + 1 if N % 2 == 0 else N + 2  # smallest odd integer > N
    half = 0.5 * (L + 1.0) * np.pi / p
    arcs = [(2.0 * np.pi * i / p - half, 2.0 * np.pi * i / p + half)
            for i in range(p)]
    return ArcSet.from_intervals(arcs, 2.0 * np.pi)


def disk_cos_moments(arcs, ns):
    """c_n = int_Gamma cos(2 n theta) dtheta, exact, vectorized over n."""
    ns = np.atleast_1d(np.asarray(ns, dtype=float))
    out = np.zeros(len(ns))
    for lo, hi in arcs.arcs:
        out += (np.sin(2.0 * ns * hi) - np.sin(2.0 * ns * lo)) / (2.0 * ns)
    return out


def disk_truncated_value_exact(arcs, mode_list, M=1.0):
    """J_N of the bang-bang density M(2 chi_Gamma - 1), exact arc integrals.

    Modes are the first-N disk modes; angular orders j >= 1 contribute
    2LM -/+ (2M/pi) c_j, the radial j = 0 modes exactly 2LM.
    """
    L = 2.0 * arcs.measure / arcs.period - 1.0
    base = 2.0 * L * M
    orders = sorted({m.indices[0] for m in mode_list if m.indices[0] >= 1})
    if not orders:
        return base
    c = disk_cos_moments(arcs, orders)
    worst = 0.0
    for j, cj in zip(orders, c):
        has_cos = any(m.indices[0] == j and m.indices[2] == 1
                      for m in mode_list)
        has_sin = any(m.indices[0] == j and m.indices[2] == 2
                      for m in mode_list)
        if has_cos and has_sin:
            worst = max(worst, abs(cj))
        elif has_cos:
            worst = max(worst, -cj)  # cos branch: 2LM + (2M/pi) c_j
        elif has_sin:
            worst = max(worst, cj)
    return base - (2.0 * M / np.pi) * worst


def disk_solution_exists(L, tol=1e-12):
    """(P_infinity) on the disk has a bang-bang solution iff
    L in {0, +-1/2, +-1}; returns (flag, witness ArcSet or None)."""
    if abs(L) > 1.0 + tol:
        raise ValueError("L must lie in [-1, 1]")
    period = 2.0 * np.pi
    witnesses = {
        0.0: [(0.0, np.pi)],
        0.5: [(0.0, 1.5 * np.pi)],
        -0.5: [(0.0, 0.5 * np.pi)],
        1.0: [(0.0, period)],
        -1.0: [],
    }
    for key, arcs in witnesses.items():
        if abs(L - key) <= tol:
            return True, ArcSet(arcs, period)
    return False, None


def disk_optimal_value(L, M=1.0, radius=1.0):
    """sup J_infinity over bar-U_{L,M} on the disk: 2LM/R raw (pi L M
    paper-normalized for R = 1), for every |L| <= 1."""
    return 2.0 * L * M / radius


# ---------------------------------------------------------------------------
# rectangle and sector closed forms
# ---------------------------------------------------------------------------

def rect_critical_L(alpha, beta):
    return 2.0 * min(alpha, beta) / (alpha + beta)


def rect_optimal_value(alpha, beta, L):
    """Two-branch closed form for the rectangle (raw = displayed units)."""
    if abs(L) > 1.0:
        raise ValueError("L must lie in [-1, 1]")
    Lc = rect_critical_L(alpha, beta)
    if abs(L) <= Lc:
        return 2.0 * L * (alpha + beta) / (np.pi * alpha * beta)
    return math.copysign(2.0 * Lc * (alpha + beta) / (np.pi * alpha * beta), L)


def rect_maximizer(alpha, beta, L, u, mesh, M=1.0):
    """Maximizer family on the supercritical branch L > L^c.

    With b = min(alpha, beta) the short-side pair carries a = M and the long
    sides carry u*c and (2-u)*c, c = (L(alpha+beta) - b)/max(alpha, beta),
    for any u in the admissible interval (2 - M/c, M/c).
    """
    Lc = rect_critical_L(alpha, beta)
    if not L > Lc:
        raise ValueError("maximizer family requires L > L^c")
    big, small = max(alpha, beta), min(alpha, beta)
    c = (L * (alpha + beta) - small) / big * M
    lo_u, hi_u = 2.0 - M / c, M / c
    if not (lo_u <= u <= hi_u):
        raise ValueError(f"u={u} outside admissible interval [{lo_u}, {hi_u}]")
    # short sides: segments 0,2 if beta <= alpha (vertical), else 1,3
    short_pair = (0, 2) if beta <= alpha else (1, 3)
    long_pair = (1, 3) if beta <= alpha else (0, 2)
    values = np.empty(len(mesh))
    sid = mesh.segment_ids
    values[np.isin(sid, short_pair)] = M
    values[sid == long_pair[0]] = u * c
    values[sid == long_pair[1]] = (2.0 - u) * c
    return Density(mesh, values, L, M)


def rect_solution_set(alpha, beta, tol=1e-12):
    """The displayed finite set of volume fractions L for which the
    rectangle bang-bang problem has a solution (membership only)."""
    s = alpha + beta
    set_a = {0.0, alpha / s, -alpha / s, 2 * alpha / s, -2 * alpha / s, 1.0, -1.0}
    set_b = {0.0, beta / s, -beta / s, 2 * beta / s, -2 * beta / s, 1.0, -1.0}
    out = sorted(x for x in set_a
                 if any(abs(x - y) <= tol for y in set_b) and abs(x) <= 1 + tol)
    return out


def sector_critical_L(theta1):
    t = math.tan(theta1)
    return theta1 * (1.0 + t) / ((1.0 + theta1) * t)


def sector_optimal_value(theta1, R, L):
    """Two-branch closed form for the angular sector (no bifurcation)."""
    if abs(L) > 1.0:
        raise ValueError("L must lie in [-1, 1]")
    H = 2.0 * R * (1.0 + theta1)
    A = theta1 * R ** 2
    Lc = sector_critical_L(theta1)
    if abs(L) <= Lc:
        return L * H / A
    return math.copysign((abs(L) + Lc) * H / (2.0 * A), L)


# ---------------------------------------------------------------------------
# sector F_s measure family (Lemma on the radial profile family)
# ---------------------------------------------------------------------------

def sector_Fs(s, x):
    """F_s(x) = int_s^x du / (u^2 sqrt(u^2 - s^2)) = sqrt(x^2-s^2)/(s^2 x)."""
    if not (0.0 < s < 1.0):
        raise ValueError("s must lie in (0, 1)")
    if x < s:
        raise ValueError("x must lie in [s, 1]")
    return math.sqrt(x * x - s * s) / (s * s * x)


def sector_fs_density(s, u):
    """Probability density f_s(u) = (1/F_s(1)) chi_(s,1)(u)/(u^2 sqrt(u^2-s^2))."""
    if not (0.0 < s < 1.0):
        raise ValueError("s must lie in (0, 1)")
    u = np.asarray(u, dtype=float)
    inside = (u > s) & (u < 1.0)
    out = np.zeros_like(u)
    uu = u[inside]
    out[inside] = 1.0 / (sector_Fs(s, 1.0) * uu ** 2 * np.sqrt(uu ** 2 - s * s))
    return out if out.ndim else float(out)


def sector_kernel_value(a, s, n_quad=200):
    """K_s(a) = (1/F_s(1)) int_s^1 a(u) du/(u^2 sqrt(u^2-s^2)).

    The substitution u = s/cos(t) removes the endpoint singularity:
    K_s(a) = int_0^T a(s/cos t) cos t dt / sin(T), T = arccos(s); evaluated
    by Gauss-Legendre (a may be any callable on (s, 1)).
    """
    T = math.acos(s)
    t, w = np.polynomial.legendre.leggauss(n_quad)
    t = 0.5 * T * (t + 1.0)
    w = 0.5 * T * w
    vals = a(s / np.cos(t))
    return float(np.sum(w * vals * np.cos(t)) / math.sin(T))


def sector_lemma7_inf(a, s_grid=None, n_quad=200):
    """inf over s of K_s(a) on a grid (default 100 points), with a local
    golden-section refinement around the grid argmin."""
    if s_grid is None:
        s_grid = np.linspace(0.005, 0.995, 100)
    vals = np.array([sector_kernel_value(a, s, n_quad) for s in s_grid])
    i = int(np.argmin(vals))
    lo = s_grid[max(i - 1, 0)]
    hi = s_grid[min(i + 1, len(s_grid) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc = sector_kernel_value(a, c, n_quad)
    fd = sector_kernel_value(a, d, n_quad)
    for _ in range(60):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = sector_kernel_value(a, c, n_quad)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = sector_kernel_value(a, d, n_quad)
    return min(float(vals[i]), fc, fd)


def sector_luke_check(theta1, n, k, points=2048):
    """Quadrature of int_0^1 Phi_{n,k}(u) du next to the displayed closed
    form n^2 pi^2/(n^2 pi^2 - theta1).  Both returned, nothing asserted."""
    from scipy.integrate import quad

    from .spectra import sector_phi
    dom = Sector(theta1, 1.0)
    numeric, _ = quad(lambda u: float(sector_phi(dom, n, k, u)), 0.0, 1.0,
                      limit=points, epsabs=1e-12, epsrel=1e-12)
    paper_value = n ** 2 * np.pi ** 2 / (n ** 2 * np.pi ** 2 - theta1)
    return float(numeric), float(paper_value)


# ---------------------------------------------------------------------------
# Gamma^eps homogenization on the circle
# ---------------------------------------------------------------------------

@dataclass
class SequenceState:
    gamma: ArcSet
    j_value: float
    iteration: int
    epsilon_used: float
    j0_used: int


# measured uniform bound of t_j on the unit disk: (2/pi) cos^2 <= 2/pi
_UB_DISK = 2.0 / np.pi
_C1 = 1.0 / (8.0 * _UB_DISK ** 2 * 2.0 * np.pi)   # 1/(8 A^2 H^1(dOmega))
_C2 = (1.0 / _C1) * min(1.0, 2.0)                 # (c_delta v_1)^1 / V_1 = 2


def _disk_j_raw(arcs, M=1.0, n_max=8192):
    from .functional import j_infinity_exact
    return j_infinity_exact(arcs, Disk(1.0), max_harmonic=n_max).raw


def _j0_for_gap(arcs, gap, cap=2048):
    """Smallest j0 with all higher-mode energies within a quarter gap of the
    target: direct scan of the exact moments plus the 1/n arc tail bound."""
    n_arcs = max(len(arcs.arcs), 1)
    thresh = np.pi * gap / 16.0  # (4/pi)|c_n| <= gap/4
    ns = np.arange(1, cap + 1)
    c = np.abs(disk_cos_moments(arcs, ns))
    above = np.nonzero(c > thresh)[0]
    j0_scan = int(ns[above[-1]]) if above.size else 0
    j0_tail = int(math.ceil(n_arcs / max(thresh, 1e-300)))
    return max(j0_scan + 1, min(j0_tail, cap))


_GOLDEN_FRAC = 0.6180339887498949


def _jitter_edges(lo, hi, n, seed):
    """Partition [lo, hi] into n cells with deterministically uneven lengths.

    Equal cells of width w put every removed/added sliver on the lattice
    (2pi/w)Z, so the cos(n theta) moments add coherently at n = 2pi/w and the
    supremum does not shrink.  Low-discrepancy length jitter (golden-ratio
    sequence, lengths in [0.55, 1.45] x mean) decoheres those spikes."""
    r = np.modf((np.arange(n) + seed) * _GOLDEN_FRAC)[0]
    lens = 1.0 + 0.9 * (r - 0.5)
    lens *= (hi - lo) / lens.sum()
    edges = np.empty(n + 1)
    edges[0] = lo
    np.cumsum(lens, out=edges[1:])
    edges[1:] += lo
    edges[-1] = hi
    return edges


def _gamma_eps(arcs, L, eps, cells_target, seed):
    """One Gamma^eps perturbation: remove centered slivers eps*h_i from the
    cells covering Gamma, add centered slivers eps*l_i inside the complement
    cells.  The h_i / l_i balance preserves the mass exactly.  Cells are
    allocated across arcs in proportion to length (about cells_target total
    on Gamma and on the complement each), with jittered lengths."""
    period = arcs.period
    comp = arcs.complement()
    new = []
    seed_offset = 0
    for lo, hi in arcs.arcs:  # Gamma cells: remove centered eps*h_i
        n_cells = max(1, int(round(cells_target * (hi - lo) / arcs.measure)))
        edges = _jitter_edges(lo, hi, n_cells, seed + seed_offset)
        seed_offset += n_cells
        for a, b in zip(edges[:-1], edges[1:]):
            h = (b - a) * (1.0 - L) / 2.0
            mid = 0.5 * (a + b)
            cut = 0.5 * eps * h
            new.append((a, mid - cut))
            new.append((mid + cut, b))
    for lo, hi in comp.arcs:  # complement cells: add centered eps*l_i
        n_cells = max(1, int(round(cells_target * (hi - lo) / comp.measure)))
        edges = _jitter_edges(lo, hi, n_cells, seed + seed_offset)
        seed_offset += n_cells
        for a, b in zip(edges[:-1], edges[1:]):
            ell_i = (b - a) * (1.0 + L) / 2.0
            mid = 0.5 * (a + b)
            add = 0.5 * eps * ell_i
            new.append((mid - add, mid + add))
    return ArcSet.from_intervals(new, period)


def gamma_eps_step(state, L, target, eps_ladder=(0.8, 0.5, 0.3)):
    """One accepted homogenization step on the unit circle.

    The convergence-proof step size eps = C1 * min(C2, gap) is kept as the
    line-search floor; the best strictly increasing candidate over the eps
    ladder wins.  Mass is preserved exactly by the h_i / l_i balance.
    Raises if no candidate increases J even after one cell refinement."""
    gamma = state.gamma
    j_now = state.j_value
    gap = target - j_now
    if gap <= 0.0:
        return state
    eps_proof = _C1 * min(_C2, gap)
    j0 = _j0_for_gap(gamma, gap)
    n_arcs = len(gamma.arcs)
    cells_target = int(min(max(256, 2 * n_arcs, j0), 2048))
    seed = 7919 * (state.iteration + 1)

    for attempt in range(2):
        best = None
        for eps in tuple(eps_ladder) + (eps_proof,):
            cand = _gamma_eps(gamma, L, eps, cells_target, seed)
            if abs(cand.measure - gamma.measure) > 1e-12 * gamma.period:
                continue  # overlapping-arc resolution changed the mass
            j_new = _disk_j_raw(cand)
            if j_new > j_now and (best is None or j_new > best[1]):
                best = (cand, j_new, eps)
        if best is not None:
            cand, j_new, eps = best
            return SequenceState(gamma=cand, j_value=j_new,
                                 iteration=state.iteration + 1,
                                 epsilon_used=eps, j0_used=j0)
        cells_target = min(2 * cells_target, 4096)  # retry once, finer cells
        seed += 1
    raise RuntimeError("gamma_eps_step: no strictly increasing perturbation found")


def maximizing_sequence(L, max_iter=10, gamma0=None, gap_tol=None):
    """Iterate gamma_eps_step on the unit disk from a single arc toward the
    relaxed optimum target = 2L (raw units).  Returns the SequenceState
    trajectory.  Stops early once target - J <= gap_tol (default: 10% of the
    initial gap; arc counts roughly triple per step, so running all the way
    down costs memory and time quadratically for no structural gain) or
    after three stalled attempts."""
    if not abs(L) < 1.0:
        raise ValueError("|L| must be < 1")
    target = 2.0 * L
    if gamma0 is None:
        gamma0 = ArcSet.from_intervals([(0.0, (L + 1.0) * np.pi)], 2.0 * np.pi)
    states = [SequenceState(gamma=gamma0, j_value=_disk_j_raw(gamma0),
                            iteration=0, epsilon_used=0.0, j0_used=0)]
    if gap_tol is None:
        gap_tol = 0.10 * max(target - states[0].j_value, 0.0)
    stalls = 0
    for _ in range(max_iter):
        if target - states[-1].j_value <= max(gap_tol, 1e-14):
            break
        try:
            nxt = gamma_eps_step(states[-1], L, target)
        except RuntimeError:
            stalls += 1
            if stalls >= 3:
                break
            continue
        states.append(nxt)
    return states
