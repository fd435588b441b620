"""Maximization of the truncated worst-mode functional over bar-U_{L,M}.

The discretized problem

    max_{|a_i| <= M, sum w_i a_i = L M P}  min_{j <= N}  mu_j(a),
    mu_j(a) = sum_i w_i t_{ji} a_i,

is a finite saddle problem: by Sion's minimax theorem it equals

    min_{beta in simplex}  max_a  int a * phi_beta,
    phi_beta = sum_j beta_j t_j   (the switching function),

and for fixed beta the inner maximum is a closed-form "bathtub" rearrangement:
a = M above a level Lambda of phi_beta, -M below, with the level set carrying
whatever constant value balances the mass constraint.

The outer minimization runs entropic mirror descent with the classical step
eta_t = sqrt(2 ln N / t) / G and uniform iterate averaging.  Because the
O(1/sqrt(T)) regret cannot certify tight tolerances, a final *polish* solves
the linear saddle system implied by the discovered node partition / active
mode set (equal active energies + switching-level equations) and is accepted
only when every saddle inequality verifies and the duality gap shrinks.

`brute_force_value` is an independent oracle for tiny instances: it
enumerates the vertices of the epigraph LP (all but at most N coordinates
pinned at +-M) and never sees the mirror-descent code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from .geometry import Disk, boundary_mesh
from .functional import ArcSet, Density
from .spectra import modes as enumerate_modes
from .spectra import trace_sq_matrix


# ---------------------------------------------------------------------------
# bathtub rearrangement
# ---------------------------------------------------------------------------

def bathtub_max(phi, weights, L, M=1.0, tie_tol=None):
    """Maximize sum_i w_i a_i phi_i over |a_i| <= M, sum w_i a_i = L*M*P.

    Returns (a, level): a = M where phi > level, -M where phi < level, and a
    common fractional value on the level set chosen so the mass constraint
    holds exactly.  Nodes within tie_tol of the level count as ties (floating
    noise must not shatter a genuinely flat switching function).
    """
    phi = np.asarray(phi, dtype=float)
    w = np.asarray(weights, dtype=float)
    P = float(w.sum())
    target = L * M * P
    if L >= 1.0:
        return np.full_like(phi, M), float(phi.min())
    if L <= -1.0:
        return np.full_like(phi, -M), float(phi.max())
    if tie_tol is None:
        tie_tol = 1e-12 * max(1e-300, float(np.max(np.abs(phi))))

    order = np.argsort(-phi, kind="stable")
    cum = np.cumsum(w[order])
    q = 0.5 * (L + 1.0) * P  # weight that must sit at +M
    k = int(np.searchsorted(cum, q * (1.0 - 1e-15)))
    k = min(k, len(phi) - 1)
    level = float(phi[order[k]])

    above = phi > level + tie_tol
    below = phi < level - tie_tol
    tie = ~(above | below)
    a = np.where(above, M, -M).astype(float)
    fixed_mass = M * (w[above].sum() - w[below].sum())
    tie_w = w[tie].sum()
    c = (target - fixed_mass) / tie_w
    if abs(c) > M * (1.0 + 1e-9):
        raise RuntimeError("bathtub level-set balance out of range")
    a[tie] = min(max(c, -M), M)
    return a, level


# ---------------------------------------------------------------------------
# solve result
# ---------------------------------------------------------------------------

@dataclass
class SolveResult:
    domain: object
    N: int
    L: float
    M: float
    mesh: object
    modes: list
    value: float                # J_N of the returned density (primal)
    dual_value: float           # best certified upper bound
    duality_gap: float
    density: Density
    beta: np.ndarray            # simplex weights over the N modes
    switching: np.ndarray       # nodal phi_beta
    level: float
    mode_energies: np.ndarray
    iterations: int
    polished: bool

    @property
    def bangbang_fraction(self):
        frac_tie = float(self.mesh.weights[np.abs(self.density.values)
                                           < self.M * (1 - 1e-9)].sum())
        return 1.0 - frac_tie / self.mesh.perimeter


# ---------------------------------------------------------------------------
# mirror descent with saddle polish
# ---------------------------------------------------------------------------

def _primal_dual(Tw, T, w, beta, L, M):
    """Bathtub primal/dual pair for a given beta."""
    phi = T.T @ beta
    a, level = bathtub_max(phi, w, L, M)
    mu = Tw @ a
    primal = float(mu.min())
    dual = float(np.dot(beta, mu))  # = max_a <a, phi_beta> at the bathtub a
    return phi, a, level, mu, primal, dual


def _polish(T, Tw, w, L, M, phi_bar, beta_bar, mu_bar, gap_old, primal_old):
    """Solve the linear saddle system suggested by the averaged iterate.

    Partitions nodes by phi_bar against the bathtub level, takes the tie set
    T* and an equally sized active mode set S, and solves (least squares)

        sum_{i in T*} w_i a_i            = target - fixed mass
        mu_j(a) = v            (j in S)
        sum_{j in S} beta_j t_j(x_i) = Lambda  (i in T*),  sum beta = 1.

    Returns a verified (a, beta, level, value, gap) tuple or None.
    """
    n_modes, n_nodes = T.shape
    P = float(w.sum())
    target = L * M * P
    scale = max(1.0, M * P)
    _, a0, level0, _, _, _ = _primal_dual(Tw, T, w, beta_bar, L, M)

    # candidate (tie nodes, active modes) pairs: a cheap ladder by
    # level-closeness / smallest energy, exhaustive on tiny instances
    closeness = np.abs(phi_bar - level0)
    node_order = np.argsort(closeness, kind="stable")
    mode_order = np.argsort(mu_bar, kind="stable")
    candidates = [(node_order[:t], mode_order[:t])
                  for t in range(1, min(n_modes, n_nodes) + 1)]
    if n_modes <= 6 and n_nodes <= 12:
        for t in range(1, min(n_modes, 4) + 1):
            for tie_c in combinations(node_order[:min(n_nodes, 8)], t):
                for S_c in combinations(range(n_modes), t):
                    candidates.append((np.array(tie_c), np.array(S_c)))

    # flat saddles: the averaged switching function carries no usable sign
    # information, so also try every node fractional with the active mode
    # set swept separately (least squares then picks the symmetric solution)
    all_nodes = np.arange(n_nodes)
    for s in range(1, min(n_modes, 6) + 1):
        candidates.append((all_nodes, mode_order[:s]))
    if n_modes <= 6:
        for s in range(1, n_modes + 1):
            for S_c in combinations(range(n_modes), s):
                candidates.append((all_nodes, np.array(S_c)))
    candidates.append((all_nodes, np.arange(n_modes)))

    best = None
    for tie, S in candidates:
        t_size, s_size = len(tie), len(S)
        fixed = np.setdiff1d(np.arange(n_nodes), tie)
        sign = np.where(phi_bar[fixed] > level0, M, -M)

        # block 1: (a_tie, v)
        A1 = np.zeros((1 + s_size, t_size + 1))
        b1 = np.zeros(1 + s_size)
        A1[0, :t_size] = w[tie]
        b1[0] = target - float(np.dot(w[fixed], sign))
        A1[1:, :t_size] = Tw[np.ix_(S, tie)]
        A1[1:, t_size] = -1.0
        b1[1:] = -Tw[np.ix_(S, fixed)] @ sign if len(fixed) else 0.0
        sol1, *_ = np.linalg.lstsq(A1, b1, rcond=None)
        if np.linalg.norm(A1 @ sol1 - b1) > 1e-9 * scale:
            continue
        a_tie, v = sol1[:t_size], sol1[t_size]
        if np.max(np.abs(a_tie)) > M * (1.0 + 1e-8):
            continue
        a = np.empty(n_nodes)
        a[fixed] = sign
        a[tie] = np.clip(a_tie, -M, M)
        mu = Tw @ a
        value = float(mu.min())
        if value < v - 1e-8 * scale:
            continue

        # block 2: (beta_S, Lambda)
        A2 = np.zeros((t_size + 1, s_size + 1))
        b2 = np.zeros(t_size + 1)
        A2[:t_size, :s_size] = T[np.ix_(S, tie)].T
        A2[:t_size, s_size] = -1.0
        A2[t_size, :s_size] = 1.0
        b2[t_size] = 1.0
        sol2, *_ = np.linalg.lstsq(A2, b2, rcond=None)
        if np.linalg.norm(A2 @ sol2 - b2) > 1e-9:
            continue
        beta_S, level = sol2[:s_size], float(sol2[s_size])
        if beta_S.min() < -1e-8:
            continue
        beta = np.zeros(n_modes)
        beta[S] = np.clip(beta_S, 0.0, None)
        s = beta.sum()
        if s <= 0:
            continue
        beta /= s
        phi = T.T @ beta
        # partition consistency: fixed nodes keep their side of the level
        if np.any(np.sign(phi[fixed] - level) * np.sign(sign) < -1e-12):
            viol = np.abs(phi[fixed] - level)[
                np.sign(phi[fixed] - level) * np.sign(sign) < 0]
            if viol.size and viol.max() > 1e-7 * max(abs(level), 1e-12, float(np.ptp(phi))):
                continue
        a_dual, _ = bathtub_max(phi, w, L, M)
        dual = float(np.dot(phi * w, a_dual))
        gap = dual - value
        if gap < gap_old - 1e-15 and value >= primal_old - 1e-10 * scale:
            if best is None or gap < best[-1]:
                best = (a, beta, phi, level, value, dual, gap)
            if gap <= 1e-12 * scale:
                break
    return best


def solve_truncated(domain, N, L, M=1.0, node_count=1024, tol=None,
                    max_iter=20000, mesh=None, mode_list=None,
                    check_every=25):
    """Mirror-descent maximization of J_N over bar-U_{L,M}."""
    if mesh is None:
        mesh = boundary_mesh(domain, node_count)
    if mode_list is None:
        mode_list = enumerate_modes(domain, N)
    w = mesh.weights
    P = mesh.perimeter
    if tol is None:
        tol = 1e-6 * M * P
    T = trace_sq_matrix(domain, mode_list, mesh)
    Tw = T * w[None, :]
    G = float(M * np.max(Tw.sum(axis=1)))  # bound on |mu_j|, the subgradient

    n_modes = len(mode_list)
    log_beta = np.zeros(n_modes)
    beta_sum = np.zeros(n_modes)
    a_sum = np.zeros(len(w))
    best = None  # (gap, value, dual, a, beta, phi, level, iters)
    iters = 0
    eta_scale = math.sqrt(2.0 * math.log(max(n_modes, 2))) / G

    for t in range(1, max_iter + 1):
        iters = t
        beta = np.exp(log_beta - log_beta.max())
        beta /= beta.sum()
        beta_sum += beta
        phi = T.T @ beta
        a, _ = bathtub_max(phi, w, L, M)
        a_sum += a
        mu = Tw @ a
        log_beta -= (eta_scale / math.sqrt(t)) * mu

        if t % check_every == 0 or t == max_iter:
            beta_bar = beta_sum / t
            phi_b, a_b, lev_b, mu_b, primal, dual = _primal_dual(
                Tw, T, w, beta_bar, L, M)
            # ergodic primal: the average of the bathtub iterates is
            # feasible and converges to the saddle density
            a_avg = a_sum / t
            primal_avg = float((Tw @ a_avg).min())
            if primal_avg > primal:
                primal, a_b = primal_avg, a_avg
            gap = dual - primal
            if best is None or gap < best[0]:
                best = (gap, primal, dual, a_b, beta_bar, phi_b, lev_b, t)
            if best[0] < tol:
                break

    gap, primal, dual, a_b, beta_bar, phi_b, lev_b, _ = best
    mu_b = Tw @ a_b
    polished = False
    for _ in range(5):
        if gap <= 1e-13 * M * P:
            break
        ref = _polish(T, Tw, w, L, M, phi_b, beta_bar, Tw @ a_b, gap, primal)
        if ref is None:
            break
        a_b, beta_bar, phi_b, lev_b, primal, dual, gap = ref
        mu_b = Tw @ a_b
        polished = True

    density = Density(mesh, a_b, L, M)
    return SolveResult(
        domain=domain, N=N, L=L, M=M, mesh=mesh, modes=mode_list,
        value=primal, dual_value=dual, duality_gap=gap, density=density,
        beta=beta_bar, switching=phi_b, level=lev_b,
        mode_energies=mu_b, iterations=iters, polished=polished)


# ---------------------------------------------------------------------------
# exact oracle for tiny instances
# ---------------------------------------------------------------------------

def brute_force_value(domain, N, L, M=1.0, node_count=8, mesh=None,
                      mode_list=None):
    """Exact discretized optimum by LP vertex enumeration.

    At a vertex of max{t : t <= mu_j(a), |a_i| <= M, sum w a = target} all
    but at most N coordinates sit at +-M; the free block solves a square
    system pairing it with equally many active modes.  Guarded to tiny
    instances (N <= 4, <= 10 nodes).
    """
    if mesh is None:
        mesh = boundary_mesh(domain, node_count)
    if mode_list is None:
        mode_list = enumerate_modes(domain, N)
    n = len(mesh)
    if N > 4 or n > 10:
        raise ValueError("brute_force_value is limited to N <= 4, <= 10 nodes")
    w = mesh.weights
    T = trace_sq_matrix(domain, mode_list, mesh)
    Tw = T * w[None, :]
    target = L * M * float(w.sum())
    scale = max(1.0, M * float(w.sum()))

    best = -np.inf
    all_nodes = range(n)
    for f in range(0, N + 1):
        for free in combinations(all_nodes, f):
            fixed = [i for i in all_nodes if i not in free]
            for sigma in product((M, -M), repeat=len(fixed)):
                sigma = np.array(sigma)
                if f == 0:
                    if abs(float(w @ sigma) - target) > 1e-9 * scale:
                        continue
                    val = float((Tw @ sigma).min())
                    best = max(best, val)
                    continue
                rhs_mass = target - float(w[fixed] @ sigma)
                for S in combinations(range(len(mode_list)), f):
                    A = np.zeros((f + 1, f + 1))
                    b = np.zeros(f + 1)
                    A[0, :f] = w[list(free)]
                    b[0] = rhs_mass
                    A[1:, :f] = Tw[np.ix_(list(S), list(free))]
                    A[1:, f] = -1.0
                    b[1:] = -Tw[np.ix_(list(S), fixed)] @ sigma
                    try:
                        sol = np.linalg.solve(A, b)
                    except np.linalg.LinAlgError:
                        continue
                    if np.max(np.abs(sol[:f])) > M * (1.0 + 1e-10):
                        continue
                    a = np.empty(n)
                    a[list(free)] = sol[:f]
                    a[fixed] = sigma
                    val = float((Tw @ a).min())
                    best = max(best, val)
    if not np.isfinite(best):
        raise RuntimeError("no feasible LP vertex found")
    return float(best)


# ---------------------------------------------------------------------------
# bang-bang structure extraction
# ---------------------------------------------------------------------------

def extract_bangbang(result, tol=1e-9):
    """Arcs where the switching function exceeds its level.

    Returns (ArcSet, is_bangbang); the flag is False when the near-level set
    |phi - level| <= tol carries more than 1% of the perimeter (the optimum
    then need not be a characteristic function).
    """
    mesh = result.mesh
    phi = result.switching
    level = result.level
    mask = phi > level + tol
    lo, hi = mesh.cell_edges()
    intervals = []
    i = 0
    nn = len(mesh)
    while i < nn:
        if mask[i]:
            j = i
            while j + 1 < nn and mask[j + 1]:
                j += 1
            intervals.append((lo[i], hi[j]))
            i = j + 1
        else:
            i += 1
    arcs = ArcSet.from_intervals(intervals, mesh.perimeter)
    tie_weight = float(mesh.weights[np.abs(phi - level) <= tol].sum())
    return arcs, tie_weight <= 0.01 * mesh.perimeter
