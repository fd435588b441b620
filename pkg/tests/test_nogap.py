"""Closed-form solutions and the homogenized maximizing sequence."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spectral_mirror.functional import ArcSet, j_infinity_exact
from spectral_mirror.geometry import Disk, Rectangle, boundary_mesh
from spectral_mirror.nogap import (disk_cos_moments, disk_omega_N,
                                   disk_optimal_value, disk_solution_exists,
                                   disk_truncated_value_exact,
                                   gamma_eps_step, maximizing_sequence,
                                   rect_critical_L, rect_maximizer,
                                   rect_optimal_value, rect_solution_set,
                                   sector_critical_L, sector_fs_density,
                                   sector_Fs, sector_kernel_value,
                                   sector_lemma7_inf, sector_luke_check,
                                   sector_optimal_value, SequenceState)
from spectral_mirror.spectra import modes


def test_omega_N_moments_vanish():
    for N in (1, 5, 12, 20):
        arcs = disk_omega_N(N, 0.3)
        assert abs(arcs.measure - 1.3 * np.pi) < 1e-12
        c = disk_cos_moments(arcs, np.arange(1, N + 1))
        assert np.abs(c).max() < 1e-12


def test_omega_N_value_is_2L():
    for N in (5, 10, 20):
        arcs = disk_omega_N(N, 0.3)
        v = disk_truncated_value_exact(arcs, modes(Disk(1.0), N))
        assert abs(v - 0.6) < 1e-12
        assert abs(v - disk_optimal_value(0.3)) < 1e-12


def test_omega_N_spillover():
    # the truncated maximizer does NOT converge as N grows: its limit
    # functional stays strictly below the optimum
    arcs = disk_omega_N(20, 0.3)
    res = j_infinity_exact(arcs, Disk(1.0))
    assert res.raw < 0.6 - 0.1


def test_disk_solution_existence():
    for L in (0.0, 0.5, -0.5, 1.0, -1.0):
        exists, witness = disk_solution_exists(L)
        assert exists
        if abs(L) < 1.0:
            # the witness arc really attains 2L: all moments vanish
            res = j_infinity_exact(witness, Disk(1.0))
            assert abs(res.raw - 2 * L) < 1e-12
    for L in (0.3, 0.25, 0.9, -0.7):
        exists, witness = disk_solution_exists(L)
        assert not exists and witness is None


def test_rect_branches_continuous_and_subcritical_formula():
    for al, be in ((1.0, 1.0), (2.0, 1.0), (1.7, 0.6)):
        Lc = rect_critical_L(al, be)
        below = rect_optimal_value(al, be, Lc - 1e-14)
        above = rect_optimal_value(al, be, min(Lc + 1e-14, 1.0))
        assert abs(below - above) < 1e-12
        for L in (0.1, 0.5 * Lc, -0.3 * Lc):
            dom = Rectangle(al, be)
            expect = 2 * L * dom.perimeter() / (2 * dom.area())
            assert abs(rect_optimal_value(al, be, L) - expect) < 1e-12


def test_rect_maximizer_family_attains_value():
    al, be = 2.0, 1.0
    L = 0.8  # supercritical
    dom = Rectangle(al, be)
    mesh = boundary_mesh(dom, 4096)
    for u in (1.0, 1.2):
        dens = rect_maximizer(al, be, L, u, mesh)
        assert abs(dens.mass - L * dom.perimeter()) < 1e-9
        res = j_infinity_exact(dens, dom, mesh=mesh)
        assert abs(res.raw - rect_optimal_value(al, be, L)) < 1e-10


def test_rect_solution_set_square():
    assert rect_solution_set(1.0, 1.0) == sorted([-1.0, -0.5, 0.0, 0.5, 1.0])


def test_sector_branches():
    for t1 in (np.pi / 4, 0.5, 0.2):
        Lc = sector_critical_L(t1)
        below = sector_optimal_value(t1, 1.0, Lc - 1e-14)
        above = sector_optimal_value(t1, 1.0, Lc + 1e-14)
        assert abs(below - above) < 1e-12
        H = 2 * (1 + t1)
        A = t1
        assert abs(sector_optimal_value(t1, 1.0, 0.3 * Lc)
                   - 0.3 * Lc * H / A) < 1e-12


def test_sector_Fs_against_quadrature():
    for s in (0.2, 0.5, 0.8):
        oracle, _ = quad(lambda u: 1 / (u * u * math.sqrt(u * u - s * s)),
                         s, 1.0, points=[s], limit=200)
        assert abs(sector_Fs(s, 1.0) - oracle) < 1e-9


def test_sector_fs_density_normalized():
    s = 0.4
    val, _ = quad(lambda u: float(sector_fs_density(s, u)), s, 1.0,
                  points=[s], limit=200)
    assert abs(val - 1.0) < 1e-8


def test_sector_kernel_constant_density():
    for s in np.linspace(0.01, 0.99, 25):
        assert abs(sector_kernel_value(np.ones_like, s) - 1.0) < 1e-10


def test_sector_lemma7_perturbations_cannot_beat_one():
    rng = np.random.default_rng(5)
    for _ in range(25):
        c = rng.uniform(-0.3, 0.3, 3)
        a = lambda u, c=c: 1.0 + sum(ci * np.cos(2 * np.pi * (m + 1) * u)
                                     for m, ci in enumerate(c))
        assert sector_lemma7_inf(a) <= 1.0 + 1e-6


def test_sector_luke_reports_both_values():
    numeric, displayed = sector_luke_check(0.5, 1, 1)
    assert 0.5 < numeric < 1.5
    assert displayed == np.pi ** 2 / (np.pi ** 2 - 0.5)


def test_gamma_eps_step_increases_and_preserves_mass():
    L = 0.3
    arcs = ArcSet.from_intervals([(0.0, 1.3 * np.pi)], 2 * np.pi)
    from spectral_mirror.nogap import _disk_j_raw
    s0 = SequenceState(gamma=arcs, j_value=_disk_j_raw(arcs),
                       iteration=0, epsilon_used=0.0, j0_used=0)
    s1 = gamma_eps_step(s0, L, 2 * L)
    assert s1.j_value > s0.j_value
    assert abs(s1.gamma.measure - arcs.measure) < 1e-12
    assert s1.epsilon_used > 0


def test_maximizing_sequence_trajectory():
    states = maximizing_sequence(0.45, max_iter=3, gap_tol=0.25)
    js = [s.j_value for s in states]
    assert all(b > a for a, b in zip(js, js[1:]))
    assert all(abs(s.gamma.measure - states[0].gamma.measure) < 1e-12
               for s in states)
