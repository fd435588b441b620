"""Worst-mode boundary Neumann-energy functionals on 2D model domains:
evaluation, truncated maximization, closed-form validators, Rellich
geometry, and the homogenized maximizing sequence on the disk."""

from .geometry import (
    Rectangle, Disk, Sector, Ellipse, parse_domain,
    BoundaryMesh, boundary_mesh, ell, min_ell, critical_L, rellich_density,
)
from .specfun import bessel_j, bessel_j_prime, bessel_zero
from .spectra import EigenMode, modes, trace_sq_matrix, cesaro_mean, sector_phi
from .functional import (
    ArcSet, Density, mode_energies, mode_energy, j_truncated,
    rellich_residual, shape_derivative, j_infinity_exact, JInfinityResult,
    randomized_obs_constant,
)
from .optimizer import (
    bathtub_max, SolveResult, solve_truncated, brute_force_value,
    extract_bangbang,
)
from .nogap import (
    SequenceState, disk_omega_N, disk_cos_moments, disk_truncated_value_exact,
    disk_solution_exists, disk_optimal_value,
    rect_critical_L, rect_optimal_value, rect_maximizer, rect_solution_set,
    sector_critical_L, sector_optimal_value,
    sector_Fs, sector_fs_density, sector_kernel_value, sector_lemma7_inf,
    sector_luke_check, gamma_eps_step, maximizing_sequence,
)

__version__ = "1.0.0"
