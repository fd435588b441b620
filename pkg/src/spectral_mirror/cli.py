"""Command-line front end.

Subcommands: solve, verify-rellich, critical-l, nogap, cesaro, closed-form,
luke-check.  Every command writes result.json (schema-versioned, floats at
17 significant digits); solve additionally writes density.csv and
boundary.svg, nogap writes trajectory.csv and boundary.svg.

Exit codes: 0 success, 2 parse error, 3 numeric failure, 4 solver
non-convergence under --strict.  SPECTRAL_MIRROR_THREADS caps the BLAS /
OpenMP thread pools.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

SCHEMA_VERSION = "spectral-mirror-result/1"

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_NOCONV = 4


def _apply_thread_cap():
    cap = os.environ.get("SPECTRAL_MIRROR_THREADS")
    if not cap:
        return
    if not cap.isdigit() or int(cap) < 1:
        raise ValueError(f"SPECTRAL_MIRROR_THREADS must be a positive "
                         f"integer, got {cap!r}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ[var] = cap


# ---------------------------------------------------------------------------
# serialization: floats at 17 significant digits, stable field order
# ---------------------------------------------------------------------------

def _fmt(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise FloatingPointError(f"non-finite value in output: {x}")
        return "%.17g" % x
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    raise TypeError(f"unserializable object of type {type(obj)!r}")


def _write_json(path, payload):
    with open(path, "w") as fh:
        fh.write(_fmt(payload) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % float(v) if isinstance(v, (float, np.floating))
                              else str(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# SVG emission (hand-rolled paths; no plotting dependency)
# ---------------------------------------------------------------------------

def _svg_boundary(path, mesh, bold_mask=None, size=640):
    """Draw the boundary polygon; cells flagged in bold_mask get a bold
    stroke (the set {a* = M})."""
    pts = mesh.positions
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = max(float((hi - lo).max()), 1e-12)
    pad = 0.06 * span
    scale = size / (span + 2 * pad)

    def xy(p):
        return ((p[0] - lo[0] + pad) * scale,
                (hi[1] - p[1] + pad) * scale)  # flip y for SVG coords

    def polyline(idx):
        coords = " ".join("%.3f,%.3f" % xy(pts[i]) for i in idx)
        return coords

    h = (hi[1] - lo[1] + 2 * pad) * scale
    w = (hi[0] - lo[0] + 2 * pad) * scale
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0f}" '
        f'height="{h:.0f}" viewBox="0 0 {w:.3f} {h:.3f}">',
        '<polygon points="%s" fill="none" stroke="#888" stroke-width="1"/>'
        % polyline(list(range(len(pts))) + [0]),
    ]
    if bold_mask is not None and bold_mask.any():
        # maximal runs of consecutive bold cells (cyclic)
        idx = np.nonzero(bold_mask)[0]
        runs, run = [], [int(idx[0])]
        for i in idx[1:]:
            if i == run[-1] + 1:
                run.append(int(i))
            else:
                runs.append(run)
                run = [int(i)]
        runs.append(run)
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == len(pts) - 1:
            runs[0] = runs.pop() + runs[0]
        for run in runs:
            lines.append(
                '<polyline points="%s" fill="none" stroke="#000" '
                'stroke-width="4" stroke-linecap="round"/>' % polyline(run))
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _svg_disk_arcs(path, arcs, size=640):
    """Unit-circle drawing with the arc set in bold."""
    cx = cy = size / 2.0
    r = 0.42 * size
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        f'<circle cx="{cx}" cy="{cy}" r="{r:.3f}" fill="none" '
        'stroke="#888" stroke-width="1"/>',
    ]
    for lo, hi in arcs.arcs:
        n = max(2, int((hi - lo) / (2 * np.pi) * 720))
        th = np.linspace(lo, hi, n)
        coords = " ".join("%.3f,%.3f" % (cx + r * math.cos(t),
                                         cy - r * math.sin(t)) for t in th)
        lines.append('<polyline points="%s" fill="none" stroke="#000" '
                     'stroke-width="4" stroke-linecap="round"/>' % coords)
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# per-domain display normalization of raw values
# ---------------------------------------------------------------------------

def _paper_normalized(domain, raw):
    """Disk values are conventionally displayed in units where the truncated
    optimum reads pi*L*M; raw-to-display factor is pi*R/2.  Rectangle and
    sector raw values already match the displayed units."""
    from .geometry import Disk
    if isinstance(domain, Disk):
        return raw * np.pi * domain.radius / 2.0
    return raw


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_solve(args, out):
    from .functional import j_truncated
    from .geometry import boundary_mesh, parse_domain
    from .optimizer import extract_bangbang, solve_truncated

    domain = parse_domain(args.domain)
    t0 = time.perf_counter()
    res = solve_truncated(domain, args.N, args.L, M=args.M,
                          node_count=args.nodes,
                          tol=args.tol * args.M * domain.perimeter(),
                          max_iter=args.max_iter)
    elapsed = time.perf_counter() - t0
    arcs, is_bangbang = extract_bangbang(res)
    converged = res.duality_gap <= args.tol * args.M * domain.perimeter()

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "domain": str(domain),
        "N": res.N, "L": res.L, "M": res.M, "nodes": len(res.mesh),
        "value_raw": res.value,
        "value_paper_normalized": _paper_normalized(domain, res.value),
        "dual_value": res.dual_value,
        "duality_gap": res.duality_gap,
        "level": res.level,
        "beta": res.beta,
        "mode_energies": res.mode_energies,
        "bangbang_arcs": [list(a) for a in arcs.arcs],
        "is_bangbang": bool(is_bangbang),
        "bangbang_fraction": res.bangbang_fraction,
        "density_mass": res.density.mass,
        "iterations": res.iterations,
        "polished": bool(res.polished),
        "timing_seconds": elapsed,
    }
    if not converged:
        payload["warning"] = ("duality gap %.3e above tolerance; "
                              "value is a certified lower bound" % res.duality_gap)
    _write_json(os.path.join(out, "result.json"), payload)
    mesh = res.mesh
    _write_csv(os.path.join(out, "density.csv"),
               ["arclength", "x", "y", "value"],
               zip(mesh.arclengths, mesh.positions[:, 0],
                   mesh.positions[:, 1], res.density.values))
    bold = res.density.values >= res.M * (1.0 - 1e-9)
    _svg_boundary(os.path.join(out, "boundary.svg"), mesh, bold)
    if not converged and args.strict:
        print("solve: not converged to tolerance (--strict)", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


def _cmd_verify_rellich(args, out):
    from .functional import rellich_residual
    from .geometry import boundary_mesh, parse_domain
    from .spectra import modes

    domain = parse_domain(args.domain)
    t0 = time.perf_counter()
    mesh = boundary_mesh(domain, args.nodes)
    mode_list = modes(domain, args.N)
    center = np.asarray(domain.interior_point(), dtype=float)
    rng = np.random.default_rng(12345)
    shifts = rng.uniform(-1.0, 1.0, size=(5, 2)) * 0.25 * domain.circumradius()
    worst = 0.0
    per_point = []
    for shift in shifts:
        x0 = center + shift
        r = max(abs(rellich_residual(domain, m, x0, mesh)) for m in mode_list)
        per_point.append({"x0": list(x0), "max_residual": r})
        worst = max(worst, r)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-rellich",
        "domain": str(domain),
        "N": args.N, "nodes": args.nodes,
        "max_residual": worst,
        "per_point": per_point,
        "timing_seconds": time.perf_counter() - t0,
    }
    _write_json(os.path.join(out, "result.json"), payload)
    return EXIT_OK


def _cmd_critical_l(args, out):
    from .geometry import critical_L, min_ell, parse_domain

    domain = parse_domain(args.domain)
    t0 = time.perf_counter()
    x0, delta = min_ell(domain)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "critical-l",
        "domain": str(domain),
        "critical_L": min(1.0, 2.0 * domain.area()
                          / (domain.perimeter() * delta)),
        "min_ell": delta,
        "argmin_x0": list(x0),
        "area": domain.area(),
        "perimeter": domain.perimeter(),
        "timing_seconds": time.perf_counter() - t0,
    }
    _write_json(os.path.join(out, "result.json"), payload)
    return EXIT_OK


def _cmd_nogap(args, out):
    from .geometry import Disk, parse_domain
    from .nogap import maximizing_sequence

    domain = parse_domain(args.domain)
    if not (isinstance(domain, Disk) and abs(domain.radius - 1.0) < 1e-15):
        raise ValueError("nogap: the homogenized sequence is constructed "
                         "on the unit disk (disk:1)")
    t0 = time.perf_counter()
    states = maximizing_sequence(args.L, max_iter=args.max_iter)
    elapsed = time.perf_counter() - t0
    target = 2.0 * args.L
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "nogap",
        "domain": str(domain),
        "L": args.L, "M": args.M,
        "target_raw": target,
        "target_paper_normalized": _paper_normalized(domain, target),
        "steps": len(states) - 1,
        "initial_value": states[0].j_value,
        "final_value": states[-1].j_value,
        "final_gap": target - states[-1].j_value,
        "final_arc_count": len(states[-1].gamma.arcs),
        "mass_error": max(abs(s.gamma.measure - states[0].gamma.measure)
                          for s in states),
        "timing_seconds": elapsed,
    }
    _write_json(os.path.join(out, "result.json"), payload)
    _write_csv(os.path.join(out, "trajectory.csv"),
               ["iteration", "J", "arc_count", "epsilon"],
               [(s.iteration, s.j_value, len(s.gamma.arcs), s.epsilon_used)
                for s in states])
    _svg_disk_arcs(os.path.join(out, "boundary.svg"), states[-1].gamma)
    return EXIT_OK


def _cmd_cesaro(args, out):
    from .geometry import boundary_mesh, parse_domain
    from .spectra import cesaro_mean

    domain = parse_domain(args.domain)
    t0 = time.perf_counter()
    mesh = boundary_mesh(domain, args.nodes)
    mean, sup_dev = cesaro_mean(domain, args.N, mesh)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "cesaro",
        "domain": str(domain),
        "N": args.N, "nodes": args.nodes,
        "limit_value": 1.0 / domain.area(),
        "sup_deviation": sup_dev,
        "timing_seconds": time.perf_counter() - t0,
    }
    _write_json(os.path.join(out, "result.json"), payload)
    _write_csv(os.path.join(out, "density.csv"),
               ["arclength", "cesaro_mean"],
               zip(mesh.arclengths, mean))
    return EXIT_OK


def _cmd_closed_form(args, out):
    from .geometry import Disk, Rectangle, Sector, parse_domain
    from .nogap import (disk_optimal_value, disk_solution_exists,
                        rect_critical_L, rect_optimal_value,
                        rect_solution_set, sector_critical_L,
                        sector_optimal_value)

    domain = parse_domain(args.domain)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "closed-form",
        "domain": str(domain),
        "L": args.L, "M": args.M,
    }
    if isinstance(domain, Rectangle):
        raw = args.M * rect_optimal_value(domain.alpha, domain.beta, args.L)
        payload["critical_L"] = rect_critical_L(domain.alpha, domain.beta)
        payload["solution_L_set"] = rect_solution_set(domain.alpha, domain.beta)
    elif isinstance(domain, Disk):
        raw = disk_optimal_value(args.L, args.M, domain.radius)
        exists, witness = disk_solution_exists(args.L)
        payload["critical_L"] = 1.0
        payload["solution_exists"] = bool(exists)
        payload["witness_arcs"] = ([list(a) for a in witness.arcs]
                                   if witness is not None else None)
    elif isinstance(domain, Sector):
        raw = args.M * sector_optimal_value(domain.theta1, domain.radius,
                                            args.L)
        payload["critical_L"] = sector_critical_L(domain.theta1)
    else:
        raise ValueError("closed-form values are available for rect, disk, "
                         "and sector domains only")
    payload["value_raw"] = raw
    payload["value_paper_normalized"] = _paper_normalized(domain, raw)
    _write_json(os.path.join(out, "result.json"), payload)
    return EXIT_OK


def _cmd_luke_check(args, out):
    from .geometry import Sector, parse_domain
    from .nogap import sector_luke_check

    domain = parse_domain(args.domain)
    if not isinstance(domain, Sector):
        raise ValueError("luke-check requires a sector domain")
    numeric, displayed = sector_luke_check(domain.theta1, args.n, args.k)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "luke-check",
        "domain": str(domain),
        "n": args.n, "k": args.k,
        "quadrature_value": numeric,
        "displayed_value": displayed,
        "abs_difference": abs(numeric - displayed),
    }
    _write_json(os.path.join(out, "result.json"), payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser():
    p = argparse.ArgumentParser(
        prog="spectral-mirror",
        description="Worst-mode boundary energy functionals on model "
                    "domains: solves, verifications, closed forms.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, domain=True):
        if domain:
            sp.add_argument("--domain", required=True,
                            help="rect:A,B | disk:R | sector:T,R | ellipse:A,B")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("solve", help="maximize the N-mode truncated functional")
    common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--M", type=float, default=1.0)
    sp.add_argument("--nodes", type=int, default=4096)
    sp.add_argument("--tol", type=float, default=1e-6,
                    help="relative duality-gap tolerance (times M*perimeter)")
    sp.add_argument("--max-iter", type=int, default=20000)
    sp.add_argument("--strict", action="store_true",
                    help="exit 4 when the gap tolerance is not met")

    sp = sub.add_parser("verify-rellich",
                        help="max Rellich residual over modes and base points")
    common(sp)
    sp.add_argument("--N", type=int, default=30)
    sp.add_argument("--nodes", type=int, default=4096)

    sp = sub.add_parser("critical-l", help="critical volume fraction L^c")
    common(sp)

    sp = sub.add_parser("nogap",
                        help="homogenized maximizing sequence on the unit disk")
    common(sp)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--M", type=float, default=1.0)
    sp.add_argument("--max-iter", type=int, default=10)

    sp = sub.add_parser("cesaro", help="Cesaro mean of boundary traces")
    common(sp)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--nodes", type=int, default=4096)

    sp = sub.add_parser("closed-form",
                        help="closed-form optimal values and solution sets")
    common(sp)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--M", type=float, default=1.0)

    sp = sub.add_parser("luke-check",
                        help="sector edge-profile integral vs displayed value")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--k", type=int, default=1)
    return p


_DISPATCH = {
    "solve": _cmd_solve,
    "verify-rellich": _cmd_verify_rellich,
    "critical-l": _cmd_critical_l,
    "nogap": _cmd_nogap,
    "cesaro": _cmd_cesaro,
    "closed-form": _cmd_closed_form,
    "luke-check": _cmd_luke_check,
}


def main(argv=None):
    try:
        _apply_thread_cap()
        args = _build_parser().parse_args(argv)
    except ValueError as exc:
        print(f"spectral-mirror: {exc}", file=sys.stderr)
        return EXIT_PARSE
    # argparse exits with code 2 on its own parse errors
    out = args.out
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        print(f"spectral-mirror: cannot create output dir: {exc}",
              file=sys.stderr)
        return EXIT_PARSE
    try:
        return _DISPATCH[args.command](args, out)
    except ValueError as exc:
        # bad domain strings / parameter ranges are configuration errors
        print(f"spectral-mirror: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RuntimeError, FloatingPointError, ArithmeticError) as exc:
        print(f"spectral-mirror: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
