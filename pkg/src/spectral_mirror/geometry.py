"""Model domains, boundary meshes and Rellich-type boundary densities.

Domains are the 2D model shapes on which the worst-mode boundary functional
has an explicit spectral description:

    Rectangle(alpha, beta)  -> (-alpha*pi/2, alpha*pi/2) x (-beta*pi/2, beta*pi/2)
    Disk(radius)            -> {|x| < R}
    Sector(theta1, radius)  -> {r < R, |theta| < theta1},  theta1 in (0, pi/4]
    Ellipse(a, b)           -> x^2/a^2 + y^2/b^2 < 1   (geometry utilities only)

Boundary meshes are composite midpoint rules laid out segment by segment in a
single global arclength coordinate (counterclockwise).  All quantities the
rest of the package needs from a domain -- area, perimeter, the support
function ell(x0) = ess sup_{x in dOmega} |<x - x0, nu(x)>|, its minimizer and
the critical volume fraction L^c = min(1, 2|Omega| / (H^1(dOmega) inf ell))
-- live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special


# ---------------------------------------------------------------------------
# boundary segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StraightSegment:
    """Straight boundary piece from p0 to p1 with constant outward normal."""
    segment_id: int
    p0: tuple
    p1: tuple
    normal: tuple

    @property
    def length(self):
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def points_at(self, s_local):
        """Positions/normals at local arclengths s_local (array)."""
        s = np.asarray(s_local, dtype=float)
        t = s / self.length
        p0 = np.asarray(self.p0)
        p1 = np.asarray(self.p1)
        pos = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
        nrm = np.broadcast_to(np.asarray(self.normal, dtype=float), pos.shape)
        return pos, nrm.copy()


@dataclass(frozen=True)
class ArcSegment:
    """Circular boundary arc, angles t0 -> t1 (counterclockwise, t1 > t0)."""
    segment_id: int
    center: tuple
    radius: float
    t0: float
    t1: float

    @property
    def length(self):
        return self.radius * (self.t1 - self.t0)

    def points_at(self, s_local):
        s = np.asarray(s_local, dtype=float)
        th = self.t0 + s / self.radius
        nrm = np.stack([np.cos(th), np.sin(th)], axis=-1)
        pos = np.asarray(self.center)[None, :] + self.radius * nrm
        return pos, nrm


@dataclass(frozen=True)
class EllipseSegment:
    """Full ellipse boundary (a cos t, b sin t), tabulated arclength."""
    segment_id: int
    a: float
    b: float
    # dense parameter/arclength tables for inverting s -> t
    _table_t: np.ndarray = field(repr=False, default=None)
    _table_s: np.ndarray = field(repr=False, default=None)

    @property
    def length(self):
        m = 1.0 - (min(self.a, self.b) / max(self.a, self.b)) ** 2
        return 4.0 * max(self.a, self.b) * special.ellipe(m)

    def param_at(self, s_local):
        s = np.asarray(s_local, dtype=float)
        return np.interp(s, self._table_s, self._table_t)

    def points_at(self, s_local):
        t = self.param_at(s_local)
        pos = np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)
        nrm = np.stack([self.b * np.cos(t), self.a * np.sin(t)], axis=-1)
        nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
        return pos, nrm


def _ellipse_segment(a, b, samples=32768):
    t = np.linspace(0.0, 2.0 * np.pi, samples + 1)
    speed = np.sqrt((a * np.sin(t)) ** 2 + (b * np.cos(t)) ** 2)
    # cumulative Simpson on the uniform grid (samples even)
    from scipy.integrate import cumulative_simpson
    s = np.concatenate([[0.0], cumulative_simpson(speed, x=t)])
    return EllipseSegment(segment_id=0, a=a, b=b, _table_t=t, _table_s=s)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

class DomainSpec:
    """Base class; concrete domains implement segments() and the metrics."""

    kind = "abstract"

    def segments(self):
        raise NotImplementedError

    def area(self):
        raise NotImplementedError

    def perimeter(self):
        return sum(seg.length for seg in self.segments())

    def diameter(self):
        raise NotImplementedError

    def circumradius(self):
        raise NotImplementedError

    def interior_point(self):
        """A canonical point well inside the domain (for default x0)."""
        raise NotImplementedError

    def __str__(self):
        return self.format()


@dataclass(frozen=True)
class Rectangle(DomainSpec):
    alpha: float
    beta: float
    kind = "rectangle"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("rectangle half-axes must be positive")

    def segments(self):
        a = self.alpha * np.pi / 2.0
        b = self.beta * np.pi / 2.0
        # Sigma1 right, Sigma2 top, Sigma3 left, Sigma4 bottom (ccw)
        return [
            StraightSegment(0, (a, -b), (a, b), (1.0, 0.0)),
            StraightSegment(1, (a, b), (-a, b), (0.0, 1.0)),
            StraightSegment(2, (-a, b), (-a, -b), (-1.0, 0.0)),
            StraightSegment(3, (-a, -b), (a, -b), (0.0, -1.0)),
        ]

    def area(self):
        return self.alpha * self.beta * np.pi ** 2

    def perimeter(self):
        return 2.0 * np.pi * (self.alpha + self.beta)

    def diameter(self):
        return np.pi * math.hypot(self.alpha, self.beta)

    def circumradius(self):
        return 0.5 * self.diameter()

    def interior_point(self):
        return np.zeros(2)

    def format(self):
        return f"rect:{self.alpha:g},{self.beta:g}"


@dataclass(frozen=True)
class Disk(DomainSpec):
    radius: float = 1.0
    kind = "disk"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def segments(self):
        return [ArcSegment(0, (0.0, 0.0), self.radius, 0.0, 2.0 * np.pi)]

    def area(self):
        return np.pi * self.radius ** 2

    def perimeter(self):
        return 2.0 * np.pi * self.radius

    def diameter(self):
        return 2.0 * self.radius

    def circumradius(self):
        return self.radius

    def interior_point(self):
        return np.zeros(2)

    def format(self):
        return f"disk:{self.radius:g}"


@dataclass(frozen=True)
class Sector(DomainSpec):
    theta1: float
    radius: float = 1.0
    kind = "sector"

    def __post_init__(self):
        if not (0.0 < self.theta1 <= np.pi / 4.0 + 1e-15):
            raise ValueError("sector half-angle must lie in (0, pi/4]")
        if not self.radius > 0:
            raise ValueError("sector radius must be positive")

    def segments(self):
        R, t1 = self.radius, self.theta1
        # edge normals: rotate the edge direction by -90deg (lower) / +90deg (upper)
        lower_out = (-math.sin(t1), -math.cos(t1))
        upper_out = (-math.sin(t1), math.cos(t1))
        corner_lo = (R * math.cos(t1), -R * math.sin(t1))
        corner_hi = (R * math.cos(t1), R * math.sin(t1))
        return [
            StraightSegment(0, (0.0, 0.0), corner_lo, lower_out),
            ArcSegment(1, (0.0, 0.0), R, -t1, t1),
            StraightSegment(2, corner_hi, (0.0, 0.0), upper_out),
        ]

    def area(self):
        return self.theta1 * self.radius ** 2

    def perimeter(self):
        return 2.0 * self.radius * (1.0 + self.theta1)

    def diameter(self):
        return max(self.radius, 2.0 * self.radius * math.sin(self.theta1))

    def circumradius(self):
        return self.radius / (2.0 * math.cos(self.theta1))

    def interior_point(self):
        return np.array([0.5 * self.radius, 0.0])

    def format(self):
        return f"sector:{self.theta1:g},{self.radius:g}"


@dataclass(frozen=True)
class Ellipse(DomainSpec):
    a: float
    b: float
    kind = "ellipse"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("ellipse semi-axes must be positive")

    def segments(self):
        return [_ellipse_segment(self.a, self.b)]

    def area(self):
        return np.pi * self.a * self.b

    def perimeter(self):
        m = 1.0 - (min(self.a, self.b) / max(self.a, self.b)) ** 2
        return 4.0 * max(self.a, self.b) * float(special.ellipe(m))

    def diameter(self):
        return 2.0 * max(self.a, self.b)

    def circumradius(self):
        return max(self.a, self.b)

    def interior_point(self):
        return np.zeros(2)

    def format(self):
        return f"ellipse:{self.a:g},{self.b:g}"


def parse_domain(text):
    """Parse 'rect:ALPHA,BETA | disk:R | sector:THETA1,R | ellipse:A,B'."""
    try:
        kind, _, rest = text.partition(":")
        kind = kind.strip().lower()
        args = [float(v) for v in rest.split(",")] if rest else []
    except ValueError as exc:
        raise ValueError(f"cannot parse domain string {text!r}") from exc
    if kind == "rect" and len(args) == 2:
        return Rectangle(*args)
    if kind == "disk" and len(args) == 1:
        return Disk(*args)
    if kind == "sector" and len(args) == 2:
        return Sector(*args)
    if kind == "ellipse" and len(args) == 2:
        return Ellipse(*args)
    raise ValueError(f"cannot parse domain string {text!r}")


# ---------------------------------------------------------------------------
# boundary mesh
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryPoint:
    position: np.ndarray
    normal: np.ndarray
    arclength: float
    segment_id: int


@dataclass
class BoundaryMesh:
    """Composite midpoint rule on dOmega.

    positions[i], normals[i] : node location / outward unit normal
    arclengths[i]            : global arclength of node i (ccw)
    weights[i]               : length of the boundary cell owned by node i
    segment_ids[i]           : id of the segment carrying node i
    """
    domain: DomainSpec
    positions: np.ndarray
    normals: np.ndarray
    arclengths: np.ndarray
    weights: np.ndarray
    segment_ids: np.ndarray
    perimeter: float

    def __len__(self):
        return len(self.weights)

    @property
    def points(self):
        return [
            BoundaryPoint(self.positions[i], self.normals[i],
                          float(self.arclengths[i]), int(self.segment_ids[i]))
            for i in range(len(self))
        ]

    def cell_edges(self):
        """Global-arclength cell boundaries [s_i - w_i/2, s_i + w_i/2]."""
        lo = self.arclengths - 0.5 * self.weights
        hi = self.arclengths + 0.5 * self.weights
        return lo, hi


def boundary_mesh(domain, node_count):
    """Midpoint-rule mesh with nodes split across segments by length."""
    segs = domain.segments()
    if node_count < 2 * len(segs):
        raise ValueError(
            f"node_count={node_count} gives fewer than 2 nodes on some "
            f"boundary segment ({len(segs)} segments)")
    lengths = np.array([s.length for s in segs])
    perim = float(lengths.sum())
    quota = node_count * lengths / perim
    counts = np.floor(quota).astype(int)
    # largest remainder, then enforce the 2-node floor
    order = np.argsort(-(quota - counts))
    for i in order[: node_count - counts.sum()]:
        counts[i] += 1
    while counts.min() < 2:
        counts[np.argmax(counts)] -= 1
        counts[np.argmin(counts)] += 1

    pos, nrm, arcl, wts, sid = [], [], [], [], []
    offset = 0.0
    for seg, n in zip(segs, counts):
        w = seg.length / n
        s_local = (np.arange(n) + 0.5) * w
        p, v = seg.points_at(s_local)
        pos.append(p)
        nrm.append(v)
        arcl.append(offset + s_local)
        wts.append(np.full(n, w))
        sid.append(np.full(n, seg.segment_id, dtype=int))
        offset += seg.length
    return BoundaryMesh(
        domain=domain,
        positions=np.concatenate(pos),
        normals=np.concatenate(nrm),
        arclengths=np.concatenate(arcl),
        weights=np.concatenate(wts),
        segment_ids=np.concatenate(sid),
        perimeter=perim,
    )


# ---------------------------------------------------------------------------
# support function ell, its minimizer, critical volume fraction
# ---------------------------------------------------------------------------

def _ell_segment(seg, x0):
    """sup over a single segment of |<x - x0, nu(x)>|."""
    x0 = np.asarray(x0, dtype=float)
    if isinstance(seg, StraightSegment):
        # <x - x0, nu> is constant along a straight piece
        return abs(float(np.dot(np.asarray(seg.p0) - x0, np.asarray(seg.normal))))
    if isinstance(seg, ArcSegment):
        # <x - x0, nu> = R - |d| cos(theta - phi), d = x0 - center
        d = x0 - np.asarray(seg.center)
        r = float(np.hypot(*d))
        if r == 0.0:
            return seg.radius
        phi = math.atan2(d[1], d[0])
        cands = [seg.t0, seg.t1]
        # interior extrema of cos(theta - phi)
        for k in range(-2, 3):
            for crit in (phi + k * np.pi,):
                if seg.t0 <= crit <= seg.t1:
                    cands.append(crit)
        vals = [abs(seg.radius - r * math.cos(t - phi)) for t in cands]
        return max(vals)
    if isinstance(seg, EllipseSegment):
        # dense grid + golden-section refinement in the ellipse parameter
        t = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        pos = np.stack([seg.a * np.cos(t), seg.b * np.sin(t)], axis=-1)
        nrm = np.stack([seg.b * np.cos(t), seg.a * np.sin(t)], axis=-1)
        nrm /= np.linalg.norm(nrm, axis=-1, keepdims=True)
        f = np.abs(np.einsum("ij,ij->i", pos - x0[None, :], nrm))
        i = int(np.argmax(f))
        h = 2.0 * np.pi / 4096

        def val(tt):
            p = np.array([seg.a * math.cos(tt), seg.b * math.sin(tt)])
            v = np.array([seg.b * math.cos(tt), seg.a * math.sin(tt)])
            v /= np.linalg.norm(v)
            return abs(float(np.dot(p - x0, v)))

        lo, hi = t[i] - h, t[i] + h
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = hi - invphi * (hi - lo)
        d_ = lo + invphi * (hi - lo)
        fc, fd = val(c), val(d_)
        for _ in range(80):
            if fc > fd:
                hi, d_, fd = d_, c, fc
                c = hi - invphi * (hi - lo)
                fc = val(c)
            else:
                lo, c, fc = c, d_, fd
                d_ = lo + invphi * (hi - lo)
                fd = val(d_)
        return max(f[i], fc, fd)
    raise TypeError(f"unknown segment type {type(seg)!r}")


def ell(domain, x0):
    """ell(x0) = ess sup over dOmega of |<x - x0, nu>|."""
    return max(_ell_segment(seg, x0) for seg in domain.segments())


def min_ell(domain, tol_factor=1e-8):
    """Minimize ell over x0: 32x32 grid seed + Nelder-Mead polish.

    Returns (x0_min, ell_min).  ell is convex in x0 (sup of convex maps) but
    only piecewise smooth, with flat valleys like max(|x|,|y|) on the square;
    a simplex method handles those where coordinate descent stalls.
    """
    from scipy.optimize import minimize

    segs = domain.segments()
    # bounding box from segment extremes
    probe = np.concatenate([seg.points_at(np.linspace(0, seg.length, 64))[0]
                            for seg in segs])
    lo = probe.min(axis=0)
    hi = probe.max(axis=0)
    xs = np.linspace(lo[0], hi[0], 32)
    ys = np.linspace(lo[1], hi[1], 32)
    best, bx = np.inf, None
    for x in xs:
        for y in ys:
            v = ell(domain, (x, y))
            if v < best:
                best, bx = v, np.array([x, y])

    tol = tol_factor * domain.circumradius()
    x0, val = bx, best
    for scale in (0.25, 0.02):  # restart with a smaller initial simplex
        res = minimize(lambda p: ell(domain, p), x0, method="Nelder-Mead",
                       options={"xatol": tol, "fatol": tol,
                                "initial_simplex": x0 + scale * np.ptp(
                                    probe, axis=0) * np.array(
                                        [[0.0, 0.0], [1.0, 0.3], [-0.3, 1.0]]),
                                "maxiter": 2000})
        if res.fun < val:
            x0, val = res.x, float(res.fun)
    return x0, val


def critical_L(domain):
    """L^c = min(1, 2|Omega| / (H^1(dOmega) * inf_x0 ell(x0)))."""
    _, delta = min_ell(domain)
    return min(1.0, 2.0 * domain.area() / (domain.perimeter() * delta))


# ---------------------------------------------------------------------------
# Rellich admissible density
# ---------------------------------------------------------------------------

@dataclass
class RellichDensity:
    """Nodal values of a_tilde(x) = scale * <x - x0, nu(x)> on a mesh."""
    values: np.ndarray
    scale: float
    x0: np.ndarray


def rellich_density(domain, mesh, x0, L, M=1.0):
    """The translated-position density: feasible in U_{L,M} iff ell(x0) is
    small enough; its mode energies are all equal to L*M*perimeter/area by
    the Rellich identity."""
    x0 = np.asarray(x0, dtype=float)
    scale = L * M * domain.perimeter() / (2.0 * domain.area())
    inner = np.einsum("ij,ij->i", mesh.positions - x0[None, :], mesh.normals)
    return RellichDensity(values=scale * inner, scale=scale, x0=x0)
