"""Hyperbolic volumes of right-angled torihedra and polyhedra from circle patterns."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import bernoulli, factorial

# Cl2(x) = x - x log|x| + sum_k |B_2k| x^(2k+1) / (2k (2k+1)!), |x| < 2 pi
_NTERMS = 40
_B = bernoulli(2 * _NTERMS)
_COEF = np.array([abs(_B[2 * k]) / (2 * k * factorial(2 * k + 1, exact=False))
                  for k in range(1, _NTERMS + 1)])
_POW = np.arange(1, _NTERMS + 1) * 2 + 1


def _clausen(x: float) -> float:
    if x == 0.0:
        return 0.0
    return x - x * math.log(abs(x)) + float(np.dot(_COEF, x ** _POW))


def lobachevsky(theta: float) -> float:
    """Lobachevsky function ``-int_0^theta log|2 sin t| dt``."""
    t = math.remainder(float(theta), math.pi)  # in [-pi/2, pi/2]
    return 0.5 * _clausen(2.0 * t)


def lobachevsky_quad(theta: float) -> float:
    """Reference value by adaptive quadrature of the defining integral."""
    theta = float(theta)
    if theta == 0.0:
        return 0.0
    sign = 1.0 if theta > 0 else -1.0
    b = abs(theta)
    # one log singularity per piece at most
    breaks = [k * math.pi / 2 for k in range(1, int(b // (math.pi / 2)) + 1) if k * math.pi / 2 < b]
    edges = [0.0] + breaks + [b]
    tot = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        # subtract log|t - s| at the nearest multiple s of pi and integrate it exactly
        sing = math.pi * round(0.5 * (lo + hi) / math.pi)

        def smooth(t, s=sing):
            u = t - s
            return math.log(2.0) if u == 0 else math.log(abs(2.0 * math.sin(t) / u))

        val, _ = quad(smooth, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)

        def prim(u):
            return 0.0 if u == 0 else u * math.log(abs(u)) - u

        tot += val + prim(hi - sing) - prim(lo - sing)
    return -sign * tot


V_TET = 3 * lobachevsky(math.pi / 3)
V_OCT = 8 * lobachevsky(math.pi / 4)


def ideal_tet_volume(alpha: float, beta: float, gamma: float, tol: float = 1e-9) -> float:
    """Volume of the ideal tetrahedron with dihedral angles ``alpha, beta, gamma``."""
    if min(alpha, beta, gamma) <= 0:
        raise ValueError("dihedral angles must be positive")
    if abs(alpha + beta + gamma - math.pi) > tol:
        raise ValueError(f"dihedral angles sum to {alpha + beta + gamma}, expected pi")
    return lobachevsky(alpha) + lobachevsky(beta) + lobachevsky(gamma)


def _triangle_angles(a: complex, b: complex, c: complex):
    def ang(p, q, r):
        u, v = q - p, r - p
        return abs(math.atan2((np.conj(u) * v).imag, (np.conj(u) * v).real))
    A, B = ang(a, b, c), ang(b, c, a)
    return A, B, math.pi - A - B


def cone_volume_over_face(points, base: int = 0) -> float:
    """Volume of the cone from infinity over the ideal polygon inscribed in a circle.

    ``points`` are the ideal vertices in cyclic order.  The cone is cut into
    tetrahedra by fanning from ``points[base]``; a tetrahedron with a vertex
    at infinity has the angles of its Euclidean base triangle as dihedral
    angles.
    """
    pts = [complex(z) for z in points]
    k = len(pts)
    if k < 3:
        raise ValueError("need at least three ideal points")
    pts = pts[base:] + pts[:base]
    vol = 0.0
    for i in range(1, k - 1):
        A, B, C = _triangle_angles(pts[0], pts[i], pts[i + 1])
        vol += lobachevsky(A) + lobachevsky(B) + lobachevsky(C)
    return vol


@dataclass
class VolumeReport:
    surface: str
    face_volumes: dict
    cell_volume: float
    volume: float
    c: int
    a: int
    tet_count: int
    decomposition: str = "fan from the lowest-index vertex of each face, apex at infinity"
    stellated_count: int = 0
    lower: float | None = None
    upper: float | None = None
    name: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def density(self) -> float:
        return self.volume / self.a

    def as_dict(self) -> dict:
        return {"name": self.name, "surface": self.surface, "c": self.c, "a": self.a,
                "cell_volume": self.cell_volume, "volume": self.volume,
                "density": self.density, "lower": self.lower, "upper": self.upper,
                "tet_count": self.tet_count, "stellated_count": self.stellated_count,
                "decomposition": self.decomposition}


def _check_solved(p, tol):
    if not (p.residual <= tol):
        raise ValueError(f"pattern residual {p.residual} exceeds {tol}; solve it first")


def torihedron_volume(p, tol: float = 1e-8) -> VolumeReport:
    """Volume of the torihedron over one fundamental domain and of the link complement."""
    if p.surface != "torus":
        raise ValueError("not a torus pattern")
    _check_solved(p, tol)
    m = p.graph.map
    fv = {f: cone_volume_over_face(p.face_points(f)) for f in range(m.num_faces)}
    cell = math.fsum(fv[f] for f in sorted(fv))
    c = p.graph.c
    tets = 2 * sum(len(cyc) - 2 for cyc in m.faces)
    return VolumeReport("torus", fv, cell, 2 * cell, c, c, tets, stellated_count=10 * c,
                        lower=2 * c * V_OCT, upper=10 * c * V_TET, name=p.graph.name)


def polyhedron_volume(p, tol: float = 1e-8) -> VolumeReport:
    """Volume of the right-angled ideal polyhedron and of the link complement in the 3-sphere."""
    if p.surface != "plane":
        raise ValueError("not a planar pattern")
    _check_solved(p, tol)
    m = p.graph.map
    fv = {}
    for f in range(m.num_faces):
        if p.is_line(f):
            fv[f] = 0.0
        else:
            fv[f] = cone_volume_over_face(p.face_points(f))
    cell = math.fsum(fv[f] for f in sorted(fv))
    c = p.graph.c
    tets = 2 * sum(len(m.faces[f]) - 2 for f in range(m.num_faces) if not p.is_line(f))
    rep = VolumeReport("plane", fv, cell, 2 * cell, c, c, tets, stellated_count=10 * c,
                       name=p.graph.name)
    if cell == 0.0:
        rep.extra["degenerate"] = True
    return rep


@dataclass
class BoundsCheck:
    ok: bool
    volume: float
    lower: float
    upper: float
    at_lower: bool
    at_upper: bool


def volume_bounds_check(report: VolumeReport, tol: float = 1e-9, sharp_tol: float = 1e-6) -> BoundsCheck:
    """``2c v_oct <= vol <= 10c v_tet`` for a torus report."""
    c = report.c
    lo, hi = 2 * c * V_OCT, 10 * c * V_TET
    v = report.volume
    ok = lo - tol <= v <= hi + tol
    return BoundsCheck(ok, v, lo, hi, abs(v - lo) <= sharp_tol, abs(v - hi) <= sharp_tol)


def volume_density(report: VolumeReport) -> float:
    min_a = 2 if report.surface == "plane" else 1
    if report.a < min_a:
        raise ValueError(f"density needs at least {min_a} augmentations, got {report.a}")
    return report.volume / report.a


@dataclass
class SpectrumCheck:
    ok: bool
    failures: list
    attains_lower: bool


def spectrum_check(densities, tol: float = 1e-9) -> SpectrumCheck:
    """Every density of a link in the 3-sphere lies in ``[v_oct, 10 v_tet)``."""
    hi = 10 * V_TET
    bad = [(i, d) for i, d in enumerate(densities) if not (V_OCT - tol <= d < hi)]
    low = any(abs(d - V_OCT) <= 1e-6 for d in densities)
    return SpectrumCheck(not bad, bad, low)
