"""Circle patterns with prescribed intersection angles on the faces of a bow-tie graph.

Every face of the graph gets a circle through its vertices; circles of
faces sharing an edge meet at the exterior angle ``theta(e)`` (right angles
by default).  On the torus the pattern is doubly periodic; in the plane one
vertex of the graph is sent to infinity and its four faces become lines.

Radii come from maximising a concave functional of the logarithmic radii
(damped Newton); centres and vertex points are then laid out along a
spanning tree of the dual graph and every remaining incidence is checked.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import spence

from .torihedra import BowtieGraph, _face_table, check_circle_pattern_condition


class PatternError(RuntimeError):
    """The solver did not converge or the input was rejected."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class SolverConfig:
    residual_tol: float = 1e-10
    max_iterations: int = 200
    armijo: float = 1e-4
    backtrack: float = 0.5
    seed: int | None = None
    seed_scale: float = 1.0
    fallback: bool = True

    def __post_init__(self):
        env = os.environ.get("TORIVOL_TOL")
        if env and self.residual_tol == 1e-10:
            self.residual_tol = float(env)
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")


@dataclass
class PatternSpec:
    graph: BowtieGraph
    theta: dict | float | None = None
    surface: str | None = None
    infinite_vertex: int | None = None

    def __post_init__(self):
        if self.surface is None:
            self.surface = "torus" if self.graph.surface == "torus" else "plane"
        if self.surface == "torus" and self.graph.surface != "torus":
            raise ValueError("torus pattern needs a torus graph")
        if self.surface == "plane" and self.graph.surface != "sphere":
            raise ValueError("planar pattern needs a spherical graph")

    def edge_angles(self) -> np.ndarray:
        """Exterior angle per dart (both darts of an edge get the same value)."""
        m = self.graph.map
        out = np.full(m.num_darts, math.pi / 2)
        if isinstance(self.theta, (int, float)):
            out[:] = float(self.theta)
        elif self.theta is not None:
            for d in range(m.num_darts):
                out[d] = self.theta.get(m.edge_id(d), math.pi / 2)
        if np.any(out <= 0) or np.any(out > math.pi / 2 + 1e-15):
            raise ValueError("angles must lie in (0, pi/2]")
        for v, rot in enumerate(m.vertices):
            if abs(out[rot].sum() - 2 * math.pi) > 1e-9:
                raise ValueError(f"angles around vertex {v} do not sum to 2 pi")
        return out


@dataclass
class CirclePattern:
    surface: str
    graph: BowtieGraph
    centers: np.ndarray
    radii: np.ndarray
    points: np.ndarray
    theta: np.ndarray
    lines: dict = field(default_factory=dict)
    omega: tuple | None = None
    infinite_vertex: int | None = None
    log_radii: np.ndarray | None = None
    iterations: int = 0
    residual: float = float("nan")
    anchor_face: int | None = None

    def is_line(self, f: int) -> bool:
        return f in self.lines

    def face_points(self, f: int) -> list:
        """Vertex points of face ``f`` in boundary order, lifted next to its centre."""
        m = self.graph.map
        offs = m.face_offsets(f)
        out = []
        for d, o in zip(m.faces[f], offs):
            z = self.points[m.vertex_of[d]]
            if self.omega is not None:
                z = z + o[0] * self.omega[0] + o[1] * self.omega[1]
            out.append(z)
        return out


# -- edge angle function and its potential ---------------------------------

def _phi(x, th):
    """Half central angle at circle j subtended by neighbour k, ``x = rho_k - rho_j``."""
    y = np.exp(x)
    return np.arctan2(y * np.sin(th), 1.0 + y * np.cos(th))


def _dphi(x, th):
    y = np.exp(-np.abs(x))
    # symmetric in x; written with exp(-|x|) to avoid overflow
    return y * np.sin(th) / (1.0 + 2.0 * y * np.cos(th) + y * y)


def _Phi(x, th):
    """Antiderivative of ``_phi`` in x."""
    # phi(x) + phi(-x) = th, so Phi(x) = th x + Phi(-x); evaluate at -|x|
    a = np.abs(x)
    z = -np.exp(-a + 1j * th)
    low = -np.imag(spence(1.0 - z))
    return np.where(x > 0, th * x + low, low)


class _System:
    """Angle-sum equations in the log radii of the circle faces."""

    def __init__(self, m, theta, line_faces):
        self.m = m
        self.line = set(line_faces)
        self.free = [f for f in range(m.num_faces) if f not in self.line]
        self.col = {f: i for i, f in enumerate(self.free)}
        J, K, T = [], [], []
        self.const = np.full(len(self.free), -2 * math.pi)
        for d in range(m.num_darts):
            e = m.edge_inv[d]
            fj, fk = m.face_containing(d), m.face_containing(e)
            if fj in self.line:
                continue
            if fk in self.line:
                self.const[self.col[fj]] += 2 * theta[d]
            elif d < e:
                J.append(self.col[fj])
                K.append(self.col[fk])
                T.append(theta[d])
        self.J, self.K, self.T = np.array(J, int), np.array(K, int), np.array(T)
        self.n = len(self.free)

    def grad(self, rho):
        """Angle defects: total angle around each circle minus 2 pi."""
        x = rho[self.K] - rho[self.J]
        g = self.const.copy()
        np.add.at(g, self.J, 2 * _phi(x, self.T))
        np.add.at(g, self.K, 2 * _phi(-x, self.T))
        return g

    def energy(self, rho):
        """Convex function whose gradient is minus the angle defects."""
        x = rho[self.K] - rho[self.J]
        s = np.sum(2 * self.T * rho[self.K] - 2 * _Phi(x, self.T))
        s += np.dot(self.const, rho)
        return -s

    def hessian(self, rho):
        x = rho[self.K] - rho[self.J]
        w = 2 * _dphi(x, self.T)
        H = np.zeros((self.n, self.n))
        np.add.at(H, (self.J, self.J), w)
        np.add.at(H, (self.K, self.K), w)
        np.add.at(H, (self.J, self.K), -w)
        np.add.at(H, (self.K, self.J), -w)
        return H


def _newton_step(sys: _System, rho, g):
    H = sys.hessian(rho)[1:, 1:]
    step = np.zeros_like(rho)
    try:
        step[1:] = np.linalg.solve(H, g[1:])
    except np.linalg.LinAlgError:
        step[1:] = np.linalg.lstsq(H, g[1:], rcond=None)[0]
    return step


def _polish(sys: _System, rho, steps: int = 3):
    """Full Newton steps near the solution, kept while they reduce the defect."""
    err = np.max(np.abs(sys.grad(rho)))
    for _ in range(steps):
        new = rho + _newton_step(sys, rho, sys.grad(rho))
        e = np.max(np.abs(sys.grad(new)))
        if not e < err:
            break
        rho, err = new, e
    return rho


def _newton(sys: _System, rho, cfg: SolverConfig, tol: float):
    """Damped Newton with Armijo backtracking; face 0 is pinned."""
    f = sys.energy(rho)
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        g = sys.grad(rho)
        if np.max(np.abs(g)) < tol:
            return _polish(sys, rho), it - 1, True
        step = _newton_step(sys, rho, g)
        slope = -np.dot(g, step)
        t = 1.0
        while True:
            new = rho + t * step
            fn = sys.energy(new)
            if fn <= f + cfg.armijo * t * slope or t * np.max(np.abs(step)) < 1e-7:
                break
            t *= cfg.backtrack
        rho, f = new, fn
    g = sys.grad(rho)
    return rho, it, bool(np.max(np.abs(g)) < tol)


def _fixed_point(sys: _System, rho, cfg: SolverConfig, tol: float, sweeps: int = 5000):
    """Gauss-Seidel on single radii: each face is rescaled until its own angle sum is 2 pi."""
    rho = rho.copy()
    nbr = [[] for _ in range(sys.n)]
    for j, k, t in zip(sys.J, sys.K, sys.T):
        nbr[j].append((k, t))
        nbr[k].append((j, t))
    for sweep in range(sweeps):
        for j in range(1, sys.n):
            def total(r):
                s = sys.const[j]
                for k, t in nbr[j]:
                    rk = r if k == j else rho[k]
                    s += 2 * _phi(rk - r, t)
                return s
            lo, hi = rho[j] - 1.0, rho[j] + 1.0
            while total(lo) < 0:
                lo -= 1.0
            while total(hi) > 0:
                hi += 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if total(mid) > 0:
                    lo = mid
                else:
                    hi = mid
            rho[j] = 0.5 * (lo + hi)
        if np.max(np.abs(sys.grad(rho))) < tol:
            return rho, sweep + 1, True
    return rho, sweeps, False


def solve_radii(m, theta, line_faces, cfg: SolverConfig):
    """Log radii of the circle faces (``nan`` for line faces)."""
    sys = _System(m, theta, line_faces)
    if sys.n == 0:
        raise PatternError("no circle faces")
    gtol = 0.1 * cfg.residual_tol
    if cfg.seed is None:
        rho0 = np.zeros(sys.n)
    else:
        rho0 = np.random.default_rng(cfg.seed).normal(0.0, cfg.seed_scale, sys.n)
        rho0[0] = 0.0
    rho, it, ok = _newton(sys, rho0, cfg, gtol)
    if not ok and cfg.fallback:
        rho, it2, ok = _fixed_point(sys, rho, cfg, gtol)
        it += it2
        if ok:
            rho, it3, ok = _newton(sys, rho, cfg, gtol)
            it += it3
    defect = float(np.max(np.abs(sys.grad(rho))))
    if not ok and defect > cfg.residual_tol:
        raise PatternError(f"radius solver did not converge (angle defect {defect:.3e})", defect)
    out = np.full(m.num_faces, np.nan)
    out[sys.free] = rho
    return out, it


# -- layout ----------------------------------------------------------------

def _layout(m, rho, theta, line_faces, root=None):
    """Place circle centres along a BFS tree of the dual graph.

    Returns ``(centres, cells, incidences, line_samples)``: centre and lift
    cell per circle face, ``(face, vertex, cell, z)`` per face corner, and
    ``(line_face, z0, z1)`` chords lying on line faces.
    """
    table = _face_table(m)
    r = np.exp(rho)
    free = [f for f in range(m.num_faces) if f not in line_faces]
    root = free[0] if root is None else root
    centres = {root: 0j}
    cells = {root: (0, 0)}
    start_angle = {root: (0, 0.0)}
    inc, lines = [], []
    dq = deque([root])
    while dq:
        f = dq.popleft()
        c, cell, rf = centres[f], cells[f], r[f]
        i0, a0 = start_angle[f]
        k = len(table[f])
        ang = np.empty(k + 1)
        ang[0] = a0
        order = [(i0 + s) % k for s in range(k)]
        for s, i in enumerate(order):
            d, o, g, delta = table[f][i]
            half = theta[d] if g in line_faces else _phi(rho[g] - rho[f], theta[d])
            ang[s + 1] = ang[s] - 2 * half
        pts = {i: c + rf * np.exp(1j * ang[s]) for s, i in enumerate(order)}
        for i in range(k):
            d, o, g, delta = table[f][i]
            inc.append((f, m.vertex_of[d], (cell[0] + int(o[0]), cell[1] + int(o[1])), pts[i]))
        for s, i in enumerate(order):
            d, o, g, delta = table[f][i]
            z0, z1 = pts[i], pts[(i + 1) % k]
            if g in line_faces:
                lines.append((g, z0, z1))
                continue
            if g in centres:
                continue
            rg = r[g]
            half = _phi(rho[g] - rho[f], theta[d])
            dist = math.sqrt(rf * rf + rg * rg + 2 * rf * rg * math.cos(theta[d]))
            cg = c + dist * np.exp(1j * (ang[s] - half))
            centres[g] = cg
            cells[g] = (cell[0] + delta[0], cell[1] + delta[1])
            j = m.faces[g].index(m.edge_inv[d])
            start_angle[g] = (j, float(np.angle(z1 - cg)))
            dq.append(g)
    missing = [f for f in free if f not in centres]
    if missing:
        raise PatternError(f"circle faces {missing[:5]} are not reachable in the dual graph")
    return centres, cells, inc, lines


def _fit_torus(m, centres, cells, inc):
    """Least-squares vertex points and lattice generators from lifted incidences."""
    nv = m.num_vertices
    A = np.zeros((len(inc), nv + 2), dtype=complex)
    b = np.zeros(len(inc), dtype=complex)
    for row, (_, v, cell, z) in enumerate(inc):
        A[row, v] = 1
        A[row, nv] = cell[0]
        A[row, nv + 1] = cell[1]
        b[row] = z
    sol = np.linalg.lstsq(A, b, rcond=None)[0]
    omega = (complex(sol[nv]), complex(sol[nv + 1]))
    points = sol[:nv].astype(complex)
    cen = np.full(m.num_faces, np.nan + 0j)
    for f, c in centres.items():
        cen[f] = c - cells[f][0] * omega[0] - cells[f][1] * omega[1]
    return points, omega, cen


def _gate_length(theta) -> int:
    return int(math.floor(2 * math.pi / float(np.min(theta)) + 1e-9))


def _check_gate(spec, theta):
    g = spec.graph
    tab = {g.map.edge_id(d): theta[d] for d in range(g.map.num_darts)}
    rep = check_circle_pattern_condition(g, tab, max_cut_len=_gate_length(theta))
    if not rep.ok:
        cut = rep.violations[0]
        raise PatternError(f"angle condition fails on a disk cut of length {cut.n} "
                           f"enclosing {cut.v_in} vertices")


def _finish(p: CirclePattern, cfg: SolverConfig) -> CirclePattern:
    p = similarity_normalize(p)
    rep = residuals(p)
    p.residual = rep.max
    if not rep.max <= cfg.residual_tol:
        raise PatternError(f"pattern residual {rep.max:.3e} exceeds {cfg.residual_tol:.1e}", rep.max)
    return p


def solve_torus_pattern(spec: PatternSpec, cfg: SolverConfig | None = None,
                        check: bool = True) -> CirclePattern:
    cfg = cfg or SolverConfig()
    if spec.surface != "torus":
        raise ValueError("PatternSpec surface is not the torus")
    m = spec.graph.map
    theta = spec.edge_angles()
    if check:
        _check_gate(spec, theta)
    rho, it = solve_radii(m, theta, set(), cfg)
    centres, cells, inc, _ = _layout(m, rho, theta, set())
    points, omega, cen = _fit_torus(m, centres, cells, inc)
    p = CirclePattern("torus", spec.graph, cen, np.exp(rho), points, theta,
                      omega=omega, log_radii=rho, iterations=it)
    return _finish(p, cfg)


def default_infinite_vertex(g: BowtieGraph) -> int:
    """An edge-midpoint vertex (not a crossing-circle vertex) of the graph."""
    if g.edge_vertex:
        return min(g.edge_vertex.values())
    return 0


def solve_planar_pattern(spec: PatternSpec, cfg: SolverConfig | None = None,
                         check: bool = True) -> CirclePattern:
    cfg = cfg or SolverConfig()
    if spec.surface != "plane":
        raise ValueError("PatternSpec surface is not the plane")
    g = spec.graph
    m = g.map
    if g.c < 2:
        raise PatternError(f"a planar augmented link needs at least 2 crossing circles, got {g.c}")
    vinf = spec.infinite_vertex if spec.infinite_vertex is not None else default_infinite_vertex(g)
    lf = [m.face_containing(m.vertex_perm[d]) for d in m.vertices[vinf]]
    if len(set(lf)) != 4:
        raise PatternError(f"faces around vertex {vinf} are not distinct")
    theta = spec.edge_angles()
    if check:
        _check_gate(spec, theta)
    rho, it = solve_radii(m, theta, set(lf), cfg)
    anchor = _deepest_face(m, set(lf))
    centres, _, inc, samples = _layout(m, rho, theta, set(lf), root=anchor)
    acc = {}
    for _, v, _, z in inc:
        acc.setdefault(v, []).append(z)
    points = np.full(m.num_vertices, np.nan + 0j)
    for v, zs in acc.items():
        points[v] = np.mean(zs)
    for f in lf:
        for d in m.faces[f]:
            v = m.vertex_of[d]
            if v != vinf and v not in acc:
                raise PatternError(f"vertex {v} only lies on line faces")
    lines = {}
    for f in lf:
        segs = [(z0, z1) for h, z0, z1 in samples if h == f]
        if not segs:
            raise PatternError(f"line face {f} has no circle neighbour")
        z0, z1 = segs[0]
        u = (z1 - z0) / abs(z1 - z0)
        lines[f] = (complex(z0), complex(1j * u))
    cen = np.full(m.num_faces, np.nan + 0j)
    for f, c in centres.items():
        cen[f] = c
    rad = np.exp(rho)
    rad[lf] = np.inf
    p = CirclePattern("plane", g, cen, rad, points, theta, lines=lines,
                      infinite_vertex=vinf, log_radii=rho, iterations=it, anchor_face=anchor)
    return _finish(p, cfg)


def _deepest_face(m, line_faces) -> int:
    """Lowest-index face at maximal dual distance from the line faces.

    The bulk of a large planar pattern is squeezed near one point; laying
    it out from there keeps coordinates small where circles are small.
    """
    table = _face_table(m)
    dist = {f: 0 for f in line_faces}
    dq = deque(sorted(line_faces))
    while dq:
        f = dq.popleft()
        for _, _, g, _ in table[f]:
            if g not in dist:
                dist[g] = dist[f] + 1
                dq.append(g)
    far = max(dist.values())
    return min(f for f, d in dist.items() if d == far)


# -- similarity and diagnostics -------------------------------------------

def apply_similarity(p: CirclePattern, a: complex, b: complex) -> CirclePattern:
    """Image of the pattern under ``z -> a z + b`` (``a != 0``)."""
    s = abs(a)
    rot = a / s
    lines = {f: (a * q + b, n * rot) for f, (q, n) in p.lines.items()}
    omega = None if p.omega is None else (a * p.omega[0], a * p.omega[1])
    return replace(p, centers=a * p.centers + b, radii=p.radii * s, points=a * p.points + b,
                   lines=lines, omega=omega)


def similarity_normalize(p: CirclePattern, gauge: str | None = None) -> CirclePattern:
    """Fix the similarity gauge.

    Torus: vertex 0 at the origin and ``omega1 = 1``.  Plane: the two white
    lines are horizontal at distance 1 with the first one below, and the
    anchor face is centred at the origin.
    """
    gauge = gauge or p.surface
    if gauge == "torus":
        a = 1.0 / p.omega[0]
        return apply_similarity(p, a, -a * p.points[0])
    g = p.graph
    white = sorted(f for f in p.lines if not g.shaded[f])
    shaded = sorted(f for f in p.lines if g.shaded[f])
    (q1, n1), (q2, _) = p.lines[white[0]], p.lines[white[1]]
    rot = 1j / n1
    # distance and side of the second white line
    h = np.real((q2 - q1) * np.conj(n1))
    if h < 0:
        rot, h = -rot, -h
    a = rot / h
    if p.anchor_face is not None:
        return apply_similarity(p, a, -a * p.centers[p.anchor_face])
    p1 = apply_similarity(p, a, 0)
    y0 = p1.lines[white[0]][0].imag
    x0 = p1.lines[shaded[0]][0].real
    return apply_similarity(p1, 1.0, complex(-x0, -y0))


@dataclass
class ResidualReport:
    edge_angle: float
    incidence: float
    tangency: float
    lattice: float

    @property
    def max(self) -> float:
        return max(self.edge_angle, self.incidence, self.tangency, self.lattice)

    def as_dict(self) -> dict:
        return {"edge_angle": self.edge_angle, "incidence": self.incidence,
                "tangency": self.tangency, "lattice": self.lattice, "max": self.max}


def _lift(p, z, cell):
    if p.omega is None:
        return z
    return z + cell[0] * p.omega[0] + cell[1] * p.omega[1]


def residuals(p: CirclePattern) -> ResidualReport:
    """Worst relative violation of each geometric constraint."""
    m = p.graph.map
    table = _face_table(m)
    finite = p.radii[np.isfinite(p.radii)]
    scale = float(np.median(finite))
    ang = inc = tan = lat = 0.0
    for f in range(m.num_faces):
        for i, (d, o, g, delta) in enumerate(table[f]):
            th = p.theta[d]
            if f in p.lines and g in p.lines:
                n1, n2 = p.lines[f][1], p.lines[g][1]
                err = abs(abs(np.real(n1 * np.conj(n2))) - abs(math.cos(th)))
            elif f in p.lines or g in p.lines:
                line, circ = (f, g) if f in p.lines else (g, f)
                q, n = p.lines[line]
                dist = abs(np.real((p.centers[circ] - q) * np.conj(n)))
                err = abs(dist / p.radii[circ] - math.cos(th))
            else:
                rf, rg = p.radii[f], p.radii[g]
                cg = _lift(p, p.centers[g], delta)
                dd = abs(cg - p.centers[f]) ** 2
                err = abs((dd - rf * rf - rg * rg) / (2 * rf * rg) - math.cos(th))
            ang = max(ang, err)
            v = m.vertex_of[d]
            if v == p.infinite_vertex:
                continue
            z = _lift(p, p.points[v], o)
            if f in p.lines:
                q, n = p.lines[f]
                err = abs(np.real((z - q) * np.conj(n))) / scale
            else:
                err = abs(abs(z - p.centers[f]) - p.radii[f]) / p.radii[f]
            inc = max(inc, err)
            if o[0] or o[1]:
                lat = max(lat, err)
    for v, rot in enumerate(m.vertices):
        if v == p.infinite_vertex or len(rot) != 4:
            continue
        corner = []
        for d in rot:
            y = m.vertex_perm[d]
            f = m.face_containing(y)
            o = table[f][m.faces[f].index(y)][1]
            corner.append((f, (-int(o[0]), -int(o[1]))))
        for k in (0, 1):
            (f1, c1), (f2, c2) = corner[k], corner[k + 2]
            if p.graph.shaded[f1] or p.graph.shaded[f2] or f1 in p.lines or f2 in p.lines:
                continue
            z1, z2 = _lift(p, p.centers[f1], c1), _lift(p, p.centers[f2], c2)
            rs = p.radii[f1] + p.radii[f2]
            tan = max(tan, abs(abs(z1 - z2) - rs) / rs)
    if p.omega is not None and np.imag(p.omega[1] / p.omega[0]) <= 0:
        lat = max(lat, 1.0)
    return ResidualReport(float(ang), float(inc), float(tan), float(lat))


@dataclass
class MidpointReport:
    skipped: bool
    heights: dict = field(default_factory=dict)
    max_error: float = 0.0

    def ok(self, tol: float = 1e-9) -> bool:
        return self.skipped or self.max_error <= tol


def edge_midpoint_check(p: CirclePattern) -> MidpointReport:
    """Heights of the midpoints of the edges ending at the vertex at infinity.

    The midpoint of the vertical edge over ``u`` is the foot of the
    perpendicular from the third vertex ``u'`` of its shaded triangle, at
    height ``|u - u'|``.
    """
    if p.surface != "plane":
        return MidpointReport(True)
    m = p.graph.map
    vinf = p.infinite_vertex
    heights = {}
    for d in m.vertices[vinf]:
        u = m.head(d)
        for f in (m.face_containing(d), m.face_containing(m.edge_inv[d])):
            if p.graph.shaded[f]:
                third = [m.vertex_of[x] for x in m.faces[f] if m.vertex_of[x] not in (vinf, u)]
                heights[m.edge_id(d)] = float(abs(p.points[u] - p.points[third[0]]))
    err = max(abs(h - 1.0) for h in heights.values())
    return MidpointReport(False, heights, float(err))
