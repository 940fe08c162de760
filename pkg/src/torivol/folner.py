"""Følner patches of a biperiodic FAL, their planar closures and volume convergence."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .diagram import DiagramError, HypothesisFailure, augment, is_twist_reduced, is_weakly_prime
from .fixtures import capped_grid
from .torihedra import BowtieGraph, build_bowtie_graph

Node = tuple  # (vertex or face, (x, y) cell)


def _add(c, o):
    return (c[0] + int(o[0]), c[1] + int(o[1]))


def lift_neighbors(m, node):
    """Neighbours of a lifted vertex ``(v, cell)`` in the universal cover (with multiplicity)."""
    v, c = node
    return [(m.head(d), _add(c, m.shift[d])) for d in m.vertices[v]]


def _dart_positions(m):
    """dart -> (face, tail offset of the dart relative to the face base)."""
    pos = {}
    for f, cyc in enumerate(m.faces):
        for d, o in zip(cyc, m.face_offsets(f)):
            pos[d] = (f, (int(o[0]), int(o[1])))
    return pos


def lifted_face_key(m, f, base=(0, 0)):
    """Set of lifted vertices of face ``f`` with its first dart in cell ``base``."""
    return frozenset((m.vertex_of[d], _add(base, o)) for d, o in zip(m.faces[f], m.face_offsets(f)))


@dataclass
class Patch:
    """The lifted vertices of the torus bow-tie graph lying in an ``n x n`` block of cells."""
    graph: BowtieGraph
    n: int
    vertices: frozenset
    boundary: frozenset
    source: object = None  # the augmented torus diagram

    @property
    def size(self) -> int:
        return len(self.vertices)


def build_patch(a, n: int) -> Patch:
    """``G_n``: all lifted vertices of the bow-tie graph of ``a`` in cells ``[0, n)^2``."""
    if n < 1:
        raise ValueError("n must be positive")
    g = build_bowtie_graph(a)
    m = g.map
    if m.surface != "torus":
        raise ValueError("patches are taken from a torus diagram")
    verts = frozenset((v, (x, y)) for v in range(m.num_vertices)
                      for x in range(n) for y in range(n))
    bd = frozenset(u for u in verts if any(w not in verts for w in lift_neighbors(m, u)))
    return Patch(g, n, verts, bd, a)


@dataclass
class Closure:
    """A planar FAL ``K_n`` whose bow-tie graph contains a copy of the patch."""
    augmented: object
    graph: BowtieGraph
    patch: Patch
    to_closure: dict  # lifted torus vertex -> vertex of the closure graph
    patch_vertices: frozenset  # image of G_n
    infinite_vertex: int
    checks: dict = field(default_factory=dict)

    @property
    def a(self) -> int:
        return self.graph.c


def _grid_shape(a):
    if "grid" not in a.meta or any(k != 1 for k in a.crossings_per_circle):
        raise DiagramError("closure is implemented for square-grid diagrams without twist chains")
    p, q = a.meta["grid"]
    return p, q


def close_patch(patch: Patch, check: bool = True) -> Closure:
    """Close the patch by a capped square grid with one extra ring of crossings.

    The torus diagram must be a ``p x q`` square grid; the closure is the
    planar ``(np + 2) x (nq + 2)`` grid with adjacent boundary exits capped,
    whose inner block is ``n x n`` copies of the fundamental domain.
    """
    aw, n = patch.source, patch.n
    p, q = _grid_shape(aw)
    nx_, ny_ = n * p + 2, n * q + 2
    if nx_ % 2 or ny_ % 2:
        raise DiagramError(f"closure needs even grid sizes, got {nx_} x {ny_}")
    kd = capped_grid(nx_, ny_, name=f"K{n}({aw.name})")
    checks = {}
    if check:
        for label, test in (("weakly prime", is_weakly_prime), ("twist-reduced", is_twist_reduced)):
            ok, witness = test(kd)
            checks[label] = ok
            if not ok:
                raise HypothesisFailure(f"closure K{n} is not {label}", witness)
    ak = augment(kd, check=False)
    gk = build_bowtie_graph(ak)
    gw, rw, rk = patch.graph, aw.reduced, ak.reduced
    phi = {}
    for i in range(1, n * p + 1):
        for j in range(1, n * q + 1):
            w = ((i - 1) % p) * q + (j - 1) % q
            cell = ((i - 1) // p, (j - 1) // q)
            for k in range(4):
                xw = aw.dart_map.get(4 * w + k, 4 * w + k)
                xk = ak.dart_map[4 * (i * ny_ + j) + k]
                off = (0, 0) if xw < rw.edge_inv[xw] else rw.shift[xw]
                pairs = [((rw.vertex_of[xw], cell), rk.vertex_of[xk]),
                         ((gw.edge_vertex[rw.edge_id(xw)], _add(cell, off)),
                          gk.edge_vertex[rk.edge_id(xk)])]
                for src, dst in pairs:
                    if phi.setdefault(src, dst) != dst:
                        raise DiagramError(f"inconsistent patch correspondence at {src}")
    missing = patch.vertices - phi.keys()
    if missing:
        raise DiagramError(f"{len(missing)} patch vertices have no image in the closure")
    image = frozenset(phi[u] for u in patch.vertices)
    if check:
        checks["patch embeds"] = _embeds(gw.map, gk.map, phi, patch.vertices)
    # an edge vertex between two ring chains on the bottom side lies on the outer face
    x = ak.dart_map[4 * (1 * ny_ + 0)]
    vinf = gk.edge_vertex[rk.edge_id(x)]
    return Closure(ak, gk, patch, phi, image, vinf, checks)


def _embeds(mw, mk, phi, verts) -> bool:
    """The induced subgraphs on ``verts`` and its image agree edge for edge."""
    from collections import Counter
    inv = {phi[u]: u for u in verts}
    if len(inv) != len(verts):
        return False
    a = Counter()
    for u in verts:
        for w in lift_neighbors(mw, u):
            if w in verts:
                a[(phi[u], phi[w])] += 1
    b = Counter()
    for v in inv:
        for d in mk.vertices[v]:
            h = mk.head(d)
            if h in inv:
                b[(v, h)] += 1
    return a == b


# -- disk patterns and local agreement --------------------------------------

class DiskPatternGraph:
    """Disks of a circle pattern as nodes ``(face, cell)``; overlapping disks are joined.

    Disks of faces sharing an edge meet at the edge angle; opposite faces at
    a vertex are tangent (label 0).  On the torus the graph is the infinite
    lift and is explored lazily.  ``excluded`` faces (lines) are dropped.
    """

    def __init__(self, pattern, excluded=()):
        self.pattern = pattern
        m = self.map = pattern.graph.map
        self.shaded = pattern.graph.shaded
        self.excluded = frozenset(excluded)
        self.periodic = m.surface == "torus"
        pos = _dart_positions(m)
        self._nbrs = [[] for _ in range(m.num_faces)]
        for d in range(m.num_darts):
            f, o = pos[d]
            e = m.edge_inv[d]
            g, og = pos[e]
            delta = _add(_add(o, m.shift[d]), (-og[0], -og[1]))
            self._nbrs[f].append((g, delta, round(float(pattern.theta[d]) / math.pi, 9)))
        for v, cyc in enumerate(m.vertices):
            corners = []
            for d in cyc:
                f, o = pos[d]
                corners.append((f, (-o[0], -o[1])))  # face base relative to the vertex cell
            k = len(corners)
            if k % 2:
                continue
            for i in range(k):
                (f, bf), (g, bg) = corners[i], corners[(i + k // 2) % k]
                self._nbrs[f].append((g, _add(bg, (-bf[0], -bf[1])), 0.0))

    def nodes(self):
        if self.periodic:
            raise ValueError("the lifted disk pattern is infinite")
        return [(f, (0, 0)) for f in range(self.map.num_faces) if f not in self.excluded]

    def neighbors(self, node):
        f, c = node
        for g, delta, lab in self._nbrs[f]:
            if g not in self.excluded:
                yield (g, _add(c, delta) if self.periodic else (0, 0)), lab

    def ball(self, root, radius: int) -> nx.Graph:
        """Induced labelled subgraph on the disks within ``radius`` steps of ``root``."""
        dist = {root: 0}
        dq = deque([root])
        while dq:
            u = dq.popleft()
            if dist[u] == radius:
                continue
            for w, _ in self.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    dq.append(w)
        G = nx.Graph()
        for u in dist:
            G.add_node(u, lab=(bool(self.shaded[u[0]]), u == root))
        labs = {}
        for u in dist:
            for w, lab in self.neighbors(u):
                if w in dist and u < w:  # every adjacency is listed from both ends
                    labs.setdefault((u, w), []).append(lab)
        for (u, w), ls in labs.items():
            G.add_edge(u, w, lab=tuple(sorted(ls)))
        return G


def disk_pattern_graph(pattern) -> DiskPatternGraph:
    return DiskPatternGraph(pattern, excluded=pattern.lines.keys())


def closure_face_map(closure: Closure) -> dict:
    """Faces of ``Gamma_{K_n}`` whose vertices all correspond to lifted torus vertices.

    Returns ``{closure face: (torus face, base cell)}``.
    """
    mw, mk = closure.patch.graph.map, closure.graph.map
    phi, n = closure.to_closure, closure.patch.n
    by_verts = {}
    for f, cyc in enumerate(mk.faces):
        by_verts.setdefault(frozenset(mk.vertex_of[d] for d in cyc), []).append(f)
    out = {}
    for f in range(mw.num_faces):
        for x in range(-1, n + 1):
            for y in range(-1, n + 1):
                key = lifted_face_key(mw, f, (x, y))
                if not key <= phi.keys():
                    continue
                hits = by_verts.get(frozenset(phi[u] for u in key), [])
                if len(hits) == 1 and len(mk.faces[hits[0]]) == len(key):
                    out[hits[0]] = (f, (x, y))
    return out


def _explicit_iso(bk: nx.Graph, bl: nx.Graph, fmap: dict) -> bool:
    if bk.number_of_nodes() != bl.number_of_nodes() or bk.number_of_edges() != bl.number_of_edges():
        return False
    img = {}
    for u in bk:
        if u[0] not in fmap:
            return False
        img[u] = fmap[u[0]]
    if set(img.values()) != set(bl.nodes):
        return False
    if any(bk.nodes[u]["lab"] != bl.nodes[img[u]]["lab"] for u in bk):
        return False
    for u, w, lab in bk.edges(data="lab"):
        if not bl.has_edge(img[u], img[w]) or bl.edges[img[u], img[w]]["lab"] != lab:
            return False
    return True


def balls_isomorphic(bk: nx.Graph, bl: nx.Graph, fmap: dict | None = None) -> bool:
    """Exact labelled isomorphism of two rooted balls.

    The explicit face correspondence is tried first, then a
    Weisfeiler-Lehman hash rules out most mismatches, and VF2 decides the rest.
    """
    if fmap is not None and _explicit_iso(bk, bl, fmap):
        return True
    if bk.number_of_nodes() != bl.number_of_nodes() or bk.number_of_edges() != bl.number_of_edges():
        return False
    for G in (bk, bl):
        for u in G:
            G.nodes[u]["h"] = str(G.nodes[u]["lab"])
        for u, w in G.edges:
            G.edges[u, w]["h"] = str(G.edges[u, w]["lab"])
    hk = nx.weisfeiler_lehman_graph_hash(bk, node_attr="h", edge_attr="h")
    if hk != nx.weisfeiler_lehman_graph_hash(bl, node_attr="h", edge_attr="h"):
        return False
    return nx.is_isomorphic(bk, bl, node_match=lambda a, b: a["lab"] == b["lab"],
                            edge_match=lambda a, b: a["lab"] == b["lab"])


def generation_agreement(D: DiskPatternGraph, d, Dinf: DiskPatternGraph, dinf,
                         cap: int = 8, fmap: dict | None = None) -> int:
    """Largest ``l <= cap`` such that the radius-``l`` balls about ``d`` and ``dinf`` agree.

    Agreement stops growing once a finite ball has stopped growing, so for
    identical finite patterns the value is capped at the eccentricity of ``d``.
    """
    best = -1
    prev = None
    for l in range(cap + 1):
        bk, bl = D.ball(d, l), Dinf.ball(dinf, l)
        if not balls_isomorphic(bk, bl, fmap):
            break
        best = l
        size = bk.number_of_nodes()
        if size == prev and not D.periodic:
            break
        prev = size
    return best


@dataclass
class FaceClassification:
    generations: dict  # closure face -> agreement generation (faces with all vertices in G_n)
    histogram: dict  # l -> |F_l|
    leftover: dict  # k -> |f_k|
    weighted_leftover: int  # sum_k k |f_k|
    outside_vertices: int  # |Gamma_{K_n} - G_n|

    @property
    def counting_ok(self) -> bool:
        return self.weighted_leftover <= 4 * self.outside_vertices


def classify_leftover_faces(closure: Closure, pattern, torus_pattern, cap: int = 4) -> FaceClassification:
    """Split the circle faces of ``K_n`` into agreeing disks ``F_l`` and leftovers ``f_k``."""
    mk = closure.graph.map
    fmap = closure_face_map(closure)
    D, Dinf = disk_pattern_graph(pattern), DiskPatternGraph(torus_pattern)
    inside = closure.patch_vertices
    gens, hist, left = {}, {}, {}
    for f, cyc in enumerate(mk.faces):
        if pattern.is_line(f):
            continue
        if f in fmap and all(mk.vertex_of[d] in inside for d in cyc):
            l = generation_agreement(D, (f, (0, 0)), Dinf, fmap[f], cap=cap, fmap=fmap)
            gens[f] = l
            hist[l] = hist.get(l, 0) + 1
        else:
            left[len(cyc)] = left.get(len(cyc), 0) + 1
    weighted = sum(k * v for k, v in left.items())
    return FaceClassification(gens, dict(sorted(hist.items())), dict(sorted(left.items())),
                              weighted, mk.num_vertices - len(inside))


@dataclass
class Bracket:
    """``|vol(P_n) - n^2 vol(cell)| <= sum_l |F_l| eps_l + E^n bound``."""
    lhs: float
    rhs: float
    eps: dict
    tail_bound: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def volume_bracket(cls: FaceClassification, closure: Closure, poly_report, torus_report) -> Bracket:
    from .hypvol import lobachevsky
    fmap = closure_face_map(closure)
    eps = {}
    for f, l in cls.generations.items():
        diff = abs(poly_report.face_volumes[f] - torus_report.face_volumes[fmap[f][0]])
        eps[l] = max(eps.get(l, 0.0), diff)
    tail = cls.weighted_leftover * lobachevsky(math.pi / 6)
    rhs = sum(cls.histogram[l] * eps[l] for l in eps) + tail
    lhs = abs(poly_report.cell_volume - closure.patch.n ** 2 * torus_report.cell_volume)
    return Bracket(lhs, rhs, dict(sorted(eps.items())), tail)


def folner_metrics(patch: Patch, closure: Closure) -> dict:
    """The defining quotients ``|dG_n|/|G_n|`` and ``|G_n|/3a(K_n)``."""
    g = len(patch.vertices)
    return {"G": g, "dG": len(patch.boundary), "a": closure.a,
            "ratio2": len(patch.boundary) / g, "ratio4": g / (3 * closure.a)}


def ball_growth(g: BowtieGraph, x=(0, (0, 0)), l_max: int = 12) -> list[tuple[int, int, int]]:
    """``(l, |B(x,l)|, |dB(x,l)|)`` in the lifted graph; ``dB`` is the sphere of radius ``l``."""
    m = g.map
    dist = {x: 0}
    dq = deque([x])
    while dq:
        u = dq.popleft()
        if dist[u] == l_max:
            continue
        for w in lift_neighbors(m, u):
            if w not in dist:
                dist[w] = dist[u] + 1
                dq.append(w)
    sphere = [0] * (l_max + 1)
    for d in dist.values():
        sphere[d] += 1
    out, tot = [], 0
    for l in range(l_max + 1):
        tot += sphere[l]
        out.append((l, tot, sphere[l]))
    return out


def growth_fit(table, power: int, l_min: int = 4) -> tuple[float, float]:
    """Least-squares constant ``C`` in ``y ~ C l^power`` and the worst ratio ``y / (C l^power)``."""
    ls = np.array([r[0] for r in table if r[0] >= l_min], dtype=float)
    ys = np.array([r[1 if power == 2 else 2] for r in table if r[0] >= l_min], dtype=float)
    basis = ls ** power
    C = float(np.dot(basis, ys) / np.dot(basis, basis))
    ratio = ys / (C * basis)
    return C, float(max(ratio.max(), 1 / ratio.min()))


CSV_COLUMNS = ["n", "|G_n|", "|∂G_n|", "a(K_n)", "vol", "density", "gap", "sum_k_f", "ratio2", "ratio4"]
CLOSURES = ("ring-caps", "nested-arcs")  # adjacent exits joined: the innermost nesting level


@dataclass
class FolnerRow:
    n: int
    G: int
    dG: int
    a: int
    volume: float = float("nan")
    density: float = float("nan")
    gap: float = float("nan")
    sum_k_f: int = 0
    ratio2: float = float("nan")
    ratio4: float = float("nan")
    histogram: dict = field(default_factory=dict)
    leftover: dict = field(default_factory=dict)
    outside_vertices: int = 0
    tail_bound: float = float("nan")
    bracket_lhs: float = float("nan")
    bracket_rhs: float = float("nan")
    eps: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    residual: float = float("nan")
    error: str | None = None

    @property
    def counting_ok(self) -> bool:
        return self.sum_k_f <= 4 * self.outside_vertices

    def csv_values(self) -> list:
        return [self.n, self.G, self.dG, self.a, self.volume, self.density, self.gap,
                self.sum_k_f, self.ratio2, self.ratio4]


def _strictly(xs, cmp) -> bool:
    return all(cmp(a, b) for a, b in zip(xs, xs[1:]))


@dataclass
class FolnerRun:
    name: str
    target: float
    rows: list[FolnerRow]
    closure: str = "ring-caps"

    def ok_rows(self) -> list[FolnerRow]:
        return [r for r in self.rows if r.error is None]

    def verdicts(self) -> dict:
        from .hypvol import V_TET
        rows = self.ok_rows()
        gaps = [r.gap for r in rows]
        out = {
            "all stages succeeded": len(rows) == len(self.rows),
            "densities below 10 v_tet": all(r.density < 10 * V_TET for r in rows),
            "gap strictly decreasing": _strictly(gaps, lambda a, b: b < a),
            "boundary ratio decreasing": _strictly([r.ratio2 for r in rows], lambda a, b: b < a),
            "patch ratio increasing": _strictly([r.ratio4 for r in rows], lambda a, b: b > a)
            and all(0 < r.ratio4 <= 1 for r in rows),
            "counting inequality": all(r.counting_ok for r in rows),
            "volume bracket": all(r.bracket_lhs <= r.bracket_rhs + 1e-9 for r in rows),
        }
        by_n = {r.n: r.gap for r in rows}
        if 2 in by_n and 6 in by_n:
            out["gap_6 < gap_2 / 2"] = by_n[6] < by_n[2] / 2
        return out

    def write_csv(self, fh) -> None:
        import csv
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_values())

    def as_dict(self) -> dict:
        rows = []
        for r in self.rows:
            d = dict(zip(CSV_COLUMNS, r.csv_values()))
            d.update(generation_histogram={str(k): v for k, v in r.histogram.items()},
                     leftover_faces={str(k): v for k, v in r.leftover.items()},
                     outside_vertices=r.outside_vertices, counting_ok=r.counting_ok,
                     tail_bound=r.tail_bound, bracket=[r.bracket_lhs, r.bracket_rhs],
                     eps_hat={str(k): v for k, v in r.eps.items()},
                     checks=r.checks, residual=r.residual, error=r.error)
            rows.append(d)
        return {"name": self.name, "target": self.target, "closure": self.closure,
                "rows": rows, "verdicts": self.verdicts()}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, default=float)


def convergence_experiment(a, n_range, closure: str = "ring-caps", cap: int = 4,
                           cfg=None, check: bool = True) -> FolnerRun:
    """Densities of the closures ``K_n`` against the density of the torus FAL ``a``."""
    from .circlepattern import PatternSpec, solve_planar_pattern, solve_torus_pattern
    from .hypvol import polyhedron_volume, torihedron_volume

    if closure not in CLOSURES:
        raise ValueError(f"unknown closure scheme {closure!r}; choose from {CLOSURES}")
    g = build_bowtie_graph(a)
    tp = solve_torus_pattern(PatternSpec(g, surface="torus"), cfg)
    trep = torihedron_volume(tp)
    target = trep.volume / trep.a
    rows = []
    for n in sorted(n_range):
        patch = build_patch(a, n)
        try:
            cl = close_patch(patch, check=check)
        except (HypothesisFailure, DiagramError) as exc:
            rows.append(FolnerRow(n, patch.size, len(patch.boundary), 0, error=f"closure failed: {exc}"))
            continue
        met = folner_metrics(patch, cl)
        row = FolnerRow(n, met["G"], met["dG"], met["a"], ratio2=met["ratio2"],
                        ratio4=met["ratio4"], checks=dict(cl.checks))
        rows.append(row)
        try:
            pk = solve_planar_pattern(PatternSpec(cl.graph, surface="plane",
                                                  infinite_vertex=cl.infinite_vertex), cfg)
        except Exception as exc:  # reported per n
            row.error = f"planar solve failed: {exc}"
            continue
        prep = polyhedron_volume(pk)
        row.volume, row.residual = prep.volume, pk.residual
        row.density = prep.volume / cl.a
        row.gap = abs(target - row.density)
        cls = classify_leftover_faces(cl, pk, tp, cap=cap)
        row.histogram, row.leftover = cls.histogram, cls.leftover
        row.sum_k_f, row.outside_vertices = cls.weighted_leftover, cls.outside_vertices
        br = volume_bracket(cls, cl, prep, trep)
        row.tail_bound, row.bracket_lhs, row.bracket_rhs, row.eps = br.tail_bound, br.lhs, br.rhs, br.eps
    return FolnerRun(a.name, target, rows, closure)
