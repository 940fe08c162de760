"""Bow-tie graphs of fully augmented links and the circle-pattern cut condition.

The bow-tie graph of an augmented diagram has a vertex ``C_r`` for every
crossing circle and a vertex ``M_e`` for every edge of the collapsed
diagram (one 4-valent vertex per crossing circle).  Each crossing circle
contributes two shaded triangles ``C_r M_e M_e'`` meeting at ``C_r``; the
remaining faces are white.  This is the combinatorics of the ideal
torihedron (or polyhedron on the sphere) obtained by cutting the link
complement along the projection surface and the twice-punctured disks.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cmap import CombinatorialMap
from .diagram import AugmentedDiagram, _lifted_edge_key


@dataclass
class BowtieGraph:
    map: CombinatorialMap
    shaded: list[bool]
    bowties: list[tuple[int, int]]
    c: int
    circle_vertex: list[int] = field(default_factory=list)
    edge_vertex: dict = field(default_factory=dict)
    half_twist: list[bool] = field(default_factory=list)
    name: str = ""

    @property
    def surface(self) -> str:
        return self.map.surface

    @property
    def crossing_circle_of(self) -> dict:
        return {pair: k for k, pair in enumerate(self.bowties)}

    def shaded_faces(self) -> list[int]:
        return [f for f, s in enumerate(self.shaded) if s]

    def white_faces(self) -> list[int]:
        return [f for f, s in enumerate(self.shaded) if not s]


def build_bowtie_graph(a: AugmentedDiagram) -> BowtieGraph:
    red = a.reduced
    ei = red.edge_inv
    side = {}
    for r, rot in enumerate(red.vertices):
        if len(rot) != 4:
            raise ValueError(f"crossing circle {r} has {len(rot)} strand ends, expected 4")
        for k, p in enumerate(rot):
            side[p] = (r, k)

    def partner(p):
        r, k = side[p]
        return red.vertices[r][k ^ 1]

    def up(p):
        return side[p][1] % 2 == 0

    def offset(p):
        return np.zeros(2, dtype=int) if p < ei[p] else red.shift[p]

    rotations = [[("C", p) for p in rot] for rot in red.vertices]
    mid_of = {}
    for x, y in red.edges():
        eps = 0.25
        ang = [(0.0, ("M", y, "c")), (math.pi, ("M", x, "c")),
               (math.pi - eps if up(x) else math.pi + eps, ("M", x, "t")),
               (2 * math.pi - eps if up(y) else eps, ("M", y, "t"))]
        ang.sort()
        mid_of[x] = mid_of[y] = len(rotations)
        rotations.append([lab for _, lab in ang])
    pairs, shifts = [], {}
    for p in range(red.num_darts):
        pairs.append((("C", p), ("M", p, "c")))
        shifts[("C", p)] = tuple(offset(p))
        shifts[("M", p, "c")] = tuple(-offset(p))
        q = partner(p)
        if p < q:
            pairs.append((("M", p, "t"), ("M", q, "t")))
        shifts[("M", p, "t")] = tuple(offset(q) - offset(p))
    g, index = CombinatorialMap.from_rotations(rotations, pairs, red.surface, shifts)
    g.validate()
    shaded = [False] * g.num_faces
    bowties = []
    for r, rot in enumerate(red.vertices):
        fa = g.face_containing(index[("C", rot[1])])
        fb = g.face_containing(index[("C", rot[3])])
        shaded[fa] = shaded[fb] = True
        bowties.append((fa, fb))
    edge_vertex = {x: mid_of[x] for x, _ in red.edges()}
    return BowtieGraph(g, shaded, bowties, red.num_vertices,
                       list(range(red.num_vertices)), edge_vertex,
                       list(a.half_twist), a.name)


def lifted_face_vertices(m: CombinatorialMap, f: int, anchor: int | None = None):
    """Lifted vertices ``(v, cell)`` of face ``f``; cells relative to the first dart or ``anchor``."""
    cyc = m.faces[f]
    offs = m.face_offsets(f)
    if anchor is not None:
        base = offs[[m.vertex_of[d] for d in cyc].index(anchor)]
        offs = offs - base
    return [(m.vertex_of[d], (int(o[0]), int(o[1]))) for d, o in zip(cyc, offs)]


def validate_bowtie(g: BowtieGraph) -> dict:
    """Check the structural invariants; returns ``{check: (ok, detail)}``."""
    m = g.map
    rep = {}
    bad = [v for v in range(m.num_vertices) if m.degree(v) != 4]
    rep["4-valent"] = (not bad, bad)
    bad = [f for f in g.shaded_faces() if len(m.faces[f]) != 3]
    rep["shaded faces are triangular"] = (not bad, bad)
    bad = [m.edge_id(d) for d in range(m.num_darts)
           if g.shaded[m.face_containing(d)] == g.shaded[m.face_containing(m.edge_inv[d])]]
    rep["checkerboard"] = (not bad, sorted(set(bad)))
    c = g.c
    counts = (m.num_vertices, m.num_edges, len(g.shaded_faces()))
    rep["V=3c, E=6c, shaded=2c"] = (counts == (3 * c, 6 * c, 2 * c), counts)
    chi = m.euler_characteristic()
    rep["euler"] = (chi == m.expected_euler(), chi)
    bad = []
    for k, (fa, fb) in enumerate(g.bowties):
        common = set(m.vertex_of[d] for d in m.faces[fa]) & set(m.vertex_of[d] for d in m.faces[fb])
        ok = False
        for v in common:
            la = set(lifted_face_vertices(m, fa, v))
            lb = set(lifted_face_vertices(m, fb, v))
            if len(la) == 3 and len(lb) == 3 and len(la & lb) == 1:
                ok = True
                break
        if not ok:
            bad.append(k)
    rep["bow-ties share exactly one vertex"] = (not bad, bad)
    paired = sorted(f for pair in g.bowties for f in pair)
    ok = paired == sorted(g.shaded_faces())
    rep["bow-tie pairing covers shaded faces"] = (ok, paired)
    return rep


# -- duality ---------------------------------------------------------------

@dataclass
class DualGraph:
    map: CombinatorialMap
    primal: CombinatorialMap

    def vertex_to_face(self, v: int) -> int:
        """Primal face corresponding to dual vertex ``v``."""
        return self.primal.face_containing(self.map.vertices[v][0])


def dual_graph(m: CombinatorialMap) -> DualGraph:
    """Dual map on the same dart set: rotation ``phi``, same involution."""
    phi = [m.vertex_perm[m.edge_inv[d]] for d in range(m.num_darts)]
    sh = np.zeros((m.num_darts, 2), dtype=int)
    pos = {}
    for f, cyc in enumerate(m.faces):
        offs = m.face_offsets(f)
        for i, d in enumerate(cyc):
            pos[d] = offs[i]
    for d in range(m.num_darts):
        sh[d] = pos[d] + m.shift[d] - pos[m.edge_inv[d]]
    return DualGraph(CombinatorialMap(phi, list(m.edge_inv), m.surface, sh), m)


# -- disk cuts -------------------------------------------------------------

@dataclass
class DualCut:
    faces: list
    edges: list
    inside: frozenset
    n: int
    v_in: int
    e_in: int
    chi: int

    @property
    def angle_sum_units(self) -> int:
        """Number of right angles crossed (the angle sum over pi/2)."""
        return self.n


def _face_table(m: CombinatorialMap):
    """Per face: list of (dart, offset of its tail, neighbour face, neighbour base delta)."""
    pos = {}
    offs_all = {}
    for f, cyc in enumerate(m.faces):
        offs = m.face_offsets(f)
        offs_all[f] = offs
        for i, d in enumerate(cyc):
            pos[d] = (f, offs[i])
    table = []
    for f, cyc in enumerate(m.faces):
        row = []
        for i, d in enumerate(cyc):
            e = m.edge_inv[d]
            g, og = pos[e]
            delta = offs_all[f][i] + m.shift[d] - og
            row.append((d, offs_all[f][i], g, (int(delta[0]), int(delta[1]))))
        table.append(row)
    return table


def _add(c, o):
    return (c[0] + int(o[0]), c[1] + int(o[1]))


def enumerate_dual_cycles(m: CombinatorialMap, max_len: int):
    """Simple closed dual curves in the (lifted) surface, one per translation class.

    Yields ``(faces, edge_keys)`` where faces are lifted ``(f, cell)`` and
    edge keys are lifted primal edges.  On the torus only contractible
    curves (closed in the lift) are produced.
    """
    table = _face_table(m)

    def nbrs(node):
        f, c = node
        for d, o, g, delta in table[f]:
            yield (g, _add(c, delta)), _lifted_edge_key(m, d, _add(c, o))

    def key(node):
        return (node[1], node[0])

    seen = set()
    for f0 in range(m.num_faces):
        start = (f0, (0, 0))
        # BFS distances back to the start for pruning
        dist = {start: 0}
        dq = deque([start])
        while dq:
            u = dq.popleft()
            if dist[u] >= max_len // 2 + 1:
                continue
            for w, _ in nbrs(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    dq.append(w)
        path, epath = [start], []
        onpath = {start}
        used = set()
        stack = [iter(list(nbrs(start)))]
        while stack:
            advanced = False
            for w, ek in stack[-1]:
                if ek in used:
                    continue
                if w == start:
                    cyc = frozenset(epath + [ek])
                    if cyc not in seen:
                        seen.add(cyc)
                        yield list(path), list(epath) + [ek]
                    continue
                if w in onpath or key(w) < key(start):
                    continue
                if len(path) + dist.get(w, max_len + 1) > max_len:
                    continue
                path.append(w)
                epath.append(ek)
                onpath.add(w)
                used.add(ek)
                stack.append(iter(list(nbrs(w))))
                advanced = True
                break
            if not advanced:
                stack.pop()
                if len(path) > 1:
                    onpath.discard(path.pop())
                    used.discard(epath.pop())


def _lift_nbrs(m: CombinatorialMap, node):
    v, c = node
    for d in m.vertices[v]:
        yield (m.head(d), _add(c, m.shift[d])), _lifted_edge_key(m, d, c)


def _cut_sides(m: CombinatorialMap, edge_keys, cap: int):
    """Vertex sets of the sides of a dual curve; on the torus only finite sides."""
    cut = set(edge_keys)
    ends = []
    for d, c in cut:
        ends.append((m.vertex_of[d], c))
        ends.append((m.head(d), _add(c, m.shift[d])))
    sides = []
    done = set()
    for s in ends:
        if s in done:
            continue
        comp = {s}
        dq = deque([s])
        infinite = False
        while dq:
            u = dq.popleft()
            for w, ek in _lift_nbrs(m, u):
                if ek in cut or w in comp:
                    continue
                comp.add(w)
                dq.append(w)
            if len(comp) > cap:
                infinite = True
                break
        done |= comp
        if not infinite:
            sides.append(frozenset(comp))
    return sides


def _piece(m: CombinatorialMap, faces, edge_keys, inside, table=None):
    cut = set(edge_keys)
    inc_faces = set()
    if table is None:
        table = _face_table(m)
    # every inside edge is seen from both ends
    e_in = sum(1 for v, c in inside for d in m.vertices[v]
               if _lifted_edge_key(m, d, c) not in cut) // 2
    for v, c in inside:
        for d in m.vertices[v]:
            f = m.face_containing(d)
            i = m.faces[f].index(d)
            base = _add(c, -table[f][i][1])
            inc_faces.add((f, base))
    n = len(edge_keys)
    chi = len(inc_faces) - (e_in + n) + len(inside)
    return DualCut(list(faces), list(edge_keys), frozenset(inside), n, len(inside), e_in, chi)


def disk_cuts(g, max_cut_len: int = 16):
    """Yield a :class:`DualCut` for every disk side of every enumerated dual curve."""
    m = g.map if isinstance(g, BowtieGraph) else g
    table = _face_table(m)
    for faces, eks in enumerate_dual_cycles(m, max_cut_len):
        n = len(eks)
        cap = m.num_vertices + 1 if m.surface == "sphere" else 2 * n * n + 32
        for side in _cut_sides(m, eks, cap):
            piece = _piece(m, faces, eks, side, table)
            if piece.chi == 1:
                yield piece


def counting_identity(g, cut: DualCut) -> tuple[int, int, int]:
    """``(n, V_in, E_in)`` for a disk cut; ``n + 2 E_in = 4 V_in`` for 4-valent graphs."""
    if cut.chi != 1:
        raise ValueError("cut does not bound a disk")
    if cut.n % 2:
        raise ValueError(f"odd cut length {cut.n}")
    return cut.n, cut.v_in, cut.e_in


@dataclass
class ConditionReport:
    ok: bool
    violations: list
    cuts_checked: int
    max_cut_len: int


def check_circle_pattern_condition(g: BowtieGraph, theta=None, max_cut_len: int = 16) -> ConditionReport:
    """Angle-sum condition on disk pieces: at least 2 pi, equality only for a single vertex.

    ``theta`` maps a primal edge id to its exterior angle (default ``pi/2``).
    """
    m = g.map
    if theta is None:
        def theta(_e):
            return math.pi / 2
    elif not callable(theta):
        table = theta
        theta = table.__getitem__
    for v in range(m.num_vertices):
        tot = sum(theta(m.edge_id(d)) for d in m.vertices[v])
        if abs(tot - 2 * math.pi) > 1e-9:
            raise ValueError(f"angles around vertex {v} sum to {tot}, expected 2 pi")
    violations = []
    count = 0
    for cut in disk_cuts(g, max_cut_len):
        count += 1
        s = sum(theta(ek[0]) for ek in cut.edges)
        if s < 2 * math.pi - 1e-9 or (abs(s - 2 * math.pi) <= 1e-9 and cut.v_in != 1):
            if m.surface == "sphere" and abs(s - 2 * math.pi) <= 1e-9:
                others = [c for c in _cut_sides(m, cut.edges, m.num_vertices + 1)
                          if c != cut.inside]
                if any(len(o) == 1 for o in others):
                    continue
            violations.append(cut)
    return ConditionReport(not violations, violations, count, max_cut_len)
