"""Link diagrams on the torus and the sphere, twist regions and full augmentation.

A :class:`LinkDiagram` is a 4-valent :class:`~torivol.cmap.CombinatorialMap`
whose vertices are crossings.  Opposite darts at a crossing (``d`` and
``vertex_perm^2(d)``) belong to the same strand.  For a torus diagram the
dart shifts encode the lattice, i.e. the diagram is the quotient of a
biperiodic diagram in the plane.

The primality checks work with simple closed curves meeting the diagram in
two (weakly prime) or four (twist-reduced) points.  Such a curve runs through
as many faces as it has intersection points, so both searches are exhaustive
on the sphere.  On the torus they run on a finite block of lifted fundamental
domains; curves whose disk does not fit in the block are not seen.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .cmap import CombinatorialMap, MapError


class DiagramError(ValueError):
    pass


class HypothesisFailure(DiagramError):
    """The diagram is not weakly prime / twist-reduced / has no crossings."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class LinkDiagram:
    map: CombinatorialMap
    over: dict = field(default_factory=dict)
    labels: list | None = None
    name: str = ""
    lattice: tuple | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = self.map
        for v, cyc in enumerate(m.vertices):
            if len(cyc) != 4:
                raise DiagramError(f"crossing {v} has degree {len(cyc)}, expected 4")
        m.validate()
        for v, d in self.over.items():
            if m.vertex_of[d] != v:
                raise DiagramError(f"over dart {d} is not at crossing {v}")
        if self.lattice is not None and m.surface == "torus":
            for k, loop in enumerate(self.lattice):
                tot = m.shift[list(loop)].sum(axis=0)
                want = np.eye(2, dtype=int)[k]
                if np.any(tot != want):
                    raise DiagramError(f"lattice loop {k + 1} has translation {tuple(tot)}, "
                                       f"expected {tuple(want)}")

    @property
    def surface(self) -> str:
        return self.map.surface

    @property
    def num_crossings(self) -> int:
        return self.map.num_vertices

    def opposite(self, d: int) -> int:
        vp = self.map.vertex_perm
        return vp[vp[d]]

    def components(self) -> list[list[int]]:
        """Link components as cyclic dart sequences (one dart per traversed edge)."""
        m = self.map
        seen = set()
        out = []
        for start in range(m.num_darts):
            if start in seen:
                continue
            comp = []
            d = start
            while d not in seen:
                seen.add(d)
                seen.add(self.opposite(d))
                comp.append(d)
                d = self.opposite(m.edge_inv[d])
            out.append(comp)
        return out


@dataclass
class TwistRegion:
    crossings: list[int]
    externals: tuple[int, int, int, int]
    offsets: dict = field(default_factory=dict)

    @property
    def parity(self) -> int:
        return len(self.crossings) % 2


@dataclass
class AugmentedDiagram:
    """Fully augmented diagram.

    ``reduced`` has one 4-valent vertex per crossing circle with darts in
    the order ``(a0, a1, b0, b1)``: the crossing-circle disk separates
    ``{a0, a1}`` from ``{b0, b1}``, and the link strands run ``a1-b0`` and
    ``b1-a0`` through it.
    """

    reduced: CombinatorialMap
    half_twist: list[bool]
    crossings_per_circle: list[int]
    base: LinkDiagram | None = None
    regions: list[TwistRegion] | None = None
    name: str = ""
    dart_map: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def c(self) -> int:
        return self.reduced.num_vertices

    @property
    def a(self) -> int:
        return self.c

    @property
    def surface(self) -> str:
        return self.reduced.surface

    def reduced_crossings(self) -> list[int]:
        """Crossings left in each twist region after removing full twists."""
        return [1 if h else 0 for h in self.half_twist]


def euler_characteristic(m: CombinatorialMap) -> int:
    return m.euler_characteristic()


# -- twist regions --------------------------------------------------------

def _bigon_corners(d: LinkDiagram) -> dict:
    """Map crossing -> list of (dart y, partner crossing) with the bigon in the corner (y, sigma(y))."""
    m = d.map
    vp, ei = m.vertex_perm, m.edge_inv
    corners: dict = {v: [] for v in range(m.num_vertices)}
    for cyc in m.faces:
        if len(cyc) != 2:
            continue
        d1, d2 = cyc
        u, w = m.vertex_of[d1], m.vertex_of[d2]
        if u == w:
            continue
        if m.surface == "torus" and np.any(m.shift[d1] + m.shift[d2] != 0):
            continue
        corners[u].append((ei[d2], w, d1))
        corners[w].append((ei[d1], u, d2))
    return corners


def find_twist_regions(d: LinkDiagram) -> list[TwistRegion]:
    """Group crossings into maximal chains of bigons.

    A lone crossing with rotation ``(d0, d1, d2, d3)`` is augmented so that
    its crossing circle separates ``{d0, d1}`` from ``{d2, d3}``; for longer
    chains the side pairs are forced by the bigons.
    """
    m = d.map
    vp = m.vertex_perm
    corners = _bigon_corners(d)
    for v, cs in corners.items():
        if len(cs) > 2:
            raise DiagramError(f"crossing {v} lies on {len(cs)} bigons")
        if len(cs) == 2:
            (y1, _, _), (y2, _, _) = cs
            if {y1, vp[y1]} & {y2, vp[y2]}:
                raise DiagramError(f"bigons at crossing {v} share an edge")
    regions = []
    seen = set()
    order = sorted(range(m.num_vertices), key=lambda v: (len(corners[v]) != 1, v))
    for start in order:
        if start in seen:
            continue
        if len(corners[start]) == 2:
            # only reached when every crossing of the chain has two bigons
            raise DiagramError(f"twist region through crossing {start} closes up into a cycle")
        chain = [start]
        offs = {start: np.zeros(2, dtype=int)}
        seen.add(start)
        prev = None
        cur = start
        while True:
            nxt = [c for c in corners[cur] if c[1] != prev or prev is None]
            nxt = [c for c in nxt if c[1] not in seen]
            if not nxt:
                break
            _, w, dart = nxt[0]
            offs[w] = offs[cur] + m.shift[dart]
            prev, cur = cur, w
            chain.append(w)
            seen.add(w)
        if len(chain) == 1:
            x0 = m.vertices[start][0]
            ext = (x0, vp[x0], vp[vp[x0]], vp[vp[vp[x0]]])
        else:
            y_first = [c[0] for c in corners[chain[0]] if c[1] == chain[1]][0]
            y_last = [c[0] for c in corners[chain[-1]] if c[1] == chain[-2]][0]
            ext = (vp[vp[y_first]], vp[vp[vp[y_first]]], vp[vp[y_last]], vp[vp[vp[y_last]]])
        regions.append(TwistRegion(chain, ext, offs))
    return regions


# -- lifted graphs used by the primality checks ---------------------------

SINK = ("sink",)


def _lift_block(m: CombinatorialMap, block: int):
    """Vertices, edges and faces of the lift over a ``block x block`` patch.

    Returns ``(nodes, edges, faces)`` where edges are ``(key, u, w)`` with a
    hashable key per lifted edge, and faces map a lifted face key to its
    list of lifted vertices (outside vertices replaced by SINK).
    """
    if m.surface == "sphere":
        cells = [(0, 0)]
    else:
        lo = -(block // 2)
        cells = [(i, j) for i in range(lo, lo + block) for j in range(lo, lo + block)]
    cellset = set(cells)
    nodes = [(v, c) for c in cells for v in range(m.num_vertices)]

    def node(v, c):
        return (v, c) if c in cellset else SINK

    edges = []
    for c in cells:
        for d in range(m.num_darts):
            e = m.edge_inv[d]
            c2 = (c[0] + int(m.shift[d][0]), c[1] + int(m.shift[d][1]))
            if d < e:
                edges.append(((d, c), (m.vertex_of[d], c), node(m.vertex_of[e], c2)))
            elif c2 not in cellset:
                # the canonical end is outside the block
                edges.append(((e, c2), (m.vertex_of[d], c), SINK))
    faces = {}
    for c in cells:
        for f, cyc in enumerate(m.faces):
            offs = m.face_offsets(f)
            key = (f, c)
            faces[key] = [node(m.vertex_of[dd], (c[0] + int(o[0]), c[1] + int(o[1])))
                          for dd, o in zip(cyc, offs)]
    return nodes, edges, faces


def _lifted_edge_key(m: CombinatorialMap, x: int, c):
    e = m.edge_inv[x]
    if x < e:
        return (x, c)
    return (e, (c[0] + int(m.shift[x][0]), c[1] + int(m.shift[x][1])))


def _lifted_face_key(m: CombinatorialMap, x: int, c):
    """Lifted face containing the corner (x, sigma(x)) at the copy of tail(x) in cell c."""
    y = m.vertex_perm[x]
    f = m.face_containing(y)
    pos = m.faces[f].index(y)
    o = m.face_offsets(f)[pos]
    return (f, (c[0] - int(o[0]), c[1] - int(o[1])))


class _UF:
    def __init__(self):
        self.p = {}

    def find(self, a):
        p = self.p
        p.setdefault(a, a)
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


def _two_edge_cuts(nodes, edges, seed=0):
    """Candidate 2-edge cuts via random cycle-space labels, verified exactly."""
    rng = random.Random(seed)
    adj = {}
    for i, (_, u, w) in enumerate(edges):
        adj.setdefault(u, []).append((w, i))
        adj.setdefault(w, []).append((u, i))
    label = [0] * len(edges)
    parent_edge = {}
    order = []
    seen = set()
    for root in adj:
        if root in seen:
            continue
        seen.add(root)
        stack = [root]
        while stack:
            u = stack.pop()
            order.append(u)
            for w, i in adj[u]:
                if w not in seen:
                    seen.add(w)
                    parent_edge[w] = (i, u)
                    stack.append(w)
    tree = {i for i, _ in parent_edge.values()}
    acc = {u: 0 for u in adj}
    for i, (_, u, w) in enumerate(edges):
        if i not in tree:
            r = rng.getrandbits(63) | 1
            label[i] = r
            acc[u] ^= r
            acc[w] ^= r
    for u in reversed(order):
        if u in parent_edge:
            i, p = parent_edge[u]
            label[i] = acc[u]
            acc[p] ^= acc[u]
    groups = {}
    for i, lab in enumerate(label):
        if lab:
            groups.setdefault(lab, []).append(i)
    out = []
    for grp in groups.values():
        for a in range(len(grp)):
            for b in range(a + 1, len(grp)):
                out.append((grp[a], grp[b]))
    return out


def _components_without(nodes, edges, removed):
    uf = _UF()
    for n in nodes:
        uf.find(n)
    for i, (_, u, w) in enumerate(edges):
        if i not in removed:
            uf.union(u, w)
    comps = {}
    for n in nodes:
        comps.setdefault(uf.find(n), []).append(n)
    return uf, comps


def is_weakly_prime(d: LinkDiagram, block: int = 3):
    """Return ``(True, None)`` or ``(False, witness)``.

    The witness is a dict with the two crossed edges and the crossings
    enclosed by the violating curve.
    """
    m = d.map
    nodes, edges, _ = _lift_block(m, block)
    allnodes = nodes + ([SINK] if m.surface == "torus" else [])
    for i, j in _two_edge_cuts(allnodes, edges):
        uf, comps = _components_without(allnodes, edges, {i, j})
        if len(comps) < 2:
            continue
        if m.surface == "torus":
            sink_root = uf.find(SINK)
            inside = [n for r, ns in comps.items() if r != sink_root for n in ns]
        else:
            inside = min(comps.values(), key=len)
        if inside:
            return False, {"edges": (edges[i][0], edges[j][0]),
                           "enclosed": sorted(inside, key=repr), "block": block}
    return True, None


def _is_bigon_chain(m: CombinatorialMap, U: set, v, w, edges_inside) -> bool:
    """Is the induced multigraph on U a path v..w of doubled edges bounding bigons?"""
    if v not in U or w not in U or v == w:
        return False
    nbr = {}
    for key, a, b in edges_inside:
        if a == b:
            return False
        nbr.setdefault(a, []).append((b, key))
        nbr.setdefault(b, []).append((a, key))
    path = [v]
    prev = None
    cur = v
    while cur != w:
        links = [x for x in nbr.get(cur, []) if x[0] != prev]
        targets = {x[0] for x in links}
        if len(targets) != 1:
            return False
        nxt = targets.pop()
        keys = [k for t, k in links if t == nxt]
        if len(keys) != 2 or not _forms_bigon(m, keys):
            return False
        prev, cur = cur, nxt
        path.append(cur)
        if len(path) > len(U):
            return False
    if set(path) != U:
        return False
    for u in U:
        deg = len(nbr.get(u, []))
        if deg != (2 if u in (v, w) else 4):
            return False
    return True


def _forms_bigon(m: CombinatorialMap, keys) -> bool:
    (d1, _), (d2, _) = keys
    for a in (d1, m.edge_inv[d1]):
        f = m.face_containing(a)
        cyc = m.faces[f]
        if len(cyc) == 2 and ({m.edge_id(x) for x in cyc} == {m.edge_id(d1), m.edge_id(d2)}):
            return True
    return False


def is_twist_reduced(d: LinkDiagram, block: int = 3):
    """Return ``(True, None)`` or ``(False, witness)``.

    Curves meeting the diagram in four points, two next to a crossing ``v``
    and two next to a crossing ``w``, run through faces X, P, Y, Q where X
    and Y are opposite corners at both crossings.  All such curves are
    enumerated and the disk they bound must be a chain of bigons from ``v``
    to ``w`` (possibly empty).
    """
    m = d.map
    nodes, edges, _ = _lift_block(m, block)
    torus = m.surface == "torus"
    centre = [(v, (0, 0)) for v in range(m.num_vertices)]

    def corner_info(node):
        v, c = node
        rot = m.vertices[v]
        return rot, [_lifted_face_key(m, x, c) for x in rot]

    by_pair = {}
    for node in nodes:
        rot, cf = corner_info(node)
        for i in (0, 1):
            key = frozenset([cf[i], cf[i + 2]])
            by_pair.setdefault(key, []).append((node, i))

    def crossings_for(node, i):
        """Yield (middle face, crossed edge keys) for the two ways past ``node``."""
        v, c = node
        x, cf = corner_info(node)
        yield cf[(i + 1) % 4], [_lifted_edge_key(m, x[(i + 1) % 4], c),
                                _lifted_edge_key(m, x[(i + 2) % 4], c)]
        yield cf[(i + 3) % 4], [_lifted_edge_key(m, x[i], c),
                                _lifted_edge_key(m, x[(i + 3) % 4], c)]

    inner_edges = [e for e in edges if e[2] is not SINK]
    rim = {e[1] for e in edges if e[2] is SINK}
    for v_node in centre:
        rot, cf = corner_info(v_node)
        for i in (0, 1):
            X, Y = cf[i], cf[i + 2]
            key = frozenset([X, Y])
            for w_node, _j in by_pair.get(key, []):
                if w_node == v_node:
                    continue
                wrot, wcf = corner_info(w_node)
                j = 0 if {wcf[0], wcf[2]} == {X, Y} else 1
                for P, ecut_v in crossings_for(v_node, i):
                    for Q, ecut_w in crossings_for(w_node, j):
                        cut = ecut_v + ecut_w
                        if _four_curve_violates(m, nodes, inner_edges, rim, cut,
                                                v_node, w_node, torus):
                            return False, {"crossings": (v_node, w_node),
                                           "faces": (X, P, Y, Q),
                                           "edges": sorted(set(cut), key=repr), "block": block}
    return True, None


def _curve_sides(nodes, edges, cut):
    """Two-colour the vertices by the parity of curve crossings along paths.

    Returns a dict node -> 0/1 or None when the parities are inconsistent.
    """
    mult = {}
    for k in cut:
        mult[k] = mult.get(k, 0) + 1
    adj = {n: [] for n in nodes}
    for key, a, b in edges:
        par = mult.get(key, 0) % 2
        adj[a].append((b, par))
        adj[b].append((a, par))
    side = {}
    for root in nodes:
        if root in side:
            continue
        side[root] = 0
        stack = [root]
        while stack:
            a = stack.pop()
            for b, par in adj[a]:
                s = side[a] ^ par
                if b not in side:
                    side[b] = s
                    stack.append(b)
                elif side[b] != s:
                    return None
    return side


def _four_curve_violates(m, nodes, edges, rim, cut, v, w, torus):
    side = _curve_sides(nodes, edges, cut)
    if side is None:
        return False
    if torus:
        votes = [side[n] for n in rim]
        outer = int(2 * sum(votes) > len(votes))
        candidates = [1 - outer]
    else:
        candidates = [0, 1]
    for s in candidates:
        inner = {n for n in nodes if side[n] == s} - {v, w}
        if not inner:
            return False
        U = inner | {v, w}
        inside = [e for e in edges if e[1] in U and e[2] in U
                  and not (e[1] in (v, w) and e[2] in (v, w))]
        if _is_bigon_chain(m, U, v, w, inside):
            return False
    return True


# -- augmentation ---------------------------------------------------------

def augment(d: LinkDiagram, check: bool = True, block: int = 3) -> AugmentedDiagram:
    """Fully augment ``d``: one crossing circle per twist region, full twists removed."""
    m = d.map
    if m.num_vertices == 0:
        raise HypothesisFailure("diagram has no crossings")
    if check:
        ok, wit = is_weakly_prime(d, block)
        if not ok:
            raise HypothesisFailure("diagram is not weakly prime", wit)
        ok, wit = is_twist_reduced(d, block)
        if not ok:
            raise HypothesisFailure("diagram is not twist-reduced", wit)
    regions = find_twist_regions(d)
    where = {}
    for r, reg in enumerate(regions):
        for k, p in enumerate(reg.externals):
            where[p] = (r, k)
    rotations = [[(r, k) for k in range(4)] for r in range(len(regions))]
    pairs = []
    shifts = {}
    for p, (r, k) in where.items():
        q = m.edge_inv[p]
        if q not in where:
            raise DiagramError(f"dart {p} leads into the interior of a twist region")
        s, kq = where[q]
        if p < q:
            pairs.append(((r, k), (s, kq)))
        off_p = regions[r].offsets[m.vertex_of[p]]
        off_q = regions[s].offsets[m.vertex_of[q]]
        shifts[(r, k)] = tuple(off_p + m.shift[p] - off_q)
    red, index = CombinatorialMap.from_rotations(rotations, pairs, m.surface, shifts)
    try:
        red.validate()
    except MapError as exc:
        raise DiagramError(f"collapsed diagram is not cellular: {exc}") from exc
    return AugmentedDiagram(red, [bool(reg.parity) for reg in regions],
                            [len(reg.crossings) for reg in regions], d, regions, d.name,
                            {p: index[lab] for p, lab in where.items()}, dict(d.meta))
