"""Built-in example diagrams used by the tests, the CLI self-test and the data corpus."""

from __future__ import annotations

import numpy as np

from .cmap import CombinatorialMap
from .diagram import LinkDiagram

# Figure-eight knot; each crossing lists its edges counterclockwise starting
# at the incoming under-strand.
FIGURE_EIGHT_PD = [[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]]


def grid_diagram(p: int, q: int, name: str = "") -> LinkDiagram:
    """Alternating square-grid diagram on the torus with ``p x q`` crossings per domain.

    Crossing ``(i, j)`` has darts E, N, W, S (counterclockwise).  The
    diagram is the quotient of the biperiodic square weave by the lattice
    spanned by ``(p, 0)`` and ``(0, q)``.
    """
    def idx(i, j):
        return 4 * (i * q + j)

    n = 4 * p * q
    vp = [0] * n
    ei = [0] * n
    sh = np.zeros((n, 2), dtype=int)
    over = {}
    for i in range(p):
        for j in range(q):
            b = idx(i, j)
            for k in range(4):
                vp[b + k] = b + (k + 1) % 4
            over[i * q + j] = b + (0 if (i + j) % 2 == 0 else 1)
            e, w = b, idx((i + 1) % p, j) + 2
            ei[e], ei[w] = w, e
            if i == p - 1:
                sh[e], sh[w] = (1, 0), (-1, 0)
            nn, s = b + 1, idx(i, (j + 1) % q) + 3
            ei[nn], ei[s] = s, nn
            if j == q - 1:
                sh[nn], sh[s] = (0, 1), (0, -1)
    m = CombinatorialMap(vp, ei, "torus", sh)
    lattice = ([idx(i, 0) for i in range(p)], [idx(0, j) + 1 for j in range(q)])
    return LinkDiagram(m, over, name=name or f"grid{p}x{q}", lattice=lattice,
                       meta={"grid": (p, q)})


def square_weave() -> LinkDiagram:
    """The 2x2 alternating square weave W."""
    return grid_diagram(2, 2, "square_weave")


def pd_diagram(pd, name: str = "") -> LinkDiagram:
    """Planar diagram from a PD code (edge labels listed counterclockwise per crossing)."""
    where = {}
    n = 4 * len(pd)
    vp = [0] * n
    for k, x in enumerate(pd):
        if len(x) != 4:
            raise ValueError(f"crossing {k} does not have four entries")
        for i, lab in enumerate(x):
            vp[4 * k + i] = 4 * k + (i + 1) % 4
            where.setdefault(lab, []).append(4 * k + i)
    ei = [0] * n
    for lab, ds in where.items():
        if len(ds) != 2:
            raise ValueError(f"edge label {lab} appears {len(ds)} times")
        ei[ds[0]], ei[ds[1]] = ds[1], ds[0]
    m = CombinatorialMap(vp, ei, "sphere")
    return LinkDiagram(m, {k: 4 * k + 1 for k in range(len(pd))}, name=name)


def figure_eight() -> LinkDiagram:
    return pd_diagram(FIGURE_EIGHT_PD, "figure_eight")


# -- grids with twist chains ----------------------------------------------

def chain_grid(p: int, q: int, lengths, orient=None, name: str = "") -> LinkDiagram:
    """Torus grid where the crossing at ``(i, j)`` becomes a twist chain.

    ``lengths[i][j]`` is the chain length and ``orient[i][j]`` (0 or 1)
    rotates which pairs of grid directions share an end of the chain.
    """
    rotations, pairs, shifts = [], [], {}
    slot = {}
    for i in range(p):
        for j in range(q):
            k = lengths[i][j]
            r = 0 if orient is None else orient[i][j]
            for t in range(k):
                rotations.append([(i, j, t, x) for x in range(4)])
            for t in range(k - 1):
                pairs.append(((i, j, t, 0), (i, j, t + 1, 1)))
                pairs.append(((i, j, t, 3), (i, j, t + 1, 2)))
            ext = [(i, j, k - 1, 0), (i, j, 0, 1), (i, j, 0, 2), (i, j, k - 1, 3)]
            for s, name_ in enumerate("ENWS"):
                slot[(i, j, name_)] = ext[(s + r) % 4]
    for i in range(p):
        for j in range(q):
            e, w = slot[(i, j, "E")], slot[((i + 1) % p, j, "W")]
            pairs.append((e, w))
            if i == p - 1:
                shifts[e], shifts[w] = (1, 0), (-1, 0)
            n_, s_ = slot[(i, j, "N")], slot[(i, (j + 1) % q, "S")]
            pairs.append((n_, s_))
            if j == q - 1:
                shifts[n_], shifts[s_] = (0, 1), (0, -1)
    m, index = CombinatorialMap.from_rotations(rotations, pairs, "torus", shifts)
    over = {v: cyc[0] for v, cyc in enumerate(m.vertices)}
    return LinkDiagram(m, over, name=name or f"chains{p}x{q}")


def three_chain_torus() -> LinkDiagram:
    """A single three-crossing twist region on the torus."""
    return chain_grid(1, 1, [[3]], [[1]], "three_chain")


def random_torus_diagram(rng, p: int = 2, q: int = 2, max_len: int = 3,
                         name: str = "") -> LinkDiagram:
    lengths = [[int(rng.integers(1, max_len + 1)) for _ in range(q)] for _ in range(p)]
    orient = [[int(rng.integers(0, 2)) for _ in range(q)] for _ in range(p)]
    return chain_grid(p, q, lengths, orient, name or "random_torus")


# -- medial diagrams -------------------------------------------------------

def medial_diagram(g: CombinatorialMap, name: str = "") -> LinkDiagram:
    """Alternating link diagram on the medial graph of the map ``g``."""
    vp, ei = g.vertex_perm, g.edge_inv

    def off(x):
        return (0, 0) if x < ei[x] else tuple(int(t) for t in g.shift[x])

    rotations, pairs, shifts = [], [], {}
    for d, e in g.edges():
        rotations.append([("e", e), ("s", d), ("e", d), ("s", e)])
    for x in range(g.num_darts):
        y = vp[x]
        pairs.append((("s", x), ("e", y)))
        t = (off(y)[0] - off(x)[0], off(y)[1] - off(x)[1])
        shifts[("s", x)] = t
        shifts[("e", y)] = (-t[0], -t[1])
    m, _ = CombinatorialMap.from_rotations(rotations, pairs, g.surface, shifts)
    over = {v: cyc[0] for v, cyc in enumerate(m.vertices)}
    return LinkDiagram(m, over, name=name)


def triangular_lattice() -> CombinatorialMap:
    """One vertex, three edges, two triangles on the torus."""
    dirs = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    vp = [(k + 1) % 6 for k in range(6)]
    ei = [(k + 3) % 6 for k in range(6)]
    return CombinatorialMap(vp, ei, "torus", dirs)


def triaxial() -> LinkDiagram:
    """The triaxial link: medial graph of the triangular lattice."""
    return medial_diagram(triangular_lattice(), "triaxial")


def planar_map_from_points(points, edges) -> CombinatorialMap:
    """Planar straight-line map; darts sorted counterclockwise at each vertex."""
    pts = np.asarray(points, float)
    nbrs = {}
    for u, w in edges:
        nbrs.setdefault(u, []).append(w)
        nbrs.setdefault(w, []).append(u)
    rotations = []
    for u in sorted(nbrs):
        ws = sorted(nbrs[u], key=lambda w: np.arctan2(*(pts[w] - pts[u])[::-1]))
        rotations.append([(u, w) for w in ws])
    pairs = [((u, w), (w, u)) for u, w in {tuple(sorted(e)) for e in edges}]
    m, _ = CombinatorialMap.from_rotations(rotations, pairs, "sphere")
    return m


def delaunay_map(rng, n: int = 8) -> CombinatorialMap:
    from scipy.spatial import Delaunay

    pts = rng.random((n, 2))
    tri = Delaunay(pts)
    edges = set()
    for s in tri.simplices:
        for a in range(3):
            u, w = int(s[a]), int(s[(a + 1) % 3])
            edges.add((min(u, w), max(u, w)))
    return planar_map_from_points(pts, sorted(edges))


POLYHEDRA = {
    "tetrahedron": ([(0, 0), (1, 0), (0.5, 0.9), (0.5, 0.3)],
                    [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)]),
    "octahedron": ([(0, 0), (4, 0), (2, 3.5), (2, 0.6), (2.6, 1.6), (1.4, 1.6)],
                   [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 3),
                    (1, 4), (2, 4), (2, 5), (0, 5)]),
    "cube": ([(0, 0), (3, 0), (3, 3), (0, 3), (1, 1), (2, 1), (2, 2), (1, 2)],
             [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
              (0, 4), (1, 5), (2, 6), (3, 7)]),
}


def polyhedron_medial(name: str) -> LinkDiagram:
    pts, edges = POLYHEDRA[name]
    return medial_diagram(planar_map_from_points(pts, edges), f"{name}_medial")


def random_planar_diagram(rng, n: int = 8, name: str = "") -> LinkDiagram:
    return medial_diagram(delaunay_map(rng, n), name or f"delaunay{n}_medial")


# -- constructed hypothesis violations -------------------------------------

def connected_sum(d1: LinkDiagram, d2: LinkDiagram, e1: int = 0, e2: int = 0,
                  name: str = "") -> LinkDiagram:
    """Splice the planar diagram ``d2`` into dart ``e1`` of ``d1``: a nontrivial 2-edge cut."""
    m1, m2 = d1.map, d2.map
    if m2.surface != "sphere":
        raise ValueError("the inserted summand must be planar")
    n1 = m1.num_darts
    vp = list(m1.vertex_perm) + [x + n1 for x in m2.vertex_perm]
    ei = list(m1.edge_inv) + [x + n1 for x in m2.edge_inv]
    sh = np.vstack([m1.shift, np.zeros((m2.num_darts, 2), dtype=int)])
    x1, y1 = e1, m1.edge_inv[e1]
    x2, y2 = e2 + n1, m2.edge_inv[e2] + n1
    for a, b in ((x1, y2), (x2, y1)):
        ei[a], ei[b] = b, a
    sh[y2] = -sh[x1]
    sh[x2] = 0
    sh[y1] = 0
    for cand in (ei, None):
        if cand is None:
            ei = list(m1.edge_inv) + [x + n1 for x in m2.edge_inv]
            for a, b in ((x1, x2), (y2, y1)):
                ei[a], ei[b] = b, a
            sh[x2] = -sh[x1]
            sh[y2] = 0
        m = CombinatorialMap(vp, ei, m1.surface, sh)
        if m.euler_characteristic() == m.expected_euler():
            break
    over = dict(d1.over)
    over.update({v + m1.num_vertices: o + n1 for v, o in d2.over.items()})
    return LinkDiagram(m, over, name=name or f"{d1.name}#{d2.name}")


def flype_example() -> LinkDiagram:
    """Closure of the tangle sum ``[1] + V + [1] + V`` with ``V`` a vertical 2-twist.

    The two single crossings share their top and bottom faces but are
    separated on both sides by vertical twists, so the diagram is not
    twist-reduced.
    """
    names = ("v", "t", "b", "w", "t2", "b2")
    # crossing darts are listed counterclockwise as NE, NW, SW, SE
    rot = [[(c, k) for k in ("NE", "NW", "SW", "SE")] for c in names]
    pairs = [
        (("t", "SW"), ("b", "NW")), (("t", "SE"), ("b", "NE")),
        (("t2", "SW"), ("b2", "NW")), (("t2", "SE"), ("b2", "NE")),
        (("v", "NE"), ("t", "NW")), (("v", "SE"), ("b", "SW")),
        (("t", "NE"), ("w", "NW")), (("b", "SE"), ("w", "SW")),
        (("w", "NE"), ("t2", "NW")), (("w", "SE"), ("b2", "SW")),
        (("t2", "NE"), ("v", "NW")), (("b2", "SE"), ("v", "SW")),
    ]
    m, _ = CombinatorialMap.from_rotations(rot, pairs, "sphere")
    return LinkDiagram(m, {v: cyc[0] for v, cyc in enumerate(m.vertices)}, name="flype")


def capped_grid(nx: int, ny: int, name: str = "") -> LinkDiagram:
    """Planar ``nx x ny`` square-grid diagram with adjacent boundary exits capped in pairs.

    Both sizes must be even.  The caps turn the outer ring of crossings into
    twist chains: a chain of two along each side and a chain of three
    through each corner.  Crossing ``(i, j)`` has darts E, N, W, S starting
    at ``4 * (i * ny + j)``.
    """
    if nx % 2 or ny % 2 or nx < 2 or ny < 2:
        raise ValueError("capped grid needs even sizes >= 2")

    def idx(i, j):
        return 4 * (i * ny + j)

    n = 4 * nx * ny
    vp = [0] * n
    ei = [-1] * n
    over = {}

    def join(a, b):
        ei[a], ei[b] = b, a

    for i in range(nx):
        for j in range(ny):
            b = idx(i, j)
            for k in range(4):
                vp[b + k] = b + (k + 1) % 4
            over[i * ny + j] = b + (0 if (i + j) % 2 == 0 else 1)
            if i + 1 < nx:
                join(b, idx(i + 1, j) + 2)
            if j + 1 < ny:
                join(b + 1, idx(i, j + 1) + 3)
    for i in range(0, nx, 2):
        join(idx(i, 0) + 3, idx(i + 1, 0) + 3)
        join(idx(i, ny - 1) + 1, idx(i + 1, ny - 1) + 1)
    for j in range(0, ny, 2):
        join(idx(0, j) + 2, idx(0, j + 1) + 2)
        join(idx(nx - 1, j), idx(nx - 1, j + 1))
    m = CombinatorialMap(vp, ei, "sphere")
    return LinkDiagram(m, over, name=name or f"capped{nx}x{ny}", meta={"capped_grid": (nx, ny)})
