"""Reference computations that share no code with the package."""

from __future__ import annotations

import math
import warnings
from collections import deque

import networkx as nx
import numpy as np

# digits printed in the source material
V_TET_PRINTED = 1.01494
V_OCT_PRINTED = 3.66386


def lobachevsky_fourier(theta: float, terms: int = 4_000_000) -> float:
    """``(1/2) sum sin(2 n theta) / n^2`` summed in chunks; the tail is O(1/terms)."""
    total = 0.0
    chunk = 500_000
    for start in range(1, terms + 1, chunk):
        n = np.arange(start, min(start + chunk, terms + 1), dtype=float)
        total += float(np.sum(np.sin(2 * n * theta) / (n * n)))
    return 0.5 * total


def catalan(terms: int = 200_000) -> float:
    """Catalan's constant by the alternating series with averaged partial sums."""
    k = np.arange(terms, dtype=float)
    s = np.cumsum((-1.0) ** k / (2 * k + 1) ** 2)
    return float(0.5 * (s[-1] + s[-2]))


def edge_connectivity_planar(m) -> int:
    """Minimum edge cut of the diagram graph of a spherical map (Stoer-Wagner on multiplicities)."""
    G = nx.Graph()
    G.add_nodes_from(range(m.num_vertices))
    for a, b in m.edges():
        u, v = m.tail(a), m.tail(b)
        if u == v:
            continue
        w = G.edges[u, v]["weight"] + 1 if G.has_edge(u, v) else 1
        G.add_edge(u, v, weight=w)
    if G.number_of_nodes() < 2:
        return 0
    value, _ = nx.stoer_wagner(G)
    return int(value)


def quotient_graph(m) -> nx.MultiGraph:
    G = nx.MultiGraph()
    G.add_nodes_from(range(m.num_vertices))
    for a, b in m.edges():
        G.add_edge(m.tail(a), m.tail(b))
    return G


def bfs_ball_sizes(G, x, l_max: int) -> list[int]:
    dist = nx.single_source_shortest_path_length(G, x, cutoff=l_max)
    counts = [0] * (l_max + 1)
    for d in dist.values():
        counts[d] += 1
    return list(np.cumsum(counts))


def faces_by_hand(vertex_perm, edge_inv) -> int:
    """Number of orbits of ``vertex_perm o edge_inv``."""
    n = len(vertex_perm)
    seen = [False] * n
    count = 0
    for d in range(n):
        if not seen[d]:
            count += 1
            x = d
            while not seen[x]:
                seen[x] = True
                x = vertex_perm[edge_inv[x]]
    return count


def circle_through(p, q, r):
    """Centre and radius of the circle through three points."""
    ax, ay, bx, by, cx, cy = p.real, p.imag, q.real, q.imag, r.real, r.imag
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    c = complex(ux, uy)
    return c, abs(p - c)


def lobachevsky_integral(theta: float) -> float:
    """Plain adaptive quadrature of the defining integral."""
    import scipy.integrate as si
    if theta == 0:
        return 0.0
    sign = 1.0 if theta > 0 else -1.0
    t = abs(theta)
    cuts = [0.0] + [k * math.pi for k in range(1, int(t // math.pi) + 1) if k * math.pi < t] + [t]
    val = 0.0
    for a, b in zip(cuts, cuts[1:]):  # log singularities only at the ends of each piece
        if b - a < 1e-15:
            continue
        with warnings.catch_warnings():  # short pieces ending at a singularity trip the heuristic
            warnings.simplefilter("ignore", si.IntegrationWarning)
            piece, _ = si.quad(lambda s: math.log(abs(2 * math.sin(s))), a, b, limit=400,
                               epsabs=1e-13, epsrel=1e-13)
        val += piece
    return -sign * val


def cyclic_cone_volume(points, center) -> float:
    """Cone from infinity over an ideal polygon inscribed in a circle: sum of lambda(half central angle)."""
    angs = sorted(math.atan2((z - center).imag, (z - center).real) for z in points)
    gaps = [(b - a) for a, b in zip(angs, angs[1:])] + [angs[0] + 2 * math.pi - angs[-1]]
    return sum(lobachevsky_integral(g / 2) for g in gaps)
