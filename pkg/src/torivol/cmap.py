"""Dart-based combinatorial maps (rotation systems) on the torus and sphere.

A map is given by two permutations on the darts ``0..N-1``:

* ``vertex_perm`` -- counterclockwise rotation of darts around their vertex,
* ``edge_inv`` -- fixed-point-free involution pairing the two darts of an edge.

Faces are the orbits of ``phi = vertex_perm o edge_inv``.  With the
convention above a face orbit walks its boundary with the face on the right,
i.e. clockwise.

On the torus each dart carries an integer translation ``shift[d]`` in Z^2:
following dart ``d`` from a vertex in lattice cell ``o`` lands in cell
``o + shift[d]``.  On the sphere all shifts are zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MapError(ValueError):
    """Malformed permutation data."""


def _orbits(perm: list[int]) -> list[list[int]]:
    seen = [False] * len(perm)
    out = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        cyc = []
        d = start
        while not seen[d]:
            seen[d] = True
            cyc.append(d)
            d = perm[d]
        out.append(cyc)
    return out


@dataclass
class CombinatorialMap:
    vertex_perm: list[int]
    edge_inv: list[int]
    surface: str = "sphere"
    shift: np.ndarray | None = None
    _faces: list[list[int]] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        n = len(self.vertex_perm)
        if len(self.edge_inv) != n:
            raise MapError("vertex_perm and edge_inv have different lengths")
        for name, p in (("vertex_perm", self.vertex_perm), ("edge_inv", self.edge_inv)):
            if sorted(p) != list(range(n)):
                raise MapError(f"{name} is not a permutation of 0..{n - 1}")
        for d in range(n):
            e = self.edge_inv[d]
            if e == d:
                raise MapError(f"edge_inv has a fixed point at dart {d}")
            if self.edge_inv[e] != d:
                raise MapError(f"edge_inv is not an involution at dart {d}")
        if self.surface not in ("torus", "sphere"):
            raise MapError(f"unknown surface {self.surface!r}")
        if self.shift is None:
            self.shift = np.zeros((n, 2), dtype=int)
        else:
            self.shift = np.asarray(self.shift, dtype=int).reshape(n, 2)
            for d in range(n):
                if np.any(self.shift[d] != -self.shift[self.edge_inv[d]]):
                    raise MapError(f"shift of dart {d} is not minus the shift of its partner")
        self.vertices = _orbits(self.vertex_perm)
        self.vertex_of = [0] * n
        for i, cyc in enumerate(self.vertices):
            for d in cyc:
                self.vertex_of[d] = i

    # -- basic structure -------------------------------------------------

    @property
    def num_darts(self) -> int:
        return len(self.vertex_perm)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return self.num_darts // 2

    @property
    def faces(self) -> list[list[int]]:
        if self._faces is None:
            phi = [self.vertex_perm[self.edge_inv[d]] for d in range(self.num_darts)]
            self._faces = _orbits(phi)
            self.face_of = [0] * self.num_darts
            for i, cyc in enumerate(self._faces):
                for d in cyc:
                    self.face_of[d] = i
        return self._faces

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    def face_containing(self, d: int) -> int:
        self.faces
        return self.face_of[d]

    def head(self, d: int) -> int:
        return self.vertex_of[self.edge_inv[d]]

    def tail(self, d: int) -> int:
        return self.vertex_of[d]

    def edges(self) -> list[tuple[int, int]]:
        """One ``(d, edge_inv[d])`` pair per edge, smaller dart first."""
        return [(d, self.edge_inv[d]) for d in range(self.num_darts) if d < self.edge_inv[d]]

    def edge_id(self, d: int) -> int:
        return min(d, self.edge_inv[d])

    def degree(self, v: int) -> int:
        return len(self.vertices[v])

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces

    def expected_euler(self) -> int:
        return 0 if self.surface == "torus" else 2

    def validate(self) -> None:
        chi = self.euler_characteristic()
        if chi != self.expected_euler():
            raise MapError(
                f"Euler characteristic {chi} does not match declared surface {self.surface}")
        if self.surface == "torus":
            # every face must be contractible: its boundary shifts sum to zero
            for i, cyc in enumerate(self.faces):
                tot = self.shift[cyc].sum(axis=0)
                if np.any(tot != 0):
                    raise MapError(f"face {i} has nonzero lattice holonomy {tuple(tot)}")

    def face_offsets(self, f: int) -> np.ndarray:
        """Lattice offsets of the tails of the darts of face ``f`` relative to its first dart."""
        cyc = self.faces[f]
        out = np.zeros((len(cyc), 2), dtype=int)
        for i in range(1, len(cyc)):
            out[i] = out[i - 1] + self.shift[cyc[i - 1]]
        return out

    def relabel(self, perm: list[int]) -> "CombinatorialMap":
        """Return the isomorphic map with dart ``d`` renamed ``perm[d]``."""
        n = self.num_darts
        vp = [0] * n
        ei = [0] * n
        sh = np.zeros((n, 2), dtype=int)
        for d in range(n):
            vp[perm[d]] = perm[self.vertex_perm[d]]
            ei[perm[d]] = perm[self.edge_inv[d]]
            sh[perm[d]] = self.shift[d]
        return CombinatorialMap(vp, ei, self.surface, sh)

    @classmethod
    def from_rotations(cls, rotations: list[list], pairs: list[tuple], surface: str = "sphere",
                       shifts: dict | None = None) -> tuple["CombinatorialMap", dict]:
        """Build a map from labelled half-edges.

        ``rotations`` lists, per vertex, hashable half-edge labels in
        counterclockwise order; ``pairs`` lists the two labels of each edge;
        ``shifts`` maps a label to its lattice translation.  Returns the map
        and the label -> dart dictionary.
        """
        index = {}
        vp_cycles = []
        for rot in rotations:
            cyc = []
            for lab in rot:
                if lab in index:
                    raise MapError(f"half-edge {lab!r} appears twice")
                index[lab] = len(index)
                cyc.append(index[lab])
            vp_cycles.append(cyc)
        n = len(index)
        vp = [0] * n
        for cyc in vp_cycles:
            for i, d in enumerate(cyc):
                vp[d] = cyc[(i + 1) % len(cyc)]
        ei = [-1] * n
        for a, b in pairs:
            da, db = index[a], index[b]
            ei[da] = db
            ei[db] = da
        if -1 in ei:
            missing = [lab for lab, d in index.items() if ei[d] == -1]
            raise MapError(f"unpaired half-edges {missing[:5]}")
        sh = np.zeros((n, 2), dtype=int)
        if shifts:
            for lab, t in shifts.items():
                sh[index[lab]] = t
        return cls(vp, ei, surface, sh), index


def euler_characteristic(m: CombinatorialMap) -> int:
    return m.euler_characteristic()
