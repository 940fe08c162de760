"""Line-oriented text formats for diagrams, augmented links, bow-tie graphs and patterns.

Every file is a dart table::

    surface torus|sphere
    darts N
    vertex d0 d1 d2 d3 ...     rotation order at one vertex
    edge da db [sx sy]         an edge; (sx, sy) is the lattice shift of da

followed by kind-specific records.  ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cmap import CombinatorialMap, MapError
from .diagram import AugmentedDiagram, DiagramError, LinkDiagram


class ParseError(ValueError):
    """Malformed input; the message names the file and line."""


@dataclass
class _Record:
    key: str
    args: list[str]
    line: int


def _records(text: str):
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            key, *args = line.split()
            yield _Record(key, args, i)


class _Reader:
    """Collects the dart table; unknown keys are handed back to the caller."""

    def __init__(self, text: str, source: str = "<string>"):
        self.source = source
        self.surface = None
        self.ndarts = None
        self.rotations = []
        self.edges = []
        self.name = ""
        self.kind = "diagram"
        self.extra = []
        for r in _records(text):
            try:
                self._take(r)
            except (ValueError, IndexError) as exc:
                raise self.error(r.line, str(exc) or "malformed record") from None

    def error(self, line, msg) -> ParseError:
        return ParseError(f"{self.source}:{line}: {msg}")

    def _take(self, r: _Record):
        if r.key == "surface":
            if r.args not in (["torus"], ["sphere"]):
                raise ValueError("surface must be 'torus' or 'sphere'")
            self.surface = r.args[0]
        elif r.key == "darts":
            self.ndarts = int(r.args[0])
        elif r.key == "name":
            self.name = " ".join(r.args)
        elif r.key == "kind":
            self.kind = r.args[0]
        elif r.key == "vertex":
            self.rotations.append(([int(x) for x in r.args], r.line))
        elif r.key == "edge":
            if len(r.args) not in (2, 4):
                raise ValueError("edge needs two darts and an optional shift pair")
            vals = [int(x) for x in r.args]
            self.edges.append((vals, r.line))
        else:
            self.extra.append(r)

    def build_map(self) -> CombinatorialMap:
        if self.surface is None:
            raise self.error(1, "missing 'surface' line")
        n = self.ndarts
        if n is None:
            raise self.error(1, "missing 'darts' line")
        vp = [-1] * n
        for rot, line in self.rotations:
            for i, d in enumerate(rot):
                if not 0 <= d < n:
                    raise self.error(line, f"dart {d} out of range 0..{n - 1}")
                if vp[d] != -1:
                    raise self.error(line, f"dart {d} appears in two vertex lines")
                vp[d] = rot[(i + 1) % len(rot)]
        if -1 in vp:
            raise self.error(1, f"dart {vp.index(-1)} is in no vertex line")
        ei = [-1] * n
        sh = np.zeros((n, 2), dtype=int)
        for vals, line in self.edges:
            a, b = vals[:2]
            for d in (a, b):
                if not 0 <= d < n:
                    raise self.error(line, f"dart {d} out of range 0..{n - 1}")
                if ei[d] != -1:
                    raise self.error(line, f"dart {d} appears in two edge lines")
            if a == b:
                raise self.error(line, "an edge needs two distinct darts")
            ei[a], ei[b] = b, a
            if len(vals) == 4:
                sh[a] = vals[2:]
                sh[b] = [-vals[2], -vals[3]]
        if -1 in ei:
            raise self.error(1, f"dart {ei.index(-1)} is in no edge line")
        if self.surface == "sphere" and sh.any():
            raise self.error(1, "lattice shifts given on a sphere")
        try:
            return CombinatorialMap(vp, ei, self.surface, sh)
        except MapError as exc:
            raise self.error(1, str(exc)) from None


def _dart_table(m: CombinatorialMap, name: str, kind: str) -> list[str]:
    out = [f"kind {kind}"]
    if name:
        out.append(f"name {name}")
    out += [f"surface {m.surface}", f"darts {m.num_darts}"]
    out += ["vertex " + " ".join(map(str, cyc)) for cyc in m.vertices]
    for a, b in m.edges():
        s = m.shift[a]
        out.append(f"edge {a} {b}" + (f" {s[0]} {s[1]}" if s.any() else ""))
    return out


def _read_text(path) -> tuple[str, str]:
    p = Path(path)
    return p.read_text(), str(p)


# -- diagrams ----------------------------------------------------------------

def dumps_diagram(d: LinkDiagram) -> str:
    out = _dart_table(d.map, d.name, "diagram")
    out += [f"over {v} {x}" for v, x in sorted(d.over.items())]
    if d.lattice is not None:
        a, b = d.lattice
        out.append("lattice " + " ".join(map(str, a)) + " ; " + " ".join(map(str, b)))
    if "grid" in d.meta:
        out.append("grid {} {}".format(*d.meta["grid"]))
    return "\n".join(out) + "\n"


def loads_diagram(text: str, source: str = "<string>") -> LinkDiagram:
    rd = _Reader(text, source)
    if rd.kind != "diagram":
        raise rd.error(1, f"expected a diagram file, got kind {rd.kind!r}")
    m = rd.build_map()
    over, lattice, meta = {}, None, {}
    for r in rd.extra:
        try:
            if r.key == "over":
                v, x = map(int, r.args)
                over[v] = x
            elif r.key == "lattice":
                txt = " ".join(r.args)
                if ";" not in txt:
                    raise ValueError("lattice needs two loops separated by ';'")
                a, b = txt.split(";")
                lattice = ([int(x) for x in a.split()], [int(x) for x in b.split()])
            elif r.key == "grid":
                meta["grid"] = tuple(int(x) for x in r.args[:2])
            else:
                raise ValueError(f"unknown record {r.key!r}")
        except (ValueError, IndexError) as exc:
            raise rd.error(r.line, str(exc)) from None
    try:
        return LinkDiagram(m, over, name=rd.name, lattice=lattice, meta=meta)
    except DiagramError as exc:
        raise rd.error(1, str(exc)) from None


# -- augmented links ---------------------------------------------------------

def dumps_augmented(a: AugmentedDiagram) -> str:
    out = _dart_table(a.reduced, a.name, "augmented")
    for r, (h, k) in enumerate(zip(a.half_twist, a.crossings_per_circle)):
        out.append(f"circle {r} {int(h)} {k}")
    if "grid" in a.meta:
        out.append("grid {} {}".format(*a.meta["grid"]))
    return "\n".join(out) + "\n"


def loads_augmented(text: str, source: str = "<string>") -> AugmentedDiagram:
    rd = _Reader(text, source)
    if rd.kind != "augmented":
        raise rd.error(1, f"expected an augmented file, got kind {rd.kind!r}")
    m = rd.build_map()
    half = [False] * m.num_vertices
    count = [1] * m.num_vertices
    meta = {}
    for r in rd.extra:
        try:
            if r.key == "circle":
                i, h, k = map(int, r.args)
                half[i], count[i] = bool(h), k
            elif r.key == "grid":
                meta["grid"] = tuple(int(x) for x in r.args[:2])
            else:
                raise ValueError(f"unknown record {r.key!r}")
        except (ValueError, IndexError) as exc:
            raise rd.error(r.line, str(exc)) from None
    for v, cyc in enumerate(m.vertices):
        if len(cyc) != 4:
            raise rd.error(1, f"crossing circle {v} has {len(cyc)} strand ends, expected 4")
    return AugmentedDiagram(m, half, count, name=rd.name, meta=meta)


# -- bow-tie graphs ------------------------------------------------------------

def _graph_lines(g) -> list[str]:
    out = _dart_table(g.map, g.name, "bowtie")
    out.append(f"circles {g.c}")
    out += [f"shade {f} {'black' if s else 'white'}" for f, s in enumerate(g.shaded)]
    out += [f"bowtie {a} {b}" for a, b in g.bowties]
    out += [f"halftwist {r} {int(h)}" for r, h in enumerate(g.half_twist)]
    out += [f"midpoint {x} {v}" for x, v in sorted(g.edge_vertex.items())]
    return out


def dumps_graph(g) -> str:
    return "\n".join(_graph_lines(g)) + "\n"


def _parse_graph(rd: _Reader, handled=()):
    from .torihedra import BowtieGraph
    m = rd.build_map()
    shaded = [None] * m.num_faces
    bowties, half, mids, c, rest = [], {}, {}, None, []
    for r in rd.extra:
        try:
            if r.key == "circles":
                c = int(r.args[0])
            elif r.key == "shade":
                f = int(r.args[0])
                if r.args[1] not in ("black", "white"):
                    raise ValueError("shade must be 'black' or 'white'")
                shaded[f] = r.args[1] == "black"
            elif r.key == "bowtie":
                bowties.append(tuple(map(int, r.args[:2])))
            elif r.key == "halftwist":
                half[int(r.args[0])] = bool(int(r.args[1]))
            elif r.key == "midpoint":
                x, v = map(int, r.args[:2])
                mids[x] = v
            elif r.key in handled:
                rest.append(r)
            else:
                raise ValueError(f"unknown record {r.key!r}")
        except (ValueError, IndexError) as exc:
            raise rd.error(r.line, str(exc)) from None
    if None in shaded:
        raise rd.error(1, f"face {shaded.index(None)} has no shade line")
    if c is None:
        c = len(bowties)
    g = BowtieGraph(m, shaded, bowties, c, list(range(c)), mids,
                    [half.get(r, False) for r in range(c)], rd.name)
    return g, rest


def loads_graph(text: str, source: str = "<string>"):
    rd = _Reader(text, source)
    if rd.kind != "bowtie":
        raise rd.error(1, f"expected a bowtie graph file, got kind {rd.kind!r}")
    return _parse_graph(rd)[0]


# -- circle patterns -------------------------------------------------------------

def _c(z) -> str:
    z = complex(z)
    return f"{z.real!r} {z.imag!r}"


def dumps_pattern(p) -> str:
    out = _graph_lines(p.graph)
    out[0] = "kind pattern"
    out.append(f"pattern {p.surface}")
    m = p.graph.map
    for d in range(m.num_darts):
        if d < m.edge_inv[d] and abs(p.theta[d] - math.pi / 2) > 0:
            out.append(f"theta {d} {float(p.theta[d])!r}")
    for f in range(m.num_faces):
        if p.is_line(f):
            q, nrm = p.lines[f]
            out.append(f"line {_c(q)} {_c(nrm)}")
        else:
            out.append(f"circle {_c(p.centers[f])} {float(p.radii[f])!r}")
    out += [f"point {_c(z)}" for z in p.points]
    if p.omega is not None:
        out += [f"omega1 {_c(p.omega[0])}", f"omega2 {_c(p.omega[1])}"]
    if p.infinite_vertex is not None:
        out.append(f"infinity {p.infinite_vertex}")
    if p.anchor_face is not None:
        out.append(f"anchor {p.anchor_face}")
    out.append(f"residual {float(p.residual)!r}")
    out.append(f"iterations {p.iterations}")
    return "\n".join(out) + "\n"


def loads_pattern(text: str, source: str = "<string>"):
    from .circlepattern import CirclePattern
    rd = _Reader(text, source)
    if rd.kind != "pattern":
        raise rd.error(1, f"expected a pattern file, got kind {rd.kind!r}")
    keys = ("pattern", "theta", "circle", "line", "point", "omega1", "omega2",
            "infinity", "anchor", "residual", "iterations")
    g, recs = _parse_graph(rd, keys)
    m = g.map
    theta = np.full(m.num_darts, math.pi / 2)
    faces, points, omega = [], [], [None, None]
    info = {"pattern": None, "infinity": None, "anchor": None, "residual": float("nan"),
            "iterations": 0}
    for r in recs:
        try:
            a = r.args
            if r.key == "pattern":
                info["pattern"] = a[0]
            elif r.key == "theta":
                d = int(a[0])
                theta[d] = theta[m.edge_inv[d]] = float(a[1])
            elif r.key == "circle":
                faces.append(("circle", complex(float(a[0]), float(a[1])), float(a[2]), r.line))
            elif r.key == "line":
                faces.append(("line", complex(float(a[0]), float(a[1])),
                              complex(float(a[2]), float(a[3])), r.line))
            elif r.key == "point":
                points.append(complex(float(a[0]), float(a[1])))
            elif r.key in ("omega1", "omega2"):
                omega[int(r.key[-1]) - 1] = complex(float(a[0]), float(a[1]))
            elif r.key in ("infinity", "anchor", "iterations"):
                info[r.key] = int(a[0])
            elif r.key == "residual":
                info["residual"] = float(a[0])
        except (ValueError, IndexError) as exc:
            raise rd.error(r.line, str(exc)) from None
    if info["pattern"] not in ("plane", "torus"):
        raise rd.error(1, "missing or invalid 'pattern plane|torus' line")
    if len(faces) != m.num_faces:
        raise rd.error(1, f"{len(faces)} circle/line records for {m.num_faces} faces")
    if len(points) != m.num_vertices:
        raise rd.error(1, f"{len(points)} point records for {m.num_vertices} vertices")
    centers = np.full(m.num_faces, np.nan + 0j)
    radii = np.full(m.num_faces, np.inf)
    lines = {}
    for f, (kind, z, w, line) in enumerate(faces):
        if kind == "circle":
            if not w > 0:
                raise rd.error(line, "radius must be positive")
            centers[f], radii[f] = z, w
        else:
            lines[f] = (z, w)
    if info["pattern"] == "torus" and None in omega:
        raise rd.error(1, "torus pattern needs omega1 and omega2")
    with np.errstate(divide="ignore"):
        rho = np.where(np.isfinite(radii), np.log(radii), np.nan)
    return CirclePattern(info["pattern"], g, centers, radii, np.array(points), theta, lines,
                         tuple(omega) if info["pattern"] == "torus" else None,
                         info["infinity"], rho, info["iterations"], info["residual"],
                         info["anchor"])


# -- files -----------------------------------------------------------------------

def file_kind(text: str) -> str:
    for r in _records(text):
        if r.key == "kind":
            return r.args[0] if r.args else ""
    return "diagram"


_LOADERS = {"diagram": loads_diagram, "augmented": loads_augmented,
            "bowtie": loads_graph, "pattern": loads_pattern}


def load(path, expect: str | tuple | None = None):
    """Read any torivol file; ``expect`` restricts the accepted kinds."""
    text, src = _read_text(path)
    kind = file_kind(text)
    allowed = (expect,) if isinstance(expect, str) else expect
    if allowed is not None and kind not in allowed:
        raise ParseError(f"{src}:1: expected {' or '.join(allowed)} file, got kind {kind!r}")
    if kind not in _LOADERS:
        raise ParseError(f"{src}:1: unknown file kind {kind!r}")
    return _LOADERS[kind](text, src)


def dumps(obj) -> str:
    from .circlepattern import CirclePattern
    from .torihedra import BowtieGraph
    if isinstance(obj, LinkDiagram):
        return dumps_diagram(obj)
    if isinstance(obj, AugmentedDiagram):
        return dumps_augmented(obj)
    if isinstance(obj, BowtieGraph):
        return dumps_graph(obj)
    if isinstance(obj, CirclePattern):
        return dumps_pattern(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def save(obj, path) -> None:
    Path(path).write_text(dumps(obj))
