import cmath
import math

import numpy as np
import pytest

from oracles import circle_through
from torivol import fixtures
from torivol.circlepattern import (PatternError, PatternSpec, SolverConfig, apply_similarity,
                                   edge_midpoint_check, residuals, similarity_normalize,
                                   solve_planar_pattern, solve_torus_pattern)
from torivol.diagram import augment
from torivol.torihedra import build_bowtie_graph


def spec_of(d, **kw):
    return PatternSpec(build_bowtie_graph(augment(d)), **kw)


def test_weave_residual_and_gauge(weave):
    assert weave.residual <= 1e-10
    assert weave.omega[0] == 1
    assert weave.points[0] == 0


def test_weave_radii_constant_on_face_orbits(weave):
    g = weave.graph
    for faces in (g.shaded_faces(), g.white_faces()):
        r = weave.radii[faces]
        assert np.ptp(r) < 1e-12 * r.max()


def test_weave_lattice_is_hexagonal(weave):
    tau = weave.omega[1] / weave.omega[0]
    assert abs(abs(tau) - 1) < 1e-10
    assert abs(abs(cmath.phase(tau)) - math.pi / 3) < 1e-10


def test_circles_pass_through_face_points(weave):
    m = weave.graph.map
    for f in range(m.num_faces):
        _, r = circle_through(*weave.face_points(f)[:3])
        assert abs(r - weave.radii[f]) < 1e-10


def test_planar_circles_through_face_points(planar_patterns):
    for p in planar_patterns:
        for f in range(len(p.radii)):
            if p.is_line(f):
                continue
            c, r = circle_through(*p.face_points(f)[:3])
            assert abs(c - p.centers[f]) < 1e-9 * max(1.0, r)
            assert abs(r - p.radii[f]) < 1e-9 * max(1.0, r)


def test_borromean_pattern_shape(borromean):
    assert borromean.residual <= 1e-10
    assert len(borromean.lines) == 4
    circles = [f for f in range(len(borromean.radii)) if not borromean.is_line(f)]
    assert np.allclose(borromean.radii[circles], 0.5, atol=1e-12)
    normals = [n for _, n in borromean.lines.values()]
    assert all(abs(abs(n) - 1) < 1e-12 for n in normals)


def test_midpoints_at_height_one(borromean):
    rep = edge_midpoint_check(borromean)
    assert not rep.skipped and rep.heights
    assert rep.ok(1e-9)


def test_two_seeds_agree_after_normalization():
    spec = spec_of(fixtures.triaxial())
    a = solve_torus_pattern(spec, SolverConfig(seed=1))
    b = solve_torus_pattern(spec, SolverConfig(seed=2, seed_scale=2.0))
    assert np.max(np.abs(a.points - b.points)) < 1e-8
    assert np.max(np.abs(a.radii - b.radii)) < 1e-8
    assert abs(a.omega[1] - b.omega[1]) < 1e-8


def test_planar_seeds_agree():
    spec = spec_of(fixtures.polyhedron_medial("cube"))
    a = solve_planar_pattern(spec, SolverConfig(seed=3))
    b = solve_planar_pattern(spec, SolverConfig(seed=4))
    assert np.nanmax(np.abs(a.points - b.points)) < 1e-8


def test_normalize_undoes_scaling(weave):
    p = apply_similarity(weave, 2.0 * cmath.exp(0.3j), 1 - 2j)
    q = similarity_normalize(p)
    assert np.max(np.abs(q.points - weave.points)) < 1e-12
    assert np.max(np.abs(q.radii - weave.radii)) < 1e-12


def test_rotation_keeps_residuals(borromean):
    p = apply_similarity(borromean, cmath.exp(1.1j), 0.5)
    a, b = residuals(p), residuals(borromean)
    assert abs(a.max - b.max) < 1e-12


def test_nonconvergence_reports_residual():
    spec = spec_of(fixtures.triaxial())
    with pytest.raises(PatternError) as err:
        solve_torus_pattern(spec, SolverConfig(max_iterations=1, fallback=False, seed=5, seed_scale=3))
    assert err.value.residual is not None and err.value.residual > 0


def test_invalid_angles_rejected():
    with pytest.raises(ValueError):
        spec_of(fixtures.square_weave(), theta=math.pi).edge_angles()


def test_surface_mismatch_rejected():
    with pytest.raises(ValueError):
        spec_of(fixtures.square_weave(), surface="plane")


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("TORIVOL_TOL", "1e-6")
    assert SolverConfig().residual_tol == 1e-6
    assert SolverConfig(residual_tol=1e-3).residual_tol == 1e-3


def test_infinite_vertex_choice_does_not_change_volume():
    from torivol.hypvol import polyhedron_volume
    g = build_bowtie_graph(augment(fixtures.polyhedron_medial("octahedron")))
    vols = {round(polyhedron_volume(solve_planar_pattern(PatternSpec(g, infinite_vertex=v))).volume, 8)
            for v in (min(g.edge_vertex.values()), max(g.edge_vertex.values()), 0)}
    assert len(vols) == 1
