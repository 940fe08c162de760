import cmath
import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracles import cyclic_cone_volume
from torivol import fixtures
from torivol.circlepattern import apply_similarity, residuals
from torivol.diagram import LinkDiagram, augment, find_twist_regions, is_twist_reduced, is_weakly_prime
from torivol.hypvol import (V_TET, cone_volume_over_face, ideal_tet_volume, lobachevsky,
                            torihedron_volume)
from torivol.torihedra import build_bowtie_graph, counting_identity, disk_cuts, validate_bowtie

angle = st.floats(-20, 20, allow_nan=False)
fixture_settings = settings(max_examples=25, deadline=None,
                            suppress_health_check=[HealthCheck.function_scoped_fixture])


@given(angle)
def test_lobachevsky_odd_and_periodic(t):
    assert abs(lobachevsky(-t) + lobachevsky(t)) < 1e-14
    assert abs(lobachevsky(t + math.pi) - lobachevsky(t)) < 1e-13


@given(st.floats(0.01, math.pi / 2 - 0.01))
def test_lobachevsky_duplication(t):
    # λ(2t) = 2λ(t) + 2λ(t + π/2)
    assert abs(lobachevsky(2 * t) - 2 * lobachevsky(t) - 2 * lobachevsky(t + math.pi / 2)) < 1e-13


@given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_tet_volume_symmetric_and_bounded(a, b):
    c = math.pi - a - b
    if c <= 0.01:
        return
    v = ideal_tet_volume(a, b, c)
    assert abs(v - ideal_tet_volume(b, c, a)) < 1e-13
    assert abs(v - ideal_tet_volume(c, b, a)) < 1e-13
    assert 0 < v <= V_TET + 1e-13


@st.composite
def cyclic_polygons(draw):
    k = draw(st.integers(3, 9))
    gaps = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k)))
    ang = np.cumsum(gaps / gaps.sum() * 2 * math.pi)
    r = draw(st.floats(0.1, 10))
    c = complex(draw(st.floats(-5, 5)), draw(st.floats(-5, 5)))
    return [c + r * cmath.exp(1j * t) for t in ang], c


@given(cyclic_polygons(), st.integers(0, 8))
def test_cone_volume_independent_of_fan(poly, base):
    pts, c = poly
    v = cone_volume_over_face(pts, base % len(pts))
    assert abs(v - cone_volume_over_face(pts, 0)) < 1e-11
    assert abs(v - cyclic_cone_volume(pts, c)) < 1e-11


@fixture_settings
@given(st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_similarity_invariance(weave, a, b):
    q = apply_similarity(weave, a, b)
    assert residuals(q).max <= 1e-9
    assert abs(torihedron_volume(q).volume - torihedron_volume(weave).volume) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.randoms(use_true_random=False))
def test_relabel_invariance(rnd):
    d = fixtures.three_chain_torus()
    n = d.map.num_darts
    perm = list(range(n))
    rnd.shuffle(perm)
    m = d.map.relabel(perm)
    over = {m.vertex_of[perm[x]]: perm[x] for x in d.over.values()}
    lattice = None if d.lattice is None else tuple([perm[x] for x in loop] for loop in d.lattice)
    e = LinkDiagram(m, over, lattice=lattice)
    assert m.num_faces == d.map.num_faces
    assert sorted(len(r.crossings) for r in find_twist_regions(e)) == \
        sorted(len(r.crossings) for r in find_twist_regions(d))
    assert is_weakly_prime(e)[0] and is_twist_reduced(e)[0]
    assert augment(e).c == augment(d).c


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 3))
def test_random_torus_bowtie_invariants(seed, p, q):
    d = fixtures.random_torus_diagram(np.random.default_rng(seed), p, q)
    a = augment(d)
    g = build_bowtie_graph(a)
    assert all(ok for ok, _ in validate_bowtie(g).values())
    assert g.map.num_vertices == 3 * a.c
    assert g.map.euler_characteristic() == 0
    for cut in disk_cuts(g, 6):
        n, v, e = counting_identity(g, cut)
        assert n + 2 * e == 4 * v
