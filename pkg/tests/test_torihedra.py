import math

import networkx as nx
import pytest

from oracles import quotient_graph
from torivol import fixtures
from torivol.diagram import augment
from torivol.torihedra import (build_bowtie_graph, check_circle_pattern_condition,
                               counting_identity, disk_cuts, dual_graph, validate_bowtie)


def graph_of(d):
    return build_bowtie_graph(augment(d))


@pytest.mark.parametrize("make", [fixtures.square_weave, fixtures.figure_eight,
                                  fixtures.three_chain_torus, fixtures.triaxial])
def test_bowtie_invariants(make):
    g = graph_of(make())
    rep = validate_bowtie(g)
    assert all(ok for ok, _ in rep.values()), {k: v for k, v in rep.items() if not v[0]}


def test_weave_counts():
    g = graph_of(fixtures.square_weave())
    m = g.map
    assert (m.num_vertices, m.num_edges, len(g.shaded_faces())) == (12, 24, 8)
    assert len(g.white_faces()) == 4


def test_borromean_graph_is_octahedral():
    g = graph_of(fixtures.figure_eight())
    G = nx.Graph(quotient_graph(g.map))
    assert nx.is_isomorphic(G, nx.octahedral_graph())


def test_each_bowtie_is_a_pair_of_shaded_triangles():
    g = graph_of(fixtures.square_weave())
    for fa, fb in g.bowties:
        assert g.shaded[fa] and g.shaded[fb]
        assert len(g.map.faces[fa]) == len(g.map.faces[fb]) == 3


@pytest.mark.parametrize("make", [fixtures.square_weave, fixtures.figure_eight])
def test_counting_identity_on_disk_cuts(make):
    g = graph_of(make())
    cuts = list(disk_cuts(g, 8))
    assert cuts
    for cut in cuts:
        n, v, e = counting_identity(g, cut)
        assert n + 2 * e == 4 * v


def test_single_vertex_cut():
    g = graph_of(fixtures.square_weave())
    single = [c for c in disk_cuts(g, 4) if c.v_in == 1]
    assert single and all(c.n == 4 and c.e_in == 0 for c in single)


def test_one_bowtie_cut():
    # the three vertices of a bow-tie triangle: n + 2 E_in = 12
    g = graph_of(fixtures.square_weave())
    tri = [c for c in disk_cuts(g, 6) if c.v_in == 3]
    assert tri and all(c.n + 2 * c.e_in == 12 for c in tri)


@pytest.mark.parametrize("make", [fixtures.square_weave, fixtures.figure_eight, fixtures.triaxial])
def test_right_angles_satisfy_condition(make):
    rep = check_circle_pattern_condition(graph_of(make()), max_cut_len=8)
    assert rep.ok and rep.cuts_checked > 0


def test_matching_angles_violate_condition():
    g = graph_of(fixtures.figure_eight())
    m = g.map
    G = nx.Graph()
    for a, b in m.edges():
        G.add_edge(m.tail(a), m.tail(b), e=a)
    match = nx.max_weight_matching(G, maxcardinality=True)
    assert len(match) == 3
    heavy = {G.edges[u, v]["e"] for u, v in match}
    theta = {a: (math.pi if a in heavy else math.pi / 3) for a, _ in m.edges()}
    rep = check_circle_pattern_condition(g, theta, max_cut_len=8)
    assert not rep.ok
    assert all(c.v_in >= 2 for c in rep.violations)


def test_angle_sums_must_be_two_pi():
    g = graph_of(fixtures.figure_eight())
    with pytest.raises(ValueError, match="2 pi"):
        check_circle_pattern_condition(g, lambda e: 1.0)


def test_dual_of_weave_graph():
    g = graph_of(fixtures.square_weave())
    dg = dual_graph(g.map)
    assert dg.map.num_vertices == g.map.num_faces
    assert dg.map.num_faces == g.map.num_vertices
