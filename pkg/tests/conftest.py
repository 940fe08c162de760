import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from torivol import fixtures  # noqa: E402
from torivol.circlepattern import PatternSpec, solve_planar_pattern, solve_torus_pattern  # noqa: E402
from torivol.diagram import augment  # noqa: E402
from torivol.torihedra import build_bowtie_graph  # noqa: E402


def solve(d):
    g = build_bowtie_graph(augment(d))
    spec = PatternSpec(g)
    return solve_torus_pattern(spec) if spec.surface == "torus" else solve_planar_pattern(spec)


@pytest.fixture(scope="session")
def borromean():
    return solve(fixtures.figure_eight())


@pytest.fixture(scope="session")
def weave():
    return solve(fixtures.square_weave())


def torus_corpus():
    rng = np.random.default_rng(7)
    return [fixtures.grid_diagram(1, 1), fixtures.square_weave(), fixtures.three_chain_torus(),
            fixtures.triaxial(), fixtures.grid_diagram(2, 4),
            fixtures.random_torus_diagram(rng, 3, 2)]


def planar_corpus():
    rng = np.random.default_rng(11)
    return [fixtures.figure_eight(), fixtures.polyhedron_medial("tetrahedron"),
            fixtures.polyhedron_medial("octahedron"), fixtures.polyhedron_medial("cube"),
            fixtures.random_planar_diagram(rng, 8), fixtures.capped_grid(4, 4)]


@pytest.fixture(scope="session")
def torus_patterns():
    return [solve(d) for d in torus_corpus()]


@pytest.fixture(scope="session")
def planar_patterns():
    return [solve(d) for d in planar_corpus()]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
