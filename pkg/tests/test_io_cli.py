import argparse
import csv
import io as stdio
import json

import pytest

from torivol import fixtures, io
from torivol.circlepattern import PatternSpec, solve_torus_pattern
from torivol.cli import main, parse_range, read_input, selftest_results
from torivol.diagram import augment
from torivol.torihedra import build_bowtie_graph


def _roundtrip(obj, loader):
    text = io.dumps(obj)
    assert io.dumps(loader(text)) == text
    return text


@pytest.mark.parametrize("make", [fixtures.square_weave, fixtures.figure_eight,
                                  fixtures.three_chain_torus, fixtures.triaxial])
def test_diagram_roundtrip(make):
    d = make()
    text = _roundtrip(d, io.loads_diagram)
    back = io.loads_diagram(text)
    assert back.num_crossings == d.num_crossings and back.surface == d.surface


def test_augmented_graph_pattern_roundtrip(weave):
    a = augment(fixtures.square_weave())
    assert io.loads_augmented(_roundtrip(a, io.loads_augmented)).c == a.c
    g = build_bowtie_graph(a)
    _roundtrip(g, io.loads_graph)
    text = _roundtrip(weave, io.loads_pattern)
    p = io.loads_pattern(text)
    assert max(abs(x - y) for x, y in zip(p.radii, weave.radii)) == 0


def test_file_kind_detection(weave):
    assert io.file_kind(io.dumps(weave)) == "pattern"
    assert io.file_kind(io.dumps(fixtures.square_weave())) == "diagram"


@pytest.mark.parametrize("text,line", [
    ("surface torus\ndarts 4\nvertex 0 1 2 x\n", 3),
    ("surface torus\ndarts 4\nvertex 0 1 2 3\nedge 0\n", 4),
    ("surface klein\n", 1),
    ("surface sphere\ndarts 2\nvertex 0\nvertex 1\n# fine\nbogus 1 2\nedge 0 1\n", 6),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(io.ParseError, match=rf"bad\.txt:{line}:"):
        io.loads_diagram(text, "bad.txt")


def test_load_checks_expected_kind(tmp_path, weave):
    f = tmp_path / "p.txt"
    io.save(weave, f)
    with pytest.raises(io.ParseError):
        io.load(f, expect="diagram")


def test_parse_range():
    assert parse_range("2..6") == [2, 3, 4, 5, 6]
    assert parse_range("3") == [3]
    with pytest.raises(argparse.ArgumentTypeError):
        parse_range("6..2")


def test_builtin_inputs():
    assert read_input("builtin:square_weave").num_crossings == 4


def test_cli_pipeline(tmp_path, capsys):
    src = tmp_path / "d.txt"
    io.save(fixtures.square_weave(), src)
    assert main(["check", str(src)]) == 0
    assert "weakly prime: yes" in capsys.readouterr().out
    for cmd, out in [("augment", "a.txt"), ("bowtie", "g.txt")]:
        assert main([cmd, str(src), "-o", str(tmp_path / out)]) == 0
    assert main(["solve", str(tmp_path / "g.txt"), "-o", str(tmp_path / "p.txt")]) == 0
    assert main(["volume", str(tmp_path / "p.txt"), "--json"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["attains_upper"] and rec["a"] == 4


def test_cli_planar_solve(tmp_path, capsys):
    assert main(["solve", "builtin:borromean", "--plane", "-o", str(tmp_path / "p.txt")]) == 0
    assert main(["volume", str(tmp_path / "p.txt")]) == 0
    assert "plane" in capsys.readouterr().out


def test_cli_density_batch(tmp_path, capsys):
    io.save(fixtures.square_weave(), tmp_path / "a.txt")
    io.save(fixtures.three_chain_torus(), tmp_path / "b.txt")
    assert main(["density", "--batch", str(tmp_path)]) == 0
    rows = list(csv.reader(stdio.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["name", "c", "a", "volume", "density"] and len(rows) == 3


def test_cli_folner_csv(tmp_path, capsys):
    js = tmp_path / "run.json"
    assert main(["folner", "--n", "1..2", "--json", str(js)]) == 0
    rows = list(csv.reader(stdio.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["n", "|G_n|", "|∂G_n|", "a(K_n)", "vol", "density", "gap", "sum_k_f",
                       "ratio2", "ratio4"]
    assert [r[1] for r in rows[1:]] == ["12", "48"]
    assert len(json.loads(js.read_text())["rows"]) == 2


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("surface torus\ndarts 2\nvertex 0 zz\n")
    assert main(["check", str(bad)]) == 2
    assert "bad.txt:3" in capsys.readouterr().err
    src = tmp_path / "d.txt"
    io.save(fixtures.connected_sum(fixtures.figure_eight(), fixtures.figure_eight()), src)
    assert main(["check", str(src)]) == 1
    assert main(["density", "--batch", str(tmp_path / "none")]) == 1


def test_selftest(capsys):
    assert all(ok for _, ok, _ in selftest_results())
    assert main(["selftest"]) == 0
    assert capsys.readouterr().out.count("PASS") == 4
