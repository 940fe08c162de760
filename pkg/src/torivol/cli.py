"""Command-line front end: ``torivol <command> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from importlib import resources
from pathlib import Path

from . import io
from .circlepattern import (PatternError, PatternSpec, SolverConfig, edge_midpoint_check, residuals,
                            solve_planar_pattern, solve_torus_pattern)
from .diagram import (AugmentedDiagram, DiagramError, LinkDiagram, augment, find_twist_regions,
                      is_twist_reduced, is_weakly_prime)
from .hypvol import (V_OCT, V_TET, lobachevsky, lobachevsky_quad, polyhedron_volume,
                     torihedron_volume, volume_bounds_check)
from .torihedra import BowtieGraph, build_bowtie_graph, validate_bowtie

BUILTIN = "builtin:"


class Failure(Exception):
    """An invariant failed; exit status 1."""


def builtin_names() -> list[str]:
    root = resources.files("torivol") / "data"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".txt"))


def read_input(spec: str, expect=None):
    """Load a file, or a bundled fixture named ``builtin:<name>``."""
    if spec.startswith(BUILTIN):
        name = spec[len(BUILTIN):]
        res = resources.files("torivol") / "data" / f"{name}.txt"
        if not res.is_file():
            raise io.ParseError(f"no bundled fixture {name!r}; have {', '.join(builtin_names())}")
        with resources.as_file(res) as path:
            return io.load(path, expect)
    return io.load(spec, expect)


def _config(args) -> SolverConfig:
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw["residual_tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    return SolverConfig(**kw)


def to_augmented(obj) -> AugmentedDiagram:
    if isinstance(obj, LinkDiagram):
        return augment(obj)
    if isinstance(obj, AugmentedDiagram):
        return obj
    raise DiagramError(f"expected a diagram or augmented link, got {type(obj).__name__}")


def to_graph(obj) -> BowtieGraph:
    return obj if isinstance(obj, BowtieGraph) else build_bowtie_graph(to_augmented(obj))


def to_pattern(obj, cfg: SolverConfig, infty=None):
    if hasattr(obj, "radii"):
        return obj
    g = to_graph(obj)
    spec = PatternSpec(g, infinite_vertex=infty)
    return solve_torus_pattern(spec, cfg) if spec.surface == "torus" else solve_planar_pattern(spec, cfg)


def volume_record(p) -> dict:
    if p.surface == "torus":
        rep = torihedron_volume(p)
        b = volume_bounds_check(rep)
        rec = rep.as_dict()
        rec.update(bounds_ok=b.ok, attains_lower=b.at_lower, attains_upper=b.at_upper)
    else:
        rep = polyhedron_volume(p)
        rec = rep.as_dict()
        rec["in_spectrum"] = V_OCT - 1e-9 <= rep.density < 10 * V_TET
    rec["residual"] = p.residual
    return rec


def parse_range(text: str) -> list[int]:
    """``2..6`` or ``2,3,5`` or ``4``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            out = list(range(int(lo), int(hi) + 1))
        else:
            out = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use e.g. 2..6") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("n must be at least 1")
    return out


def _write(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_check(args) -> int:
    d = read_input(args.file, "diagram")
    regions = find_twist_regions(d)
    wp, w1 = is_weakly_prime(d)
    tr, w2 = is_twist_reduced(d)
    print(f"diagram {d.name or args.file}: surface {d.surface}, {d.num_crossings} crossings, "
          f"{len(regions)} twist regions")
    print(f"weakly prime: {'yes' if wp else 'no'}" + ("" if wp else f"  witness {w1}"))
    print(f"twist-reduced: {'yes' if tr else 'no'}" + ("" if tr else f"  witness {w2}"))
    if not (wp and tr):
        raise Failure("diagram does not satisfy the hypotheses")
    return 0


def cmd_augment(args) -> int:
    a = augment(read_input(args.file, "diagram"))
    _write(io.dumps_augmented(a), args.output)
    print(f"{a.c} crossing circles, half-twists {sum(a.half_twist)}", file=sys.stderr)
    return 0


def cmd_bowtie(args) -> int:
    g = to_graph(read_input(args.file, ("diagram", "augmented")))
    checks = validate_bowtie(g)
    _write(io.dumps_graph(g), args.output)
    bad = [k for k, (ok, _) in checks.items() if not ok]
    for k, (ok, detail) in checks.items():
        print(f"{'ok ' if ok else 'FAIL'} {k}: {detail}", file=sys.stderr)
    if bad:
        raise Failure(f"bow-tie graph checks failed: {', '.join(bad)}")
    return 0


def cmd_solve(args) -> int:
    g = to_graph(read_input(args.file, ("diagram", "augmented", "bowtie")))
    surface = "plane" if args.plane else None
    spec = PatternSpec(g, surface=surface, infinite_vertex=args.infty)
    cfg = _config(args)
    p = solve_torus_pattern(spec, cfg) if spec.surface == "torus" else solve_planar_pattern(spec, cfg)
    _write(io.dumps_pattern(p), args.output)
    rep = residuals(p).as_dict()
    print("residuals " + " ".join(f"{k}={v:.3e}" for k, v in rep.items()), file=sys.stderr)
    return 0


def cmd_volume(args) -> int:
    p = to_pattern(read_input(args.file), _config(args))
    rec = volume_record(p)
    if args.json:
        print(json.dumps(rec, indent=2, default=float))
    else:
        print(f"{rec['name'] or args.file}: {rec['surface']}, c = a = {rec['a']}")
        print(f"  volume  {rec['volume']:.12f}")
        print(f"  density {rec['density']:.12f}  (v_oct {V_OCT:.6f}, 10 v_tet {10 * V_TET:.6f})")
        if rec["surface"] == "torus":
            print(f"  bounds  [{rec['lower']:.6f}, {rec['upper']:.6f}] "
                  f"{'ok' if rec['bounds_ok'] else 'VIOLATED'}")
        print(f"  tetrahedra {rec['tet_count']} ({rec['decomposition']})")
    if not rec.get("bounds_ok", rec.get("in_spectrum", True)):
        raise Failure("volume outside the proven range")
    return 0


def cmd_density(args) -> int:
    d = Path(args.batch)
    files = sorted(d.glob("*.txt"))
    if not files:
        raise Failure(f"no .txt files in {d}")
    cfg = _config(args)
    rows = []
    for f in files:
        rec = volume_record(to_pattern(io.load(f), cfg))
        rows.append([rec["name"] or f.stem, rec["c"], rec["a"], rec["volume"], rec["density"]])
    fh = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(["name", "c", "a", "volume", "density"])
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_folner(args) -> int:
    from .folner import convergence_experiment
    a = to_augmented(read_input(args.link, ("diagram", "augmented")))
    run = convergence_experiment(a, args.n, closure=args.closure, cap=args.cap, cfg=_config(args))
    fh = sys.stdout if args.output in (None, "-") else open(args.output, "w", newline="")
    try:
        run.write_csv(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.json:
        Path(args.json).write_text(run.to_json())
    for k, ok in run.verdicts().items():
        print(f"{'ok ' if ok else 'FAIL'} {k}", file=sys.stderr)
    if not run.verdicts()["all stages succeeded"]:
        raise Failure("some closures could not be processed")
    return 0


def selftest_results() -> list[tuple[str, bool, str]]:
    out = []
    vt, vo = 3 * lobachevsky(math.pi / 3), 8 * lobachevsky(math.pi / 4)
    out.append(("constants", abs(vt - 1.01494) < 5e-6 and abs(vo - 3.66386) < 5e-6
                and abs(lobachevsky(0.7) - lobachevsky_quad(0.7)) < 1e-10,
                f"v_tet={vt:.10f} v_oct={vo:.10f}"))
    cfg = SolverConfig()
    p = to_pattern(read_input(BUILTIN + "borromean"), cfg)
    rec = volume_record(p)
    out.append(("borromean", abs(rec["volume"] - 2 * V_OCT) < 1e-6 and abs(rec["density"] - V_OCT) < 1e-6,
                f"volume={rec['volume']:.10f}"))
    mid = edge_midpoint_check(p)
    out.append(("midpoints", mid.ok(1e-9), f"max error {mid.max_error:.2e}"))
    p = to_pattern(read_input(BUILTIN + "square_weave"), cfg)
    rec = volume_record(p)
    out.append(("square weave", abs(rec["volume"] - 40 * V_TET) < 1e-6 and rec["attains_upper"],
                f"volume={rec['volume']:.10f}"))
    return out


def cmd_selftest(args) -> int:
    res = selftest_results()
    for name, ok, detail in res:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if not all(ok for _, ok, _ in res):
        raise Failure("self-test failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torivol", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    src_help = f"input file, or {BUILTIN}<name> for a bundled fixture"

    def solver_opts(p):
        p.add_argument("--tol", type=float, help="residual tolerance (default 1e-10 or $TORIVOL_TOL)")
        p.add_argument("--seed", type=int, help="random initial log radii")

    p = sub.add_parser("check", help="weakly prime and twist-reduced checks for a diagram")
    p.add_argument("file", help=src_help)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("augment", help="fully augment a diagram")
    p.add_argument("file", help=src_help)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("bowtie", help="bow-tie graph of an augmented link")
    p.add_argument("file", help=src_help)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_bowtie)

    p = sub.add_parser("solve", help="right-angled circle pattern of a bow-tie graph")
    p.add_argument("file", help=src_help)
    p.add_argument("--plane", action="store_true", help="planar pattern (sphere graphs only)")
    p.add_argument("--infty", type=int, help="graph vertex sent to infinity")
    p.add_argument("-o", "--output")
    solver_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("volume", help="volume and density report")
    p.add_argument("file", help=src_help)
    p.add_argument("--json", action="store_true", help="print a JSON record")
    solver_opts(p)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("density", help="density table for a directory of inputs")
    p.add_argument("--batch", required=True, help="directory of .txt inputs")
    p.add_argument("-o", "--output")
    solver_opts(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("folner", help="convergence experiment for planar closures")
    p.add_argument("--link", default=BUILTIN + "square_weave", help=src_help)
    p.add_argument("--n", type=parse_range, default=parse_range("2..6"), help="e.g. 2..6")
    p.add_argument("--closure", default="ring-caps", choices=["ring-caps", "nested-arcs"])
    p.add_argument("--cap", type=int, default=4, help="largest agreement generation searched")
    p.add_argument("-o", "--output", help="CSV output")
    p.add_argument("--json", help="JSON run record")
    solver_opts(p)
    p.set_defaults(func=cmd_folner)

    p = sub.add_parser("selftest", help="quick regression on bundled fixtures")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Failure as exc:
        print(f"torivol: {exc}", file=sys.stderr)
        return 1
    except (io.ParseError, DiagramError, PatternError, ValueError, OSError) as exc:
        print(f"torivol: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
