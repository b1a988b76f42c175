"""Command line interface.

Subcommands: canon, aut, iso, gen, bench.  Exit codes: 0 success (or
isomorphic), 1 non-isomorphic, 2 usage or domain error, 3 parse error,
4 capacity error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
import time
from pathlib import Path

from .dimacs import ParseError, parse_graph, write_graph
from .families import generate
from .graph import ColoredGraph, Permutation, apply_permutation
from .search import (
    CapacityError,
    SearchStats,
    automorphism_group,
    are_isomorphic,
    brute_force_canonical,
    canonical_certificate,
    canonical_form,
)

EXIT_OK = 0
EXIT_NON_ISOMORPHIC = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAPACITY = 4


def _load(path: str) -> ColoredGraph:
    return parse_graph(Path(path).read_text())


def _report(name: str, g: ColoredGraph, order, orbit_count: int,
            stats: SearchStats, elapsed: float) -> dict:
    return {
        "name": name,
        "n": g.n,
        "m": g.m,
        "aut_order": int(order),
        "orbits": orbit_count,
        "time_s": round(elapsed, 4),
        "mref_calls": stats.multirefine_calls,
        "depth": stats.max_depth,
        "generators": stats.generators_found,
        "group_time_s": round(stats.group_time, 4),
        "residuals": stats.residual_count,
    }


def _print_report(rep: dict, out) -> None:
    print(f"graph {rep['name']}: {rep['n']} vertices, {rep['m']} edges", file=out)
    print(f"automorphism group order: {rep['aut_order']}", file=out)
    print(f"orbits: {rep['orbits']}", file=out)
    print(f"time: {rep['time_s']}s  multirefine calls: {rep['mref_calls']}  "
          f"depth: {rep['depth']}  generators: {rep['generators']}  "
          f"group time: {rep['group_time_s']}s  residuals: {rep['residuals']}",
          file=out)


def _orbit_count(group, n: int) -> int:
    return len(group.orbits(range(1, n + 1)))


def _run_canon(args) -> int:
    g = _load(args.file)
    t0 = time.perf_counter()
    canonical, labeling, group, stats = canonical_form(
        g, prune=not args.no_prune, trace_shortcut=not args.no_trace_shortcut)
    cert = canonical_certificate(
        g, prune=not args.no_prune, trace_shortcut=not args.no_trace_shortcut)
    elapsed = time.perf_counter() - t0
    if args.oracle:
        _oracle_check_canon(g)
    rep = _report(args.file, g, group.order(), _orbit_count(group, g.n),
                  stats, elapsed)
    digest = hashlib.sha256(cert).hexdigest()
    if args.stats_json:
        rep["canonical_hash"] = digest
        print(json.dumps(rep))
    else:
        print("canonical labeling:", " ".join(map(str, labeling.images())))
        print("canonical form hash:", digest)
        _print_report(rep, sys.stdout)
    return EXIT_OK


def _oracle_check_canon(g: ColoredGraph) -> None:
    if g.n > 9:
        raise CapacityError("oracle cross-check is capped at 9 vertices")
    rng = random.Random(0)
    enc_ref, _ = brute_force_canonical(g)
    cert_ref = canonical_certificate(g)
    for _ in range(5):
        images = list(range(1, g.n + 1))
        rng.shuffle(images)
        h = apply_permutation(g, Permutation(images))
        enc, _ = brute_force_canonical(h)
        if enc != enc_ref or canonical_certificate(h) != cert_ref:
            raise AssertionError("oracle cross-check failed")


def _run_aut(args) -> int:
    g = _load(args.file)
    t0 = time.perf_counter()
    group, residuals, stats = automorphism_group(
        g, prune=not args.no_prune, trace_shortcut=not args.no_trace_shortcut)
    elapsed = time.perf_counter() - t0
    if args.oracle:
        if g.n > 9:
            raise CapacityError("oracle cross-check is capped at 9 vertices")
        _, aut = brute_force_canonical(g)
        if aut != group.order():
            raise AssertionError("oracle cross-check failed")
    rep = _report(args.file, g, group.order(), _orbit_count(group, g.n),
                  stats, elapsed)
    if args.stats_json:
        print(json.dumps(rep))
    else:
        print(f"|Aut| = {group.order()}")
        print("generators:")
        for p in group.generators():
            print(f"  {p.cycles()}")
        print(f"orbits: {rep['orbits']}")
        print(f"residual permutations: {stats.residual_count}")
        _print_report(rep, sys.stdout)
    return EXIT_OK


def _run_iso(args) -> int:
    g1 = _load(args.file1)
    g2 = _load(args.file2)
    witness = are_isomorphic(g1, g2)
    if witness is None:
        print("non-isomorphic")
        return EXIT_NON_ISOMORPHIC
    print("isomorphic")
    print("witness:", " ".join(map(str, witness.images())))
    return EXIT_OK


def _run_gen(args) -> int:
    params = args.params
    if args.family == "cfi":
        if not params:
            raise ValueError("cfi needs a base graph file")
        base = _load(params[0])
        g = generate("cfi", base, args.twisted)
    else:
        g = generate(args.family, *params)
    if args.seed is not None:
        rng = random.Random(args.seed)
        images = list(range(1, g.n + 1))
        rng.shuffle(images)
        g = apply_permutation(g, Permutation(images))
    text = write_graph(g)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_bench(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise ValueError(f"{args.dir} is not a directory")
    reports = []
    for path in sorted(directory.iterdir()):
        if not path.is_file():
            continue
        g = parse_graph(path.read_text())
        t0 = time.perf_counter()
        group, _, stats = automorphism_group(
            g, prune=not args.no_prune,
            trace_shortcut=not args.no_trace_shortcut)
        elapsed = time.perf_counter() - t0
        reports.append(_report(path.name, g, group.order(),
                               _orbit_count(group, g.n), stats, elapsed))
    if args.stats_json:
        for rep in reports:
            print(json.dumps(rep))
    else:
        header = ("name", "n", "m", "aut_order", "orbits", "time_s",
                  "mref_calls", "depth", "generators", "group_time_s",
                  "residuals")
        print("\t".join(header))
        for rep in reports:
            print("\t".join(str(rep[k]) for k in header))
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stats-json", action="store_true",
                   help="emit a machine-readable run report")
    p.add_argument("--no-prune", action="store_true",
                   help="disable automorphism pruning (testing)")
    p.add_argument("--no-trace-shortcut", action="store_true",
                   help="disable early trace aborts (testing)")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for randomized corpus generation")
    p.add_argument("--oracle", action="store_true",
                   help="cross-check against brute force (n <= 9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphcanon",
        description="Canonical labeling and automorphism groups of colored graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canon", help="canonical labeling of a graph file")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(fn=_run_canon)

    p = sub.add_parser("aut", help="automorphism group of a graph file")
    p.add_argument("file")
    _add_common(p)
    p.set_defaults(fn=_run_aut)

    p = sub.add_parser("iso", help="isomorphism test between two graph files")
    p.add_argument("file1")
    p.add_argument("file2")
    _add_common(p)
    p.set_defaults(fn=_run_iso)

    p = sub.add_parser("gen", help="generate a benchmark family instance")
    p.add_argument("family",
                   choices=["complete", "cycle", "grid", "torus", "lattice",
                            "paley", "cfi"])
    p.add_argument("params", nargs="*")
    p.add_argument("--twisted", action="store_true",
                   help="apply the one-edge twist (cfi only)")
    p.add_argument("-o", "--output", default=None)
    _add_common(p)
    p.set_defaults(fn=_run_gen)

    p = sub.add_parser("bench", help="run reports for every file in a directory")
    p.add_argument("dir")
    _add_common(p)
    p.set_defaults(fn=_run_bench)

    return parser


def cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as e:
        print(f"capacity error: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, AssertionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli())
