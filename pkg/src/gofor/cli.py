"""Command line front end: solve, verify, metadag, gen, bench."""

from __future__ import annotations

import argparse
import csv
import json
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import segment_db
from .encoder import LOOSE, STRICT
from .graph_model import (
    TopologyError,
    WeightedMultiGraph,
    dump_repetita,
    generate_lattice,
    generate_random,
    generate_sparse,
    load_topology_file,
)
from .metadag import build_metadag, enumerate_lists, sample_list, to_dot
from .pareto_engine import FrontSet, solve
from .reference import compare_fronts, reference_fronts
from .relations import ALL, ALL_BEST, CONSTRAINED, LEXICOGRAPHIC, ONE_BEST
from .segment_db import ADJ, NODE, Segment
from .srgraph import build_sr_graph, solve_on_sr_graph
from .usecases import dclc_sr, frr_sr, ld_sr

BENCH_HEADER = ["topology", "n", "m", "engine", "runs", "mean_ms", "stddev_ms", "gamma_obs", "r_obs"]
BENCH_VERSION = "# gofor-bench v1"
ENGINES = ("gofor-cons", "gofor-lex", "samcra-nosr", "srgraph")
ENGINE_ALIASES = {"gofor": ("gofor-cons", "gofor-lex"), "both": ENGINES}
VERIFY_MAX_NODES = 8


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


# ------------------------------------------------------------ helpers

def _load(path: str, fmt: str | None) -> WeightedMultiGraph:
    if not os.path.exists(path):
        raise CliError(f"topology file not found: {path}")
    try:
        return load_topology_file(path, fmt)
    except (TopologyError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read {path}: {exc}")


def _node(g: WeightedMultiGraph, text: str) -> int:
    try:
        return g.node_id(text)
    except (KeyError, ValueError) as exc:
        raise CliError(f"unknown node {text!r}: {exc}")


def _segment_db(g: WeightedMultiGraph, cache: str | None):
    if cache and os.path.exists(cache):
        try:
            return segment_db.SegmentDb.load(g, cache)
        except ValueError:
            pass  # stale cache, rebuild below
    db = segment_db.build(g)
    if cache:
        db.save(cache)
    return db


def render_segment(g: WeightedMultiGraph, s: Segment) -> str:
    if s.kind == ADJ:
        return f"Adj({g.name(s.src)}->{g.name(s.dst)}#{s.edge})"
    tag = "N" if s.kind == NODE else "NA"
    return f"{tag}_{s.metric}({g.name(s.src)}->{g.name(s.dst)})"


def render_list(g: WeightedMultiGraph, lst) -> str:
    toks = ",".join(render_segment(g, s) for s in lst.segments) or "(empty)"
    return f"{toks} {list(lst.distance)}"


def _query(args, g: WeightedMultiGraph):
    src = _node(g, args.source)
    try:
        if args.usecase == "dclc":
            q = dclc_sr(src, args.msd, args.delay_bound, args.strategy, args.diversity, args.mode)
        elif args.usecase == "ld":
            q = ld_sr(src, args.msd, args.strategy, args.diversity, args.mode)
        elif not args.fail_edge:
            raise CliError("--usecase frr needs --fail-edge")
        else:
            q = frr_sr(src, args.msd, args.fail_edge, args.strategy, args.diversity, args.mode)
        q.validate(g)
    except ValueError as exc:
        raise CliError(str(exc))
    return q


def _fronts_json(g: WeightedMultiGraph, fs: FrontSet, dest: int | None) -> dict:
    doc = fs.to_json()
    if dest is not None:
        doc["fronts"] = {k: v for k, v in doc["fronts"].items() if int(k) == dest}
    doc["node_names"] = [g.name(v) for v in range(g.n)]
    return doc


def _add_query_args(p: argparse.ArgumentParser):
    p.add_argument("topology", help="topology file")
    p.add_argument("--format", choices=["repetita", "json"], default=None, help="default: from the file extension")
    p.add_argument("--usecase", choices=["dclc", "ld", "frr"], default="dclc")
    p.add_argument("--source", required=True, help="source node id or name")
    p.add_argument("--dest", help="restrict output to one destination")
    p.add_argument("--msd", type=int, default=None, help="at most this many segments")
    p.add_argument("--delay-bound", type=int, default=None, help="strict delay bound (dclc)")
    p.add_argument("--fail-edge", type=int, action="append", default=[], help="failed edge id (frr), repeatable")
    p.add_argument("--strategy", choices=[CONSTRAINED, LEXICOGRAPHIC], default=CONSTRAINED)
    p.add_argument("--diversity", choices=[ONE_BEST, ALL_BEST, ALL], default=ALL_BEST)
    p.add_argument("--mode", choices=[LOOSE, STRICT], default=LOOSE)
    p.add_argument("--cache", help="segment table cache file")


# ------------------------------------------------------------ commands

def cmd_solve(args) -> int:
    g = _load(args.topology, args.format)
    q = _query(args, g)
    if args.verify:
        _check_verifiable(g, q)
    db = _segment_db(g, args.cache)
    fs = solve(g, db, q)
    dest = _node(g, args.dest) if args.dest is not None else None
    nodes = [dest] if dest is not None else sorted(fs.fronts)
    for v in nodes:
        for lab in fs.fronts.get(v, []):
            for lst in lab.lists:
                print(f"{g.name(v)}\t{render_list(g, lst)}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_fronts_json(g, fs, dest), fh, indent=1)
    st = fs.stats
    print(f"# extractions={st.extractions} gamma={st.gamma} r={st.r} wall_ms={st.wall_ms:.2f}", file=sys.stderr)
    if args.verify:
        return _verify(g, fs)
    return 0


def _check_verifiable(g: WeightedMultiGraph, q) -> None:
    if g.n > VERIFY_MAX_NODES:
        raise CliError(f"--verify is limited to graphs of at most {VERIFY_MAX_NODES} nodes")
    if q.relation.strategy == CONSTRAINED and q.constraints.c0 is None:
        raise CliError("--verify with the constrained strategy needs --msd")


def _verify(g: WeightedMultiGraph, fs: FrontSet) -> int:
    problems = compare_fronts(fs, reference_fronts(g, fs.query))
    for msg in problems:
        print(f"MISMATCH {msg}", file=sys.stderr)
    print("verify: " + ("ok" if not problems else f"{len(problems)} mismatches"), file=sys.stderr)
    return 1 if problems else 0


def cmd_verify(args) -> int:
    g = _load(args.topology, args.format)
    q = _query(args, g)
    _check_verifiable(g, q)
    fs = solve(g, _segment_db(g, args.cache), q)
    return _verify(g, fs)


def cmd_metadag(args) -> int:
    g = _load(args.topology, args.format)
    q = _query(args, g)
    if args.dest is None:
        raise CliError("metadag needs --dest")
    dest = _node(g, args.dest)
    fs = solve(g, _segment_db(g, args.cache), q)
    target = tuple(int(x) for x in args.distance.split(",")) if args.distance else None
    mdag = build_metadag(fs, dest, target)
    if not mdag:
        print("warning: no optimal list reaches the destination", file=sys.stderr)
    dot = to_dot(mdag, g.name)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dot)
    else:
        sys.stdout.write(dot)
    if args.limit is not None:
        for lst in enumerate_lists(mdag, args.limit):
            print(render_list(g, lst), file=sys.stderr)
    if args.sample is not None and mdag:
        print("sample: " + render_list(g, sample_list(mdag, args.sample)), file=sys.stderr)
    return 0


def _weights(text: str) -> range:
    lo, _, hi = text.partition("-")
    return range(int(lo), int(hi or lo) + 1)


def cmd_gen(args) -> int:
    if args.kind == "lattice":
        g = generate_lattice(args.width, args.height, args.doubling, _weights(args.weights), args.seed, args.symmetric)
    elif args.kind == "sparse":
        g = generate_sparse(args.nodes, args.degree, _weights(args.weights), args.seed)
    else:
        g = generate_random(args.nodes, args.edge_prob, _weights(args.weights), args.seed)
    text = json.dumps(g.to_json(), indent=1) if args.format == "json" else dump_repetita(g)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _bench_cell(task):
    """Time every engine on one topology instance; returns per-engine (ms, gamma, r)."""
    label, g, seed, engines, msd, bound_factor = task
    rng = np.random.default_rng(seed)
    src = int(rng.integers(g.n))
    db = segment_db.build(g)
    bound = _delay_bound(db, src, bound_factor)
    out = {}
    for eng in engines:
        if eng == "gofor-cons":
            fs = solve(g, db, dclc_sr(src, msd, bound))
        elif eng == "gofor-lex":
            fs = solve(g, db, dclc_sr(src, msd, bound, LEXICOGRAPHIC))
        elif eng == "samcra-nosr":
            fs = solve(g, db, dclc_sr(src, msd, bound, LEXICOGRAPHIC), encode=False)
        else:
            sr = build_sr_graph(db)
            fs = solve_on_sr_graph(sr, dclc_sr(src, msd, bound))
        out[eng] = (fs.stats.wall_ms, fs.stats.gamma, fs.stats.r)
    return label, g.n, g.m, out


def _delay_bound(db, src: int, factor: float | None) -> int | None:
    """A delay bound scaled on the largest least-delay distance from src."""
    if factor is None:
        return None
    g = db.g
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import dijkstra

    mat = {}
    for e in g.edges:
        key = (e.src, e.dst)
        mat[key] = min(mat.get(key, e.w[1]), e.w[1])
    keys = list(mat)
    m = csr_matrix(([mat[k] for k in keys], ([k[0] for k in keys], [k[1] for k in keys])), shape=(g.n, g.n))
    dist = dijkstra(m, indices=src)
    finite = dist[np.isfinite(dist)]
    return int(max(1, round(float(finite.max()) * factor))) + 1


def bench_tasks(args) -> list:
    tasks = []
    engines = tuple(args.engine)
    for size in args.lattice_sizes:
        for seed in range(args.seeds):
            g = generate_lattice(size, size, 0.3, range(1, 6), seed)
            tasks.append((f"lattice{size}x{size}", g, seed, engines, args.msd, args.delay_factor))
    for path in args.topologies:
        g = _load(path, None)
        for seed in range(args.seeds):
            tasks.append((os.path.basename(path), g, seed, engines, args.msd, args.delay_factor))
    return tasks


def cmd_bench(args) -> int:
    tasks = bench_tasks(args)
    threads = int(os.environ.get("GOFOR_THREADS", "1") or 1)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_bench_cell, tasks))
    else:
        results = [_bench_cell(t) for t in tasks]
    groups: dict[tuple, list] = {}
    for label, n, m, per_engine in results:
        for eng, (ms, gamma, r) in per_engine.items():
            groups.setdefault((label, n, eng), []).append((ms, gamma, r, m))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out.write(BENCH_VERSION + "\n")
        w = csv.writer(out)
        w.writerow(BENCH_HEADER)
        order = {e: i for i, e in enumerate(ENGINES)}
        for (label, n, eng), vals in sorted(groups.items(), key=lambda kv: (kv[0][1], kv[0][0], order[kv[0][2]])):
            ms = [v[0] for v in vals]
            sd = statistics.stdev(ms) if len(ms) > 1 else 0.0
            m = round(statistics.fmean(v[3] for v in vals))
            w.writerow([label, n, m, eng, len(ms), f"{statistics.fmean(ms):.3f}", f"{sd:.3f}",
                        max(v[1] for v in vals), max(v[2] for v in vals)])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gofor", description="Segment-routing aware path computation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="optimal segment lists from one source")
    _add_query_args(p)
    p.add_argument("--out", help="write fronts as JSON")
    p.add_argument("--verify", action="store_true", help=f"cross-check with brute force (<= {VERIFY_MAX_NODES} nodes)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="solve and cross-check with brute force")
    _add_query_args(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("metadag", help="DOT export of all optimal lists to one destination")
    _add_query_args(p)
    p.add_argument("--distance", help="keep lists of this metric distance, e.g. 12,6")
    p.add_argument("--out", help="DOT output file (default stdout)")
    p.add_argument("--limit", type=int, help="also print up to this many lists")
    p.add_argument("--sample", type=int, help="print one list drawn by a seeded random walk")
    p.set_defaults(func=cmd_metadag)

    p = sub.add_parser("gen", help="generate a topology")
    p.add_argument("kind", choices=["lattice", "sparse", "random"])
    p.add_argument("--width", type=int, default=10)
    p.add_argument("--height", type=int, default=10)
    p.add_argument("--doubling", type=float, default=0.3)
    p.add_argument("--nodes", type=int, default=100)
    p.add_argument("--degree", type=float, default=3.5)
    p.add_argument("--edge-prob", type=float, default=0.3, help="random: link probability per ordered pair")
    p.add_argument("--weights", default="1-5", help="inclusive integer range, e.g. 1-5")
    p.add_argument("--symmetric", action="store_true", help="same weights in both directions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["repetita", "json"], default="repetita")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="timing matrix as CSV")
    p.add_argument("--lattice-sizes", type=lambda s: [int(x) for x in s.split(",") if x], default=[5, 10])
    p.add_argument("--topologies", nargs="*", default=[], help="extra topology files")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--engine", action="append", choices=ENGINES + tuple(ENGINE_ALIASES),
                   help="repeatable; 'gofor' = both gofor engines, 'both' = all; default all")
    p.add_argument("--msd", type=int, default=4)
    p.add_argument("--delay-factor", type=float, default=1.5,
                   help="delay bound = factor x largest least-delay distance from the source")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "bench":
        picked = set()
        for e in args.engine or ["both"]:
            picked.update(ENGINE_ALIASES.get(e, (e,)))
        args.engine = [e for e in ENGINES if e in picked]
    try:
        return args.func(args)
    except CliError as exc:
        print(f"gofor: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
