"""Baseline: search directly on the fully meshed segment graph.

Every usable segment becomes an edge, so a path in this graph is a segment
list and its hop count is the segment count. A plain multi-criteria
label-setting search then applies, with the hop count as metric 0.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .encoder import DEFAULT_TYPES, LOOSE, STRICT, SegmentList
from .graph_model import Edge, WeightedMultiGraph
from .pareto_engine import FrontLabel, FrontSet, Query, RunStats, filter_front
from .properties import ALWAYS, Properties
from .segment_db import ADJ, Segment, SegmentDb, SegmentType


@dataclass
class SrGraph:
    graph: WeightedMultiGraph
    segments: list[Segment]
    db: SegmentDb = field(repr=False)
    properties: Properties = ALWAYS
    types: tuple[SegmentType, ...] = DEFAULT_TYPES
    mode: str = LOOSE

    def out(self, u: int) -> list[tuple[int, tuple, Segment]]:
        return self._out[u]

    def __post_init__(self):
        self._out = [[] for _ in range(self.graph.n)]
        for e in self.graph.edges:
            self._out[e.src].append((e.dst, e.w, self.segments[e.id]))


def build_sr_graph(
    db: SegmentDb,
    properties: Properties = ALWAYS,
    types=DEFAULT_TYPES,
    mode: str = LOOSE,
) -> SrGraph:
    """One edge per usable segment between distinct nodes, weighted by its distance."""
    g = db.g
    segs: list[Segment] = []
    for u in range(g.n):
        for t in types:
            if t.kind == ADJ:
                cand = [Segment(ADJ, 0, u, e.dst, e.id, e.w) for e in g.out_edges(u) if e.dst != u]
            else:
                cand = []
                for v in range(g.n):
                    if v != u:
                        cand.extend(db.get_segments(t, u, v))
            for s in cand:
                if mode == STRICT and not db.is_single_path(s):
                    continue
                if not properties.trivial and not properties.holds(db, s):
                    continue
                segs.append(s)
    edges = [Edge(i, s.src, s.dst, s.dist) for i, s in enumerate(segs)]
    sr = WeightedMultiGraph(g.n, edges, g.k, g.metric_names, g.node_names)
    return SrGraph(sr, segs, db, properties, tuple(types), mode)


def solve_on_sr_graph(sr: SrGraph, query: Query) -> FrontSet:
    """Label-setting search over segment-graph paths with plain dominance."""
    if set(query.types) != set(sr.types) or query.mode != sr.mode or query.properties != sr.properties:
        raise ValueError("segment graph was built for different segment types, mode or properties")
    g = sr.graph
    query.validate(g)
    t0 = time.perf_counter()
    rel = query.relation
    dom = rel.dominates
    key = rel.key
    cons = query.constraints
    bounds = [(i, b) for i, b in enumerate(cons.bounds) if b is not None and (i > 0 or query.counts_segments)]
    k = g.k
    stores: list[list[list]] = [[] for _ in range(g.n)]  # entries: [dist, segments, alive]
    stats = RunStats()
    heap: list = []
    counter = 0

    def insert(v: int, d: tuple, segs: tuple):
        nonlocal counter
        labels = stores[v]
        for lab in labels:
            if lab[0] == d or dom(lab[0], d):
                if lab[0] == d:
                    stats.merges += 1
                return
        keep = []
        for lab in labels:
            if dom(d, lab[0]):
                lab[2] = False
            else:
                keep.append(lab)
        counter += 1
        lab = [d, segs, True, counter]
        keep.append(lab)
        stores[v] = keep
        heapq.heappush(heap, (key(d), v, counter, lab))
        stats.insertions += 1

    insert(query.source, (0,) * (k + 1), ())
    while heap:
        _, u, _, lab = heapq.heappop(heap)
        if not lab[2]:
            continue
        stats.extractions += 1
        d, segs = lab[0], lab[1]
        for v, w, s in sr.out(u):
            stats.extensions += 1
            nd = (d[0] + 1,) + tuple(a + b for a, b in zip(d[1:], w))
            ok = True
            for i, b in bounds:
                if nd[i] >= b:
                    ok = False
                    break
            if ok:
                insert(v, nd, segs + (s,))

    ans = rel.answer_relation()
    fronts: dict[int, list[FrontLabel]] = {}
    for v, labels in enumerate(stores):
        if not labels:
            continue
        kept = filter_front([lab[0] for lab in labels], ans, order=[lab[3] for lab in labels])
        out = [FrontLabel(v, labels[i][0], [], [SegmentList(labels[i][1], labels[i][0])]) for i in kept]
        out.sort(key=lambda fl: (ans.key(fl.distance), fl.distance))
        fronts[v] = out
    stats.gamma = max((len(v) for v in fronts.values()), default=0)
    stats.r = 1 if fronts else 0
    stats.r_mean = float(stats.r)
    stats.c0 = cons.c0 if (query.counts_segments and cons.c0 is not None) else 1 + max(
        (lab[0][0] for labels in stores for lab in labels), default=0
    )
    stats.wall_ms = (time.perf_counter() - t0) * 1000.0
    return FrontSet(query, fronts, stats, sr.db.g, sr.db, [])
