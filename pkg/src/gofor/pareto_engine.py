"""Label-setting multi-criteria search that returns optimal segment lists.

Each explored path is carried as an encoder state, so its minimal segment
count is known at every node. Labels group the states that share a node and
a list distance. A new state is stored unless an already stored state
dominates it in the extended sense; stored states that the new one dominates
are dropped. Answers are filtered with plain dominance at the end.
"""

from __future__ import annotations

import heapq
import json
import os
from operator import add
import time
from dataclasses import dataclass, field
from typing import Iterable

from .encoder import DEFAULT_TYPES, LOOSE, Encoder, EncoderState, SegmentList
from .graph_model import WeightedMultiGraph
from .properties import ALWAYS, Properties
from .relations import (
    ALL,
    CONSTRAINED,
    LEX,
    UNBOUNDED,
    Constraints,
    WrappedRelation,
    last_segments_covered,
)
from .segment_db import SegmentDb, SegmentType

EXTENDED, PLAIN, NONE = "extended", "plain", "none"


@dataclass(frozen=True)
class Query:
    source: int
    relation: WrappedRelation
    constraints: Constraints = UNBOUNDED
    properties: Properties = ALWAYS
    mode: str = LOOSE
    types: tuple[SegmentType, ...] = DEFAULT_TYPES

    @property
    def counts_segments(self) -> bool:
        """The lexicographic strategy does not enforce the segment budget."""
        return self.relation.strategy == CONSTRAINED

    def validate(self, g: WeightedMultiGraph) -> None:
        if not 0 <= self.source < g.n:
            raise ValueError(f"source {self.source} not in graph")
        self.properties.validate(g)
        base = self.relation.base
        for i in base.metrics:
            if not 1 <= i <= g.k:
                raise ValueError(f"relation metric {i} outside 1..{g.k}")
        # pruning is only safe when every bounded metric is covered by the order
        allowed = set(base.metrics) if base.kind != LEX else {base.metrics[0]}
        for i, _ in self.constraints.metric_bounds():
            if i > g.k:
                raise ValueError(f"constraint on metric {i} outside 1..{g.k}")
            if i not in allowed:
                raise ValueError(f"metric {i} is bounded but not ordered first by {base}")


@dataclass
class RunStats:
    extractions: int = 0
    insertions: int = 0
    extensions: int = 0
    merges: int = 0
    gamma: int = 0
    gamma_layer: int = 0
    r: int = 0
    r_mean: float = 0.0
    c0: int = 1
    wall_ms: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class ComplexityError(RuntimeError):
    pass


def check_complexity(g: WeightedMultiGraph, stats: RunStats) -> None:
    """Raise when a run explored more than the label-setting bounds allow.

    With Γ the largest set of distances extracted at one node for one
    segment count, at most n·Γ·c0 labels are extracted and at most
    m·Γ·c0·r edges are followed.
    """
    per_node = max(stats.gamma_layer, 1) * stats.c0
    if stats.extractions > g.n * per_node:
        raise ComplexityError(f"{stats.extractions} extractions exceed n*gamma*c0 = {g.n * per_node}")
    cap = g.m * per_node * max(stats.r, 1)
    if stats.extensions > cap:
        raise ComplexityError(f"{stats.extensions} extensions exceed m*gamma*c0*r = {cap}")


class Label:
    __slots__ = ("node", "dist", "states", "pending", "alive", "order")

    def __init__(self, node: int, dist: tuple, order: int):
        self.node = node
        self.dist = dist
        self.states: dict[tuple, EncoderState] = {}
        self.pending: list[EncoderState] = []
        self.alive = True
        self.order = order

    def __repr__(self) -> str:
        return f"Label({self.node}, {self.dist}, r={len(self.states)})"


class FrontLabel:
    """One optimal distance at a node; its lists are built on first access."""

    __slots__ = ("node", "distance", "states", "_lists", "_finalize")

    def __init__(self, node: int, distance: tuple, states: list[EncoderState], lists=None, finalize=None):
        self.node = node
        self.distance = distance
        self.states = states
        self._lists = lists
        self._finalize = finalize

    @property
    def lists(self) -> list[SegmentList]:
        if self._lists is None:
            self._lists = [self._finalize(s) for s in self.states]
        return self._lists

    def __repr__(self) -> str:
        return f"FrontLabel(node={self.node}, distance={self.distance}, lists={len(self.states) or len(self.lists)})"


@dataclass
class FrontSet:
    query: Query
    fronts: dict[int, list[FrontLabel]]
    stats: RunStats
    g: WeightedMultiGraph = field(repr=False)
    db: SegmentDb | None = field(repr=False)
    archive: list[set] = field(repr=False, default_factory=list)

    def distances(self, node: int) -> list[tuple]:
        return [lab.distance for lab in self.fronts.get(node, [])]

    def to_json(self) -> dict:
        out = {}
        for v, labels in sorted(self.fronts.items()):
            out[str(v)] = [
                {"distance": list(lab.distance), "lists": [lst.tokens for lst in lab.lists]} for lab in labels
            ]
        return {"source": self.query.source, "fronts": out, "stats": self.stats.as_dict()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


class PathOnly:
    """Stand-in encoder for the plain multi-criteria search (no segments)."""

    def __init__(self, k: int):
        self.k = k

    def origin(self, source: int) -> EncoderState:
        return EncoderState(source, (0,) * (self.k + 1), None, source, 0, None, 0)

    def step(self, st: EncoderState, e) -> EncoderState:
        return EncoderState(e.dst, (0, *map(add, st.dist[1:], e.w)), None, e.dst, 0, None, 0)

    def finalize(self, st: EncoderState) -> SegmentList:
        return SegmentList((), st.dist)


def solve(
    g: WeightedMultiGraph,
    db: SegmentDb | None,
    query: Query,
    pruning: str = EXTENDED,
    safe: bool = True,
    encode: bool = True,
) -> FrontSet:
    """Optimal segment lists from the query source to every node.

    ``pruning`` selects the storage test: extended dominance (default),
    plain dominance of distances, or none. ``safe`` adds the segment-maxima
    condition to the last-segment case of extended dominance. With
    ``encode`` off the search runs on bare paths (no segment count).
    """
    query.validate(g)
    t0 = time.perf_counter()
    rel = query.relation
    dom = rel._fn
    rdom = rel._relaxed_fn
    key = rel.key
    cons = query.constraints
    count_segments = query.counts_segments and encode
    bounds = [(i, b) for i, b in enumerate(cons.bounds) if b is not None and (i > 0 or count_segments)]
    if encode:
        enc = Encoder(db, query.properties, query.types, query.mode)
    else:
        enc = PathOnly(g.k)
        pruning = PLAIN
    track_simple = pruning == NONE and not count_segments
    # equal distances may be pruned on last segments unless every segment count matters
    same_dist_pruning = rel.diversity != ALL

    n = g.n
    stores: list[list[Label]] = [[] for _ in range(n)]
    archive: list[set] = [set() for _ in range(n)]
    stats = RunStats()
    heap: list = []
    counter = 0
    extracted_layers: list[dict] = [dict() for _ in range(n)]

    def push(lab: Label):
        nonlocal counter
        counter += 1
        heapq.heappush(heap, (key(lab.dist), lab.node, counter, lab))

    def remove_state(lab: Label, sig: tuple):
        del lab.states[sig]
        if not lab.states:
            lab.alive = False
            stores[lab.node].remove(lab)

    def insert(st: EncoderState):
        nonlocal counter
        v = st.head
        d = st.dist
        labels = stores[v]
        sig = st.sid
        if sig is None:
            sig = st.signature()
        if track_simple:
            sig = (sig, st.trail)
        same = None
        if pruning == EXTENDED:
            for lab in labels:
                ld = lab.dist
                if ld == d:
                    same = lab
                    if sig in lab.states:
                        stats.merges += 1
                        return
                    if not same_dist_pruning:
                        continue
                elif not dom(ld, d):
                    continue
                # relaxed dominance implies plain dominance, so test it second
                elif d[0] and rdom(ld, d):
                    return
                for x in lab.states.values():
                    if last_segments_covered(db, x.last, st.last, safe):
                        stats.merges += 1
                        return
        elif pruning == PLAIN:
            for lab in labels:
                if lab.dist == d:
                    same = lab
                    if not rel.strict:
                        if sig in lab.states:
                            stats.merges += 1
                        return
                elif dom(lab.dist, d):
                    return
        else:
            for lab in labels:
                if lab.dist == d:
                    same = lab
                    break
        if same is not None and sig in same.states:
            stats.merges += 1
            return

        # drop what the newcomer dominates
        if pruning == EXTENDED:
            for lab in list(labels):
                if lab is same:
                    continue
                ld = lab.dist
                if not dom(d, ld):
                    continue
                if ld[0] and rdom(d, ld):
                    for s in list(lab.states):
                        remove_state(lab, s)
                    continue
                for s, x in list(lab.states.items()):
                    if last_segments_covered(db, st.last, x.last, safe):
                        remove_state(lab, s)
            if same is not None and same_dist_pruning:
                # same distance: only the last-segment case can apply
                for s, x in list(same.states.items()):
                    if last_segments_covered(db, st.last, x.last, safe):
                        remove_state(same, s)
                if not same.alive:
                    same = None
        elif pruning == PLAIN:
            for lab in list(labels):
                if lab is not same and dom(d, lab.dist):
                    for s in list(lab.states):
                        remove_state(lab, s)

        if same is None:
            counter += 1
            same = Label(v, d, counter)
            labels.append(same)
        same.states[sig] = st
        if not same.pending:
            push(same)
        same.pending.append(st)
        archive[v].add(d)
        stats.insertions += 1

    origin = enc.origin(query.source)
    step = enc.step
    if track_simple:
        origin.trail = frozenset([query.source])
    insert(origin)
    r_sum = 0

    while heap:
        _, _, _, lab = heapq.heappop(heap)
        if not lab.alive or not lab.pending:
            continue
        pending, lab.pending = lab.pending, []
        live = [st for st in pending if any(x is st for x in lab.states.values())]
        if not live:
            continue
        stats.extractions += 1
        layer = extracted_layers[lab.node]
        layer.setdefault(lab.dist[0], set()).add(lab.dist[1:])
        r_sum += len(lab.states)
        if len(lab.states) > stats.r:
            stats.r = len(lab.states)
        for st in live:
            trail = st.trail
            for e in g.out_edges(lab.node):
                stats.extensions += 1
                if trail is not None and e.dst in trail:
                    continue
                ns = step(st, e)
                if ns is None:
                    continue
                nd = ns.dist
                ok = True
                for i, b in bounds:
                    if nd[i] >= b:
                        ok = False
                        break
                if not ok:
                    continue
                if trail is not None:
                    ns.trail = trail | {e.dst}
                insert(ns)

    fronts = _answers(stores, rel, enc, encode)
    stats.gamma = max((len(v) for v in fronts.values()), default=0)
    stats.r_mean = r_sum / stats.extractions if stats.extractions else 0.0
    stats.gamma_layer = max((len(s) for layer in extracted_layers for s in layer.values()), default=0)
    if count_segments and cons.c0 is not None:
        stats.c0 = cons.c0
    else:
        stats.c0 = 1 + max((max(layer) for layer in extracted_layers if layer), default=0)
    stats.wall_ms = (time.perf_counter() - t0) * 1000.0
    if os.environ.get("GOFOR_CHECK_BOUNDS"):
        check_complexity(g, stats)
    return FrontSet(query, fronts, stats, g, db if encode else None, archive)


def _answers(stores, rel: WrappedRelation, enc, encode: bool) -> dict[int, list[FrontLabel]]:
    ans = rel.answer_relation() if encode else rel
    fronts: dict[int, list[FrontLabel]] = {}
    for v, labels in enumerate(stores):
        if not labels:
            continue
        kept = filter_front([lab.dist for lab in labels], ans, order=[lab.order for lab in labels])
        out = []
        for idx in kept:
            lab = labels[idx]
            states = list(lab.states.values())
            out.append(FrontLabel(v, lab.dist, states, None, enc.finalize))
        out.sort(key=lambda fl: (ans.key(fl.distance), fl.distance))
        fronts[v] = out
    return fronts


def filter_front(dists: list[tuple], rel: WrappedRelation, order: list | None = None) -> list[int]:
    """Indices of the non-dominated distances.

    Under a reflexive relation two equivalent distances dominate each other;
    the one that comes first in ``order`` is kept.
    """
    if order is None:
        order = list(range(len(dists)))
    dom = rel.dominates
    kept = []
    for j, y in enumerate(dists):
        beaten = False
        for i, x in enumerate(dists):
            if i == j or not dom(x, y):
                continue
            if dom(y, x) and (order[j], j) < (order[i], i):
                continue
            beaten = True
            break
        if not beaten:
            kept.append(j)
    return kept


def run_stats(fronts: FrontSet) -> RunStats:
    return fronts.stats
