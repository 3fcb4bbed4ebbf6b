"""Condensed DAG of every optimal segment list toward one destination.

A meta-node is a graph node paired with the list distance at which some
optimal list reaches it. A meta-edge is one segment. The DAG is built
backwards from the destination labels: a segment S ending at u@d yields a
meta-edge w@d' -> u@d when d' = d - (1, d(S)) is a distance the search
actually stored at w. Stored distances are a superset of the prefixes of
optimal lists, so nothing is missed, and every root-to-sink walk is a list
of allowed segments with an optimal distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoder import SegmentList
from .pareto_engine import FrontSet
from .segment_db import ADJ, NODE, Segment

MetaNode = tuple  # (graph node, list distance)


@dataclass
class MetaDag:
    root: MetaNode | None
    sinks: list[MetaNode]
    edges: dict[MetaNode, list[tuple[Segment, MetaNode]]] = field(default_factory=dict)
    k: int = 2

    @property
    def nodes(self) -> set[MetaNode]:
        out = set(self.edges)
        for succ in self.edges.values():
            out.update(m for _, m in succ)
        if self.root is not None:
            out.add(self.root)
        return out

    def edge_list(self) -> list[tuple[MetaNode, Segment, MetaNode]]:
        return [(a, s, b) for a in sorted(self.edges) for s, b in self.edges[a]]

    def __bool__(self) -> bool:
        return self.root is not None

    def distances_at(self, node: int) -> list[tuple]:
        """Distances of the meta-nodes standing for one graph node."""
        return sorted(d for v, d in self.nodes if v == node)


def _segments_into(fronts: FrontSet, u: int) -> list[Segment]:
    """Every allowed segment ending at u, in a fixed order."""
    db, g, q = fronts.db, fronts.g, fronts.query
    strict = q.mode == "strict"
    props = q.properties
    out = []
    for t in q.types:
        if t.kind == ADJ:
            cand = [Segment(ADJ, 0, e.src, u, e.id, e.w) for e in g.in_edges(u) if e.src != u]
        else:
            cand = []
            for w in range(g.n):
                if w != u:
                    cand.extend(db.get_segments(t, w, u))
        for s in cand:
            if strict and not db.is_single_path(s):
                continue
            if not props.trivial and not props.holds(db, s):
                continue
            out.append(s)
    return out


def build_metadag(fronts: FrontSet, destination: int, distance: tuple | None = None) -> MetaDag:
    """Meta-DAG of the optimal lists reaching ``destination``.

    ``distance`` restricts the sinks to labels whose metric part (or full
    list distance) equals it; by default every front label is a sink.
    """
    if fronts.db is None:
        raise ValueError("fronts were computed without segment encoding")
    k = fronts.g.k
    labels = fronts.fronts.get(destination, [])
    sinks = []
    for lab in labels:
        d = lab.distance
        if distance is not None and tuple(distance) not in (d, d[1:]):
            continue
        sinks.append((destination, d))
    source = fronts.query.source
    origin = (source, (0,) * (k + 1))
    if not sinks or (len(sinks) == 1 and sinks[0] == origin):
        return MetaDag(None if not sinks else origin, [] if not sinks else sinks, {}, k)

    archive = fronts.archive
    into: dict[int, list[Segment]] = {}
    preds: dict[MetaNode, list[tuple[Segment, MetaNode]]] = {}
    reaches: dict[MetaNode, bool] = {origin: True}

    def visit(m: MetaNode) -> bool:
        if m in reaches:
            return reaches[m]
        reaches[m] = False  # d0 strictly decreases backwards, so no cycle can revisit
        u, d = m
        if d[0] == 0:
            return False
        if u not in into:
            into[u] = _segments_into(fronts, u)
        found = []
        for s in into[u]:
            dp = (d[0] - 1,) + tuple(a - b for a, b in zip(d[1:], s.dist))
            if min(dp) < 0 or dp not in archive[s.src]:
                continue
            pm = (s.src, dp)
            if visit(pm):
                found.append((s, pm))
        preds[m] = found
        reaches[m] = bool(found)
        return reaches[m]

    sinks = [m for m in sinks if visit(m)]
    edges: dict[MetaNode, list[tuple[Segment, MetaNode]]] = {}
    seen = set()
    stack = list(sinks)
    while stack:
        m = stack.pop()
        if m in seen:
            continue
        seen.add(m)
        for s, pm in preds.get(m, ()):
            edges.setdefault(pm, []).append((s, m))
            stack.append(pm)
    for succ in edges.values():
        succ.sort(key=lambda x: (x[1][1], x[1][0], x[0].key))
    return MetaDag(origin if sinks else None, sorted(sinks, key=lambda m: m[1]), edges, k)


def enumerate_lists(mdag: MetaDag, limit: int | None = None) -> list[SegmentList]:
    """Root-to-sink walks in depth-first order, at most ``limit`` of them."""
    if not mdag or (limit is not None and limit <= 0):
        return []
    sinks = set(mdag.sinks)
    out: list[SegmentList] = []
    trail: list[Segment] = []

    def dfs(m: MetaNode) -> bool:
        if m in sinks:
            out.append(SegmentList.of(trail, mdag.k))
            if limit is not None and len(out) >= limit:
                return True
        for s, nm in mdag.edges.get(m, ()):
            trail.append(s)
            stop = dfs(nm)
            trail.pop()
            if stop:
                return True
        return False

    dfs(mdag.root)
    return out


def count_lists(mdag: MetaDag) -> int:
    if not mdag:
        return 0
    sinks = set(mdag.sinks)
    memo: dict[MetaNode, int] = {}

    def count(m: MetaNode) -> int:
        if m not in memo:
            memo[m] = (m in sinks) + sum(count(nm) for _, nm in mdag.edges.get(m, ()))
        return memo[m]

    return count(mdag.root)


def sample_list(mdag: MetaDag, seed: int | None = None, rng: np.random.Generator | None = None) -> SegmentList:
    """Random walk from the root, uniform over outgoing meta-edges.

    At a sink that also has successors, stopping counts as one more option.
    """
    if not mdag:
        raise ValueError("empty meta-DAG")
    rng = rng if rng is not None else np.random.default_rng(seed)
    sinks = set(mdag.sinks)
    m = mdag.root
    trail: list[Segment] = []
    while True:
        succ = mdag.edges.get(m, [])
        options = len(succ) + (m in sinks)
        pick = int(rng.integers(options))
        if pick == len(succ):
            return SegmentList.of(trail, mdag.k)
        s, m = succ[pick]
        trail.append(s)


def to_dot(mdag: MetaDag, names=None) -> str:
    """Graphviz text; meta-nodes are labelled "u@(d0,d1,..,dk)"."""
    name = (lambda v: str(v)) if names is None else names

    def label(m: MetaNode) -> str:
        return f"{name(m[0])}@({','.join(map(str, m[1]))})"

    lines = ["digraph metadag {", "  rankdir=LR;"]
    if mdag:
        ids = {m: f"m{i}" for i, m in enumerate(sorted(mdag.nodes, key=lambda m: (m[1], m[0])))}
        sinks = set(mdag.sinks)
        for m, mid in ids.items():
            shape = "doublecircle" if m in sinks else ("box" if m == mdag.root else "ellipse")
            lines.append(f'  {mid} [label="{label(m)}", shape={shape}];')
        for a, s, b in mdag.edge_list():
            lines.append(f'  {ids[a]} -> {ids[b]} [label="{_token(s, name)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _token(s: Segment, name) -> str:
    if s.kind == ADJ:
        return f"Adj({name(s.src)}->{name(s.dst)}#{s.edge})"
    tag = "N" if s.kind == NODE else "NA"
    return f"{tag}_{s.metric}({name(s.src)}->{name(s.dst)})"
