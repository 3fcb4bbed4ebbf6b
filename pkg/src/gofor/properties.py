"""Path predicates evaluated on whole segments.

A segment satisfies a predicate only if every path it holds does. All
predicates here are isotonic: a subpath of a valid path is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph_model import Edge
from .segment_db import Segment, SegmentDb


class Properties:
    def holds(self, db: SegmentDb, seg: Segment) -> bool:
        return True

    def holds_on_edges(self, edges) -> bool:
        """Same predicate on an explicit path, used by the reference code."""
        return True

    def validate(self, g) -> None:
        """Raise ValueError when the predicate names edges or nodes missing from g."""

    @property
    def trivial(self) -> bool:
        return True


ALWAYS = Properties()


@dataclass(frozen=True)
class AvoidEdges(Properties):
    edge_ids: frozenset[int] = field(default_factory=frozenset)

    def __init__(self, edge_ids):
        object.__setattr__(self, "edge_ids", frozenset(edge_ids))

    def holds(self, db: SegmentDb, seg: Segment) -> bool:
        if seg.kind == 0:
            return seg.edge not in self.edge_ids
        g = db.g
        for eid in self.edge_ids:
            if db.edge_in_segment(seg, g.edge(eid)):
                return False
        return True

    def holds_on_edges(self, edges: list[Edge]) -> bool:
        return all(e.id not in self.edge_ids for e in edges)

    def validate(self, g) -> None:
        bad = sorted(i for i in self.edge_ids if not 0 <= i < g.m)
        if bad:
            raise ValueError(f"unknown edge ids {bad}")

    @property
    def trivial(self) -> bool:
        return not self.edge_ids


@dataclass(frozen=True)
class AvoidNodes(Properties):
    nodes: frozenset[int] = field(default_factory=frozenset)

    def __init__(self, nodes):
        object.__setattr__(self, "nodes", frozenset(nodes))

    def holds(self, db: SegmentDb, seg: Segment) -> bool:
        return not any(db.node_in_segment(seg, x) for x in self.nodes)

    def holds_on_edges(self, edges: list[Edge]) -> bool:
        for e in edges:
            if e.src in self.nodes or e.dst in self.nodes:
                return False
        return True

    def validate(self, g) -> None:
        bad = sorted(v for v in self.nodes if not 0 <= v < g.n)
        if bad:
            raise ValueError(f"unknown nodes {bad}")

    @property
    def trivial(self) -> bool:
        return not self.nodes


@dataclass(frozen=True)
class AllOf(Properties):
    parts: tuple[Properties, ...] = ()

    def holds(self, db: SegmentDb, seg: Segment) -> bool:
        return all(p.holds(db, seg) for p in self.parts)

    def holds_on_edges(self, edges) -> bool:
        return all(p.holds_on_edges(edges) for p in self.parts)

    def validate(self, g) -> None:
        for p in self.parts:
            p.validate(g)

    @property
    def trivial(self) -> bool:
        return all(p.trivial for p in self.parts)
