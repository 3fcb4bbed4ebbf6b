"""Incremental encoding of a path into a minimal segment list.

The encoder follows the path edge by edge. It keeps the committed prefix and
the set of candidate last segments (all starting at the same node) that,
appended to the prefix, encode the path read so far with the exact path
distance. When no candidate survives an edge, one of them is committed and
the candidate set restarts from that edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from operator import add
from typing import Iterable, Sequence

from .graph_model import Edge, Path
from .properties import ALWAYS, Properties
from .segment_db import ADJ, ADJ_TYPE, NODE, NODEADJ, Segment, SegmentDb, SegmentType, commit_priority, node_type

ListDistance = tuple  # (d0, d1, ..., dk)

LOOSE, STRICT = "loose", "strict"


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class SegmentList:
    segments: tuple[Segment, ...]
    distance: ListDistance

    @classmethod
    def of(cls, segments: Sequence[Segment], k: int) -> "SegmentList":
        d = [len(segments)] + [0] * k
        for s in segments:
            for j in range(k):
                d[j + 1] += s.dist[j]
        for a, b in zip(segments, segments[1:]):
            if a.dst != b.src:
                raise ValueError(f"segments {a.token()} and {b.token()} do not chain")
        return cls(tuple(segments), tuple(d))

    @property
    def tokens(self) -> list[str]:
        return [s.token() for s in self.segments]

    def render(self) -> str:
        return ",".join(self.tokens) + " " + str(list(self.distance))

    def __len__(self) -> int:
        return len(self.segments)


class EncoderState:
    """Committed prefix, candidate last segments and the distance so far.

    The candidates all start at ``src`` and end at ``head``. They are kept in
    compact form: ``mask`` flags the node-segment types that still hold the
    path since ``src``, and ``adj`` is the edge id of an adjacency candidate
    (only right after the candidates restarted on that edge). ``last``
    materializes them as segments, in commit-priority order. The committed
    prefix is a chain ``(earlier, src, head, mask, adj)`` of the same form,
    materialized by ``committed``.
    """

    __slots__ = ("head", "dist", "chain", "src", "mask", "adj", "sid", "trail", "_enc", "_last", "_committed")

    def __init__(self, head: int, dist: ListDistance, chain, src: int, mask: int, adj, sid: int, enc=None):
        self.head = head
        self.dist = dist
        self.chain = chain
        self.src = src
        self.mask = mask
        self.adj = adj
        self.sid = sid  # signature id, 0 when nothing can be extended
        self.trail = None  # visited nodes, only tracked by exhaustive searches
        self._enc = enc
        self._last = None
        self._committed = None

    @property
    def last(self) -> tuple[Segment, ...]:
        if self._last is None:
            self._last = self._enc._segments(self.src, self.head, self.mask, self.adj) if self._enc else ()
        return self._last

    @property
    def committed(self) -> tuple[Segment, ...]:
        if self._committed is None:
            out = []
            link = self.chain
            while link is not None:
                link, a, v, mask, adj = link
                out.append(self._enc._segments(a, v, mask, adj)[0])
            self._committed = tuple(reversed(out))
        return self._committed

    @property
    def last_src(self) -> int:
        return self.src

    def signature(self) -> tuple:
        """What the future of this state depends on besides its distance.

        Only node segments can absorb further edges; adjacency segments are
        dropped by the next extension whatever it is. States that agree on
        their extendable last segments therefore reach the same distances.
        """
        return _signature(self.last)

    def __repr__(self) -> str:
        toks = [s.token() for s in self.committed]
        alts = "|".join(s.token() for s in self.last)
        return f"EncoderState(head={self.head}, dist={self.dist}, list={toks}+[{alts}])"


def _signature(last) -> tuple:
    return tuple(s.key for s in last if s.kind != ADJ and s.edge is None)


DEFAULT_TYPES = (ADJ_TYPE, node_type(1))


class Encoder:
    def __init__(
        self,
        db: SegmentDb,
        properties: Properties = ALWAYS,
        types: Iterable[SegmentType] = DEFAULT_TYPES,
        mode: str = LOOSE,
    ):
        if mode not in (LOOSE, STRICT):
            raise ValueError(f"unknown encoding mode {mode!r}")
        self.db = db
        self.properties = properties
        self.check_props = not properties.trivial
        self.types = tuple(sorted(set(types), key=lambda t: commit_priority(Segment(t.kind, t.metric, 0, 0, None, ()))))
        for t in self.types:
            if t.kind != ADJ:
                db._check_metric(t.metric)
        self.strict = mode == STRICT
        self.k = db.k
        self.use_adj = ADJ_TYPE in self.types
        # node-segment types as (bit, kind, metric); bits follow commit priority
        self._node_types = [(1 << j, t.kind, t.metric) for j, t in enumerate(self.types) if t.kind != ADJ]
        self._shift = len(self.types)
        # one loose node type without properties: extension is a single bit test
        self._single = None
        if len(self._node_types) == 1 and not self.strict and not self.check_props:
            self._single = db.cont[self._node_types[0][2]]
        self._fresh: list[tuple | None] = [None] * db.g.m
        if self._single is not None:
            self.step = self._single_step()

    def origin(self, source: int) -> EncoderState:
        return EncoderState(source, (0,) * (self.k + 1), None, source, 0, None, 0, self)

    def first_segments(self, e: Edge) -> tuple[Segment, ...]:
        """Every segment of an allowed type holding e with distance exactly w(e)."""
        mask, adj = self._fresh_entry(e)
        return self._segments(e.src, e.dst, mask, adj)

    def _fresh_entry(self, e: Edge) -> tuple[int, int | None]:
        got = self._fresh[e.id]
        if got is None:
            u, v = e.src, e.dst
            mask = self._node_mask(u, (1 << self._shift) - 1, e) if u != v else 0
            adj = e.id
            if not self.use_adj or (self.check_props and not self.properties.holds(self.db, Segment(ADJ, 0, u, v, e.id, e.w))):
                adj = None
            got = self._fresh[e.id] = (mask, adj)
        return got

    def _node_mask(self, a: int, mask: int, e: Edge) -> int:
        """Node-segment types of ``mask`` from a whose segment still holds once e is appended."""
        db = self.db
        v = e.dst
        out = 0
        for bit, kind, i in self._node_types:
            if not mask & bit or not db.cont[i][e.id] >> a & 1:
                continue
            if self.strict and db.count[i][a][v] != 1:
                continue
            if self.check_props and not self.properties.holds(db, Segment(kind, i, a, v, None, db.maxvec[i][a][v])):
                continue
            out |= bit
        return out

    def _segments(self, a: int, v: int, mask: int, adj) -> tuple[Segment, ...]:
        db = self.db
        out = [Segment(kind, i, a, v, None, db.maxvec[i][a][v]) for bit, kind, i in self._node_types if mask & bit]
        if adj is not None:
            out.append(Segment(ADJ, 0, a, v, adj, db.g.edge(adj).w))
        return tuple(out)

    def start(self, e: Edge) -> EncoderState | None:
        return self.extend(self.origin(e.src), e)

    def extend(self, state: EncoderState, e: Edge) -> EncoderState | None:
        """Follow one more edge; None if the properties reject the edge itself."""
        if e.src != state.head:
            raise ValueError(f"edge {e.id} starts at {e.src}, state head is {state.head}")
        return self.step(state, e)

    def step(self, state: EncoderState, e: Edge) -> EncoderState | None:
        """``extend`` without the check that e leaves the state's head."""
        d = state.dist
        mask = state.mask
        if mask:
            a = state.src
            single = self._single
            if single is not None:
                if single[e.id] >> a & 1:
                    return EncoderState(e.dst, (d[0], *map(add, d[1:], e.w)), state.chain, a, mask, None, state.sid, self)
            else:
                mask = self._node_mask(a, mask, e)
                if mask:
                    return EncoderState(e.dst, (d[0], *map(add, d[1:], e.w)), state.chain, a, mask, None,
                                        a << self._shift | mask, self)
            chain = (state.chain, state.src, state.head, state.mask, state.adj)
        elif state.adj is not None:
            chain = (state.chain, state.src, state.head, state.mask, state.adj)
        else:
            chain = state.chain
        fresh = self._fresh[e.id] or self._fresh_entry(e)
        mask, adj = fresh
        if not mask and adj is None:
            return None
        u = e.src
        return EncoderState(e.dst, (d[0] + 1, *map(add, d[1:], e.w)), chain, u, mask, adj,
                            u << self._shift | mask if mask else 0, self)

    def _single_step(self):
        """``step`` specialized to one loose node type, with lookups bound once."""
        single, fresh_of, fresh_entry, shift = self._single, self._fresh, self._fresh_entry, self._shift
        enc = self

        def step(state: EncoderState, e: Edge) -> EncoderState | None:
            d = state.dist
            if state.mask:
                a = state.src
                if single[e.id] >> a & 1:
                    return EncoderState(e.dst, (d[0], *map(add, d[1:], e.w)), state.chain, a, state.mask, None,
                                        state.sid, enc)
                chain = (state.chain, a, state.head, state.mask, state.adj)
            elif state.adj is not None:
                chain = (state.chain, state.src, state.head, 0, state.adj)
            else:
                chain = state.chain
            mask, adj = fresh_of[e.id] or fresh_entry(e)
            if not mask and adj is None:
                return None
            u = e.src
            return EncoderState(e.dst, (d[0] + 1, *map(add, d[1:], e.w)), chain, u, mask, adj,
                                u << shift | mask if mask else 0, enc)

        return step

    def finalize(self, state: EncoderState, choice: int = 0) -> SegmentList:
        last = state.last
        if not last:
            return SegmentList((), state.dist)
        return SegmentList(state.committed + (last[choice],), state.dist)

    def encode_path(self, path: Path | Sequence[Edge]) -> SegmentList:
        edges = path.edges if isinstance(path, Path) else tuple(path)
        if not edges:
            raise EncodingError("cannot encode an empty path")
        state = self.origin(edges[0].src)
        for e in edges:
            state = self.extend(state, e)
            if state is None:
                raise EncodingError(f"edge {e.id} violates the path properties")
        return self.finalize(state)


def encode_path(
    db: SegmentDb,
    properties: Properties,
    p: Path | Sequence[Edge],
    mode: str = LOOSE,
    types: Iterable[SegmentType] = DEFAULT_TYPES,
) -> SegmentList:
    return Encoder(db, properties, types, mode).encode_path(p)
