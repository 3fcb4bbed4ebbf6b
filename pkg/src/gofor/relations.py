"""Dominance relations on segment-list distances.

A list distance is the tuple (d0, d1, ..., dk) where d0 counts segments.
A base relation orders the metric part; a wrapped relation combines it with
d0 in one of six ways (two strategies times three diversity options).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .segment_db import ADJ, NODE, NODEADJ, SegmentDb

CONSTRAINED, LEXICOGRAPHIC = "constrained", "lex"
ONE_BEST, ALL_BEST, ALL = "one", "allbest", "all"
PARETO, LEX = "pareto", "lexicographic"


@dataclass(frozen=True)
class BaseRelation:
    """Pareto order over a metric subset, or lexicographic order over a metric list.

    Metric indices are 1-based, matching positions in a list distance.
    """

    kind: str
    metrics: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in (PARETO, LEX):
            raise ValueError(f"unknown base relation kind {self.kind!r}")
        if not self.metrics:
            raise ValueError("base relation needs at least one metric")
        object.__setattr__(self, "metrics", tuple(self.metrics))

    @classmethod
    def pareto(cls, *metrics: int) -> "BaseRelation":
        return cls(PARETO, metrics)

    @classmethod
    def lexicographic(cls, *metrics: int) -> "BaseRelation":
        return cls(LEX, metrics)

    def project(self, x: Sequence[int]) -> tuple:
        return tuple(x[i] for i in self.metrics)

    def le(self, x, y) -> bool:
        if self.kind == PARETO:
            return all(x[i] <= y[i] for i in self.metrics)
        return self.project(x) <= self.project(y)

    def eq(self, x, y) -> bool:
        return all(x[i] == y[i] for i in self.metrics)

    def lt(self, x, y) -> bool:
        return self.le(x, y) and not self.eq(x, y)

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.metrics))})"


@dataclass(frozen=True)
class WrappedRelation:
    base: BaseRelation
    strategy: str = CONSTRAINED
    diversity: str = ALL_BEST
    _fn: object = field(init=False, repr=False, compare=False)
    _relaxed_fn: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.strategy not in (CONSTRAINED, LEXICOGRAPHIC):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.diversity not in (ONE_BEST, ALL_BEST, ALL):
            raise ValueError(f"unknown diversity {self.diversity!r}")
        object.__setattr__(self, "_fn", _compile(self.base, self.strategy, self.diversity))
        object.__setattr__(self, "_relaxed_fn", _compile(self.base, self.strategy, self.diversity, relaxed=True))

    @property
    def strict(self) -> bool:
        """Irreflexive rows: everything except the two oneBest rows."""
        return self.diversity != ONE_BEST

    @property
    def symbol(self) -> str:
        return {
            (CONSTRAINED, ONE_BEST): "≼",
            (CONSTRAINED, ALL_BEST): "≺",
            (CONSTRAINED, ALL): "constrained-all",
            (LEXICOGRAPHIC, ONE_BEST): "⊴",
            (LEXICOGRAPHIC, ALL_BEST): "◁",
            (LEXICOGRAPHIC, ALL): "lex-all",
        }[(self.strategy, self.diversity)]

    def dominates(self, x, y) -> bool:
        return self._fn(x, y)

    def dominates_relaxed(self, x, y) -> bool:
        """x dominates y with one segment removed from y."""
        return self._relaxed_fn(x, y)

    def answer_relation(self) -> "WrappedRelation":
        """Relation used to filter final answers.

        Exploration under the constrained strategy keeps lists that trade
        segments for metric quality; among feasible lists the answer then
        ranks metric quality first, with the segment count as tie-break.
        """
        if self.strategy == LEXICOGRAPHIC:
            return self
        return WrappedRelation(self.base, LEXICOGRAPHIC, self.diversity)

    def key(self, x) -> tuple:
        """Sort key compatible with the relation: x dominates y implies key(x) <= key(y)."""
        if self.base.kind == PARETO:
            return (sum(x[i] for i in self.base.metrics),) + self.base.project(x) + (x[0],)
        return self.base.project(x) + (x[0],)


def _compile(base: BaseRelation, strategy: str, diversity: str, relaxed: bool = False):
    """One relation row as a flat lambda; dominance tests dominate the search time."""
    ms = base.metrics
    if base.kind == PARETO:
        le = " and ".join(f"x[{i}] <= y[{i}]" for i in ms)
    elif len(ms) == 1:
        le = f"x[{ms[0]}] <= y[{ms[0]}]"
    else:
        le = f"({', '.join(f'x[{i}]' for i in ms)},) <= ({', '.join(f'y[{i}]' for i in ms)},)"
    eq = " and ".join(f"x[{i}] == y[{i}]" for i in ms)
    if strategy == CONSTRAINED:
        body = {
            ONE_BEST: f"x[0] <= y[0] and {le}",
            # "d(x) != d(y)" is read on the compared components only
            ALL_BEST: f"x[0] <= y[0] and {le} and not (x[0] == y[0] and {eq})",
            ALL: f"x[0] <= y[0] and {le} and not ({eq})",
        }[diversity]
    else:
        body = {
            ONE_BEST: f"{le} and (x[0] <= y[0] or not ({eq}))",
            ALL_BEST: f"{le} and (x[0] < y[0] or not ({eq}))",
            ALL: f"{le} and not ({eq})",
        }[diversity]
    if relaxed:
        body = body.replace("y[0]", "(y[0] - 1)")
    return eval(f"lambda x, y: {body}")


def dominates(rel: WrappedRelation, x, y) -> bool:
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    return rel.dominates(x, y)


@dataclass(frozen=True)
class Constraints:
    """Strict upper bounds; c[0] bounds the segment count, None = unbounded."""

    bounds: tuple

    @classmethod
    def of(cls, c0=None, *metric_bounds) -> "Constraints":
        return cls((c0,) + tuple(metric_bounds))

    @classmethod
    def for_msd(cls, msd: int | None, k: int, **metric_bounds: int) -> "Constraints":
        """At most ``msd`` segments, i.e. c0 = msd + 1."""
        b = [None if msd is None else msd + 1] + [None] * k
        for name, val in metric_bounds.items():
            b[int(name.lstrip("c"))] = val
        return cls(tuple(b))

    def c(self, i: int):
        return self.bounds[i] if i < len(self.bounds) else None

    @property
    def c0(self):
        return self.bounds[0] if self.bounds else None

    def metric_bounds(self) -> list[tuple[int, int]]:
        return [(i, b) for i, b in enumerate(self.bounds) if i > 0 and b is not None and not math.isinf(b)]

    def feasible(self, d, count_segments: bool = True) -> bool:
        for i, b in enumerate(self.bounds):
            if b is None or (i == 0 and not count_segments):
                continue
            if not d[i] < b:
                return False
        return True


UNBOUNDED = Constraints(())


# ------------------------------------------------------------ extended dominance

def _last_segments(x):
    if hasattr(x, "last"):
        return x.last
    segs = x.segments
    return segs[-1:] if segs else ()


def _distance(x):
    return x.dist if hasattr(x, "dist") else x.distance


def extended_dominates(rel: WrappedRelation, db: SegmentDb, dominator, candidate, safe: bool = True) -> bool:
    """Extended dominance between two lists (or encoder states) ending at one node.

    Case (ii): the dominator beats the candidate even granted one segment less.
    Case (i): the dominator beats the candidate and every last segment T of the
    candidate has a same-type counterpart U in the dominator starting inside T.
    With ``safe`` set, a node segment T must also reach its maxima through the
    start of U, so that U keeps extending whenever T does.
    """
    dx, dy = _distance(dominator), _distance(candidate)
    if len(dx) != len(dy):
        raise ValueError("dimension mismatch")
    dom = rel.dominates
    if dy[0] > 0 and dom(dx, (dy[0] - 1,) + tuple(dy[1:])):
        return True
    if not dom(dx, dy):
        return False
    return last_segments_covered(db, _last_segments(dominator), _last_segments(candidate), safe)


def last_segments_covered(db: SegmentDb, a_set, b_set, safe: bool = True) -> bool:
    if not a_set or not b_set:
        return False
    b = a_set[0].src
    for t in b_set:
        if not _covered(db, a_set, b, t, safe):
            return False
    return True


def _covered(db: SegmentDb, a_set, b: int, t, safe: bool) -> bool:
    if not db.node_in_segment(t, b):
        return False
    extendable = t.kind != ADJ and t.edge is None
    for u in a_set:
        if u.kind != t.kind or u.metric != t.metric:
            continue
        if safe and extendable:
            if t.src == b:
                if u.dist != t.dist:
                    continue
            else:
                mx = db.maxvec[t.metric][t.src][b]
                if mx is None or any(x + y != z for x, y, z in zip(mx, u.dist, t.dist)):
                    continue
        return True
    return False
