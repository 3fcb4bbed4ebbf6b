"""Query presets: delay-constrained least cost, least delay, fast reroute."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from .encoder import DEFAULT_TYPES, LOOSE
from .pareto_engine import Query
from .properties import ALWAYS, AvoidEdges
from .relations import ALL_BEST, CONSTRAINED, BaseRelation, Constraints, WrappedRelation

IGP, DELAY = 1, 2


def _c0(msd: int | None):
    if msd is not None and msd < 1:
        raise ValueError("msd must be positive")
    return None if msd is None else msd + 1


def dclc_sr(
    source: int,
    msd: int | None,
    delay_bound: int | None,
    strategy: str = CONSTRAINED,
    diversity: str = ALL_BEST,
    mode: str = LOOSE,
) -> Query:
    """Least IGP cost under a strict delay bound; IGP cost and delay both ordered."""
    rel = WrappedRelation(BaseRelation.pareto(IGP, DELAY), strategy, diversity)
    return Query(source, rel, Constraints((_c0(msd), None, delay_bound)), ALWAYS, mode, DEFAULT_TYPES)


def ld_sr(
    source: int,
    msd: int | None,
    strategy: str = CONSTRAINED,
    diversity: str = ALL_BEST,
    mode: str = LOOSE,
) -> Query:
    """Least delay; IGP cost is carried but not compared. Node segments follow the IGP."""
    rel = WrappedRelation(BaseRelation.lexicographic(DELAY), strategy, diversity)
    return Query(source, rel, Constraints((_c0(msd), None, None)), ALWAYS, mode, DEFAULT_TYPES)


def frr_sr(
    source: int,
    msd: int | None,
    failed_edges: int | Iterable[int],
    strategy: str = CONSTRAINED,
    diversity: str = ALL_BEST,
    mode: str = LOOSE,
) -> Query:
    """Least IGP cost avoiding failed edges.

    Segments are those of the intact network; any segment with a path over a
    failed edge is rejected rather than recomputed.
    """
    if isinstance(failed_edges, int):
        failed_edges = [failed_edges]
    rel = WrappedRelation(BaseRelation.lexicographic(IGP), strategy, diversity)
    return Query(source, rel, Constraints((_c0(msd), None)), AvoidEdges(failed_edges), mode, DEFAULT_TYPES)


def with_source(q: Query, source: int) -> Query:
    return replace(q, source=source)


PRESETS = {"dclc": dclc_sr, "ld": ld_sr, "frr": frr_sr}
