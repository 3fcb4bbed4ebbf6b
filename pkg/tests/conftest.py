from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gofor import build_segment_db, example_graph
from gofor.graph_model import Edge, WeightedMultiGraph

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# every engine run in the suite checks the exploration bounds
os.environ["GOFOR_CHECK_BOUNDS"] = "1"


@pytest.fixture(scope="session")
def tradeoff():
    """Six-node network where fewer segments cost extra delay (S, 1, 2, 3, 6, D)."""
    return example_graph("msd_tradeoff")


@pytest.fixture(scope="session")
def tradeoff_db(tradeoff):
    return build_segment_db(tradeoff)


@pytest.fixture(scope="session")
def metadag_net():
    """Nine-node network whose (12,6) optimum is realized by several lists."""
    return example_graph("dclc_metadag")


@pytest.fixture(scope="session")
def metadag_db(metadag_net):
    return build_segment_db(metadag_net)


def ids(g, *names):
    return [g.node_id(x) for x in names]


@st.composite
def small_graphs(draw, min_nodes=2, max_nodes=6, max_weight=5, k=2):
    """Directed multigraphs with positive integer weights; parallel edges allowed."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=min(len(pairs) + 3, 3 * n)))
    weights = st.tuples(*[st.integers(1, max_weight)] * k)
    edges = [Edge(i, u, v, draw(weights)) for i, (u, v) in enumerate(chosen)]
    return WeightedMultiGraph(n, edges, k)


_VERDICTS: dict[str, list[tuple[bool, str]]] = {}


@pytest.fixture
def verdict():
    """Record one checked part of an acceptance criterion."""

    def record(name: str, ok: bool, detail: str) -> None:
        _VERDICTS.setdefault(name, []).append((bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance")
    for name, parts in _VERDICTS.items():
        ok = all(p[0] for p in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: " + "; ".join(p[1] for p in parts))
