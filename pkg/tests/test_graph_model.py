import pytest
from hypothesis import given
from hypothesis import strategies as st

from gofor.graph_model import (
    Edge,
    Path,
    TopologyError,
    WeightedMultiGraph,
    dump_repetita,
    generate_lattice,
    generate_random,
    generate_sparse,
    induced_subgraph_without_edge,
    king_adjacencies,
    load_topology,
    load_topology_file,
    path_distance,
)

from .conftest import ids, small_graphs

REPETITA_ONE_EDGE = """NODES 2
label x y
a 0 0
b 1 1

EDGES 1
label src dest weight bw delay
e0 0 1 5 100 2
"""


def test_repetita_single_edge():
    g = load_topology(REPETITA_ONE_EDGE)
    assert (g.n, g.m, g.k) == (2, 1, 2)
    assert g.edge(0) == Edge(0, 0, 1, (5, 2))


def test_repetita_dangling_reference():
    text = "NODES 5\nlabel x y\n" + "".join(f"{i} 0 0\n" for i in range(5))
    text += "EDGES 1\nlabel src dest weight bw delay\ne0 0 99 1 1 1\n"
    with pytest.raises(TopologyError, match="unknown node"):
        load_topology(text)


@pytest.mark.parametrize(
    "text, needle",
    [
        ("", "missing NODES"),
        ("NODES x\n", "bad NODES count"),
        ("NODES 1\n0 0 0\nEDGES 1\ne 0 0 1 1\n", "edge line needs"),
        ("NODES 2\n0 0 0\n1 0 0\nEDGES 1\ne 0 1 z 1 1\n", "non-numeric"),
        ("NODES 2\n0 0 0\n1 0 0\nEDGES 2\ne 0 1 1 1 1\n", "truncated edge"),
    ],
)
def test_repetita_malformed(text, needle):
    with pytest.raises(TopologyError, match=needle):
        load_topology(text)


def test_repetita_zero_delay_clamped():
    g = load_topology("NODES 2\n0 0 0\n1 0 0\nEDGES 1\ne 0 1 3 10 0\n")
    assert g.edge(0).w == (3, 1)


def test_native_json_keeps_parallel_edges(tradeoff):
    s, one = ids(tradeoff, "S", "1")
    par = [e for e in tradeoff.out_edges(s) if e.dst == one]
    assert tradeoff.m == 9
    assert sorted(e.w for e in par) == [(1, 1), (1, 2)]
    assert par[0].id != par[1].id


def test_native_json_errors():
    with pytest.raises(TopologyError):
        load_topology("{not json", "native-json")
    with pytest.raises(TopologyError, match="missing"):
        load_topology('{"k": 2}', "native-json")
    with pytest.raises(ValueError, match="unknown topology format"):
        load_topology("", "gml")


def test_constructor_validation():
    with pytest.raises(TopologyError, match="non-positive"):
        WeightedMultiGraph(2, [Edge(0, 0, 1, (0, 1))])
    with pytest.raises(TopologyError, match="duplicate"):
        WeightedMultiGraph(2, [Edge(0, 0, 1, (1, 1)), Edge(0, 1, 0, (1, 1))])
    with pytest.raises(TopologyError, match="weights"):
        WeightedMultiGraph(2, [Edge(0, 0, 1, (1,))])
    with pytest.raises(KeyError):
        WeightedMultiGraph(2, []).edge(3)


def test_out_edges_in_id_order():
    g = WeightedMultiGraph(3, [Edge(5, 0, 2, (1, 1)), Edge(1, 0, 1, (1, 1)), Edge(3, 0, 1, (2, 2))])
    assert [e.id for e in g.out_edges(0)] == [1, 3, 5]
    assert [e.id for e in g.in_edges(1)] == [1, 3]


def test_node_names(tradeoff):
    assert tradeoff.node_id("D") == 5
    assert tradeoff.node_id("6") == 4  # names win over numeric ids
    assert tradeoff.name(4) == "6"
    with pytest.raises((KeyError, ValueError)):
        tradeoff.node_id("nowhere")


def test_path_distance_and_contiguity(tradeoff):
    s, two, three, d = ids(tradeoff, "S", "2", "3", "D")
    e1 = next(e for e in tradeoff.out_edges(s) if e.dst == two)
    e2 = next(e for e in tradeoff.out_edges(two) if e.dst == three)
    e3 = next(e for e in tradeoff.out_edges(three) if e.dst == d)
    p = Path((e1, e2, e3))
    assert p.nodes == (s, two, three, d)
    assert p.distance() == (5, 4)
    assert p.sub(1, 3).distance() == path_distance([e2, e3], 2)
    with pytest.raises(ValueError):
        Path((e1, e3))


def test_remove_edge():
    g = WeightedMultiGraph(2, [Edge(0, 0, 1, (1, 1))])
    h = induced_subgraph_without_edge(g, 0)
    assert (h.n, h.m) == (2, 0)
    g2 = WeightedMultiGraph(2, [Edge(0, 0, 1, (1, 1)), Edge(1, 0, 1, (2, 2))])
    assert [e.id for e in induced_subgraph_without_edge(g2, 0).edges] == [1]


def test_king_adjacency_counts():
    assert len(king_adjacencies(2, 2)) == 6
    assert len(king_adjacencies(5, 5)) == 72


def test_lattice_examples():
    g = generate_lattice(2, 2, 0.0, [1], seed=3)
    assert (g.n, g.m) == (4, 12)
    assert {e.w for e in g.edges} == {(1, 1)}
    assert generate_lattice(2, 2, 1.0, [1], seed=3).m == 24
    a = generate_lattice(5, 5, 0.3, range(1, 6), seed=42)
    assert 144 <= a.m <= 288
    assert a == generate_lattice(5, 5, 0.3, range(1, 6), seed=42)
    with pytest.raises(ValueError):
        generate_lattice(1, 4)


def test_symmetric_lattice_shares_weights():
    g = generate_lattice(4, 4, 0.3, range(1, 6), seed=1, symmetric=True)
    fwd = sorted((e.src, e.dst, e.w) for e in g.edges)
    back = sorted((e.dst, e.src, e.w) for e in g.edges)
    assert fwd == back


def test_sparse_generator_connected_and_symmetric():
    import networkx as nx

    g = generate_sparse(60, 3.5, seed=2)
    assert abs(2 * g.m / g.n / 2 - 3.5) < 0.2
    und = nx.Graph((e.src, e.dst) for e in g.edges)
    assert nx.is_connected(und) and und.number_of_nodes() == 60


def test_random_generator_deterministic():
    assert generate_random(6, 0.5, seed=9) == generate_random(6, 0.5, seed=9)


@given(small_graphs(), st.sampled_from(["json", "repetita"]))
def test_serialization_round_trip(tmp_path_factory, g, fmt):
    path = tmp_path_factory.mktemp("topo") / f"g.{'json' if fmt == 'json' else 'txt'}"
    if fmt == "json":
        import json

        path.write_text(json.dumps(g.to_json()))
    else:
        path.write_text(dump_repetita(g))
    h = load_topology_file(str(path))
    assert [(e.src, e.dst, e.w) for e in h.edges] == [(e.src, e.dst, e.w) for e in g.edges]
    assert h.n == g.n


def test_repetita_keeps_node_labels(tradeoff):
    back = load_topology(dump_repetita(tradeoff))
    assert [back.name(v) for v in range(back.n)] == ["S", "1", "2", "3", "6", "D"]
    assert back.node_id("6") == 4
    assert load_topology(REPETITA_ONE_EDGE).node_id("b") == 1
    numeric = load_topology(dump_repetita(WeightedMultiGraph(2, [Edge(0, 0, 1, (1, 1))])))
    assert numeric.node_names is None or list(numeric.node_names) == ["0", "1"]
