"""Directed multigraph with k additive integer metrics.

Also holds the file readers (REPETITA text, native JSON) and the
King's-graph lattice generator used for benchmarks.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

PathDistance = tuple  # k non-negative ints, metric i lives at index i-1


class TopologyError(ValueError):
    """Raised for malformed topology input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    src: int
    dst: int
    w: tuple[int, ...]


class WeightedMultiGraph:
    """Immutable directed multigraph; edge ids are unique, weights are positive ints."""

    def __init__(
        self,
        n: int,
        edges: Iterable[Edge | tuple],
        k: int = 2,
        metric_names: Sequence[str] | None = None,
        node_names: Sequence[str] | None = None,
    ):
        if n < 0:
            raise TopologyError("negative node count")
        if k < 1:
            raise TopologyError("at least one metric is required")
        self.n = n
        self.k = k
        if metric_names is None:
            metric_names = ["igp", "delay"][:k] + [f"m{i}" for i in range(3, k + 1)]
        if len(metric_names) != k:
            raise TopologyError(f"expected {k} metric names, got {len(metric_names)}")
        self.metric_names = list(metric_names)
        if node_names is not None and len(node_names) != n:
            raise TopologyError(f"expected {n} node names, got {len(node_names)}")
        self.node_names = None if node_names is None else [str(x) for x in node_names]

        built: list[Edge] = []
        for idx, e in enumerate(edges):
            if not isinstance(e, Edge):
                src, dst, w = e[0], e[1], e[2]
                eid = e[3] if len(e) > 3 else idx
                e = Edge(int(eid), int(src), int(dst), tuple(int(x) for x in w))
            if not (0 <= e.src < n and 0 <= e.dst < n):
                raise TopologyError(f"edge {e.id} references a node outside 0..{n - 1}")
            if len(e.w) != k:
                raise TopologyError(f"edge {e.id} has {len(e.w)} weights, expected {k}")
            if min(e.w) < 1:
                raise TopologyError(f"edge {e.id} has a non-positive weight {e.w}")
            built.append(e)
        ids = [e.id for e in built]
        if len(set(ids)) != len(ids):
            raise TopologyError("duplicate edge ids")
        built.sort(key=lambda e: e.id)
        self.edges: tuple[Edge, ...] = tuple(built)
        self._by_id = {e.id: e for e in built}
        out: list[list[Edge]] = [[] for _ in range(n)]
        inc: list[list[Edge]] = [[] for _ in range(n)]
        for e in built:
            out[e.src].append(e)
            inc[e.dst].append(e)
        self._out = tuple(tuple(x) for x in out)
        self._in = tuple(tuple(x) for x in inc)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge(self, eid: int) -> Edge:
        try:
            return self._by_id[eid]
        except KeyError:
            raise KeyError(f"unknown edge id {eid}") from None

    def out_edges(self, u: int) -> tuple[Edge, ...]:
        return self._out[u]

    def in_edges(self, v: int) -> tuple[Edge, ...]:
        return self._in[v]

    def name(self, v: int) -> str:
        return self.node_names[v] if self.node_names else str(v)

    def node_id(self, name: str | int) -> int:
        """Node id from a name or a numeric string."""
        if self.node_names and str(name) in self.node_names:
            return self.node_names.index(str(name))
        v = int(name)
        if not 0 <= v < self.n:
            raise KeyError(f"unknown node {name!r}")
        return v

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedMultiGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and self.metric_names == other.metric_names
            and self.edges == other.edges
            and self.node_names == other.node_names
        )

    def __repr__(self) -> str:
        return f"WeightedMultiGraph(n={self.n}, m={self.m}, k={self.k})"

    def to_json(self) -> dict:
        doc = {
            "k": self.k,
            "metric_names": list(self.metric_names),
            "nodes": self.n,
            "edges": [{"id": e.id, "src": e.src, "dst": e.dst, "w": list(e.w)} for e in self.edges],
        }
        if self.node_names:
            doc["node_names"] = list(self.node_names)
        return doc


@dataclass(frozen=True)
class Path:
    """Chained sequence of edges of a graph."""

    edges: tuple[Edge, ...]

    def __post_init__(self):
        for a, b in zip(self.edges, self.edges[1:]):
            if a.dst != b.src:
                raise ValueError(f"edges {a.id} and {b.id} do not chain")

    @classmethod
    def from_ids(cls, g: WeightedMultiGraph, ids: Iterable[int]) -> "Path":
        return cls(tuple(g.edge(i) for i in ids))

    @property
    def nodes(self) -> tuple[int, ...]:
        if not self.edges:
            return ()
        return (self.edges[0].src,) + tuple(e.dst for e in self.edges)

    def distance(self, k: int | None = None) -> PathDistance:
        if k is None:
            k = len(self.edges[0].w) if self.edges else 0
        return path_distance(self.edges, k)

    def sub(self, i: int, j: int) -> "Path":
        """Subpath between the i-th and j-th traversed nodes."""
        return Path(self.edges[i:j])

    def __len__(self) -> int:
        return len(self.edges)


def path_distance(edges: Sequence[Edge], k: int) -> PathDistance:
    d = [0] * k
    for e in edges:
        for i in range(k):
            d[i] += e.w[i]
    return tuple(d)


def induced_subgraph_without_edge(g: WeightedMultiGraph, edge_id: int) -> WeightedMultiGraph:
    g.edge(edge_id)
    return WeightedMultiGraph(g.n, [e for e in g.edges if e.id != edge_id], g.k, g.metric_names, g.node_names)


# ---------------------------------------------------------------- readers

def load_topology(source: IO | bytes | str, fmt: str = "repetita") -> WeightedMultiGraph:
    """Read a topology from a stream, bytes or text in the given format."""
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if fmt == "repetita":
        return _parse_repetita(data)
    if fmt in ("native-json", "json"):
        return _parse_native_json(data)
    raise ValueError(f"unknown topology format {fmt!r}")


def load_topology_file(path: str, fmt: str | None = None) -> WeightedMultiGraph:
    if fmt is None:
        fmt = "native-json" if str(path).endswith(".json") else "repetita"
    with open(path, "rb") as fh:
        return load_topology(fh, fmt)


def _parse_native_json(text: str) -> WeightedMultiGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(exc.msg, exc.lineno) from None
    try:
        k = int(doc["k"])
        n = int(doc["nodes"])
        raw = doc["edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise TopologyError(f"missing or invalid field: {exc}") from None
    edges = []
    for idx, e in enumerate(raw):
        edges.append(Edge(int(e.get("id", idx)), int(e["src"]), int(e["dst"]), tuple(int(x) for x in e["w"])))
    return WeightedMultiGraph(n, edges, k, doc.get("metric_names"), doc.get("node_names"))


def _parse_repetita(text: str) -> WeightedMultiGraph:
    # Dialect notes: '#' comments, column-header lines starting with "label"
    # and trailing extra columns are tolerated. Delay 0 is clamped to 1.
    lines = [(no, ln.split("#", 1)[0].strip()) for no, ln in enumerate(text.splitlines(), 1)]
    lines = [(no, ln) for no, ln in lines if ln]
    pos = 0

    def header(keyword: str) -> int:
        nonlocal pos
        if pos >= len(lines):
            raise TopologyError(f"missing {keyword} section", lines[-1][0] if lines else None)
        no, ln = lines[pos]
        parts = ln.split()
        if parts[0].upper() != keyword or len(parts) < 2:
            raise TopologyError(f"expected '{keyword} <count>'", no)
        try:
            count = int(parts[1])
        except ValueError:
            raise TopologyError(f"bad {keyword} count {parts[1]!r}", no) from None
        pos += 1
        if pos < len(lines) and lines[pos][1].split()[0].lower() == "label":
            pos += 1
        return count

    n = header("NODES")
    labels = []
    for _ in range(n):
        if pos >= len(lines):
            raise TopologyError("truncated node section", lines[-1][0])
        no, ln = lines[pos]
        if len(ln.split()) < 1 or ln.split()[0].upper() == "EDGES":
            raise TopologyError("fewer node lines than declared", no)
        labels.append(ln.split()[0])
        pos += 1
    m = header("EDGES")
    edges = []
    for idx in range(m):
        if pos >= len(lines):
            raise TopologyError("truncated edge section", lines[-1][0])
        no, ln = lines[pos]
        parts = ln.split()
        if len(parts) < 6:
            raise TopologyError("edge line needs: label src dst igp bandwidth delay", no)
        try:
            src, dst, igp = int(parts[1]), int(parts[2]), int(float(parts[3]))
            delay = int(float(parts[5]))
        except ValueError:
            raise TopologyError(f"non-numeric field in {ln!r}", no) from None
        if not (0 <= src < n and 0 <= dst < n):
            raise TopologyError(f"edge references unknown node ({src}, {dst})", no)
        if delay == 0:
            delay = 1
        if igp < 1 or delay < 1:
            raise TopologyError(f"non-positive weight ({igp}, {delay})", no)
        edges.append(Edge(idx, src, dst, (igp, delay)))
        pos += 1
    # labels name the nodes unless they are just the node indices
    names = None if labels == [str(v) for v in range(n)] else labels
    return WeightedMultiGraph(n, edges, 2, ["igp", "delay"], names)


def dump_repetita(g: WeightedMultiGraph, out: IO[str] | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"NODES {g.n}\nlabel x y\n")
    for v in range(g.n):
        buf.write(f"{'_'.join(g.name(v).split()) or v} 0 0\n")
    buf.write(f"\nEDGES {g.m}\nlabel src dest weight bw delay\n")
    for e in g.edges:
        buf.write(f"e{e.id} {e.src} {e.dst} {e.w[0]} 0 {e.w[1] if g.k > 1 else 1}\n")
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


# ---------------------------------------------------------------- generators

def king_adjacencies(width: int, height: int) -> list[tuple[int, int]]:
    """Undirected 8-neighbour adjacencies of a width x height grid, node = y*width + x."""
    adj = []
    for y in range(height):
        for x in range(width):
            u = y * width + x
            for dx, dy in ((1, 0), (0, 1), (1, 1), (-1, 1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height:
                    adj.append((u, ny * width + nx))
    return adj


def generate_lattice(
    width: int,
    height: int,
    doubling_prob: float = 0.3,
    weight_values: Sequence[int] | range = range(1, 6),
    seed: int | None = 0,
    symmetric: bool = False,
) -> WeightedMultiGraph:
    """King's-graph lattice with randomly doubled links and uniform integer weights.

    With ``symmetric`` set, doubling and weights are drawn per undirected
    link and shared by both directions.
    """
    if width < 2 or height < 2:
        raise ValueError("lattice dimensions must be at least 2x2")
    values = np.asarray(list(weight_values), dtype=np.int64)
    if values.size == 0:
        raise ValueError("empty weight range")
    rng = np.random.default_rng(seed)
    edges: list[Edge] = []

    def add(u: int, v: int, w: tuple[int, int]):
        edges.append(Edge(len(edges), u, v, w))

    for u, v in king_adjacencies(width, height):
        if symmetric:
            copies = 2 if rng.random() < doubling_prob else 1
            for _ in range(copies):
                w = tuple(int(x) for x in rng.choice(values, 2))
                add(u, v, w)
                add(v, u, w)
        else:
            for a, b in ((u, v), (v, u)):
                copies = 2 if rng.random() < doubling_prob else 1
                for _ in range(copies):
                    add(a, b, tuple(int(x) for x in rng.choice(values, 2)))
    return WeightedMultiGraph(width * height, edges, 2, ["igp", "delay"])


def generate_sparse(n: int, avg_degree: float = 3.5, weight_values=range(1, 11), seed: int | None = 0) -> WeightedMultiGraph:
    """Connected sparse symmetric topology resembling an ISP backbone.

    A random spanning tree plus extra links chosen preferentially among
    geometrically close nodes; both directions share weights.
    """
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    links: set[tuple[int, int]] = set()
    order = rng.permutation(n)
    for idx in range(1, n):
        v = int(order[idx])
        placed = order[:idx]
        dist = np.linalg.norm(pts[placed] - pts[v], axis=1)
        u = int(placed[int(np.argmin(dist))])
        links.add((min(u, v), max(u, v)))
    target = int(round(avg_degree * n / 2))
    while len(links) < target:
        u = int(rng.integers(n))
        dist = np.linalg.norm(pts - pts[u], axis=1)
        near = np.argsort(dist)[1:6]
        v = int(rng.choice(near))
        links.add((min(u, v), max(u, v)))
    values = np.asarray(list(weight_values), dtype=np.int64)
    edges: list[Edge] = []
    for u, v in sorted(links):
        igp = int(rng.choice(values))
        delay = max(1, int(round(np.linalg.norm(pts[u] - pts[v]) * 20)))
        edges.append(Edge(len(edges), u, v, (igp, delay)))
        edges.append(Edge(len(edges), v, u, (igp, delay)))
    return WeightedMultiGraph(n, edges, 2, ["igp", "delay"])


def generate_random(
    n: int,
    edge_prob: float = 0.3,
    weight_values: Sequence[int] | range = range(1, 6),
    seed: int | None = 0,
    k: int = 2,
    parallel_prob: float = 0.1,
) -> WeightedMultiGraph:
    """Directed random graph: each ordered pair linked with ``edge_prob``,
    sometimes twice, weights uniform over ``weight_values``."""
    rng = np.random.default_rng(seed)
    values = np.asarray(list(weight_values), dtype=np.int64)
    edges: list[Edge] = []
    for u in range(n):
        for v in range(n):
            if u == v or rng.random() >= edge_prob:
                continue
            copies = 2 if rng.random() < parallel_prob else 1
            for _ in range(copies):
                edges.append(Edge(len(edges), u, v, tuple(int(x) for x in rng.choice(values, k))))
    return WeightedMultiGraph(n, edges, k)
