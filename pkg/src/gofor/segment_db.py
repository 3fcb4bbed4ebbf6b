"""All-pairs segment lookup tables.

For every metric i that backs node segments the database stores, for each
ordered pair (u, v):

* ``best[i][u][v]``: shortest distance on metric i,
* ``maxvec[i][u][v]``: the k-vector whose j-th entry is the largest metric-j
  distance among all metric-i-shortest u->v paths (this is d(Node_i(u, v))),
* ``count[i][u][v]``: number of metric-i-shortest paths, capped at 2,
* ``cont[i][e]``: bitmask of the sources a for which Node_i(a, e.src)
  followed by edge e is exactly Node_i(a, e.dst), same distance vector.

Membership and extension tests then cost O(1).
"""

from __future__ import annotations

import hashlib
import json
import struct
from typing import NamedTuple, Iterable

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graph_model import Edge, WeightedMultiGraph

INF = 1 << 60

ADJ, NODE, NODEADJ = 0, 1, 2
_KIND_NAMES = {ADJ: "Adj", NODE: "Node", NODEADJ: "NodeAdj"}


class SegmentType(NamedTuple):
    kind: int
    metric: int = 0

    def __str__(self) -> str:
        if self.kind == ADJ:
            return "Adj"
        return f"{_KIND_NAMES[self.kind]}_{self.metric}"

    @classmethod
    def parse(cls, text: str) -> "SegmentType":
        text = text.strip()
        if text.lower() == "adj":
            return ADJ_TYPE
        name, _, idx = text.partition("_")
        kinds = {"node": NODE, "nodeadj": NODEADJ, "n": NODE, "na": NODEADJ}
        if name.lower() not in kinds or not idx.isdigit():
            raise ValueError(f"unknown segment type {text!r}")
        return cls(kinds[name.lower()], int(idx))


ADJ_TYPE = SegmentType(ADJ, 0)


def node_type(i: int) -> SegmentType:
    return SegmentType(NODE, i)


def nodeadj_type(i: int) -> SegmentType:
    return SegmentType(NODEADJ, i)


class Segment(NamedTuple):
    """A non-empty segment.

    ``edge`` is the edge id for Adj segments and for the second NodeAdj
    branch (node segment to ``via`` followed by that edge); otherwise None.
    """

    kind: int
    metric: int
    src: int
    dst: int
    edge: int | None
    dist: tuple
    via: int | None = None

    @property
    def type(self) -> SegmentType:
        return SegmentType(self.kind, self.metric)

    @property
    def key(self) -> tuple:
        """Identity without the distance."""
        return (self.kind, self.metric, self.src, self.dst, self.edge)

    def token(self) -> str:
        if self.kind == ADJ:
            return f"Adj({self.src}->{self.dst}#{self.edge})"
        if self.kind == NODE:
            return f"N_{self.metric}({self.src}->{self.dst})"
        if self.edge is None:
            return f"NA_{self.metric}({self.src}->{self.dst})"
        return f"NA_{self.metric}({self.src}->{self.via}->{self.dst}#{self.edge})"


def commit_priority(seg: Segment) -> tuple:
    """Node_1 first, then Node_i by i, then NodeAdj, then Adj by lowest edge id."""
    rank = {NODE: 0, NODEADJ: 1, ADJ: 2}[seg.kind]
    return (rank, seg.metric, -1 if seg.edge is None else seg.edge, -1 if seg.via is None else seg.via)


class SegmentDb:
    """Precomputed segment tables for a graph; immutable after build."""

    def __init__(self, g: WeightedMultiGraph, node_metrics: tuple[int, ...], best, maxvec, count, cont):
        self.g = g
        self.k = g.k
        self.n = g.n
        self.node_metrics = node_metrics
        self.best = best
        self.maxvec = maxvec
        self.count = count
        self.cont = cont

    def continues(self, i: int, a: int, e: Edge) -> bool:
        """Node_i(a, e.src) extended by e keeps its exact distance vector."""
        return bool(self.cont[i][e.id] >> a & 1)

    # -- queries ---------------------------------------------------------

    def node_segment(self, i: int, u: int, v: int) -> Segment | None:
        d = self.maxvec[i][u][v]
        if d is None:
            return None
        return Segment(NODE, i, u, v, None, d)

    def get_segments(self, stype: SegmentType, u: int, v: int) -> list[Segment]:
        """All non-empty segments of this type from u to v (empty list = absent)."""
        if stype.kind == ADJ:
            return [Segment(ADJ, 0, u, v, e.id, e.w) for e in self.g.out_edges(u) if e.dst == v]
        self._check_metric(stype.metric)
        i = stype.metric
        if stype.kind == NODE:
            s = self.node_segment(i, u, v)
            return [] if s is None else [s]
        d = self.maxvec[i][u][v]
        if d is not None:
            return [Segment(NODEADJ, i, u, v, None, d)]
        out = []
        for e in self.g.in_edges(v):
            vp = e.src
            dp = self.maxvec[i][u][vp]
            if dp is None:
                continue
            out.append(Segment(NODEADJ, i, u, v, e.id, tuple(a + b for a, b in zip(dp, e.w)), vp))
        return out

    def get_segment(self, stype: SegmentType, u: int, v: int) -> Segment | None:
        segs = self.get_segments(stype, u, v)
        return segs[0] if segs else None

    def node_in_segment(self, seg: Segment, u: int) -> bool:
        if u == seg.src or u == seg.dst:
            return True
        if seg.kind == ADJ:
            return False
        best = self.best[seg.metric]
        if seg.edge is not None and seg.kind == NODEADJ:
            a, b = seg.src, seg.via
        else:
            a, b = seg.src, seg.dst
        bab = best[a][b]
        return bab < INF and best[a][u] + best[u][b] == bab

    def edge_in_segment(self, seg: Segment, e: Edge) -> bool:
        if seg.kind == ADJ:
            return seg.edge == e.id
        best = self.best[seg.metric]
        wi = e.w[seg.metric - 1]
        if seg.kind == NODEADJ and seg.edge is not None:
            if seg.edge == e.id:
                return True
            a, b = seg.src, seg.via
        else:
            a, b = seg.src, seg.dst
        if a == b:
            return False
        bab = best[a][b]
        return bab < INF and best[a][e.src] + wi + best[e.dst][b] == bab

    def extend_segment(self, seg: Segment, e: Edge) -> Segment | None:
        """S o e: the segment (type, src, e.dst) if it contains a path through e."""
        if e.src != seg.dst:
            raise ValueError(f"edge {e.id} does not start at segment end {seg.dst}")
        if seg.kind == ADJ or seg.edge is not None:
            return None
        i = seg.metric
        best = self.best[i]
        a, v = seg.src, e.dst
        if a == v or best[a][seg.dst] + e.w[i - 1] != best[a][v]:
            return None
        return Segment(seg.kind, i, a, v, None, self.maxvec[i][a][v])

    def is_single_path(self, seg: Segment) -> bool:
        """True when the segment holds exactly one path."""
        if seg.kind == ADJ:
            return True
        if seg.edge is not None:
            return seg.src == seg.via or self.count[seg.metric][seg.src][seg.via] == 1
        return self.count[seg.metric][seg.src][seg.dst] == 1

    def _check_metric(self, i: int):
        if i not in self.best:
            raise KeyError(f"metric {i} has no node-segment tables (built for {self.node_metrics})")

    # -- cache -----------------------------------------------------------

    def save(self, path: str) -> None:
        """Binary cache: header then row-major uint32 tables, absent = 0xFFFFFFFF."""
        n, k = self.n, self.k
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IIII", _VERSION, n, k, len(self.node_metrics)))
            fh.write(struct.pack(f"<{len(self.node_metrics)}I", *self.node_metrics))
            fh.write(graph_digest(self.g))
            for i in self.node_metrics:
                fh.write(_pack(self.best[i]))
                fh.write(_pack(self.count[i]))
                for j in range(k):
                    fh.write(_pack([[None if d is None else d[j] for d in row] for row in self.maxvec[i]]))

    @classmethod
    def load(cls, g: WeightedMultiGraph, path: str) -> "SegmentDb":
        with open(path, "rb") as fh:
            if fh.read(len(_MAGIC)) != _MAGIC:
                raise ValueError("not a segment cache file")
            version, n, k, nm = struct.unpack("<IIII", fh.read(16))
            if version != _VERSION:
                raise ValueError(f"unsupported cache version {version}")
            metrics = struct.unpack(f"<{nm}I", fh.read(4 * nm))
            if fh.read(32) != graph_digest(g) or n != g.n or k != g.k:
                raise ValueError("cache does not match this graph")
            size = 4 * n * n
            best, count, maxvec, cont = {}, {}, {}, {}
            for i in metrics:
                b = np.frombuffer(fh.read(size), dtype="<u4").reshape(n, n).astype(np.int64)
                c = np.frombuffer(fh.read(size), dtype="<u4").reshape(n, n).astype(np.int64)
                mx = [np.frombuffer(fh.read(size), dtype="<u4").reshape(n, n).astype(np.int64) for _ in range(k)]
                absent = b == _ABSENT
                b[absent] = INF
                cont[i] = _continuations(g, i, b, mx)
                best[i] = b.tolist()
                count[i] = c.tolist()
                maxvec[i] = _vectors(mx, absent)
        return cls(g, tuple(metrics), best, maxvec, count, cont)


_MAGIC = b"SEGDB\x00\x00\x01"
_VERSION = 1
_ABSENT = 0xFFFFFFFF


def graph_digest(g: WeightedMultiGraph) -> bytes:
    return hashlib.sha256(json.dumps(g.to_json(), sort_keys=True).encode()).digest()


def _pack(rows) -> bytes:
    arr = np.array([[_ABSENT if (x is None or x >= INF) else x for x in row] for row in rows], dtype="<u4")
    return arr.tobytes()


def _vectors(mx: list[np.ndarray], absent: np.ndarray) -> list[list]:
    n = absent.shape[0]
    stacked = np.stack(mx, axis=-1).tolist()
    out = []
    for u in range(n):
        row = stacked[u]
        out.append([None if absent[u, v] else tuple(row[v]) for v in range(n)])
    return out


def _continuations(g: WeightedMultiGraph, i: int, best: np.ndarray, mx: list[np.ndarray], block: int = 256) -> list[int]:
    """Per edge, the bitmask of sources whose metric-i node segment extends over it exactly."""
    n, m = g.n, g.m
    if not m:
        return []
    tails = np.array([e.src for e in g.edges], dtype=np.int64)
    heads = np.array([e.dst for e in g.edges], dtype=np.int64)
    w = np.array([e.w for e in g.edges], dtype=np.int64)
    bits = np.zeros((m, (n + 7) // 8), dtype=np.uint8)
    for lo in range(0, n, block):
        rows = slice(lo, min(n, lo + block))
        bt = best[rows][:, tails]
        ok = (bt < INF) & (bt + w[:, i - 1] == best[rows][:, heads])
        for j, arr in enumerate(mx):
            ok &= arr[rows][:, heads] == arr[rows][:, tails] + w[:, j]
        ok &= np.arange(rows.start, rows.stop)[:, None] != heads[None, :]
        # columns lo..hi of the per-edge bit rows; lo is a multiple of 8
        packed = np.packbits(ok.T, axis=1, bitorder="little")
        bits[:, lo // 8 : lo // 8 + packed.shape[1]] |= packed
    return [int.from_bytes(row.tobytes(), "little") for row in bits]


def build(g: WeightedMultiGraph, node_segment_metrics: Iterable[int] = (1,)) -> SegmentDb:
    """Shortest paths from every node on each requested metric, then a DAG
    dynamic program for the per-metric maxima and the path counts."""
    metrics = tuple(sorted(set(node_segment_metrics)))
    for i in metrics:
        if not 1 <= i <= g.k:
            raise ValueError(f"metric index {i} outside 1..{g.k}")
    n, k = g.n, g.k
    best_t, maxvec_t, count_t, cont_t = {}, {}, {}, {}
    if g.m:
        tails = np.array([e.src for e in g.edges], dtype=np.int64)
        heads = np.array([e.dst for e in g.edges], dtype=np.int64)
        w = np.array([e.w for e in g.edges], dtype=np.int64)
    for i in metrics:
        best = np.full((n, n), INF, dtype=np.int64)
        np.fill_diagonal(best, 0)
        count = np.zeros((n, n), dtype=np.int64)
        np.fill_diagonal(count, 1)
        mx = [np.full((n, n), -1, dtype=np.int64) for _ in range(k)]
        for arr in mx:
            np.fill_diagonal(arr, 0)
        if g.m:
            wi = w[:, i - 1]
            # parallel edges: shortest distance only needs the lightest one
            pair_min: dict[tuple[int, int], int] = {}
            for a, b, x in zip(tails.tolist(), heads.tolist(), wi.tolist()):
                if a != b and x < pair_min.get((a, b), INF):
                    pair_min[(a, b)] = x
            rows, cols = zip(*pair_min.keys())
            mat = csr_matrix((list(pair_min.values()), (rows, cols)), shape=(n, n))
            dist = dijkstra(mat, directed=True)
            reach = np.isfinite(dist)
            best[reach] = dist[reach].astype(np.int64)

            cand = best[:, tails] + wi[None, :]
            on_dag = (cand == best[:, heads]) & (best[:, tails] < INF)
            src_idx, edge_idx = np.nonzero(on_dag)
            level = best[src_idx, heads[edge_idx]]
            order = np.argsort(level, kind="stable")
            src_idx, edge_idx, level = src_idx[order], edge_idx[order], level[order]
            cuts = np.flatnonzero(np.diff(level)) + 1
            # heads of one level only depend on tails of strictly lower levels
            for s_grp, e_grp in zip(np.split(src_idx, cuts), np.split(edge_idx, cuts)):
                t, h = tails[e_grp], heads[e_grp]
                for j in range(k):
                    np.maximum.at(mx[j], (s_grp, h), mx[j][s_grp, t] + w[e_grp, j])
                np.add.at(count, (s_grp, h), count[s_grp, t])
                np.minimum(count, 2, out=count)
        absent = best >= INF
        cont_t[i] = _continuations(g, i, best, mx)
        best_t[i] = best.tolist()
        count_t[i] = count.tolist()
        maxvec_t[i] = _vectors(mx, absent)
    return SegmentDb(g, metrics, best_t, maxvec_t, count_t, cont_t)
