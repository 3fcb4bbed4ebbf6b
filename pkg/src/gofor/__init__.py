"""Segment-routing aware multi-criteria path computation."""

from importlib import resources

from .graph_model import (
    Edge,
    Path,
    WeightedMultiGraph,
    generate_lattice,
    generate_random,
    generate_sparse,
    load_topology,
    load_topology_file,
)
from .segment_db import SegmentDb, build as build_segment_db
from .encoder import Encoder, EncoderState, SegmentList, encode_path
from .relations import BaseRelation, Constraints, WrappedRelation, dominates, extended_dominates
from .pareto_engine import FrontSet, Query, solve
from .usecases import dclc_sr, frr_sr, ld_sr
from .metadag import MetaDag, build_metadag, count_lists, enumerate_lists, sample_list, to_dot
from .srgraph import build_sr_graph, solve_on_sr_graph


def example_graph(name: str) -> WeightedMultiGraph:
    """Bundled example topologies: "msd_tradeoff" and "dclc_metadag"."""
    data = resources.files(__package__).joinpath("data", f"{name}.json").read_bytes()
    return load_topology(data, "native-json")


__all__ = [
    "Edge", "Path", "WeightedMultiGraph", "generate_lattice", "generate_random", "generate_sparse",
    "load_topology", "load_topology_file",
    "SegmentDb", "build_segment_db", "Encoder", "EncoderState", "SegmentList", "encode_path",
    "BaseRelation", "Constraints", "WrappedRelation", "dominates", "extended_dominates",
    "FrontSet", "Query", "solve", "dclc_sr", "frr_sr", "ld_sr", "example_graph",
    "MetaDag", "build_metadag", "count_lists", "enumerate_lists", "sample_list", "to_dot",
    "build_sr_graph", "solve_on_sr_graph",
]
