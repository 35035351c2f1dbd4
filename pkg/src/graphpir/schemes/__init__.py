"""Executable PIR schemes over graphs."""

from __future__ import annotations

from ..errors import SchemeError
from ..graphcore import Graph, automorphism_group
from .base import AnswerSet, QuerySet, Scheme, measured_rate
from .complete import CompleteSubset, SubgraphAdapter, subgraph_adapter
from .star import StarSimple, StarSteiner
from .symmetrize import Symmetrized, symmetrize

SCHEME_NAMES = ("star-simple", "star-steiner", "complete-subset", "subgraph-adapter")


def make_scheme(name: str, graph: Graph, symmetrized: bool = False) -> Scheme:
    """Build a scheme by CLI name; raises SchemeError if it does not fit the graph."""
    if name == "star-simple":
        scheme: Scheme = StarSimple(graph)
    elif name == "star-steiner":
        scheme = StarSteiner(graph)
    elif name == "complete-subset":
        scheme = CompleteSubset(graph.n_vertices)
        if scheme.graph.edges != graph.edges:
            raise SchemeError("complete-subset needs a complete graph; use subgraph-adapter")
    elif name == "subgraph-adapter":
        scheme = SubgraphAdapter(graph)
    else:
        raise SchemeError(f"unknown scheme {name!r}; choose from {', '.join(SCHEME_NAMES)}")
    if symmetrized:
        scheme = Symmetrized(scheme, automorphism_group(graph))
    return scheme


__all__ = [
    "AnswerSet",
    "CompleteSubset",
    "QuerySet",
    "SCHEME_NAMES",
    "Scheme",
    "StarSimple",
    "StarSteiner",
    "SubgraphAdapter",
    "Symmetrized",
    "make_scheme",
    "measured_rate",
    "subgraph_adapter",
    "symmetrize",
]
