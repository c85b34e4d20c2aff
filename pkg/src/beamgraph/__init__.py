"""Spectral toolkit for fourth-order beam operators on compact metric graphs."""

from .graphs import (C1, C2, C3, C4, ConditionKind, Edge, Endpoint,
                     InvalidGraphError, MetricGraph, Side, Vertex,
                     VertexCondition, angle_condition, betti_number,
                     disjoint_union, graph_predicates, interval, left, loop,
                     path, right, star, validate)
from .spectrum import Spectrum, SpectrumEntry

__all__ = [
    "C1", "C2", "C3", "C4", "ConditionKind", "Edge", "Endpoint",
    "InvalidGraphError", "MetricGraph", "Side", "Vertex", "VertexCondition",
    "angle_condition", "betti_number", "disjoint_union", "graph_predicates",
    "interval", "left", "loop", "path", "right", "star", "validate",
    "Spectrum", "SpectrumEntry",
]

__version__ = "0.1.0"
