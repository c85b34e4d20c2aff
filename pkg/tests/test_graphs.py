"""Data model, validation, and combinatorial predicates."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamgraph.graphs import (C1, C2, C3, C4, ConditionKind, Edge, Endpoint,
                              MetricGraph, Side, Vertex, VertexCondition,
                              angle_condition, betti_number, bridges,
                              connected_components, disjoint_union,
                              graph_predicates, interval, is_star, left, loop,
                              path, right, star, validate)
from beamgraph.harness import GraphPolicy, random_graph


def test_minimal_interval_valid():
    g = interval(1.0, kind=C4)
    rep = validate(g)
    assert rep.ok and rep.violations == ()


def test_zero_length_rejected():
    g = MetricGraph(
        vertices=(
            Vertex("a", VertexCondition(C4), frozenset([left("e0")])),
            Vertex("b", VertexCondition(C4), frozenset([right("e0")])),
        ),
        edges=(Edge("e0", 0.0),),
    )
    rep = validate(g)
    assert not rep.ok
    assert any("non-positive length" in v for v in rep.violations)


def test_sigma_incomplete_reported():
    epl, epr = left("e0"), right("e0")
    g = MetricGraph(
        vertices=(
            Vertex("a", VertexCondition(C2, 0.0, {epl: 1.0}), frozenset([epl])),
            Vertex("b", VertexCondition(C2, 0.0, {}), frozenset([epr])),
        ),
        edges=(Edge("e0", 1.0),),
    )
    rep = validate(g)
    assert any("sigma incomplete" in v for v in rep.violations)


def test_sigma_zero_reported():
    epl, epr = left("e0"), right("e0")
    g = MetricGraph(
        vertices=(
            Vertex("a", VertexCondition(C2, 0.0, {epl: 0.0}), frozenset([epl])),
            Vertex("b", VertexCondition(C4, 0.0), frozenset([epr])),
        ),
        edges=(Edge("e0", 1.0),),
    )
    assert any("sigma zero" in v for v in validate(g).violations)


def test_dangling_endpoint_reported():
    epl = left("e0")
    g = MetricGraph(
        vertices=(Vertex("a", VertexCondition(C4), frozenset([epl])),),
        edges=(Edge("e0", 1.0),),
    )
    assert any("dangling endpoint" in v for v in validate(g).violations)


def test_disconnected_rejected_unless_union():
    u = disjoint_union(interval(1.0), interval(2.0))
    assert validate(u).ok
    bare = MetricGraph(u.vertices, u.edges, union_ok=False)
    assert any("disconnected" in v for v in validate(bare).violations)


def test_validate_idempotent():
    g = interval(1.0)
    assert validate(g) == validate(g)


def test_betti_numbers():
    assert betti_number(interval(1.0)) == 0
    assert betti_number(loop(1.0)) == 1
    # figure-eight: two loops, one vertex; by hand there are two
    # independent cycles, one around each petal
    e0l, e0r, e1l, e1r = left("e0"), right("e0"), left("e1"), right("e1")
    fig8 = MetricGraph(
        vertices=(Vertex("v", VertexCondition(C4),
                         frozenset([e0l, e0r, e1l, e1r])),),
        edges=(Edge("e0", 1.0), Edge("e1", 1.5)),
    )
    assert betti_number(fig8) == 2


def test_betti_rejects_disconnected():
    u = disjoint_union(interval(1.0), interval(2.0))
    with pytest.raises(Exception):
        betti_number(u)


def test_predicates_loop():
    p = graph_predicates(loop(2.5))
    assert p.eulerian and p.equilateral
    assert p.max_edge_length == p.total_length == 2.5


def test_predicates_star():
    p = graph_predicates(star([1.0, 1.0, 1.0]))
    assert not p.eulerian
    assert p.bipartite
    assert p.total_length == 3.0


def test_predicates_path():
    p = graph_predicates(path([1.0, 2.0]))
    assert not p.equilateral
    assert p.total_length == 3.0


def test_is_star():
    assert is_star(star([1.0, 2.0, 3.0]))
    assert is_star(interval(1.0))       # one-leg star
    assert not is_star(loop(1.0))
    assert not is_star(path([1.0, 1.0, 1.0]))


def test_bridges():
    assert [e.id for e in bridges(interval(1.0))] == ["e0"]
    assert bridges(loop(1.0)) == []
    assert len(bridges(star([1, 1, 1]))) == 3


def test_angle_condition_values():
    g = star([1.0, 1.0])
    c = angle_condition(g.vertex("c"), [math.pi / 2, math.pi / 2])
    assert c.kind is C2
    vals = [c.sigma_at(ep) for ep in g.vertex("c").sorted_endpoints()]
    assert vals == [1.0, 1.0]

    c = angle_condition(g.vertex("c"), [math.pi / 6, math.pi / 2])
    vals = [c.sigma_at(ep) for ep in g.vertex("c").sorted_endpoints()]
    assert abs(vals[0] - 0.5) < 1e-15 and vals[1] == 1.0


def test_angle_condition_rejects_flat_angles():
    g = star([1.0, 1.0])
    with pytest.raises(ValueError):
        angle_condition(g.vertex("c"), [0.0, math.pi / 2])
    with pytest.raises(ValueError):
        angle_condition(g.vertex("c"), [math.pi, math.pi / 2])


def test_connected_components():
    u = disjoint_union(interval(1.0), loop(2.0))
    comps = connected_components(u)
    assert len(comps) == 2
    assert {len(c.edges) for c in comps} == {1}


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10 ** 6))
def test_random_graphs_satisfy_partition_property(seed):
    g = random_graph(seed, GraphPolicy(alpha="uniform"))
    assert validate(g).ok
    # endpoint partition: degrees sum to twice the edge count
    assert sum(v.degree for v in g.vertices) == 2 * len(g.edges)
    assert betti_number(g) >= 0


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10 ** 6))
def test_random_graph_deterministic(seed):
    assert random_graph(seed) == random_graph(seed)


def test_loop_from_size_params():
    g = random_graph(5, GraphPolicy(n_vertices=(1, 1), n_edges=(1, 1)))
    assert len(g.vertices) == 1 and len(g.edges) == 1
    assert g.vertices[0].degree == 2
