"""Surgery operations: bookkeeping, legality tables, certified records."""

import math

import numpy as np
import pytest

from beamgraph.graphs import (C1, C2, C3, C4, VertexCondition, disjoint_union,
                              interval, left, loop, path, right, star,
                              validate)
from beamgraph import surgery as sg
from beamgraph.secular import scan_spectrum


def test_change_condition_offsets_table():
    # loop vertex has degree 2; printed offsets specialize accordingly
    g = loop(1.0, C1)
    ga, rec = sg.change_condition(g, "v", C2)
    assert [q.describe() for q in rec.inequalities] == [
        "lam_k(before) <= lam_k(after) for k >= 1",
        "lam_k(after) <= lam_k+1(before) for k >= 1"]

    g = star([1, 1, 1], kind=C1)
    _, rec = sg.change_condition(g, "c", C4)   # degree 3: upper k+3
    assert rec.inequalities[1].hi_off == 3
    _, rec = sg.change_condition(g, "c", C3)   # degree 3: upper k+2
    assert rec.inequalities[1].hi_off == 2

    g = star([1, 1, 1], kind=C2)
    _, rec = sg.change_condition(g, "c", C3)   # shifted bracket
    assert rec.inequalities[0].lo_off == 0 and rec.inequalities[0].hi_off == 1
    assert rec.inequalities[1].lo_off == 1 and rec.inequalities[1].hi_off == 3


def test_change_condition_noop_rejected():
    with pytest.raises(sg.IllegalSurgeryError):
        sg.change_condition(interval(1.0, C1), "a", C1)


def test_change_condition_degree_one_equivalences():
    # boundary vertices: C2 equals C4 and C1 equals C3; spectra identical
    g = interval(1.3, kinds=(C2, C4), alphas=(0.7, 0.0))
    ga, rec = sg.change_condition(g, "a", C4)
    s0, s1 = scan_spectrum(g, 5), scan_spectrum(ga, 5)
    assert max(abs(a - b) for a, b in zip(s0.values, s1.values)) < 1e-10
    # the d-1 offset collapses to an equality record at degree one
    assert rec.inequalities[1].hi_off == 0


def test_change_condition_loop_bracket_table():
    # slope-sum loop against slope-clamped loop: the printed bracket holds
    # index by index, with equality forced at every second position
    ell = 2 * math.pi
    c = loop(ell, C2)
    cp, rec = sg.change_condition(c, "v", C4)
    sc = scan_spectrum(c, 8)
    sp = scan_spectrum(cp, 8)
    for k in range(1, 7):
        assert sc.value_at(k) <= sp.value_at(k) + 1e-9
        assert sp.value_at(k) <= sc.value_at(k + 1) + 1e-9 * max(1, sc.value_at(k + 1))
    # (2 pi/l)^4 pinched at index 2, (4 pi/l)^4 at index 4, (6 pi/l)^4 at 6
    for k, val in ((2, 1.0), (4, 16.0), (6, 81.0)):
        assert abs(sp.value_at(k) - val) < 1e-9 * max(1.0, val)


def test_change_strength_records():
    g = interval(1.0, C4)
    ga, rec = sg.change_strength(g, {"a": 1.0})
    assert rec.inequalities[1].hi_off == 1
    assert rec.inequalities[0].strict is not None
    ga, rec = sg.change_strength(g, {"a": 1.0, "b": 0.5})
    assert rec.inequalities[1].hi_off == 2   # vertex count
    ga, rec = sg.change_strength(g, {})
    assert rec.inequalities[1].hi_off == 0   # identity record
    with pytest.raises(sg.IllegalSurgeryError):
        sg.change_strength(interval(1.0, C4, alpha=1.0), {"a": 0.5})


def test_change_strength_extended_offsets():
    for kind, upper in ((C1, 1), (C2, 2), (C3, 2), (C4, 3)):
        g = star([1.0, 1.0], kind=kind)   # center degree 2
        ga, rec = sg.change_strength(g, {"c": math.inf})
        assert rec.inequalities[1].hi_off == upper, kind
        assert ga.vertex("c").condition.is_extended


def test_extended_c1_cut_decouples():
    # pinned-value cut at the middle: the chain falls apart into intervals
    g = path([1.0, 1.0], kind=C1)
    ga, _ = sg.change_strength(g, {"v1": math.inf})
    s = scan_spectrum(ga, 4)
    # simply supported beam of unit length twice: (k pi)^4 each
    assert np.allclose(s.values, [math.pi ** 4, math.pi ** 4,
                                  (2 * math.pi) ** 4, (2 * math.pi) ** 4],
                       rtol=1e-8)


def test_glue_table_and_bookkeeping():
    u = disjoint_union(interval(1.0, C4, edge_id="eA"),
                       interval(1.4, C4, edge_id="eB"))
    total = u.total_length
    g, rec = sg.glue(u, "b", "p:a", C4)
    assert rec.classification == "I"
    assert validate(g).ok and not g.union_ok
    assert g.total_length == total                       # lengths preserved
    assert g.vertex("b").degree == 2
    # strength addition
    u2 = disjoint_union(interval(1.0, C4, alpha=0.5, edge_id="eA"),
                        interval(1.0, C4, alpha=0.25, edge_id="eB"))
    g2, _ = sg.glue(u2, "b", "p:a", C4)
    assert g2.vertex("b").condition.alpha == 0.75


def test_glue_class_iii_offset_uses_second_degree():
    g = star([1, 1, 1], kind=C1)         # center degree 3
    g = g.with_condition("l0", VertexCondition(C4, 0.0))
    _, rec = sg.glue(g, "l0", "c", C4)   # (C4, C1) -> C4 is class III
    assert rec.classification == "III"
    assert rec.inequalities[1].hi_off == 3 + 1


def test_glue_unlisted_triple_rejected():
    g = path([1.0, 1.0], kind=C1)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.glue(g, "v0", "v2", C4)       # (C1, C1) -> C4 is not certified
    with pytest.raises(sg.IllegalSurgeryError):
        sg.glue(g, "v0", "v0", C1)


def test_glue_composed_case():
    g = path([1.0, 1.0], kind=C1)
    ga, rec = sg.glue(g, "v0", "v2", C2)
    assert rec.inequalities[1].hi_off == 2
    assert ga.vertex("v0").condition.kind is C2


def test_glue_many_offsets():
    g = star([1.0, 1.0, 1.0], kind=C4)
    ga, rec = sg.glue_many(g, ["l0", "l1", "l2"], C4)
    assert rec.inequalities[1].hi_off == 2     # m = 2 pairwise gluings
    assert len(ga.vertices) == 2


def test_flower():
    g = star([1.0, 1.0, 1.0], kind=C4, alpha=0.5)
    gf, rec = sg.flower(g)
    assert len(gf.vertices) == 1
    assert gf.vertices[0].condition.alpha == 2.0     # strengths summed
    assert rec.inequalities[1].hi_off == 3           # |V| - 1
    # flower of a flower is itself
    gff, rec2 = sg.flower(gf)
    assert gff == gf and rec2.inequalities[1].hi_off == 0

    g3 = star([1.0, 1.0], kind=C3)
    _, rec3 = sg.flower(g3)
    assert rec3.inequalities[1].hi_off == 2 * 3 - 2

    with pytest.raises(sg.IllegalSurgeryError):
        sg.flower(interval(1.0, kinds=(C1, C4)))


def test_split_patterns_and_direction():
    g = loop(2.0, C4)
    ga, rec = sg.split(g, "v", [left("e0")], (C4, 0.0), (C4, 0.0))
    assert len(rec.inequalities) == 1
    q = rec.inequalities[0]
    assert (q.lo_side, q.lo_off, q.hi_side, q.hi_off) == ("after", 0, "before", 0)
    s_loop = scan_spectrum(g, 5)
    s_int = scan_spectrum(ga, 5)
    for a, b in zip(s_loop.values, s_int.values):
        assert b <= a + 1e-9 * max(1.0, abs(a))
    # split interval spectrum is the slope-clamped interval
    assert np.allclose(s_int.values, [(k * math.pi / 2.0) ** 4 for k in range(5)],
                       rtol=1e-8, atol=1e-9)


def test_split_rejections():
    g = loop(2.0, C4)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.split(g, "v", [left("e0")], (C1, 0.0), (C1, 0.0))   # C4->(C1,C1)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.split(g, "v", [left("e0")], (C4, 0.5), (C4, 0.0))   # strengths
    with pytest.raises(sg.IllegalSurgeryError):
        sg.split(g, "v", [], (C4, 0.0), (C4, 0.0))
    g1 = loop(2.0, C1)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.split(g1, "v", [left("e0")], (C3, 0.0), (C3, 0.0))  # C1->(C3,C3)


def test_split_strength_conservation_and_union():
    g = path([1.0, 1.0], kind=C4, alpha=1.0)
    v = g.vertex("v1")
    ga, _ = sg.split(g, "v1", [right("e0")], (C4, 0.3), (C4, 0.7))
    assert ga.union_ok                      # the chain fell apart
    assert sum(x.condition.alpha for x in ga.vertices) == \
        sum(x.condition.alpha for x in g.vertices)


def test_split_then_reglue_c4_roundtrip():
    g = loop(2.0, C4, alpha=0.8)
    ga, _ = sg.split(g, "v", [left("e0")], (C4, 0.5), (C4, 0.3))
    gb, rec = sg.glue(ga, "v.1", "v.2", C4)
    s0, s1 = scan_spectrum(g, 5), scan_spectrum(gb, 5)
    assert np.allclose(s0.values, s1.values, rtol=1e-9, atol=1e-9)


def test_attach_pendant_record():
    g = star([1.0, 1.2, 0.8], kind=C4, alpha=0.4)
    pend = interval(0.9, kind=C4, edge_id="pe")
    ga, rec = sg.attach_pendant(g, pend, "c", "a", C4, r=1, k0=1)
    assert rec.classification == "I"
    assert rec.obligations[0].describe() == "lam_1(aux) <= lam_1(before)"
    q = rec.inequalities[0]
    assert (q.lo_side, q.lo_off, q.hi_side, q.hi_off) == ("after", 0, "before", 0)
    assert validate(ga).ok
    assert ga.total_length == g.total_length + 0.9
    assert ga.vertex("c").condition.alpha == 0.4


def test_attach_pendant_r2_offset():
    g = star([1.0, 1.2], kind=C4)
    pend = interval(0.9, kind=C4, edge_id="pe")
    _, rec = sg.attach_pendant(g, pend, "c", "a", C4, r=2, k0=3)
    q = rec.inequalities[0]
    assert q.lo_off == 1 and q.k_min == 3


def test_attach_pendant_rejects_union():
    u = disjoint_union(interval(1.0), interval(1.0))
    pend = interval(0.5, edge_id="pp")
    with pytest.raises(Exception):
        sg.attach_pendant(u, pend, "a", "a", C4)


def test_insert_graph_table_and_lengths():
    g = path([1.0, 1.0], kind=C4)
    inner = interval(0.5, kind=C4, edge_id="mid")
    ga, rec = sg.insert_graph(g, "v1", inner,
                              {right("e0"): "a", left("e1"): "b"},
                              (C4, C4), (0.0, 0.0))
    assert rec.classification == "I"
    assert ga.total_length == g.total_length + 0.5
    s0, s1 = scan_spectrum(g, 6), scan_spectrum(ga, 6)
    for a, b in zip(s0.values, s1.values):
        assert b <= a + 1e-8 * max(1.0, abs(a))


def test_insert_graph_class_iii_offset():
    g = star([1, 1, 1], kind=C2)
    inner = interval(0.5, kind=C4, edge_id="mid")
    eps = g.vertex("c").sorted_endpoints()
    attach = {eps[0]: "a", eps[1]: "b", eps[2]: "b"}
    ga, rec = sg.insert_graph(g, "c", inner, attach, (C4, C2), (0.0, 0.0))
    assert rec.classification == "III"
    assert rec.inequalities[0].hi_off == 3        # degree of the old vertex


def test_insert_graph_rejections():
    g = path([1.0, 1.0], kind=C4)
    bad_inner = interval(0.5, kind=C1, edge_id="mid")
    with pytest.raises(sg.IllegalSurgeryError):
        sg.insert_graph(g, "v1", bad_inner,
                        {right("e0"): "a", left("e1"): "b"}, (C4, C4), (0, 0))
    inner = interval(0.5, kind=C4, edge_id="mid")
    with pytest.raises(sg.IllegalSurgeryError):
        sg.insert_graph(g, "v1", inner,
                        {right("e0"): "a", left("e1"): "b"}, (C3, C2), (0, 0))


def test_add_edge_offsets_and_self_loop():
    g = star([1.0, 1.1], kind=C4)
    ga, rec = sg.add_edge(g, "l0", "l1", 2.0)
    assert rec.inequalities[0].hi_off == 0
    assert rec.inequalities[0].k_min_rule[0] == "before_threshold"
    assert abs(rec.inequalities[0].k_min_rule[1] - (math.pi / 2.0) ** 4) < 1e-14

    ga, rec = sg.add_edge(g, "c", "c", 0.7)      # creates a loop at c
    assert ga.vertex("c").degree == 4
    assert validate(ga).ok

    g3 = star([1.0, 1.1], kind=C3)
    _, rec = sg.add_edge(g3, "l0", "l1", 1.0)
    assert rec.inequalities[0].hi_off == 2        # both proportional-slope

    g13 = interval(1.0, kinds=(C1, C3))
    _, rec = sg.add_edge(g13, "a", "b", 1.0)
    assert rec.inequalities[0].hi_off == 1


def test_insert_and_merge_degree_two_roundtrip():
    g = interval(2.5, C4, alpha=0.3)
    g2, rec = sg.insert_degree_two_vertex(g, "e0", 0.8)
    assert g2.total_length == g.total_length
    assert len(g2.edges) == 2
    g3, _ = sg.merge_degree_two_vertex(g2, rec.affected[0])
    assert len(g3.edges) == 1
    assert abs(g3.edges[0].length - 2.5) < 1e-15
    s0, s3 = scan_spectrum(g, 5), scan_spectrum(g3, 5)
    assert np.allclose(s0.values, s3.values, rtol=1e-10, atol=1e-10)


def test_merge_degree_two_rejects_non_removable():
    g = path([1.0, 1.0], kind=C4, interior_kind=C4)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.merge_degree_two_vertex(g, "v1")      # slope clamp, not interior
    g = loop(1.0, C2)
    with pytest.raises(sg.IllegalSurgeryError):
        sg.merge_degree_two_vertex(g, "v")       # the only vertex of a loop


def test_merge_degree_two_handles_both_orientations():
    # both edges pointing into the removable vertex forces an edge flip
    from beamgraph.graphs import Edge, Endpoint, MetricGraph, Side, Vertex
    epl0, epr0 = left("e0"), right("e0")
    epl1, epr1 = left("e1"), right("e1")
    g = MetricGraph(
        vertices=(
            Vertex("a", VertexCondition(C4), frozenset([epl0])),
            Vertex("m", VertexCondition(C2, 0.0, {epr0: 1.0, epr1: 1.0}),
                   frozenset([epr0, epr1])),
            Vertex("b", VertexCondition(C4), frozenset([epl1])),
        ),
        edges=(Edge("e0", 1.0), Edge("e1", 1.5)),
    )
    g2, _ = sg.merge_degree_two_vertex(g, "m")
    assert validate(g2).ok and len(g2.edges) == 1
    s0 = scan_spectrum(interval(2.5, C4), 5)
    s2 = scan_spectrum(g2, 5)
    assert np.allclose(s0.values, s2.values, rtol=1e-10, atol=1e-10)
