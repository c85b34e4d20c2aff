"""Vertex-condition solver: assembly, scanning, eigenfunctions."""

import math

import numpy as np
import pytest

from beamgraph.graphs import (C1, C2, C3, C4, interval, loop, path, star,
                              disjoint_union)
from beamgraph.secular import (ScanError, assemble, eigenfunction_values,
                               rayleigh_quotient, scan_spectrum,
                               smallest_singular_value, _nullspace)
from beamgraph.spectrum import merged_values

FREE_FREE_X1 = 4.730040744862704       # brentq root of cos x cosh x = 1
FREE_FREE_X2 = 7.853204624095838


def test_matrix_shape_and_row_blocks():
    g = star([1.0, 1.2, 0.8], kind=C2)
    m = assemble(g, 3.0)
    assert m.matrix.shape == (12, 12)
    for v in g.vertices:
        sl = m.vertex_rows[v.id]
        assert sl.stop - sl.start == 2 * v.degree


def test_nullity_interval_c4_at_zero():
    # constants solve the problem; unique up to scale on a connected graph
    assert _nullspace(interval(1.0, C4), 0.0)[0] == 1


def test_nullity_interval_c1_at_zero():
    # both 1 and x satisfy the free conditions: curvature and shear vanish
    assert _nullspace(interval(1.0, C1), 0.0)[0] == 2


def test_nullity_c2_loop_double():
    g = loop(2 * math.pi, C2)
    assert _nullspace(g, 1.0)[0] == 2


def test_interval_c4_spectrum():
    g = interval(math.pi, C4)
    s = scan_spectrum(g, 5)
    assert np.allclose(s.values, [0, 1, 16, 81, 256], rtol=1e-9, atol=1e-12)


def test_loop_c2_degenerate_pairs():
    g = loop(2 * math.pi, C2)
    s = scan_spectrum(g, 7)
    assert np.allclose(s.values, [0, 1, 1, 16, 16, 81, 81], rtol=1e-9)
    assert [e.multiplicity for e in s.entries] == [1, 2, 2, 2]


def test_loop_c3_opposite_weights_periodic():
    g = loop(2 * math.pi, C3, sigma=(1.0, -1.0))
    s = scan_spectrum(g, 7)
    assert np.allclose(s.values, [0, 1, 1, 16, 16, 81, 81], rtol=1e-9)


def test_interval_c1_free_free():
    g = interval(1.0, C1)
    s = scan_spectrum(g, 4)
    assert s.values[0] == 0.0 and s.values[1] == 0.0
    assert abs(s.values[2] - FREE_FREE_X1 ** 4) < 1e-8 * FREE_FREE_X1 ** 4
    assert abs(s.values[3] - FREE_FREE_X2 ** 4) < 1e-8 * FREE_FREE_X2 ** 4
    assert abs(FREE_FREE_X1 - 4.7300407449) < 1e-9


def test_scan_grid_guard():
    with pytest.raises(ScanError):
        scan_spectrum(interval(1.0, C4), 3, grid_divisor=2)


def test_counting_monotone_and_jumps():
    s = scan_spectrum(loop(2 * math.pi, C2), 7)
    counts = [s.counting(lam) for lam in (0.5, 1.0, 10.0, 16.0, 50.0)]
    assert counts == sorted(counts)
    assert s.counting(1.0) == 3          # ties included
    assert s.counting(0.5) == 1
    assert s.counting(-1.0) == 0
    with pytest.raises(ValueError):
        s.counting(1e9)


def test_eigenfunction_endpoint_conditions():
    g = interval(math.pi, C4)
    s = scan_spectrum(g, 3)
    pts = eigenfunction_values(s, 2, "e0", [0.0, 1.0, math.pi])
    assert abs(pts[0][2]) < 1e-9          # phi'(0) = 0 under the slope clamp
    # constant mode: second derivative vanishes identically
    pts0 = eigenfunction_values(s, 1, "e0", np.linspace(0, math.pi, 7))
    assert max(abs(p[3]) for p in pts0) < 1e-9


def test_eigenfunction_unknown_edge():
    s = scan_spectrum(interval(1.0, C4), 2)
    with pytest.raises(KeyError):
        eigenfunction_values(s, 1, "nope", [0.0])


def test_rayleigh_quotient_matches_eigenvalue():
    g = star([1.0, 1.3, 0.7], kind=C4, alpha=0.9)
    s = scan_spectrum(g, 6)
    for k in range(1, 7):
        lam = s.value_at(k)
        rq = rayleigh_quotient(g, lam, s.vectors[k - 1])
        assert abs(rq - lam) <= 1e-6 * max(1.0, abs(lam))


def test_orthonormal_within_eigenspace():
    from beamgraph.secular import l2_inner
    g = loop(2 * math.pi, C2)
    s = scan_spectrum(g, 3)
    lam = s.value_at(2)
    a, b = s.vectors[1], s.vectors[2]
    assert abs(l2_inner(g, lam, a, a) - 1.0) < 1e-8
    assert abs(l2_inner(g, lam, a, b)) < 1e-8


def test_degree_two_merge_invariance_fixed_cases():
    from beamgraph.surgery import insert_degree_two_vertex
    for length, pos in ((2.5, 0.8), (1.0, 0.5), (3.0, 2.2)):
        g = interval(length, C4)
        g2, _ = insert_degree_two_vertex(g, "e0", pos)
        s1 = scan_spectrum(g, 5)
        s2 = scan_spectrum(g2, 5)
        for a, b in zip(s1.values, s2.values):
            assert abs(a - b) <= 1e-8 * max(1.0, abs(a))


def test_negative_strength_spectrum():
    g = interval(1.0, kind=C4, alphas=(-3.0, 0.0))
    s = scan_spectrum(g, 3)
    assert s.values[0] < 0.0
    from beamgraph.fem import solve_fem
    f = solve_fem(g, 3, n=96, want_vectors=False)
    for a, b in zip(s.values, f.values):
        assert abs(a - b) <= 1e-5 * max(1.0, abs(a))


def test_extended_condition_clamped_free():
    # value and slope pinned at one end: the classical clamped-free beam
    g = interval(1.0, kinds=(C4, C1), alphas=(math.inf, 0.0))
    s = scan_spectrum(g, 2)
    assert abs(s.values[0] - 1.8751040687119611 ** 4) < 1e-7
    assert abs(s.values[1] - 4.694091132974175 ** 4) < 1e-6


def test_union_spectrum_is_sorted_merge():
    a, b = interval(1.0, C4), interval(1.7, C4)
    u = disjoint_union(a, b)
    su = scan_spectrum(u, 6)
    merged = merged_values([scan_spectrum(a, 6), scan_spectrum(b, 6)], 6)
    assert np.allclose(su.values, merged, rtol=1e-9, atol=1e-9)


def test_strength_increase_moves_first_eigenvalue_up():
    g0 = interval(1.0, C4)
    g1 = interval(1.0, kind=C4, alphas=(1.0, 0.0))
    s0 = scan_spectrum(g0, 2)
    s1 = scan_spectrum(g1, 2)
    assert s0.values[0] == 0.0
    assert 0.0 < s1.values[0] <= s0.values[1] + 1e-9
