"""Finite-element oracle: exactness, convergence, conformity, inclusions."""

import math

import numpy as np

from beamgraph.fem import solve_fem
from beamgraph.graphs import (C1, C2, C3, C4, VertexCondition, interval, loop,
                              star)
from beamgraph.secular import scan_spectrum

CLAMPED_SLIDING_K1 = 2.365020372431352   # brentq root of tan k + tanh k = 0


def test_interval_reference_accuracy():
    g = interval(math.pi, C4)
    s = solve_fem(g, 5, n=64, want_vectors=False)
    exact = np.array([0.0, 1.0, 16.0, 81.0, 256.0])
    err = np.abs(np.array(s.values) - exact) / np.maximum(exact, 1.0)
    # fourth-order convergence with the sharp (kh)^4/720 constant
    assert err[1] < 2e-7 and err[2] < 1e-6 and err[3] < 2e-6 and err[4] < 4e-6


def test_star_spectrum_matches_mode_split():
    # center slope clamp splits modes: doubly degenerate clamped-sliding
    # legs, then the symmetric sliding-sliding mode
    g = star([1.0, 1.0, 1.0], kind=C4)
    s = solve_fem(g, 4, n=64, want_vectors=False)
    lam_cs = CLAMPED_SLIDING_K1 ** 4
    assert abs(s.values[0]) < 1e-8
    assert abs(s.values[1] - lam_cs) < 1e-4 * lam_cs
    assert abs(s.values[2] - lam_cs) < 1e-4 * lam_cs
    assert abs(s.values[3] - math.pi ** 4) < 1e-4 * math.pi ** 4


def test_h_refinement_fourth_order():
    g = star([1.0, 1.4], kind=C4, alpha=0.5)
    ref = solve_fem(g, 5, n=256, want_vectors=False).values
    errs = []
    for n in (16, 32, 64):
        s = solve_fem(g, 5, n=n, want_vectors=False)
        errs.append(max(abs(a - b) / max(1.0, b)
                        for a, b in zip(s.values, ref)))
    order1 = math.log2(errs[0] / errs[1])
    order2 = math.log2(errs[1] / errs[2])
    assert order1 > 3.5 and order2 > 3.5


def test_monotone_mesh_convergence_from_above():
    g = star([1.0, 0.8, 1.3], kind=C2, alpha=0.7)
    prev = None
    for n in (16, 32, 64):
        vals = solve_fem(g, 6, n=n, want_vectors=False).values
        if prev is not None:
            for a, b in zip(vals, prev):
                assert a <= b + 1e-9 * max(1.0, abs(b))
        prev = vals


def test_conformity_upper_bounds_secular():
    g = star([1.0, 1.7, 0.6], kind=C4, alpha=1.1)
    sec = scan_spectrum(g, 8)
    fem = solve_fem(g, 8, n=48, want_vectors=False)
    for a, b in zip(sec.values, fem.values):
        assert b >= a - 1e-7 * max(1.0, abs(a))


def test_form_domain_inclusion_raises_eigenvalues():
    # restricting the discrete slope space (C2 -> C4 at the center) is a
    # literal subspace inclusion, so every eigenvalue moves up already at
    # the discrete level
    g2 = star([1.0, 1.3, 0.9], kind=C2)
    g4 = g2.with_condition("c", VertexCondition(C4, 0.0))
    v2 = solve_fem(g2, 8, n=24, want_vectors=False).values
    v4 = solve_fem(g4, 8, n=24, want_vectors=False).values
    for a, b in zip(v2, v4):
        assert b >= a - 1e-10 * max(1.0, abs(a))


def test_extended_vertex_pins_values():
    g = interval(1.0, kinds=(C4, C4), alphas=(math.inf, 0.0))
    s = solve_fem(g, 3, n=32)
    assert all(vv["a"] == 0.0 for vv in s.vertex_values)
    # clamped-sliding beam frequencies
    assert abs(s.values[0] - CLAMPED_SLIDING_K1 ** 4) < 1e-4 * CLAMPED_SLIDING_K1 ** 4


def test_vertex_values_reported():
    g = interval(math.pi, C4)
    s = solve_fem(g, 2, n=32)
    # constant mode: equal values at both ends
    vv = s.vertex_values[0]
    assert abs(abs(vv["a"]) - abs(vv["b"])) < 1e-9
    assert abs(vv["a"]) > 0.1


def test_c3_vertex_slope_coupling():
    # proportional-slope coupling with opposite weights on a loop is the
    # periodic beam; the oracle must reproduce the degenerate pairs
    g = loop(2 * math.pi, C3, sigma=(1.0, -1.0))
    s = solve_fem(g, 5, n=64, want_vectors=False)
    assert np.allclose(s.values, [0, 1, 1, 16, 16], rtol=1e-5, atol=1e-8)
