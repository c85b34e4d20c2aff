"""Closed-form eigenvalue bounds and counting-function brackets.

Each bound function returns its value or raises ``InapplicableBound`` naming
the failed hypothesis; ``bound_report`` aggregates every family against a
computed spectrum, marking entries inapplicable instead of skipping them.

Index conventions.  The toolkit indexes eigenvalues 1-based with
multiplicity, zero modes included.  Bounds sourced from statements that
count only nonzero eigenvalues (the Betti, longest-edge, and total-length
families, and the "lowest nonzero" gap bounds) are resolved against the
computed multiplicity of the zero eigenvalue: their printed index k targets
flat index k + dim ker.  Bounds derived from test functions orthogonal to
constants (the gap family) target flat index 2 directly, and the counting
brackets are stated in flat indexing already.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graphs import (C1, C2, C3, C4, ConditionKind, MetricGraph, betti_number,
                     bridges, graph_predicates, is_star, loop as make_loop)
from .spectrum import Spectrum


class InapplicableBound(ValueError):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _require(cond: bool, reason: str):
    if not cond:
        raise InapplicableBound(reason)


def _all_alpha_zero(graph: MetricGraph) -> bool:
    return all(v.condition.alpha == 0.0 for v in graph.vertices)


def _all_alpha_finite(graph: MetricGraph) -> bool:
    return all(not v.condition.is_extended for v in graph.vertices)


def _kinds(graph: MetricGraph) -> set:
    return {v.condition.kind for v in graph.vertices}


# ---------------------------------------------------------------------------
# bounds on the first eigenvalue and the gap
# ---------------------------------------------------------------------------

def lambda1_upper_mean(graph: MetricGraph) -> float:
    """Rayleigh quotient of the constant test function: sum(alpha)/total length.

    Attained exactly when every strength is zero.
    """
    _require(_all_alpha_finite(graph), "extended (alpha=+inf) vertex present")
    return sum(v.condition.alpha for v in graph.vertices) / graph.total_length


def lambda1_upper_cos(graph: MetricGraph) -> float:
    """Per-edge full-period cosine test function; strict upper bound."""
    _require(_all_alpha_finite(graph), "extended (alpha=+inf) vertex present")
    s = sum(8.0 * math.pi ** 4 / e.length ** 3 for e in graph.edges)
    s += sum(v.condition.alpha for v in graph.vertices)
    return 2.0 * s / graph.total_length


@dataclass(frozen=True)
class GapBounds:
    general: float
    bipartite: float | None
    equilateral: float | None
    equilateral_is_eigenvalue: bool = False


def lambda2_upper(graph: MetricGraph) -> GapBounds:
    """Upper bounds on the second eigenvalue for zero-strength graphs.

    The general bound uses full-period cosines on every edge (orthogonal to
    constants).  Bipartite graphs admit half-period cosines glued with
    alternating sign; equilateral graphs get (2 pi / edge length)^4, which is
    itself an eigenvalue.
    """
    _require(_all_alpha_zero(graph), "nonzero strength present")
    _require(len(_kinds(graph)) == 1, "condition kinds not uniform")
    preds = graph_predicates(graph)
    total = graph.total_length
    general = 2.0 / total * sum(8.0 * math.pi ** 4 / e.length ** 3
                                for e in graph.edges)
    bip = None
    if preds.bipartite:
        bip = (math.pi / total) ** 4 * sum((total / e.length) ** 3
                                           for e in graph.edges)
    eq = None
    if preds.equilateral:
        eq = (2.0 * math.pi / graph.edges[0].length) ** 4
    return GapBounds(general=general, bipartite=bip, equilateral=eq,
                     equilateral_is_eigenvalue=preds.equilateral)


def star_lower(graph: MetricGraph) -> float:
    """(pi/longest leg)^4 lower bound on the lowest nonzero star eigenvalue."""
    _require(is_star(graph), "not a star graph")
    _require(_kinds(graph) <= {C2, C4}, "condition kinds outside {C2, C4}")
    _require(_all_alpha_zero(graph), "nonzero strength present")
    return (math.pi / graph.max_edge_length) ** 4


@dataclass(frozen=True)
class EulerianBound:
    bound: float
    comparison_loop: MetricGraph
    closed_form: bool


def comparison_loop(graph: MetricGraph) -> MetricGraph:
    """The single-loop problem whose lowest nonzero eigenvalue is the bound.

    Doubled total length and doubled total strength in general; the original
    length and strength when the graph is Eulerian.  The loop vertex couples
    the ends with slope and curvature continuity and a third-derivative jump
    against the strength: weights (1, -1) of the proportional-slope kind.
    """
    total = graph.total_length
    alpha = sum(v.condition.alpha for v in graph.vertices)
    if graph_predicates(graph).eulerian:
        return make_loop(total, C3, alpha=alpha, sigma=(1.0, -1.0))
    return make_loop(2.0 * total, C3, alpha=2.0 * alpha, sigma=(1.0, -1.0))


def _c3_sigma_equal(graph: MetricGraph) -> bool:
    for v in graph.vertices:
        if v.condition.kind is C3:
            vals = [v.condition.sigma_at(ep) for ep in v.sorted_endpoints()]
            if any(not math.isclose(s, vals[0], rel_tol=1e-12) for s in vals):
                return False
    return True


def eulerian_lower(graph: MetricGraph, solver=None) -> EulerianBound:
    """Trail-unfolding lower bound on the lowest nonzero eigenvalue.

    Zero-strength graphs get the closed forms (pi/L)^4, improved to
    16 (pi/L)^4 when every degree is even.  Otherwise the comparison loop is
    solved numerically (``solver(graph, count) -> Spectrum``; defaults to the
    secular scan) and its lowest nonzero eigenvalue is returned.
    """
    _require(_kinds(graph) <= {C3, C4}, "condition kinds outside {C3, C4}")
    _require(_c3_sigma_equal(graph), "weights not equal within a vertex")
    alphas = [v.condition.alpha for v in graph.vertices]
    _require(all(a >= 0.0 for a in alphas) or all(a <= 0.0 for a in alphas),
             "strengths of mixed sign")
    _require(_all_alpha_finite(graph), "extended (alpha=+inf) vertex present")
    eul = graph_predicates(graph).eulerian
    loop_problem = comparison_loop(graph)
    if _all_alpha_zero(graph):
        base = (math.pi / graph.total_length) ** 4
        return EulerianBound(bound=16.0 * base if eul else base,
                             comparison_loop=loop_problem, closed_form=True)
    if solver is None:
        from .secular import scan_spectrum
        solver = scan_spectrum
    spec = solver(loop_problem, 3)
    ztol = 1e-9 * max(1.0, abs(spec.values[-1]))
    nonzero = [v for v in spec.values if abs(v) > ztol]
    return EulerianBound(bound=nonzero[0], comparison_loop=loop_problem,
                         closed_form=False)


# ---------------------------------------------------------------------------
# bounds on higher eigenvalues (indexed skipping the zero mode)
# ---------------------------------------------------------------------------

def _require_c2c4_zero(graph: MetricGraph):
    _require(_kinds(graph) <= {C2, C4}, "condition kinds outside {C2, C4}")
    _require(_all_alpha_zero(graph), "nonzero strength present")


def betti_upper(graph: MetricGraph, k: int) -> float:
    """((k + beta) pi / longest edge)^4 on the k-th nonzero eigenvalue."""
    _require_c2c4_zero(graph)
    beta = betti_number(graph)
    return ((k + beta) * math.pi / graph.max_edge_length) ** 4


def betti_upper_equilateral(graph: MetricGraph, k: int) -> float:
    _require_c2c4_zero(graph)
    _require(graph_predicates(graph).equilateral, "graph not equilateral")
    beta = betti_number(graph)
    ne = len(graph.edges)
    return ((k + beta) * ne * math.pi / graph.total_length) ** 4


def pendant_tree_upper(graph: MetricGraph, k: int) -> float:
    """(k pi / longest bridge)^4: the tree-with-pendant-graphs refinement.

    Applicable whenever the graph has a bridge: the graph is then a single
    edge with pendant graphs hung on its ends, built by eigenvalue-lowering
    attachments.  The best certified bound uses the longest bridge.
    """
    _require_c2c4_zero(graph)
    br = bridges(graph)
    _require(bool(br), "graph has no bridge (no tree core)")
    lmax = max(e.length for e in br)
    return (k * math.pi / lmax) ** 4


def total_length_upper(graph: MetricGraph, k: int) -> float:
    """((k - 3 + 3|E| + beta) pi / L)^4 on the k-th nonzero eigenvalue."""
    _require_c2c4_zero(graph)
    beta = betti_number(graph)
    ne = len(graph.edges)
    return ((k - 3 + 3 * ne + beta) * math.pi / graph.total_length) ** 4


def weyl_bracket(graph: MetricGraph, k: int,
                 variant: ConditionKind = C1) -> tuple:
    """Two-sided counting bracket in flat indexing, zero modes included.

    Continuity-only graphs (C1): ((k - |V|) pi / L)^4 floored at zero from
    below and ((k + |E| - 1) pi / L)^4 from above.  The weighted-sum variant
    (C2) keeps the lower bound and relaxes the upper index by |V|.
    """
    _require(variant in (C1, C2), "variant must be C1 or C2")
    _require(_kinds(graph) == {variant},
             f"condition kinds not uniformly {variant.value}")
    _require(_all_alpha_zero(graph), "nonzero strength present")
    nv, ne = len(graph.vertices), len(graph.edges)
    total = graph.total_length
    lower = (math.pi / total * max(k - nv, 0)) ** 4
    shift = ne - 1 if variant is C1 else ne + nv - 1
    upper = (math.pi / total * (k + shift)) ** 4
    return lower, upper


def counting_function(spectrum: Spectrum, lam: float) -> int:
    """Number of eigenvalues <= lam with multiplicity, ties included."""
    return spectrum.counting(lam)


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str                 # "lower" | "upper"
    target_index: int         # flat 1-based index the bound constrains
    bound: float | None
    computed: float | None
    margin: float | None      # >= 0 means satisfied
    applicable: bool
    reason: str = ""


@dataclass(frozen=True)
class BoundReport:
    graph_summary: str
    entries: tuple

    def failures(self, slack: float = 1e-9):
        """Applicable entries violated beyond slack scaled by the bound size."""
        return [e for e in self.entries
                if e.applicable and e.margin is not None
                and e.margin < -slack * max(1.0, abs(e.bound))]

    def applicable_entries(self):
        return [e for e in self.entries if e.applicable]


def _entry(name, kind, spectrum, index, maker) -> BoundEntry:
    try:
        bound = maker()
    except InapplicableBound as exc:
        return BoundEntry(name, kind, index, None, None, None, False, exc.reason)
    if index > len(spectrum.values):
        return BoundEntry(name, kind, index, bound, None, None, False,
                          f"spectrum depth {len(spectrum.values)} < index {index}")
    lam = spectrum.value_at(index)
    margin = (bound - lam) if kind == "upper" else (lam - bound)
    return BoundEntry(name, kind, index, bound, lam, margin, True)


def bound_report(graph: MetricGraph, spectrum: Spectrum, k_max: int = 6,
                 solver=None) -> BoundReport:
    """Evaluate every bound family against a computed spectrum.

    ``k_max`` caps the printed index of the k-dependent families; indices
    whose resolved flat position exceeds the spectrum depth are reported as
    inapplicable for that reason rather than silently dropped.
    """
    z = spectrum.zero_multiplicity()
    entries = []
    entries.append(_entry("lambda1_upper_mean", "upper", spectrum, 1,
                          lambda: lambda1_upper_mean(graph)))
    entries.append(_entry("lambda1_upper_cos", "upper", spectrum, 1,
                          lambda: lambda1_upper_cos(graph)))

    def gap_part(which):
        def maker():
            gb = lambda2_upper(graph)
            val = getattr(gb, which)
            _require(val is not None, f"graph not {which}")
            return val
        return maker

    for which in ("general", "bipartite", "equilateral"):
        entries.append(_entry(f"lambda2_upper_{which}", "upper", spectrum, 2,
                              gap_part(which)))

    entries.append(_entry("star_lower", "lower", spectrum, z + 1,
                          lambda: star_lower(graph)))
    entries.append(_entry("eulerian_lower", "lower", spectrum, z + 1,
                          lambda: eulerian_lower(graph, solver=solver).bound))

    for k in range(1, k_max + 1):
        entries.append(_entry(f"betti_upper[{k}]", "upper", spectrum, z + k,
                              lambda k=k: betti_upper(graph, k)))
        entries.append(_entry(f"betti_upper_equilateral[{k}]", "upper",
                              spectrum, z + k,
                              lambda k=k: betti_upper_equilateral(graph, k)))
        entries.append(_entry(f"pendant_tree_upper[{k}]", "upper", spectrum,
                              z + k, lambda k=k: pendant_tree_upper(graph, k)))
        entries.append(_entry(f"total_length_upper[{k}]", "upper", spectrum,
                              z + k, lambda k=k: total_length_upper(graph, k)))

    for k in range(1, k_max + 1):
        for variant in (C1, C2):
            def mk_lo(k=k, variant=variant):
                return weyl_bracket(graph, k, variant)[0]

            def mk_hi(k=k, variant=variant):
                return weyl_bracket(graph, k, variant)[1]
            entries.append(_entry(f"weyl_{variant.value}_lower[{k}]", "lower",
                                  spectrum, k, mk_lo))
            entries.append(_entry(f"weyl_{variant.value}_upper[{k}]", "upper",
                                  spectrum, k, mk_hi))

    summary = (f"|V|={len(graph.vertices)} |E|={len(graph.edges)} "
               f"L={graph.total_length:.6g}")
    return BoundReport(graph_summary=summary, entries=tuple(entries))
