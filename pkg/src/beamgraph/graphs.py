"""Metric-graph data model for fourth-order (beam) operators.

A metric graph is a combinatorial multigraph whose edges carry positive
lengths; each edge ``e`` is identified with the interval ``[0, length(e)]``.
Every edge contributes two endpoints (its left and right interval ends), and
the vertex set is a partition of the set of all endpoints.  Each vertex
carries a delta-type coupling condition of one of four kinds:

* ``C1`` -- continuity of the function only; endpoint curvatures are free
  (they vanish as natural conditions of the energy form).
* ``C2`` -- continuity plus one scalar constraint: the sigma-weighted sum of
  first normal derivatives vanishes.
* ``C3`` -- continuity plus proportionality of the first normal derivatives
  to the sigma weights.
* ``C4`` -- continuity plus vanishing of every first normal derivative.

Each kind additionally carries a real coupling strength ``alpha``; the third
normal derivatives balance against ``-alpha * value`` at the vertex.  The
value ``alpha = +inf`` is the extended condition: the function vanishes at
every endpoint of the vertex and the balance row disappears.

All types are immutable after construction and safe to share across threads.
Iteration order is deterministic (sorted identifiers) so that downstream
reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence


class Side(Enum):
    """Which end of an edge's parametrizing interval an endpoint sits at."""

    LEFT = "left"
    RIGHT = "right"

    def __repr__(self):
        return f"Side.{self.name}"


@dataclass(frozen=True)
class Endpoint:
    """One end of one edge; the atomic unit vertices are made of."""

    edge_id: str
    side: Side

    @property
    def sort_key(self):
        return (self.edge_id, self.side.value)

    def __repr__(self):
        return f"{self.edge_id}:{self.side.value}"


def left(edge_id: str) -> Endpoint:
    return Endpoint(edge_id, Side.LEFT)


def right(edge_id: str) -> Endpoint:
    return Endpoint(edge_id, Side.RIGHT)


class ConditionKind(Enum):
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"

    @property
    def needs_sigma(self) -> bool:
        return self in (ConditionKind.C2, ConditionKind.C3)

    def __repr__(self):
        return self.value


C1, C2, C3, C4 = ConditionKind.C1, ConditionKind.C2, ConditionKind.C3, ConditionKind.C4


@dataclass(frozen=True)
class VertexCondition:
    """Coupling data at one vertex.

    ``sigma`` maps each endpoint of the vertex to a nonzero real weight and
    must be present exactly for kinds C2 and C3.  ``alpha`` may be ``+inf``
    (extended condition) for every kind.
    """

    kind: ConditionKind
    alpha: float = 0.0
    sigma: Mapping[Endpoint, float] | None = None

    def __post_init__(self):
        if self.sigma is not None:
            object.__setattr__(self, "sigma", dict(self.sigma))

    @property
    def is_extended(self) -> bool:
        return math.isinf(self.alpha) and self.alpha > 0

    def sigma_at(self, ep: Endpoint) -> float:
        assert self.sigma is not None, "condition kind carries no sigma weights"
        return self.sigma[ep]


@dataclass(frozen=True)
class Edge:
    id: str
    length: float


@dataclass(frozen=True)
class Vertex:
    id: str
    condition: VertexCondition
    endpoints: frozenset[Endpoint]

    def __post_init__(self):
        object.__setattr__(self, "endpoints", frozenset(self.endpoints))

    @property
    def degree(self) -> int:
        return len(self.endpoints)

    def sorted_endpoints(self) -> list[Endpoint]:
        return sorted(self.endpoints, key=lambda ep: ep.sort_key)


class InvalidGraphError(ValueError):
    """Raised when an operation requires a valid graph and gets violations."""

    def __init__(self, violations: Sequence[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]


@dataclass(frozen=True)
class MetricGraph:
    """Immutable problem instance: combinatorics, lengths and couplings.

    ``union_ok=True`` marks graphs deliberately assembled (or produced by a
    disconnecting surgery) as disjoint unions; otherwise connectivity is a
    validation requirement.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    union_ok: bool = False

    def __post_init__(self):
        vs = tuple(sorted(self.vertices, key=lambda v: v.id))
        es = tuple(sorted(self.edges, key=lambda e: e.id))
        if len({v.id for v in vs}) != len(vs):
            raise ValueError("duplicate vertex ids")
        if len({e.id for e in es}) != len(es):
            raise ValueError("duplicate edge ids")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "edges", es)
        object.__setattr__(self, "_vmap", {v.id: v for v in vs})
        object.__setattr__(self, "_emap", {e.id: e for e in es})
        owner = {}
        for v in vs:
            for ep in v.endpoints:
                owner.setdefault(ep, v.id)
        object.__setattr__(self, "_owner", owner)

    # -- lookups ---------------------------------------------------------

    def vertex(self, vertex_id: str) -> Vertex:
        return self._vmap[vertex_id]

    def edge(self, edge_id: str) -> Edge:
        return self._emap[edge_id]

    def has_vertex(self, vertex_id: str) -> bool:
        return vertex_id in self._vmap

    def vertex_of(self, ep: Endpoint) -> Vertex:
        return self._vmap[self._owner[ep]]

    def edge_ends(self, edge_id: str) -> tuple[Vertex, Vertex]:
        """Vertices holding the left and right endpoints of an edge."""
        return self.vertex_of(left(edge_id)), self.vertex_of(right(edge_id))

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)

    @property
    def max_edge_length(self) -> float:
        return max(e.length for e in self.edges)

    def all_endpoints(self) -> list[Endpoint]:
        out = []
        for e in self.edges:
            out.append(left(e.id))
            out.append(right(e.id))
        return out

    # -- functional updates (used by surgery) ----------------------------

    def replace_vertices(self, drop: Iterable[str], add: Iterable[Vertex],
                         union_ok: bool | None = None) -> "MetricGraph":
        dropset = set(drop)
        vs = [v for v in self.vertices if v.id not in dropset] + list(add)
        return MetricGraph(tuple(vs), self.edges,
                           self.union_ok if union_ok is None else union_ok)

    def with_condition(self, vertex_id: str, condition: VertexCondition) -> "MetricGraph":
        v = self.vertex(vertex_id)
        return self.replace_vertices([vertex_id],
                                     [Vertex(vertex_id, condition, v.endpoints)])


# ---------------------------------------------------------------------------
# validation and combinatorial queries
# ---------------------------------------------------------------------------

def validate(graph: MetricGraph) -> ValidationReport:
    """Check every structural invariant; report-style, never raises.

    Idempotent and side-effect free.  Violations are short stable strings so
    callers (and the CLI) can name the failing invariant.
    """
    violations: list[str] = []

    for e in graph.edges:
        if not (e.length > 0.0) or not math.isfinite(e.length):
            violations.append(f"non-positive length: edge {e.id!r} has length {e.length}")

    seen: dict[Endpoint, str] = {}
    for v in graph.vertices:
        for ep in v.endpoints:
            if ep.edge_id not in {e.id for e in graph.edges}:
                violations.append(f"dangling endpoint: {ep!r} at vertex {v.id!r} references no edge")
            if ep in seen:
                violations.append(f"endpoint shared: {ep!r} in vertices {seen[ep]!r} and {v.id!r}")
            seen[ep] = v.id
    for ep in graph.all_endpoints():
        if ep not in seen:
            violations.append(f"dangling endpoint: {ep!r} belongs to no vertex")

    for v in graph.vertices:
        if len(v.endpoints) == 0:
            violations.append(f"isolated vertex: {v.id!r} has no endpoints")
        cond = v.condition
        a = cond.alpha
        if math.isnan(a) or (math.isinf(a) and a < 0):
            violations.append(f"bad strength: vertex {v.id!r} has alpha {a}")
        if cond.kind.needs_sigma:
            if cond.sigma is None:
                violations.append(f"sigma incomplete: vertex {v.id!r} kind {cond.kind.value} has no sigma map")
            else:
                keys = set(cond.sigma.keys())
                if keys != set(v.endpoints):
                    violations.append(f"sigma incomplete: vertex {v.id!r} sigma keys do not match its endpoints")
                for ep, s in cond.sigma.items():
                    if s == 0.0 or not math.isfinite(s):
                        violations.append(f"sigma zero: vertex {v.id!r} endpoint {ep!r}")
        elif cond.sigma is not None:
            violations.append(f"sigma unexpected: vertex {v.id!r} kind {cond.kind.value} carries sigma")

    if not violations and not graph.union_ok and not is_connected(graph):
        violations.append("disconnected: graph is not connected")

    return ValidationReport(ok=not violations, violations=tuple(violations))


def ensure_valid(graph: MetricGraph) -> None:
    report = validate(graph)
    if not report.ok:
        raise InvalidGraphError(report.violations)


def _adjacency(graph: MetricGraph) -> dict[str, set[str]]:
    adj: dict[str, set[str]] = {v.id: set() for v in graph.vertices}
    for e in graph.edges:
        u, w = graph.edge_ends(e.id)
        adj[u.id].add(w.id)
        adj[w.id].add(u.id)
    return adj


def is_connected(graph: MetricGraph) -> bool:
    if not graph.vertices:
        return False
    adj = _adjacency(graph)
    start = graph.vertices[0].id
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(graph.vertices)


def connected_components(graph: MetricGraph) -> list[MetricGraph]:
    """Split a union into its connected components (each marked connected)."""
    adj = _adjacency(graph)
    unvisited = {v.id for v in graph.vertices}
    comps = []
    while unvisited:
        start = min(unvisited)
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        unvisited -= seen
        vs = [v for v in graph.vertices if v.id in seen]
        eids = {ep.edge_id for v in vs for ep in v.endpoints}
        es = [e for e in graph.edges if e.id in eids]
        comps.append(MetricGraph(tuple(vs), tuple(es)))
    return comps


def betti_number(graph: MetricGraph) -> int:
    """Number of independent cycles, |E| - |V| + 1; zero exactly on trees."""
    if not is_connected(graph):
        raise InvalidGraphError(["disconnected: betti_number requires a connected graph"])
    return len(graph.edges) - len(graph.vertices) + 1


def is_bipartite(graph: MetricGraph) -> bool:
    color: dict[str, int] = {}
    for e in graph.edges:
        u, w = graph.edge_ends(e.id)
        if u.id == w.id:
            return False  # self-loop is an odd cycle
    for v in graph.vertices:
        if v.id in color:
            continue
        color[v.id] = 0
        stack = [v.id]
        while stack:
            u = stack.pop()
            for e in graph.edges:
                a, b = graph.edge_ends(e.id)
                for x, y in ((a.id, b.id), (b.id, a.id)):
                    if x == u:
                        if y not in color:
                            color[y] = 1 - color[u]
                            stack.append(y)
                        elif color[y] == color[u]:
                            return False
    return True


def is_eulerian(graph: MetricGraph) -> bool:
    """All vertex degrees even, so a closed trail covers every edge once."""
    return all(v.degree % 2 == 0 for v in graph.vertices)


def is_equilateral(graph: MetricGraph, rel_tol: float = 1e-12) -> bool:
    lengths = [e.length for e in graph.edges]
    l0 = lengths[0]
    return all(math.isclose(l, l0, rel_tol=rel_tol) for l in lengths)


def is_star(graph: MetricGraph) -> bool:
    """One center, every edge runs from it to a distinct degree-one leaf."""
    if any(graph.vertex_of(left(e.id)).id == graph.vertex_of(right(e.id)).id
           for e in graph.edges):
        return False
    for center in graph.vertices:
        others = [v for v in graph.vertices if v.id != center.id]
        if all(v.degree == 1 for v in others) and center.degree == len(graph.edges) \
                and len(others) == len(graph.edges):
            return True
    return False


def bridges(graph: MetricGraph) -> list[Edge]:
    """Edges whose removal disconnects their two end vertices.

    Brute force (one reachability sweep per edge); fine at desk scale and
    correct on multigraphs with self-loops.
    """
    out = []
    for e in graph.edges:
        u, w = graph.edge_ends(e.id)
        if u.id == w.id:
            continue
        adj: dict[str, set[str]] = {v.id: set() for v in graph.vertices}
        for f in graph.edges:
            if f.id == e.id:
                continue
            a, b = graph.edge_ends(f.id)
            adj[a.id].add(b.id)
            adj[b.id].add(a.id)
        seen = {u.id}
        stack = [u.id]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        if w.id not in seen:
            out.append(e)
    return out


@dataclass(frozen=True)
class GraphPredicates:
    eulerian: bool
    bipartite: bool
    equilateral: bool
    max_edge_length: float
    total_length: float


def graph_predicates(graph: MetricGraph) -> GraphPredicates:
    return GraphPredicates(
        eulerian=is_eulerian(graph),
        bipartite=is_bipartite(graph),
        equilateral=is_equilateral(graph),
        max_edge_length=graph.max_edge_length,
        total_length=graph.total_length,
    )


def angle_condition(vertex: Vertex, angles: Sequence[float]) -> VertexCondition:
    """Planar-joint coupling: C2 with weights sin(angle) per endpoint.

    One angle per endpoint, paired in sorted endpoint order.  Angles
    congruent to 0 or pi are rejected: their sine weight vanishes and that
    degenerate joint is out of scope.
    """
    eps = vertex.sorted_endpoints()
    if len(angles) != len(eps):
        raise ValueError(f"need one angle per endpoint ({len(eps)}), got {len(angles)}")
    sigma = {}
    for ep, gamma in zip(eps, angles):
        s = math.sin(gamma)
        if abs(s) < 1e-12:
            raise ValueError(f"angle {gamma} at {ep!r} is congruent to 0 or pi; "
                             "sine weight vanishes")
        sigma[ep] = s
    return VertexCondition(ConditionKind.C2, vertex.condition.alpha, sigma)


# ---------------------------------------------------------------------------
# small construction helpers
# ---------------------------------------------------------------------------

def _unit_sigma(eps: Iterable[Endpoint]) -> dict[Endpoint, float]:
    return {ep: 1.0 for ep in eps}


def make_condition(kind: ConditionKind, alpha: float,
                   eps: Iterable[Endpoint],
                   sigma: Mapping[Endpoint, float] | None = None) -> VertexCondition:
    """Condition with sigma defaulted to unit weights where required."""
    if kind.needs_sigma:
        return VertexCondition(kind, alpha, dict(sigma) if sigma else _unit_sigma(eps))
    return VertexCondition(kind, alpha, None)


def interval(length: float = 1.0, kind: ConditionKind = C4,
             alpha: float = 0.0, edge_id: str = "e0",
             kinds: tuple[ConditionKind, ConditionKind] | None = None,
             alphas: tuple[float, float] | None = None) -> MetricGraph:
    """Single edge with degree-one vertices ``a`` (left) and ``b`` (right)."""
    ka, kb = kinds if kinds else (kind, kind)
    aa, ab = alphas if alphas else (alpha, alpha)
    epl, epr = left(edge_id), right(edge_id)
    return MetricGraph(
        vertices=(
            Vertex("a", make_condition(ka, aa, [epl]), frozenset([epl])),
            Vertex("b", make_condition(kb, ab, [epr]), frozenset([epr])),
        ),
        edges=(Edge(edge_id, length),),
    )


def loop(length: float = 1.0, kind: ConditionKind = C4, alpha: float = 0.0,
         sigma: tuple[float, float] | None = None, edge_id: str = "e0") -> MetricGraph:
    """Single edge with both endpoints at one vertex ``v``.

    For kinds C2/C3 the pair ``sigma`` assigns weights to the (left, right)
    endpoints; equal weights on C2 and opposite weights on C3 both realize
    the periodic beam.
    """
    epl, epr = left(edge_id), right(edge_id)
    sig = None
    if kind.needs_sigma:
        s = sigma if sigma else (1.0, 1.0)
        sig = {epl: s[0], epr: s[1]}
    return MetricGraph(
        vertices=(Vertex("v", make_condition(kind, alpha, [epl, epr], sig),
                         frozenset([epl, epr])),),
        edges=(Edge(edge_id, length),),
    )


def star(leg_lengths: Sequence[float], kind: ConditionKind = C4,
         alpha: float = 0.0) -> MetricGraph:
    """Center vertex ``c`` with one leg per length; leaves ``l0``, ``l1``, ..."""
    edges = []
    verts = []
    center_eps = []
    for i, l in enumerate(leg_lengths):
        eid = f"e{i}"
        edges.append(Edge(eid, l))
        center_eps.append(left(eid))
        lep = right(eid)
        verts.append(Vertex(f"l{i}", make_condition(kind, alpha, [lep]), frozenset([lep])))
    verts.append(Vertex("c", make_condition(kind, alpha, center_eps), frozenset(center_eps)))
    return MetricGraph(tuple(verts), tuple(edges))


def path(lengths: Sequence[float], kind: ConditionKind = C4,
         alpha: float = 0.0,
         interior_kind: ConditionKind | None = None) -> MetricGraph:
    """Chain of edges; vertices ``v0 .. vn`` left to right."""
    ik = interior_kind if interior_kind else kind
    edges = [Edge(f"e{i}", l) for i, l in enumerate(lengths)]
    verts = []
    n = len(lengths)
    for j in range(n + 1):
        eps = []
        if j > 0:
            eps.append(right(f"e{j - 1}"))
        if j < n:
            eps.append(left(f"e{j}"))
        k = kind if j in (0, n) else ik
        verts.append(Vertex(f"v{j}", make_condition(k, alpha, eps), frozenset(eps)))
    return MetricGraph(tuple(verts), tuple(edges))


def disjoint_union(g1: MetricGraph, g2: MetricGraph,
                   prefix2: str | None = None) -> MetricGraph:
    """Union of two graphs as one (disconnected) instance.

    Identifier clashes are resolved by prefixing the second graph's vertex
    and edge ids with ``prefix2`` (default ``"p:"`` when a clash exists).
    """
    ids1 = {v.id for v in g1.vertices} | {e.id for e in g1.edges}
    ids2 = {v.id for v in g2.vertices} | {e.id for e in g2.edges}
    pre = prefix2
    if pre is None:
        pre = "p:" if ids1 & ids2 else ""
    def ren_ep(ep: Endpoint) -> Endpoint:
        return Endpoint(pre + ep.edge_id, ep.side)
    verts2 = []
    for v in g2.vertices:
        sig = None
        if v.condition.sigma is not None:
            sig = {ren_ep(ep): s for ep, s in v.condition.sigma.items()}
        cond = VertexCondition(v.condition.kind, v.condition.alpha, sig)
        verts2.append(Vertex(pre + v.id, cond, frozenset(ren_ep(ep) for ep in v.endpoints)))
    edges2 = [Edge(pre + e.id, e.length) for e in g2.edges]
    return MetricGraph(g1.vertices + tuple(verts2), g1.edges + tuple(edges2),
                       union_ok=True)
