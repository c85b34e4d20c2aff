"""Graph surgery: pure transformations plus certified interlacing records.

Every operation returns the transformed graph together with a
``SurgeryRecord`` whose inequalities are copied verbatim from the source
tables; offsets are never extrapolated to unlisted combinations, which are
hard errors instead.  Records are data: the verification harness replays
them against computed spectra.

An ``Interlacing`` atom states ``lam_{k+lo_off}(lo_side) <=
lam_{k+hi_off}(hi_side)`` for all admissible ``k``; sides refer to the
spectrum before the surgery, after it, or to an auxiliary graph carried by
the record (the pendant piece, for instance).  Hypotheses that need spectra
to evaluate (pendant index conditions, nonnegativity windows) are stored as
obligations and resolved by the harness, not here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .graphs import (C1, C2, C3, C4, ConditionKind, Edge, Endpoint,
                     InvalidGraphError, MetricGraph, Side, Vertex,
                     VertexCondition, disjoint_union, ensure_valid,
                     is_connected, left, right, validate)


class IllegalSurgeryError(ValueError):
    """Requested combination is not in the certified tables."""


# ---------------------------------------------------------------------------
# record structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrictFlag:
    """Hypotheses under which an inequality is certified strict."""

    kind: str                 # "simple_nonzero" | "pendant" | "insertion"
    vertex: str | None = None
    side: str = "after"


@dataclass(frozen=True)
class Interlacing:
    lo_side: str              # "before" | "after" | "aux"
    lo_off: int
    hi_side: str
    hi_off: int
    k_min: int = 1
    k_min_rule: tuple | None = None   # dynamic validity domain, see harness
    strict: StrictFlag | None = None

    def describe(self) -> str:
        def idx(off):
            return "k" if off == 0 else f"k{off:+d}"
        dom = f"k >= {self.k_min}" if self.k_min_rule is None else str(self.k_min_rule)
        return (f"lam_{idx(self.lo_off)}({self.lo_side}) <= "
                f"lam_{idx(self.hi_off)}({self.hi_side}) for {dom}")


@dataclass(frozen=True)
class Obligation:
    """A hypothesis the harness must confirm before checking inequalities."""

    kind: str                 # "aux_leq_before"
    r: int = 0
    k0: int = 0

    def describe(self) -> str:
        return f"lam_{self.r}(aux) <= lam_{self.k0}(before)"


@dataclass(frozen=True)
class SurgeryRecord:
    op: str
    affected: tuple
    classification: str       # "I" | "II" | "III" | "n/a"
    inequalities: tuple
    validity: str
    obligations: tuple = ()
    aux_graph: MetricGraph | None = None
    notes: str = ""

    def max_offset(self) -> int:
        out = 0
        for q in self.inequalities:
            out = max(out, q.lo_off, q.hi_off)
        return out


def _bracket(upper: int, k_min: int = 1, strict: StrictFlag | None = None,
             lower_shift: int = 0) -> tuple:
    """Standard two-sided record: lam_k(before) <= lam_{k+s}(after) <= lam_{k+upper}(before)."""
    return (
        Interlacing("before", 0, "after", lower_shift, k_min, strict=strict),
        Interlacing("after", lower_shift, "before", upper, k_min),
    )


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _sigma_for(endpoints, inherited: dict, override) -> dict:
    sigma = {}
    for ep in endpoints:
        if override and ep in override:
            sigma[ep] = override[ep]
        elif ep in inherited:
            sigma[ep] = inherited[ep]
        else:
            sigma[ep] = 1.0
    return sigma


def _merge_vertices(graph: MetricGraph, ids: list, kind: ConditionKind,
                    alpha: float, sigma_override=None,
                    merged_id: str | None = None) -> MetricGraph:
    verts = [graph.vertex(i) for i in ids]
    eps = frozenset(ep for v in verts for ep in v.endpoints)
    inherited: dict = {}
    for v in verts:
        if v.condition.sigma:
            inherited.update(v.condition.sigma)
    sigma = _sigma_for(sorted(eps, key=lambda e: e.sort_key), inherited,
                       sigma_override) if kind.needs_sigma else None
    new_id = merged_id if merged_id is not None else min(ids)
    merged = Vertex(new_id, VertexCondition(kind, alpha, sigma), eps)
    out = graph.replace_vertices(ids, [merged])
    return replace(out, union_ok=not is_connected(out))


def _fresh_vertex_id(graph: MetricGraph, base: str) -> str:
    vid = base
    while graph.has_vertex(vid):
        vid += "'"
    return vid


def _fresh_edge_id(graph: MetricGraph) -> str:
    taken = {e.id for e in graph.edges}
    n = len(graph.edges)
    while f"e{n}" in taken:
        n += 1
    return f"e{n}"


# ---------------------------------------------------------------------------
# condition change (single vertex or all vertices)
# ---------------------------------------------------------------------------

# (old, new) -> (shift a, upper b as function of degree):
# lam_k(before) <= lam_{k+a}(after) <= lam_{k+b}(before)
_CONDITION_TABLE = {
    (C1, C2): (0, lambda d: 1),
    (C1, C3): (0, lambda d: d - 1),
    (C1, C4): (0, lambda d: d),
    (C2, C3): (1, lambda d: d),
    (C2, C4): (0, lambda d: d - 1),
    (C3, C4): (0, lambda d: 1),
}


def change_condition(graph: MetricGraph, vertex_id: str,
                     new_kind: ConditionKind, sigma=None):
    """Swap the coupling kind at one vertex, strength preserved.

    The six forward transitions carry the printed offsets; the reversed
    transitions carry the same inequalities read from the other side.
    """
    ensure_valid(graph)
    v = graph.vertex(vertex_id)
    old = v.condition.kind
    if old is new_kind:
        raise IllegalSurgeryError(f"no-op condition change {old.value}->{new_kind.value}")
    d = v.degree

    if new_kind.needs_sigma:
        inherited = dict(v.condition.sigma) if v.condition.sigma else {}
        sig = _sigma_for(v.sorted_endpoints(), inherited, sigma)
    else:
        sig = None
    new_graph = graph.with_condition(
        vertex_id, VertexCondition(new_kind, v.condition.alpha, sig))

    mirrored = False
    key = (old, new_kind)
    if key not in _CONDITION_TABLE:
        key = (new_kind, old)
        mirrored = True
    if key not in _CONDITION_TABLE:
        raise IllegalSurgeryError(
            f"condition change {old.value}->{new_kind.value} has no certified offsets")
    a, brule = _CONDITION_TABLE[key]
    b = brule(d)
    if not mirrored:
        ineqs = (
            Interlacing("before", 0, "after", a),
            Interlacing("after", a, "before", b),
        )
    else:
        ineqs = (
            Interlacing("after", 0, "before", a),
            Interlacing("before", a, "after", b),
        )
    return new_graph, SurgeryRecord(
        op="change_condition",
        affected=(vertex_id,),
        classification="n/a",
        inequalities=ineqs,
        validity="k >= 1",
        notes=f"{old.value}->{new_kind.value} at degree {d}"
              + (" (mirrored table entry)" if mirrored else ""),
    )


def change_condition_all(graph: MetricGraph, new_kind: ConditionKind,
                         sigma_by_vertex=None):
    """All-vertex C1 -> C2 swap; upper offset grows to the vertex count."""
    ensure_valid(graph)
    if new_kind is not C2 or any(v.condition.kind is not C1 for v in graph.vertices):
        raise IllegalSurgeryError(
            "all-vertex change is certified for C1 -> C2 only")
    g = graph
    for v in graph.vertices:
        sig = (sigma_by_vertex or {}).get(v.id)
        inherited: dict = {}
        g = g.with_condition(v.id, VertexCondition(
            C2, v.condition.alpha, _sigma_for(v.sorted_endpoints(), inherited, sig)))
    nv = len(graph.vertices)
    return g, SurgeryRecord(
        op="change_condition_all",
        affected=tuple(v.id for v in graph.vertices),
        classification="n/a",
        inequalities=_bracket(nv),
        validity="k >= 1",
        notes=f"C1->C2 at all {nv} vertices",
    )


# ---------------------------------------------------------------------------
# strength change
# ---------------------------------------------------------------------------

# upper offset when one vertex of the given kind is driven to +inf
_EXTENDED_UPPER = {C1: lambda d: 1, C2: lambda d: 2, C3: lambda d: d,
                   C4: lambda d: d + 1}


def change_strength(graph: MetricGraph, new_alphas: dict):
    """Raise coupling strengths; eigenvalues move up by at most rank-many slots.

    ``new_alphas`` maps vertex ids to their new strengths; omitted vertices
    keep theirs.  Strengths may only increase (a decrease has no monotone
    record and is rejected).  A single vertex driven to ``+inf`` uses the
    extended-condition offsets, which depend on the coupling kind.
    """
    ensure_valid(graph)
    changed = []
    for vid, a_new in new_alphas.items():
        a_old = graph.vertex(vid).condition.alpha
        if a_new < a_old:
            raise IllegalSurgeryError(
                f"strength decrease at {vid!r} ({a_old} -> {a_new}) has no monotone record")
        if a_new > a_old:
            changed.append(vid)

    g = graph
    for vid, a_new in sorted(new_alphas.items()):
        v = g.vertex(vid)
        g = g.with_condition(vid, VertexCondition(v.condition.kind, float(a_new),
                                                  v.condition.sigma))

    strict = None
    if len(changed) == 0:
        upper = 0
        note = "identity strength change"
    elif len(changed) == 1:
        vid = changed[0]
        v = graph.vertex(vid)
        if math.isinf(new_alphas[vid]):
            upper = _EXTENDED_UPPER[v.condition.kind](v.degree)
            note = f"alpha -> +inf at {vid!r} ({v.condition.kind.value}, degree {v.degree})"
        else:
            upper = 1
            note = f"alpha increase at {vid!r}"
            strict = StrictFlag("simple_nonzero", vertex=vid, side="after")
    else:
        if any(math.isinf(new_alphas[vid]) for vid in changed):
            raise IllegalSurgeryError(
                "simultaneous finite and extended strength changes are not certified")
        upper = len(graph.vertices)
        note = f"alpha increase at {len(changed)} vertices"

    return g, SurgeryRecord(
        op="change_strength",
        affected=tuple(changed),
        classification="n/a",
        inequalities=(
            Interlacing("before", 0, "after", 0, strict=strict),
            Interlacing("after", 0, "before", upper),
        ),
        validity="k >= 1",
        notes=note,
    )


# ---------------------------------------------------------------------------
# gluing
# ---------------------------------------------------------------------------

# (kind v1, kind v2, glued kind) -> classification
GLUE_TABLE = {
    (C1, C1, C1): "I", (C1, C2, C1): "I", (C1, C3, C1): "I", (C1, C4, C1): "I",
    (C2, C2, C2): "I", (C2, C4, C2): "I", (C4, C4, C4): "I",
    (C2, C1, C2): "II", (C3, C3, C3): "II", (C3, C4, C3): "II",
    (C3, C1, C3): "III", (C4, C1, C4): "III", (C4, C2, C4): "III",
    (C4, C3, C4): "III",
    (C1, C1, C2): "composed",   # remark: glued kind imposed on neither vertex
}


def _glue_upper(cls: str, d2: int) -> int:
    if cls == "I":
        return 1
    if cls in ("II", "composed"):
        return 2
    return d2 + 1


def glue(graph: MetricGraph, v1_id: str, v2_id: str, glued_kind: ConditionKind,
         sigma=None, merged_id: str | None = None):
    """Identify two vertices; strengths add, eigenvalues never drop by rank.

    The triple (kind at v1, kind at v2, glued kind) must be certified; order
    matters because the classification does.  Sigma weights carry over per
    endpoint; endpoints arriving without one default to unit weight unless
    ``sigma`` overrides them.
    """
    if v1_id == v2_id:
        raise IllegalSurgeryError("gluing a vertex with itself")
    report = validate(graph)
    if not report.ok:
        raise InvalidGraphError(report.violations)
    v1, v2 = graph.vertex(v1_id), graph.vertex(v2_id)
    key = (v1.condition.kind, v2.condition.kind, glued_kind)
    if key not in GLUE_TABLE:
        raise IllegalSurgeryError(
            f"gluing triple ({key[0].value},{key[1].value})->{key[2].value} is not certified")
    cls = GLUE_TABLE[key]
    upper = _glue_upper(cls, v2.degree)
    alpha = v1.condition.alpha + v2.condition.alpha
    out = _merge_vertices(graph, [v1_id, v2_id], glued_kind, alpha, sigma,
                          merged_id)
    return out, SurgeryRecord(
        op="glue",
        affected=(v1_id, v2_id),
        classification="II" if cls == "composed" else cls,
        inequalities=_bracket(upper),
        validity="k >= 1",
        notes=f"triple ({key[0].value},{key[1].value})->{key[2].value}"
              + (", composed case" if cls == "composed" else "")
              + (f", d2={v2.degree}" if cls == "III" else ""),
    )


def glue_many(graph: MetricGraph, vertex_ids, glued_kind: ConditionKind,
              sigma=None):
    """Identify m+1 vertices pairwise; offsets accumulate once per pair."""
    ids = list(vertex_ids)
    if len(ids) < 2:
        raise IllegalSurgeryError("need at least two vertices to glue")
    g = graph
    cur = ids[0]
    classes = []
    for nxt in ids[1:]:
        g, rec = glue(g, cur, nxt, glued_kind, sigma)
        classes.append(rec.classification)
        cur = min(cur, nxt)
    if any(c == "III" for c in classes) or len(set(classes)) > 1:
        raise IllegalSurgeryError(
            f"multi-vertex gluing certified for uniform class I or II, got {classes}")
    m = len(ids) - 1
    upper = m if classes[0] == "I" else 2 * m
    return g, SurgeryRecord(
        op="glue_many",
        affected=tuple(ids),
        classification=classes[0],
        inequalities=_bracket(upper),
        validity="k >= 1",
        notes=f"{len(ids)} vertices glued pairwise, class {classes[0]}",
    )


def flower(graph: MetricGraph, sigma=None):
    """Merge every vertex into one; edges become petals.

    Requires a uniform coupling kind; the merged strength is the sum of all
    strengths.  Idempotent: the flower of a flower is itself (offsets 0).
    """
    ensure_valid(graph)
    kinds = {v.condition.kind for v in graph.vertices}
    if len(kinds) > 1:
        raise IllegalSurgeryError(
            f"flower needs one uniform condition kind, got {sorted(k.value for k in kinds)}")
    kind = kinds.pop()
    nv = len(graph.vertices)
    alpha = sum(v.condition.alpha for v in graph.vertices)
    out = _merge_vertices(graph, [v.id for v in graph.vertices], kind, alpha,
                          sigma)
    upper = (2 * nv - 2) if kind is C3 else (nv - 1)
    return out, SurgeryRecord(
        op="flower",
        affected=tuple(v.id for v in graph.vertices),
        classification="n/a",
        inequalities=_bracket(upper),
        validity="k >= 1",
        notes=f"kind {kind.value}, {nv} vertices merged",
    )


# ---------------------------------------------------------------------------
# splitting
# ---------------------------------------------------------------------------

# v0 kind -> unordered descendant kind pairs that are certified
_SPLIT_PATTERNS = {
    C1: {frozenset([C1])},
    C3: {frozenset([C3]), frozenset([C1, C3])},
    C4: {frozenset([C4]), frozenset([C1, C4]), frozenset([C2, C4]),
         frozenset([C3, C4])},
}


def split(graph: MetricGraph, vertex_id: str, part1,
          cond1: tuple, cond2: tuple, sigma1=None, sigma2=None):
    """Split one vertex in two; eigenvalues never increase.

    ``part1`` lists the endpoints staying with the first descendant;
    ``cond1``/``cond2`` are (kind, alpha) pairs with strengths summing to the
    original.  Splitting is certified one-sided only: it is not a converse
    of gluing.  The result may be disconnected; it is then marked a union.
    """
    ensure_valid(graph)
    v0 = graph.vertex(vertex_id)
    if v0.condition.is_extended:
        raise IllegalSurgeryError("splitting an extended (alpha=+inf) vertex is not certified")
    kind1, alpha1 = cond1
    kind2, alpha2 = cond2
    pats = _SPLIT_PATTERNS.get(v0.condition.kind, set())
    if frozenset([kind1, kind2]) not in pats:
        raise IllegalSurgeryError(
            f"split pattern {v0.condition.kind.value}->({kind1.value},{kind2.value}) is not certified")
    if not math.isclose(alpha1 + alpha2, v0.condition.alpha, rel_tol=1e-12,
                        abs_tol=1e-12):
        raise IllegalSurgeryError(
            f"descendant strengths {alpha1}+{alpha2} do not sum to {v0.condition.alpha}")
    p1 = frozenset(part1)
    p2 = v0.endpoints - p1
    if not p1 or not p2 or not p1 <= v0.endpoints:
        raise IllegalSurgeryError("endpoint partition must split the vertex in two nonempty parts")

    inherited = dict(v0.condition.sigma) if v0.condition.sigma else {}

    def descendant(suffix, eps, kind, alpha, override):
        sig = _sigma_for(sorted(eps, key=lambda e: e.sort_key), inherited,
                         override) if kind.needs_sigma else None
        return Vertex(_fresh_vertex_id(graph, f"{vertex_id}.{suffix}"),
                      VertexCondition(kind, alpha, sig), frozenset(eps))

    d1 = descendant(1, p1, kind1, alpha1, sigma1)
    d2 = descendant(2, p2, kind2, alpha2, sigma2)
    out = graph.replace_vertices([vertex_id], [d1, d2])
    out = replace(out, union_ok=not is_connected(out))
    return out, SurgeryRecord(
        op="split",
        affected=(vertex_id, d1.id, d2.id),
        classification="n/a",
        inequalities=(Interlacing("after", 0, "before", 0),),
        validity="k >= 1",
        notes=f"{v0.condition.kind.value}->({kind1.value},{kind2.value})",
    )


# ---------------------------------------------------------------------------
# pendant attachment
# ---------------------------------------------------------------------------

def attach_pendant(graph: MetricGraph, pendant: MetricGraph, v_id: str,
                   w_id: str, glued_kind: ConditionKind, r: int = 1,
                   k0: int = 1, sigma=None):
    """Glue vertex w of a pendant graph onto vertex v; eigenvalues drop.

    The record is parametrized by (r, k0) and is conditional on
    ``lam_r(pendant) <= lam_k0(graph)``, stored as an obligation for the
    harness.  Class III offsets use the degree of whichever vertex sits in
    the second slot of the matched gluing triple.
    """
    ensure_valid(graph)
    ensure_valid(pendant)
    union = disjoint_union(graph, pendant)
    w_in_union = w_id if union.has_vertex(w_id) and not graph.has_vertex(w_id) \
        else "p:" + w_id
    if not union.has_vertex(w_in_union):
        raise IllegalSurgeryError(f"pendant vertex {w_id!r} not found")
    v = graph.vertex(v_id)
    w = pendant.vertex(w_id)

    # theorem orientation puts the pendant vertex first; fall back to the
    # other order when only that one is certified
    for key, d2 in (((w.condition.kind, v.condition.kind, glued_kind), v.degree),
                    ((v.condition.kind, w.condition.kind, glued_kind), w.degree)):
        if key in GLUE_TABLE:
            cls = GLUE_TABLE[key]
            if cls == "composed":
                cls = "II"
            break
    else:
        raise IllegalSurgeryError(
            f"pendant gluing ({v.condition.kind.value},{w.condition.kind.value})"
            f"->{glued_kind.value} is not certified")

    drop = {"I": r - 1, "II": r - 2}.get(cls, r - d2 - 1)
    alpha = v.condition.alpha + w.condition.alpha
    out = _merge_vertices(union, [v_id, w_in_union], glued_kind, alpha, sigma,
                          merged_id=v_id)
    out = replace(out, union_ok=not is_connected(out))
    if out.union_ok:
        raise IllegalSurgeryError("pendant attachment must yield a connected graph")
    return out, SurgeryRecord(
        op="attach_pendant",
        affected=(v_id, w_id),
        classification=cls,
        inequalities=(
            Interlacing("after", drop, "before", 0, k_min=k0,
                        strict=StrictFlag("pendant", vertex=v_id)),
        ),
        validity=f"k >= k0 = {k0}, given lam_{r}(pendant) <= lam_{k0}(graph)",
        obligations=(Obligation("aux_leq_before", r=r, k0=k0),),
        aux_graph=pendant,
        notes=f"class {cls}, r={r}" + (f", d={d2}" if cls == "III" else ""),
    )


# ---------------------------------------------------------------------------
# graph insertion at a vertex
# ---------------------------------------------------------------------------

# (v0 kind, first descendant kind, second descendant kind) -> classification
INSERT_TABLE = {}
for _w2 in (C1, C2, C3, C4):
    INSERT_TABLE[(C4, C4, _w2)] = "I"
    INSERT_TABLE[(C1, C4, _w2)] = "III"
    INSERT_TABLE[(C2, C4, _w2)] = "III"
    INSERT_TABLE[(C3, C4, _w2)] = "III"
INSERT_TABLE[(C1, C1, C1)] = "I"
INSERT_TABLE[(C3, C3, C1)] = "II"
INSERT_TABLE[(C3, C3, C3)] = "II"


def insert_graph(graph: MetricGraph, v0_id: str, inner: MetricGraph,
                 attach: dict, kinds: tuple, alphas: tuple,
                 sigma1=None, sigma2=None):
    """Replace a vertex by a graph, rewiring its edges to two host vertices.

    ``inner`` must carry C4 couplings with zero strength everywhere before
    insertion.  ``attach`` maps each endpoint of v0 to one of exactly two
    vertices of ``inner``; those become the post-insertion descendants,
    re-equipped with ``kinds`` and ``alphas`` (summing to the strength of
    v0).  Certified only for the printed kind triples, and only on the index
    range where the original eigenvalues are nonnegative.
    """
    ensure_valid(graph)
    ensure_valid(inner)
    for v in inner.vertices:
        if v.condition.kind is not C4 or v.condition.alpha != 0.0:
            raise IllegalSurgeryError(
                "inserted graph must carry C4 couplings with zero strength")
    v0 = graph.vertex(v0_id)
    targets = sorted(set(attach.values()))
    if len(targets) != 2:
        raise IllegalSurgeryError("insertion needs exactly two descendant vertices")
    if set(attach.keys()) != set(v0.endpoints):
        raise IllegalSurgeryError("attachment map must cover exactly the endpoints of v0")
    kind1, kind2 = kinds
    key = (v0.condition.kind, kind1, kind2)
    if key not in INSERT_TABLE:
        raise IllegalSurgeryError(
            f"insertion triple ({key[0].value};{key[1].value},{key[2].value}) is not in the table")
    cls = INSERT_TABLE[key]
    a1, a2 = alphas
    if not math.isclose(a1 + a2, v0.condition.alpha, rel_tol=1e-12, abs_tol=1e-12):
        raise IllegalSurgeryError(
            f"descendant strengths {a1}+{a2} do not sum to {v0.condition.alpha}")

    clash = ({x.id for x in graph.vertices} | {e.id for e in graph.edges}) & \
            ({x.id for x in inner.vertices} | {e.id for e in inner.edges})
    pre = "i:" if clash else ""

    def ren(ep: Endpoint) -> Endpoint:
        return Endpoint(pre + ep.edge_id, ep.side)

    new_edges = list(graph.edges) + [Edge(pre + e.id, e.length) for e in inner.edges]
    inherited = dict(v0.condition.sigma) if v0.condition.sigma else {}

    new_verts = [v for v in graph.vertices if v.id != v0_id]
    for j, w_id in enumerate(targets):
        w = inner.vertex(w_id)
        eps = {ren(ep) for ep in w.endpoints}
        eps |= {ep for ep, tgt in attach.items() if tgt == w_id}
        kind = (kind1, kind2)[j]
        alpha = (a1, a2)[j]
        override = (sigma1, sigma2)[j]
        sig = _sigma_for(sorted(eps, key=lambda e: e.sort_key), inherited,
                         override) if kind.needs_sigma else None
        new_verts.append(Vertex(pre + w_id, VertexCondition(kind, alpha, sig),
                                frozenset(eps)))
    for w in inner.vertices:
        if w.id in targets:
            continue
        new_verts.append(Vertex(pre + w.id, w.condition,
                                frozenset(ren(ep) for ep in w.endpoints)))

    out = MetricGraph(tuple(new_verts), tuple(new_edges))
    offset = {"I": 0, "II": 1, "III": v0.degree}[cls]
    return out, SurgeryRecord(
        op="insert_graph",
        affected=(v0_id,) + tuple(pre + t for t in targets),
        classification=cls,
        inequalities=(
            Interlacing("after", 0, "before", offset,
                        k_min_rule=("before_nonneg",),
                        strict=StrictFlag("insertion", vertex=v0_id, side="before")),
        ),
        validity="k with lam_k(before) >= 0",
        notes=f"triple ({key[0].value};{key[1].value},{key[2].value}), class {cls}"
              + (f", d={v0.degree}" if cls == "III" else ""),
    )


# ---------------------------------------------------------------------------
# adding an edge between existing vertices
# ---------------------------------------------------------------------------

_ADD_EDGE_OFFSETS = {
    frozenset([C1]): 0, frozenset([C2]): 0, frozenset([C4]): 0,
    frozenset([C1, C2]): 0, frozenset([C1, C4]): 0, frozenset([C2, C4]): 0,
    frozenset([C1, C3]): 1, frozenset([C2, C3]): 1, frozenset([C3, C4]): 1,
    frozenset([C3]): 2,
}


def add_edge(graph: MetricGraph, v_id: str, w_id: str, length: float,
             edge_id: str | None = None, sigma_v: float = 1.0,
             sigma_w: float = 1.0):
    """Join two vertices (possibly the same) by a new edge of given length.

    Kinds and strengths at both ends are preserved.  The certified drop
    applies from the index k0 where the original eigenvalues pass
    ``(pi/length)^4``; the harness derives k0 from the spectrum, so the
    record stores the threshold rule rather than a number.
    """
    ensure_valid(graph)
    if not (length > 0.0) or not math.isfinite(length):
        raise IllegalSurgeryError(f"new edge length must be positive, got {length}")
    v, w = graph.vertex(v_id), graph.vertex(w_id)
    pair = frozenset([v.condition.kind, w.condition.kind])
    if pair not in _ADD_EDGE_OFFSETS:
        raise IllegalSurgeryError(
            f"edge addition between kinds {v.condition.kind.value},{w.condition.kind.value}"
            " is not certified")
    off = _ADD_EDGE_OFFSETS[pair]
    eid = edge_id if edge_id is not None else _fresh_edge_id(graph)
    if any(e.id == eid for e in graph.edges):
        raise IllegalSurgeryError(f"edge id {eid!r} already taken")

    epl, epr = left(eid), right(eid)

    def extend(vertex: Vertex, new_eps, sig_vals) -> Vertex:
        eps = vertex.endpoints | set(new_eps)
        sig = None
        if vertex.condition.kind.needs_sigma:
            sig = dict(vertex.condition.sigma)
            for ep, s in zip(new_eps, sig_vals):
                sig[ep] = s
        return Vertex(vertex.id, VertexCondition(vertex.condition.kind,
                                                 vertex.condition.alpha, sig), eps)

    if v_id == w_id:
        nv = extend(v, [epl, epr], [sigma_v, sigma_w])
        out = graph.replace_vertices([v_id], [nv])
    else:
        nv = extend(v, [epl], [sigma_v])
        nw = extend(w, [epr], [sigma_w])
        out = graph.replace_vertices([v_id, w_id], [nv, nw])
    out = MetricGraph(out.vertices, out.edges + (Edge(eid, float(length)),),
                      out.union_ok)
    out = replace(out, union_ok=not is_connected(out))
    return out, SurgeryRecord(
        op="add_edge",
        affected=(v_id, w_id, eid),
        classification="n/a",
        inequalities=(
            Interlacing("after", 0, "before", off,
                        k_min_rule=("before_threshold", (math.pi / length) ** 4, off)),
        ),
        validity=f"k+{off} >= k0 where lam_k0(before) >= (pi/length)^4",
        notes=f"kinds {v.condition.kind.value},{w.condition.kind.value}, length {length}",
    )


# ---------------------------------------------------------------------------
# degree-two interior vertices (spectrum-preserving by the interior remark)
# ---------------------------------------------------------------------------

def insert_degree_two_vertex(graph: MetricGraph, edge_id: str, position: float,
                             vertex_id: str | None = None):
    """Mark an interior point of an edge as a C2 vertex with equal weights.

    Zero strength and equal weights make the new vertex indistinguishable
    from an interior point, so the spectrum is unchanged; the record says
    exactly that.
    """
    ensure_valid(graph)
    e = graph.edge(edge_id)
    if not 0.0 < position < e.length:
        raise IllegalSurgeryError(
            f"position {position} not interior to edge {edge_id!r} of length {e.length}")
    vid = vertex_id if vertex_id is not None else _fresh_vertex_id(graph, f"{edge_id}@")
    id_a, id_b = edge_id + ".a", edge_id + ".b"
    taken = {x.id for x in graph.edges}
    if id_a in taken or id_b in taken:
        raise IllegalSurgeryError(f"split edge ids {id_a!r}/{id_b!r} already taken")

    def rekey(ep: Endpoint) -> Endpoint:
        if ep.edge_id != edge_id:
            return ep
        return Endpoint(id_a if ep.side is Side.LEFT else id_b, ep.side)

    new_edges = [x for x in graph.edges if x.id != edge_id]
    new_edges += [Edge(id_a, position), Edge(id_b, e.length - position)]
    new_verts = []
    for v in graph.vertices:
        sig = None
        if v.condition.sigma is not None:
            sig = {rekey(ep): s for ep, s in v.condition.sigma.items()}
        new_verts.append(Vertex(v.id, VertexCondition(v.condition.kind,
                                                      v.condition.alpha, sig),
                                frozenset(rekey(ep) for ep in v.endpoints)))
    mid_eps = [right(id_a), left(id_b)]
    new_verts.append(Vertex(vid, VertexCondition(C2, 0.0,
                                                 {ep: 1.0 for ep in mid_eps}),
                            frozenset(mid_eps)))
    out = MetricGraph(tuple(new_verts), tuple(new_edges), graph.union_ok)
    return out, SurgeryRecord(
        op="insert_degree_two_vertex",
        affected=(vid, edge_id),
        classification="n/a",
        inequalities=(
            Interlacing("before", 0, "after", 0),
            Interlacing("after", 0, "before", 0),
        ),
        validity="k >= 1 (spectra identical)",
        notes=f"interior point of {edge_id!r} at {position}",
    )


def merge_degree_two_vertex(graph: MetricGraph, vertex_id: str):
    """Remove a removable degree-two vertex, fusing its edges into one.

    Removable means C2 with equal weights and zero strength: an interior
    point in disguise.  The merged edge keeps the orientation of the edge
    arriving from the left.
    """
    ensure_valid(graph)
    v = graph.vertex(vertex_id)
    if v.degree != 2:
        raise IllegalSurgeryError(f"vertex {vertex_id!r} has degree {v.degree}, need 2")
    cond = v.condition
    eps = v.sorted_endpoints()
    if cond.kind is not C2 or cond.alpha != 0.0 or \
            not math.isclose(cond.sigma_at(eps[0]), cond.sigma_at(eps[1]),
                             rel_tol=1e-12):
        raise IllegalSurgeryError(
            "only a C2 vertex with zero strength and equal weights is removable")
    e1_id, e2_id = eps[0].edge_id, eps[1].edge_id
    if e1_id == e2_id:
        raise IllegalSurgeryError("cannot remove the only vertex of a loop")
    # orient so edge a runs into the vertex and edge b runs out; when both
    # run the same way one of them is reversed first (normal derivatives are
    # parametrization-free, so flipping an edge is an isometry)
    a, b = eps[0], eps[1]
    if a.side is Side.LEFT and b.side is Side.RIGHT:
        a, b = b, a
    elif a.side is b.side:
        flip_id = a.edge_id if a.side is Side.LEFT else b.edge_id
        graph = _flip_edge(graph, flip_id)
        v = graph.vertex(vertex_id)
        eps = v.sorted_endpoints()
        a = next(ep for ep in eps if ep.side is Side.RIGHT)
        b = next(ep for ep in eps if ep.side is Side.LEFT)
    e_in, e_out = graph.edge(a.edge_id), graph.edge(b.edge_id)
    merged_id = e_in.id + "+" + e_out.id
    merged = Edge(merged_id, e_in.length + e_out.length)

    def rekey(ep: Endpoint) -> Endpoint | None:
        if ep.edge_id == e_in.id:
            return Endpoint(merged_id, Side.LEFT) if ep.side is Side.LEFT else None
        if ep.edge_id == e_out.id:
            return Endpoint(merged_id, Side.RIGHT) if ep.side is Side.RIGHT else None
        return ep

    new_verts = []
    for u in graph.vertices:
        if u.id == vertex_id:
            continue
        new_eps = [rekey(ep) for ep in u.endpoints]
        sig = None
        if u.condition.sigma is not None:
            sig = {rekey(ep): s for ep, s in u.condition.sigma.items()}
        new_verts.append(Vertex(u.id, VertexCondition(u.condition.kind,
                                                      u.condition.alpha, sig),
                                frozenset(new_eps)))
    new_edges = [x for x in graph.edges if x.id not in (e_in.id, e_out.id)]
    new_edges.append(merged)
    out = MetricGraph(tuple(new_verts), tuple(new_edges), graph.union_ok)
    return out, SurgeryRecord(
        op="merge_degree_two_vertex",
        affected=(vertex_id, merged_id),
        classification="n/a",
        inequalities=(
            Interlacing("before", 0, "after", 0),
            Interlacing("after", 0, "before", 0),
        ),
        validity="k >= 1 (spectra identical)",
        notes=f"removed {vertex_id!r}, merged {e_in.id!r}+{e_out.id!r}",
    )


def _flip_edge(graph: MetricGraph, edge_id: str) -> MetricGraph:
    """Reverse the parametrization of one edge (an isometry of the operator)."""

    def rekey(ep: Endpoint) -> Endpoint:
        if ep.edge_id != edge_id:
            return ep
        return Endpoint(edge_id, Side.RIGHT if ep.side is Side.LEFT else Side.LEFT)

    verts = []
    for v in graph.vertices:
        sig = None
        if v.condition.sigma is not None:
            sig = {rekey(ep): s for ep, s in v.condition.sigma.items()}
        verts.append(Vertex(v.id, VertexCondition(v.condition.kind,
                                                  v.condition.alpha, sig),
                            frozenset(rekey(ep) for ep in v.endpoints)))
    return MetricGraph(tuple(verts), graph.edges, graph.union_ok)
