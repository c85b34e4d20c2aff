"""JSON graph and job formats, plus report serialization.

A graph document pins parametrization: the ``from`` vertex of an edge holds
its left endpoint (coordinate 0) and ``to`` holds the right one, which is
what gives the sign-sensitive weights of proportional-slope couplings a
stable meaning.  ``alpha`` accepts the string ``"inf"`` for the extended
condition since JSON has no infinity literal.  Schemas ship with the package
and structural validation runs before any semantic check.

All numeric output is emitted with 17 significant digits so downstream
diffs are exact.
"""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources

import jsonschema

from .bounds import BoundReport
from .graphs import (ConditionKind, Edge, Endpoint, InvalidGraphError,
                     MetricGraph, Side, Vertex, VertexCondition, left, right,
                     validate)
from .harness import CheckResult
from .spectrum import Spectrum
from .surgery import SurgeryRecord


class SchemaError(ValueError):
    """Document does not match the shipped schema or the data model."""


def _schema(name: str) -> dict:
    with resources.files("beamgraph.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def _check_schema(doc, name: str):
    try:
        jsonschema.validate(doc, _schema(name))
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"schema violation at /{path}: {exc.message}") from exc


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# graph documents
# ---------------------------------------------------------------------------

def endpoint_ref(ep: Endpoint) -> str:
    return f"{ep.edge_id}:{ep.side.value}"


def parse_endpoint_ref(ref: str) -> Endpoint:
    edge_id, _, side = ref.rpartition(":")
    if side not in ("left", "right") or not edge_id:
        raise SchemaError(f"bad endpoint reference {ref!r}, want 'edgeId:left|right'")
    return Endpoint(edge_id, Side(side))


def parse_alpha(x) -> float:
    return math.inf if x == "inf" else float(x)


def graph_from_dict(doc: dict) -> MetricGraph:
    """Parse and validate; raises SchemaError naming the failed invariant."""
    _check_schema(doc, "graph.schema.json")
    edges = []
    eps_by_vertex: dict = {v["id"]: [] for v in doc["vertices"]}
    if len(eps_by_vertex) != len(doc["vertices"]):
        raise SchemaError("duplicate vertex ids")
    for e in doc["edges"]:
        edges.append(Edge(e["id"], float(e["length"])))
        for key, side in (("from", left), ("to", right)):
            vid = e[key]
            if vid not in eps_by_vertex:
                raise SchemaError(f"edge {e['id']!r} references unknown vertex {vid!r}")
            eps_by_vertex[vid].append(side(e["id"]))

    vertices = []
    for v in doc["vertices"]:
        kind = ConditionKind(v["condition"])
        sigma = None
        if "sigma" in v:
            sigma = {parse_endpoint_ref(ref): float(s)
                     for ref, s in v["sigma"].items()}
        cond = VertexCondition(kind, parse_alpha(v["alpha"]), sigma)
        vertices.append(Vertex(v["id"], cond, frozenset(eps_by_vertex[v["id"]])))

    try:
        graph = MetricGraph(tuple(vertices), tuple(edges))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    report = validate(graph)
    if not report.ok:
        raise SchemaError("; ".join(report.violations))
    return graph


def graph_to_dict(graph: MetricGraph) -> dict:
    verts = []
    for v in graph.vertices:
        item = {"id": v.id, "condition": v.condition.kind.value,
                "alpha": "inf" if v.condition.is_extended else v.condition.alpha}
        if v.condition.sigma is not None:
            item["sigma"] = {endpoint_ref(ep): s
                             for ep, s in sorted(v.condition.sigma.items(),
                                                 key=lambda kv: kv[0].sort_key)}
        verts.append(item)
    edges = []
    for e in graph.edges:
        u = graph.vertex_of(left(e.id))
        w = graph.vertex_of(right(e.id))
        edges.append({"id": e.id, "from": u.id, "to": w.id, "length": e.length})
    return {"vertices": verts, "edges": edges}


def load_graph(path) -> MetricGraph:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    return graph_from_dict(doc)


def save_graph(graph: MetricGraph, path):
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_job(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    _check_schema(doc, "job.schema.json")
    return doc


# ---------------------------------------------------------------------------
# result serialization
# ---------------------------------------------------------------------------

def spectrum_to_dict(spec: Spectrum) -> dict:
    return {
        "method": spec.method,
        "values": list(spec.values),
        "entries": [{"value": e.value, "multiplicity": e.multiplicity}
                    for e in spec.entries],
        "meta": {k: (str(v) if not isinstance(v, (int, float, str, bool))
                     else v) for k, v in dict(spec.meta).items()},
    }


def spectrum_to_csv(spec: Spectrum) -> str:
    """Rows (k, lambda_k, multiplicity of its cluster), full precision."""
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["k", "lambda", "multiplicity"])
    k = 1
    for e in spec.entries:
        for _ in range(e.multiplicity):
            w.writerow([k, _fmt(e.value), e.multiplicity])
            k += 1
    return out.getvalue()


def record_to_dict(rec: SurgeryRecord) -> dict:
    return {
        "op": rec.op,
        "affected": list(rec.affected),
        "classification": rec.classification,
        "validity": rec.validity,
        "notes": rec.notes,
        "inequalities": [q.describe() for q in rec.inequalities],
        "obligations": [ob.describe() for ob in rec.obligations],
    }


def check_result_to_dict(res: CheckResult) -> dict:
    return {
        "name": res.name,
        "instance": res.instance,
        "status": res.status,
        "worst_margin": res.worst_margin,
        "indices": list(res.indices),
        "artifacts": {k: (v if isinstance(v, (int, float, str, bool, list))
                          else str(v)) for k, v in res.artifacts.items()},
    }


def bound_report_to_dict(rep: BoundReport) -> dict:
    return {
        "graph": rep.graph_summary,
        "entries": [{
            "name": e.name, "kind": e.kind, "target_index": e.target_index,
            "bound": e.bound, "computed": e.computed, "margin": e.margin,
            "applicable": e.applicable, "reason": e.reason,
        } for e in rep.entries],
    }


def bound_report_to_csv(rep: BoundReport) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["name", "kind", "target_index", "bound", "computed",
                "margin", "applicable", "reason"])
    for e in rep.entries:
        w.writerow([e.name, e.kind, e.target_index,
                    "" if e.bound is None else _fmt(e.bound),
                    "" if e.computed is None else _fmt(e.computed),
                    "" if e.margin is None else _fmt(e.margin),
                    e.applicable, e.reason])
    return out.getvalue()


def results_to_junit(results, suite_name: str) -> str:
    """Minimal JUnit-style XML for CI consumption."""
    from xml.sax.saxutils import escape, quoteattr
    lines = []
    nfail = sum(1 for r in results if r.status == "fail")
    nskip = sum(1 for r in results if r.status == "hypothesis-unmet")
    lines.append(
        f'<testsuite name={quoteattr(suite_name)} tests="{len(results)}" '
        f'failures="{nfail}" skipped="{nskip}">')
    for r in results:
        lines.append(f'  <testcase classname={quoteattr(r.name)} '
                     f'name={quoteattr(r.instance)}>')
        if r.status == "fail":
            msg = escape(json.dumps(check_result_to_dict(r)["artifacts"]))
            lines.append(f'    <failure message="worst margin '
                         f'{_fmt(r.worst_margin)}">{msg}</failure>')
        elif r.status == "hypothesis-unmet":
            lines.append('    <skipped/>')
        lines.append('  </testcase>')
    lines.append('</testsuite>')
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# job op dispatch
# ---------------------------------------------------------------------------

def apply_op(graph: MetricGraph, op: dict):
    """Apply one job-file surgery descriptor; returns (graph, record)."""
    from . import surgery as sg
    kind = op["op"]
    if kind == "change_condition":
        sigma = {parse_endpoint_ref(r): s
                 for r, s in op.get("sigma", {}).items()} or None
        return sg.change_condition(graph, op["vertex"],
                                   ConditionKind(op["kind"]), sigma)
    if kind == "change_condition_all":
        return sg.change_condition_all(graph, ConditionKind(op["kind"]))
    if kind == "change_strength":
        return sg.change_strength(
            graph, {vid: parse_alpha(a) for vid, a in op["alphas"].items()})
    if kind == "glue":
        vids = op["vertices"]
        sigma = {parse_endpoint_ref(r): s
                 for r, s in op.get("sigma", {}).items()} or None
        if len(vids) == 2:
            return sg.glue(graph, vids[0], vids[1],
                           ConditionKind(op["kind"]), sigma)
        return sg.glue_many(graph, vids, ConditionKind(op["kind"]), sigma)
    if kind == "flower":
        return sg.flower(graph)
    if kind == "split":
        k1, k2 = (ConditionKind(k) for k in op["kinds"])
        a1, a2 = (parse_alpha(a) for a in op["alphas"])
        part1 = [parse_endpoint_ref(r) for r in op["part1"]]
        return sg.split(graph, op["vertex"], part1, (k1, a1), (k2, a2))
    if kind == "attach_pendant":
        pend = graph_from_dict(op["pendant"])
        return sg.attach_pendant(graph, pend, op["vertex"],
                                 op["pendant_vertex"],
                                 ConditionKind(op["kind"]),
                                 r=op.get("r", 1), k0=op.get("k0", 1))
    if kind == "insert":
        inner = graph_from_dict(op["inner"])
        attach = {parse_endpoint_ref(r): w for r, w in op["attach"].items()}
        k1, k2 = (ConditionKind(k) for k in op["kinds"])
        a1, a2 = (parse_alpha(a) for a in op["alphas"])
        return sg.insert_graph(graph, op["vertex"], inner, attach,
                               (k1, k2), (a1, a2))
    if kind == "add_edge":
        return sg.add_edge(graph, op["v"], op["w"], float(op["length"]),
                           edge_id=op.get("id"))
    if kind == "insert_degree_two_vertex":
        return sg.insert_degree_two_vertex(graph, op["edge"],
                                           float(op["position"]),
                                           op.get("vertex"))
    if kind == "merge_degree_two_vertex":
        return sg.merge_degree_two_vertex(graph, op["vertex"])
    raise SchemaError(f"unknown op {kind!r}")
