"""Command-line surface.

Three subcommands: ``spectrum`` computes eigenvalues of a graph file,
``surgery`` applies the ops of a job file and writes the transformed graph
plus its certified records, ``verify`` runs check suites and bound reports.

Exit codes: 0 success, 1 verification failures, 2 schema or validation
error, 3 solver non-convergence, 4 illegal surgery.  ``BEAMGRAPH_THREADS``
caps the linear-algebra thread count; no other environment is consulted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SCHEMA = 2
EXIT_SOLVER = 3
EXIT_ILLEGAL_OP = 4


def _apply_thread_env():
    n = os.environ.get("BEAMGRAPH_THREADS")
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


def _out_base(args, default_stem: str) -> str:
    return args.out if args.out else default_stem


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def _compute(graph, count: int, method: str, mesh: int):
    from .fem import solve_fem
    from .secular import scan_spectrum
    out = {}
    if method in ("secular", "both"):
        out["secular"] = scan_spectrum(graph, count)
    if method in ("fem", "both"):
        out["fem"] = solve_fem(graph, count, n=mesh, want_vectors=False)
    return out


def cmd_spectrum(args) -> int:
    from .fileio import (SchemaError, load_graph, spectrum_to_csv,
                         spectrum_to_dict)
    from .secular import ScanError
    try:
        graph = load_graph(args.graph)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        spectra = _compute(graph, args.count, args.method, args.mesh)
    except (ScanError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    base = _out_base(args, os.path.splitext(args.graph)[0] + ".spectrum")
    doc = {name: spectrum_to_dict(s) for name, s in spectra.items()}
    if len(spectra) == 2:
        a, b = spectra["secular"].values, spectra["fem"].values
        worst = max(abs(x - y) / max(1.0, abs(x)) for x, y in zip(a, b))
        doc["max_relative_difference"] = worst
        print(f"max relative difference secular vs fem: {worst:.3e}")
    _write(base + ".json", json.dumps(doc, indent=2) + "\n")
    primary = spectra.get("secular", spectra.get("fem"))
    _write(base + ".csv", spectrum_to_csv(primary))
    for name, s in spectra.items():
        print(f"{name}: " + " ".join(f"{v:.12g}" for v in s.values))
    print(f"wrote {base}.json and {base}.csv")
    return EXIT_OK


def _load_job_graph(args):
    from .fileio import load_job, load_graph
    job = load_job(args.job)
    graph_path = job["graph"]
    if not os.path.isabs(graph_path):
        graph_path = os.path.join(os.path.dirname(os.path.abspath(args.job)),
                                  graph_path)
    return job, load_graph(graph_path)


def cmd_surgery(args) -> int:
    from .fileio import (SchemaError, apply_op, graph_to_dict, record_to_dict,
                         spectrum_to_dict)
    from .surgery import IllegalSurgeryError
    from .secular import ScanError
    try:
        job, graph = _load_job_graph(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    records = []
    try:
        for op in job.get("ops", []):
            graph, rec = apply_op(graph, op)
            records.append(rec)
    except IllegalSurgeryError as exc:
        print(f"illegal surgery: {exc}", file=sys.stderr)
        return EXIT_ILLEGAL_OP
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    base = _out_base(args, os.path.splitext(args.job)[0] + ".result")
    doc = {"graph": graph_to_dict(graph),
           "records": [record_to_dict(r) for r in records]}
    compute = job.get("compute")
    if compute:
        try:
            spectra = _compute(graph, compute.get("count", 10),
                               compute.get("method", "secular"),
                               compute.get("mesh", 64))
        except (ScanError, RuntimeError) as exc:
            print(f"solver error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        doc["spectra"] = {k: spectrum_to_dict(s) for k, s in spectra.items()}
    _write(base + ".json", json.dumps(doc, indent=2) + "\n")
    print(f"applied {len(records)} ops; wrote {base}.json")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .bounds import bound_report
    from .fileio import (SchemaError, bound_report_to_csv,
                         bound_report_to_dict, check_result_to_dict,
                         results_to_junit)
    from .harness import run_suite, suite_failures
    from .secular import ScanError, scan_spectrum
    try:
        job, graph = _load_job_graph(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA

    cfg = job.get("suite", {})
    depth = cfg.get("depth", args.depth)
    instances = cfg.get("instances", args.instances)
    mesh = cfg.get("mesh", 24)
    mutate = cfg.get("mutate", False)

    base = _out_base(args, os.path.splitext(args.job)[0] + ".verify")
    all_results = []
    any_fail = False
    try:
        for suite in job.get("checks", []):
            res = run_suite(suite, depth=depth, instances=instances,
                            mesh=mesh, mutate=mutate)
            nf = len(suite_failures(res))
            any_fail = any_fail or nf > 0
            print(f"suite {suite}: {len(res)} checks, {nf} failures")
            _write(f"{base}.{suite}.xml", results_to_junit(res, suite))
            all_results.extend(res)
        doc = {"results": [check_result_to_dict(r) for r in all_results]}
        if job.get("bounds"):
            spec = scan_spectrum(graph, depth + len(graph.vertices)
                                 + len(graph.edges) + 2)
            rep = bound_report(graph, spec)
            doc["bounds"] = bound_report_to_dict(rep)
            _write(base + ".bounds.csv", bound_report_to_csv(rep))
            bad = rep.failures()
            any_fail = any_fail or bool(bad)
            print(f"bounds: {len(rep.applicable_entries())} applicable, "
                  f"{len(bad)} violated")
    except (ScanError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write(base + ".json", json.dumps(doc, indent=2) + "\n")
    print(f"wrote {base}.json")
    return EXIT_CHECK_FAILED if any_fail else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="beamgraph",
        description="Fourth-order beam operators on metric graphs: spectra, "
                    "surgery, verification.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("spectrum", help="compute eigenvalues of a graph file")
    ps.add_argument("graph")
    ps.add_argument("--count", type=int, default=10)
    ps.add_argument("--method", choices=("secular", "fem", "both"),
                    default="secular")
    ps.add_argument("--mesh", type=int, default=64)
    ps.add_argument("--out", default=None)
    ps.set_defaults(func=cmd_spectrum)

    pg = sub.add_parser("surgery", help="apply the ops of a job file")
    pg.add_argument("job")
    pg.add_argument("--out", default=None)
    pg.set_defaults(func=cmd_surgery)

    pv = sub.add_parser("verify", help="run verification suites of a job file")
    pv.add_argument("job")
    pv.add_argument("--out", default=None)
    pv.add_argument("--depth", type=int, default=12)
    pv.add_argument("--instances", type=int, default=200)
    pv.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    _apply_thread_env()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
