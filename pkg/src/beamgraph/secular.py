"""Vertex-condition (secular) eigenvalue solver.

For a graph with edge set E the general solution of ``phi'''' = lambda*phi``
is a 4-vector of coefficients per edge; the vertex conditions become a square
linear system ``M(lambda)`` of size 4|E| whose null space is isomorphic to
the lambda-eigenspace.  Eigenvalues are located as rank drops of ``M`` along
lambda, detected through the smallest singular value on a grid in
``k = |lambda|**(1/4)`` and refined by golden-section search.  Multiplicity
is the number of singular values below threshold at the refined point.

Row layout per vertex of degree d (2d rows in total, so 4|E| overall):

* continuity rows (d-1), or d rows pinning the endpoint values to zero for
  the extended ``alpha = +inf`` condition;
* kind-specific derivative rows (C1: d curvature rows; C2: one weighted
  first-derivative sum and d-1 weighted curvature-continuity rows; C3: d-1
  weighted slope-continuity rows and one weighted curvature sum; C4: d slope
  rows);
* one strength row ``sum of third normal derivatives + alpha*phi(v) = 0``
  when alpha is finite.

Determinant signs on the grid serve as a cheap pre-filter for roots the
minimum detector might sit between; even-multiplicity roots produce no sign
change, which is why the singular-value detector is primary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import svd, svdvals

from .edge_basis import fundamental_table, normal_derivative_signs
from .graphs import (ConditionKind, Endpoint, MetricGraph, Side, ensure_valid)
from .spectrum import Spectrum, cluster_eigenvalues

NULLITY_RTOL = 1e-8          # singular value < this * largest counts toward nullity
REFINE_K_RTOL = 1e-12        # golden-section bracket width, relative in k
DEFAULT_GRID_DIVISOR = 12    # grid step = pi / (divisor * total_length)
MAX_GRID_DIVISOR_FLOOR = 4   # louder-failure bound: step may never exceed pi/(4L)


@dataclass(frozen=True)
class SecularMatrix:
    """Assembled vertex-condition system at one spectral point."""

    matrix: np.ndarray
    lam: float
    edge_columns: dict        # edge_id -> slice into the columns
    vertex_rows: dict         # vertex_id -> slice into the rows


def _edge_tables(graph: MetricGraph, lam: float) -> dict:
    tables = {}
    for e in graph.edges:
        tables[e.id] = {
            Side.LEFT: fundamental_table(lam, e.length, 0.0),
            Side.RIGHT: fundamental_table(lam, e.length, e.length),
        }
    return tables


def assemble(graph: MetricGraph, lam: float) -> SecularMatrix:
    """Build M(lambda); its null space encodes the eigenspace coefficients."""
    ensure_valid(graph)
    n = 4 * len(graph.edges)
    edge_columns = {e.id: slice(4 * i, 4 * i + 4) for i, e in enumerate(graph.edges)}
    tables = _edge_tables(graph, lam)

    def nd_row(ep: Endpoint, order: int) -> np.ndarray:
        """Row of the normal derivative of given order at an endpoint."""
        row = np.zeros(n)
        t = tables[ep.edge_id][ep.side]
        s = (1.0,) + normal_derivative_signs(ep.side)
        row[edge_columns[ep.edge_id]] = s[order] * t[order]
        return row

    rows: list[np.ndarray] = []
    vertex_rows = {}
    for v in graph.vertices:
        start = len(rows)
        eps = v.sorted_endpoints()
        cond = v.condition
        kind = cond.kind

        if cond.is_extended:
            for ep in eps:
                rows.append(nd_row(ep, 0))
        else:
            for ep_a, ep_b in zip(eps, eps[1:]):
                rows.append(nd_row(ep_a, 0) - nd_row(ep_b, 0))

        if kind is ConditionKind.C1:
            for ep in eps:
                rows.append(nd_row(ep, 2))
        elif kind is ConditionKind.C2:
            rows.append(sum(cond.sigma_at(ep) * nd_row(ep, 1) for ep in eps))
            for ep_a, ep_b in zip(eps, eps[1:]):
                rows.append(cond.sigma_at(ep_b) * nd_row(ep_a, 2)
                            - cond.sigma_at(ep_a) * nd_row(ep_b, 2))
        elif kind is ConditionKind.C3:
            for ep_a, ep_b in zip(eps, eps[1:]):
                rows.append(cond.sigma_at(ep_b) * nd_row(ep_a, 1)
                            - cond.sigma_at(ep_a) * nd_row(ep_b, 1))
            rows.append(sum(cond.sigma_at(ep) * nd_row(ep, 2) for ep in eps))
        elif kind is ConditionKind.C4:
            for ep in eps:
                rows.append(nd_row(ep, 1))

        if not cond.is_extended:
            strength = sum(nd_row(ep, 3) for ep in eps)
            if cond.alpha != 0.0:
                strength = strength + cond.alpha * nd_row(eps[0], 0)
            rows.append(strength)

        vertex_rows[v.id] = slice(start, len(rows))
        assert len(rows) - start == 2 * v.degree, \
            f"vertex {v.id}: {len(rows) - start} rows for degree {v.degree}"

    m = np.vstack(rows)
    assert m.shape == (n, n)
    return SecularMatrix(matrix=m, lam=lam, edge_columns=edge_columns,
                         vertex_rows=vertex_rows)


def _normalized(m: np.ndarray) -> np.ndarray:
    """Scale rows to unit max-abs; positive row scaling keeps the null space."""
    norms = np.max(np.abs(m), axis=1)
    norms[norms == 0.0] = 1.0
    return m / norms[:, None]


def smallest_singular_value(graph: MetricGraph, lam: float) -> float:
    m = _normalized(assemble(graph, lam).matrix)
    sv = svdvals(m)
    return float(sv[-1] / max(sv[0], 1e-300))


def _nullspace(graph: MetricGraph, lam: float):
    """(nullity, list of coefficient vectors, relative smallest sv)."""
    m = _normalized(assemble(graph, lam).matrix)
    u, sv, vt = svd(m)
    smax = max(sv[0], 1e-300)
    nullity = int(np.sum(sv < NULLITY_RTOL * smax))
    vecs = [vt[-(i + 1)] for i in range(nullity)]
    return nullity, vecs, float(sv[-1] / smax)


def _signed_det(graph: MetricGraph, lam: float) -> float:
    """Determinant of the row-normalized system, exponent clipped.

    Row norms are positive, so this is the raw determinant up to a positive
    factor: continuous in lambda with the same zero set and sign pattern.
    """
    sign, logdet = np.linalg.slogdet(_normalized(assemble(graph, lam).matrix))
    return float(sign) * math.exp(min(max(logdet, -300.0), 300.0))


def _golden_min(f, a: float, b: float, rtol: float) -> float:
    """Golden-section minimizer, deterministic in the bracket endpoints."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rtol * max(abs(a), abs(b), 1e-30):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class ScanError(RuntimeError):
    pass


def _lam_of_k(k: float, sign: int) -> float:
    return sign * k ** 4


def _scan_axis(graph: MetricGraph, k_lo: float, k_hi: float, dk: float,
               sign: int, collected: list, slam_cache: dict):
    """Detect and refine rank drops for lambda = sign * k^4, k in [k_lo, k_hi].

    Two detectors run side by side.  Local minima of the smallest singular
    value catch every root wide enough for the grid, including the
    even-multiplicity ones the determinant cannot see.  Determinant sign
    changes catch odd-multiplicity roots whose dip is narrower than a grid
    cell (they do occur: weakly coupled subgraphs make razor-thin dips);
    those brackets are chased with Brent's method on the signed determinant,
    which converges no matter how narrow the dip is.
    """

    def s_of_k(k: float) -> float:
        key = (sign, k)
        if key not in slam_cache:
            slam_cache[key] = smallest_singular_value(graph, _lam_of_k(k, sign))
        return slam_cache[key]

    def claimed(k: float) -> bool:
        return any(abs(k - koth) <= 1e-8 * max(1.0, abs(koth))
                   for koth, _ in collected)

    def accept(kstar: float) -> bool:
        if claimed(kstar):
            return False
        lam = _lam_of_k(kstar, sign)
        nullity, vecs, _ = _nullspace(graph, lam)
        if nullity == 0:
            return False
        collected.append((kstar, (lam, nullity, vecs)))
        return True

    ks = np.arange(k_lo, k_hi + 0.5 * dk, dk)
    if len(ks) < 3:
        return
    svals = [s_of_k(k) for k in ks]
    dets = [_signed_det(graph, _lam_of_k(k, sign)) for k in ks]

    min_brackets = []
    for j in range(1, len(ks) - 1):
        if svals[j] <= svals[j - 1] and svals[j] <= svals[j + 1]:
            min_brackets.append((ks[j - 1], ks[j + 1]))
    if svals[0] < svals[1]:  # dip running into the start of the axis
        min_brackets.append((max(k_lo / 8.0, 1e-8), ks[1]))

    hits = []
    for a, b in min_brackets:
        kstar = _golden_min(s_of_k, a, b, REFINE_K_RTOL)
        if accept(kstar):
            hits.append(kstar)

    from scipy.optimize import brentq
    for j in range(1, len(ks)):
        if dets[j - 1] * dets[j] < 0.0:
            if any(ks[j - 1] <= h <= ks[j] for h, _ in collected):
                continue  # the minimum detector already claimed this cell
            kstar = brentq(lambda k: _signed_det(graph, _lam_of_k(k, sign)),
                           ks[j - 1], ks[j], xtol=1e-14 * max(1.0, ks[j]),
                           rtol=8.9e-16)
            if accept(kstar):
                hits.append(kstar)

    # near-degenerate siblings can hide in the cells around every hit, and a
    # pair of simple roots inside one sampling interval flips the determinant
    # twice, which no endpoint comparison can see.  Anchoring the bracket
    # sweep at a freshly accepted root (where the sign has just flipped)
    # turns the sibling back into a single visible sign change.
    def sweep_neighborhood(kstar: float):
        fine = dk / 17.0
        eps = max(1e-6 * kstar, 1e-10)
        ts = sorted(set(
            [max(kstar - 1.6 * dk, 1e-8) + j * fine for j in range(0, 55)]
            + [kstar - eps, kstar + eps]))
        ts = [t for t in ts if t > 0]
        fs = [s_of_k(t) for t in ts]
        ds = [_signed_det(graph, _lam_of_k(t, sign)) for t in ts]
        newly = []
        for i in range(1, len(ts) - 1):
            if fs[i] <= fs[i - 1] and fs[i] <= fs[i + 1] and fs[i] < 0.5:
                k2 = _golden_min(s_of_k, ts[i - 1], ts[i + 1], REFINE_K_RTOL)
                if accept(k2):
                    newly.append(k2)
        for i in range(1, len(ts)):
            if kstar - eps <= ts[i - 1] and ts[i] <= kstar + eps:
                continue  # the known root lives here
            if ds[i - 1] * ds[i] < 0.0 and not any(
                    ts[i - 1] <= h <= ts[i] for h, _ in collected):
                k2 = brentq(lambda k: _signed_det(graph, _lam_of_k(k, sign)),
                            ts[i - 1], ts[i], xtol=1e-14 * max(1.0, ts[i]),
                            rtol=8.9e-16)
                if accept(k2):
                    newly.append(k2)
        return newly

    queue = list(hits)
    swept = []
    rounds = 0
    while queue and rounds < 40:
        kstar = queue.pop(0)
        if any(abs(kstar - s0) <= 1e-9 * max(1.0, kstar) for s0 in swept):
            continue
        swept.append(kstar)
        queue.extend(sweep_neighborhood(kstar))
        rounds += 1


def scan_spectrum(graph: MetricGraph, count: int, floor: float | None = None,
                  grid_divisor: int = DEFAULT_GRID_DIVISOR,
                  n_fem_floor: int = 32) -> Spectrum:
    """Locate the lowest ``count`` eigenvalues, counted with multiplicity.

    ``floor`` must lie below the bottom of the spectrum; by default it is
    ``-tol`` for nonnegative-strength graphs and otherwise estimated from the
    finite-element solver with a ten percent margin.  Fails loudly when the
    k-grid step would exceed pi/(4 * total length), the density at which
    roots start slipping between grid points.
    """
    ensure_valid(graph)
    total = graph.total_length
    dk = math.pi / (grid_divisor * total)
    if dk > math.pi / (MAX_GRID_DIVISOR_FLOOR * total):
        raise ScanError(f"grid step {dk} exceeds pi/(4*L); refusing to scan")

    if floor is None:
        if all(v.condition.alpha >= 0.0 for v in graph.vertices):
            floor = -1e-9
        else:
            from .fem import solve_fem
            est = solve_fem(graph, 1, n=n_fem_floor, want_vectors=False).values[0]
            floor = est - 0.1 * abs(est) - 1e-6

    slam_cache: dict = {}
    found: list = []          # (k, (lam, nullity, vecs))  on the positive axis
    found_neg: list = []

    # probe lambda = 0 explicitly through the series branch
    zero_nullity, zero_vecs, _ = _nullspace(graph, 0.0)
    # roots inside the zero basin are the zero modes seen from the side;
    # genuinely tiny nonzero eigenvalues this close to a zero mode are out of
    # resolution for the detector anyway
    zero_gate = (0.5 * dk) ** 4 if zero_nullity else 0.0

    if floor < -1e-12:
        mu_hi = (-floor) ** 0.25
        _scan_axis(graph, dk / 4.0, mu_hi, dk, -1, found_neg, slam_cache)
        found_neg = [fn for fn in found_neg if abs(fn[1][0]) > zero_gate]

    have = zero_nullity + sum(n for _, (_, n, _) in found_neg)
    k_lo = dk / 4.0
    chunk = 40 * dk
    k_cap = (count + 8) * math.pi / total * 20.0 + 10.0
    while have < count:
        _scan_axis(graph, k_lo, k_lo + chunk, dk, +1, found, slam_cache)
        found[:] = [f for f in found if f[1][0] > zero_gate]
        have = zero_nullity + sum(n for _, (_, n, _) in found_neg) \
            + sum(n for _, (_, n, _) in found)
        k_lo += chunk
        if k_lo > k_cap:
            raise ScanError(
                f"found only {have} of {count} eigenvalues below k = {k_cap}")

    events = sorted(found_neg) + ([(0.0, (0.0, zero_nullity, zero_vecs))]
                                  if zero_nullity else []) + sorted(found)
    flat_vals: list[float] = []
    flat_coeffs: list = []
    for _, (lam, nullity, vecs) in events:
        coeffs = _eigenfunction_coefficients(graph, lam, vecs)
        for j in range(nullity):
            flat_vals.append(lam)
            flat_coeffs.append(coeffs[j])
    flat_vals = flat_vals[:count]
    flat_coeffs = flat_coeffs[:count]

    vertex_values = tuple(
        {v.id: (0.0 if v.condition.is_extended else
                _eval_at(graph, flat_vals[i], flat_coeffs[i],
                         v.sorted_endpoints()[0]))
         for v in graph.vertices}
        for i in range(len(flat_vals)))

    return Spectrum(
        values=tuple(flat_vals),
        entries=cluster_eigenvalues(flat_vals, rel_tol=1e-10,
                                    coefficients=flat_coeffs),
        method="secular",
        meta={"grid_divisor": grid_divisor, "nullity_rtol": NULLITY_RTOL,
              "refine_k_rtol": REFINE_K_RTOL, "floor": floor},
        vertex_values=vertex_values,
        vectors=tuple(flat_coeffs),
        graph=graph,
    )


# ---------------------------------------------------------------------------
# eigenfunction evaluation
# ---------------------------------------------------------------------------

def _gauss_nodes(length: float, npts: int = 64):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * length * (x + 1.0), 0.5 * length * w


def _coeff_map(graph: MetricGraph, vec: np.ndarray) -> dict:
    return {e.id: np.asarray(vec[4 * i:4 * i + 4]) for i, e in enumerate(graph.edges)}


def _eval_at(graph: MetricGraph, lam: float, coeffs: dict, ep: Endpoint) -> float:
    t = fundamental_table(lam, graph.edge(ep.edge_id).length,
                          0.0 if ep.side is Side.LEFT else graph.edge(ep.edge_id).length)
    return float(t[0] @ coeffs[ep.edge_id])


def eigenfunction_values(spectrum: Spectrum, flat_index: int, edge_id: str,
                         xs) -> list[tuple[float, float, float, float]]:
    """Pointwise (x, phi, phi', phi'') along one edge for one eigenfunction.

    ``flat_index`` is 1-based into the flat eigenvalue list.  Only spectra
    produced by ``scan_spectrum`` carry the coefficient vectors this needs.
    """
    if spectrum.vectors is None or spectrum.method != "secular":
        raise ValueError("eigenfunction evaluation needs a secular spectrum")
    graph: MetricGraph = spectrum.graph
    if not any(e.id == edge_id for e in graph.edges):
        raise KeyError(f"unknown edge id {edge_id!r}")
    lam = spectrum.value_at(flat_index)
    coeffs = spectrum.vectors[flat_index - 1]
    length = graph.edge(edge_id).length
    out = []
    for x in xs:
        t = fundamental_table(lam, length, float(x))
        vals = t @ np.asarray(coeffs[edge_id])
        out.append((float(x), float(vals[0]), float(vals[1]), float(vals[2])))
    return out


def l2_inner(graph: MetricGraph, lam: float, ca: dict, cb: dict,
             npts: int = 64) -> float:
    acc = 0.0
    for e in graph.edges:
        xs, ws = _gauss_nodes(e.length, npts)
        va = np.array([fundamental_table(lam, e.length, x)[0] @ ca[e.id] for x in xs])
        vb = np.array([fundamental_table(lam, e.length, x)[0] @ cb[e.id] for x in xs])
        acc += float(np.sum(ws * va * vb))
    return acc


def rayleigh_quotient(graph: MetricGraph, lam: float, coeffs: dict,
                      npts: int = 64) -> float:
    """Energy over mass for a coefficient function; equals lambda on eigenpairs."""
    num = 0.0
    den = 0.0
    for e in graph.edges:
        xs, ws = _gauss_nodes(e.length, npts)
        rows = np.array([fundamental_table(lam, e.length, x)[:3] @ coeffs[e.id]
                         for x in xs])
        num += float(np.sum(ws * rows[:, 2] ** 2))
        den += float(np.sum(ws * rows[:, 0] ** 2))
    for v in graph.vertices:
        if v.condition.alpha != 0.0 and not v.condition.is_extended:
            val = _eval_at(graph, lam, coeffs, v.sorted_endpoints()[0])
            num += v.condition.alpha * val * val
    return num / den


def _eigenfunction_coefficients(graph: MetricGraph, lam: float,
                                raw_vecs: list) -> list:
    """Gram-Schmidt in L2 within the eigenspace; unit-norm coefficients."""
    coeffs = [_coeff_map(graph, v) for v in raw_vecs]
    ortho: list = []
    for c in coeffs:
        work = {k: v.copy() for k, v in c.items()}
        for o in ortho:
            proj = l2_inner(graph, lam, work, o)
            for k in work:
                work[k] = work[k] - proj * o[k]
        nrm = math.sqrt(max(l2_inner(graph, lam, work, work), 1e-300))
        for k in work:
            work[k] = work[k] / nrm
        ortho.append(work)
    return ortho
