"""Stationary diagrams: irreducible classes, spectral radii, distinguished measures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import networkx as nx
import numpy as np

from .diagram import BratteliDiagram, ensure_depth, heights
from .errors import NotDistinguishedError
from .linalg import det, dstar, nullspace, solve
from .simplex import DEFAULT_GAP_RATIO, MeasureTrace, cluster_extremes, trace_from_limit, verify_trace

TIE_TOL = 1e-9
POWER_TOL = 1e-12


@dataclass(frozen=True)
class SpectralRadius:
    value: float
    lower: float  # Collatz-Wielandt bracket
    upper: float
    exact: int | None = None  # set when the radius is an integer, checked exactly

    @property
    def error(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class ClassGraph:
    matrix: tuple
    classes: tuple  # tuple of sorted vertex tuples
    below: dict  # class index -> set of class indices strictly below (reachable)
    radii: tuple
    submatrices: tuple

    def class_of(self, v: int) -> int:
        for i, c in enumerate(self.classes):
            if v in c:
                return i
        raise KeyError(v)

    def order_edges(self) -> list[tuple[int, int]]:
        """Pairs (a, b) with class a strictly above class b."""
        return sorted((a, b) for a, bs in self.below.items() for b in bs)

    def reachable(self, i: int) -> set:
        """Vertices reachable from class i, the class included."""
        out = set(self.classes[i])
        for b in self.below[i]:
            out |= set(self.classes[b])
        return out


def _graph(matrix) -> nx.DiGraph:
    g = nx.DiGraph()
    k = len(matrix)
    g.add_nodes_from(range(k))
    for v in range(k):
        for w in range(k):
            if matrix[v][w] > 0:
                g.add_edge(v, w)
    return g


def spectral_radius(sub) -> SpectralRadius:
    """Perron root of an irreducible non-negative integer matrix."""
    a = np.array(sub, dtype=float)
    k = a.shape[0]
    if k == 1:
        val = float(a[0, 0])
        return SpectralRadius(val, val, val, int(sub[0][0]))
    if not a.any():
        return SpectralRadius(0.0, 0.0, 0.0, 0)
    # shifting by the identity makes the matrix primitive, so power iteration converges
    b = a + np.eye(k)
    x = np.ones(k)
    lo = hi = 0.0
    for _ in range(100_000):
        y = b @ x
        ratios = y / x
        lo, hi = ratios.min() - 1.0, ratios.max() - 1.0
        x = y / y.max()
        if hi - lo <= POWER_TOL * max(1.0, abs(hi)):
            break
    lo, hi = float(lo), float(hi)
    value = (lo + hi) / 2
    exact = None
    cand = round(value)
    if cand > 0 and abs(cand - value) < 1e-6:
        shifted = tuple(tuple(sub[i][j] - (cand if i == j else 0) for j in range(k)) for i in range(k))
        if det(shifted) == 0:
            exact = cand
            value = lo = hi = float(cand)
    return SpectralRadius(value, lo, hi, exact)


def class_graph(matrix) -> ClassGraph:
    matrix = tuple(tuple(int(x) for x in row) for row in matrix)
    g = _graph(matrix)
    cond = nx.condensation(g)
    # sort classes by smallest vertex for a stable numbering
    order = sorted(cond.nodes, key=lambda c: min(cond.nodes[c]["members"]))
    index = {c: i for i, c in enumerate(order)}
    classes = tuple(tuple(sorted(cond.nodes[c]["members"])) for c in order)
    below = {index[c]: {index[d] for d in nx.descendants(cond, c)} for c in order}
    subs = tuple(tuple(tuple(matrix[v][w] for w in cls) for v in cls) for cls in classes)
    radii = tuple(spectral_radius(s) for s in subs)
    return ClassGraph(matrix, classes, below, radii, subs)


@dataclass(frozen=True)
class ClassStatus:
    index: int
    vertices: tuple
    status: str  # distinguished | not-distinguished | indeterminate
    blocking: tuple  # classes that decide the status


def _compare(a: SpectralRadius, b: SpectralRadius, tol: float) -> str:
    if a.exact is not None and b.exact is not None:
        return "gt" if a.exact > b.exact else "le"
    if a.lower - b.upper > tol:
        return "gt"
    if b.lower - a.upper > tol:
        return "le"
    if abs(a.value - b.value) <= tol:
        return "tie"
    return "gt" if a.value > b.value else "le"


def classify_classes(graph: ClassGraph, tol: float = TIE_TOL) -> list[ClassStatus]:
    out = []
    for i, cls in enumerate(graph.classes):
        rho = graph.radii[i]
        if rho.value == 0:
            out.append(ClassStatus(i, cls, "not-distinguished", ()))
            continue
        lost, ties = [], []
        for j in sorted(graph.below[i]):
            res = _compare(rho, graph.radii[j], tol)
            if res == "le":
                lost.append(j)
            elif res == "tie":
                ties.append(j)
        if lost:
            out.append(ClassStatus(i, cls, "not-distinguished", tuple(lost)))
        elif ties:
            out.append(ClassStatus(i, cls, "indeterminate", tuple(ties)))
        else:
            out.append(ClassStatus(i, cls, "distinguished", ()))
    return out


def distinguished_classes(graph: ClassGraph, tol: float = TIE_TOL) -> list[tuple]:
    """Vertex sets of the classes whose radius beats every class below them."""
    return [s.vertices for s in classify_classes(graph, tol) if s.status == "distinguished"]


@dataclass(frozen=True)
class DistinguishedMeasure:
    class_index: int
    vertices: tuple
    rho: SpectralRadius
    x: tuple  # Fractions when exact, floats otherwise
    exact: bool
    residual: float
    h1: tuple

    def tower_masses(self, diagram: BratteliDiagram, n: int) -> tuple:
        h = heights(diagram, n)
        if self.exact:
            scale = Fraction(self.rho.exact) ** (n - 1)
            return tuple(xv * hv / scale for xv, hv in zip(self.x, h))
        logscale = (n - 1) * np.log(self.rho.value)
        return tuple(float(xv) * float(np.exp(np.log(float(hv)) - logscale)) if xv else 0.0 for xv, hv in zip(self.x, h))

    def trace(self, diagram: BratteliDiagram, levels: int) -> MeasureTrace:
        diagram = ensure_depth(diagram, levels)
        return MeasureTrace(tuple(self.tower_masses(diagram, n) for n in range(1, levels + 1)), 1)


def _stationary_matrix(diagram: BratteliDiagram) -> tuple:
    spec = diagram.spec
    if spec is not None and spec.generator == "stationary":
        return spec.matrix
    mats = diagram.matrices[1:]
    if not mats or any(m != mats[0] for m in mats):
        raise ValueError("diagram is not stationary")
    return mats[0]


def distinguished_measure(diagram: BratteliDiagram, class_index: int, graph: ClassGraph | None = None) -> DistinguishedMeasure:
    """Left Perron eigenvector of the class, supported on what it reaches."""
    matrix = _stationary_matrix(diagram)
    graph = graph or class_graph(matrix)
    statuses = classify_classes(graph)
    if statuses[class_index].status != "distinguished":
        raise NotDistinguishedError(f"class {graph.classes[class_index]} is {statuses[class_index].status}")
    rho = graph.radii[class_index]
    cls = list(graph.classes[class_index])
    support = sorted(graph.reachable(class_index))
    k = len(matrix)
    h1 = heights(diagram, 1)

    if rho.exact is not None:
        r = rho.exact
        # x_cls (F_cls - r I) = 0, i.e. (F_cls - r I)^T x^T = 0
        sub = graph.submatrices[class_index]
        mt = tuple(tuple(sub[j][i] - (r if i == j else 0) for j in range(len(cls))) for i in range(len(cls)))
        basis = nullspace(mt)
        xc = basis[0]
        if min(xc) < 0:
            xc = tuple(-v for v in xc)
        x = [Fraction(0)] * k
        for v, val in zip(cls, xc):
            x[v] = val
        others = [v for v in support if v not in cls]
        if others:
            # x_o (r I - F_oo) = x_cls F_{cls,o} + contributions already fixed
            a = tuple(tuple((r if oi == oj else 0) - matrix[oj][oi] for oj in others) for oi in others)
            b = tuple(sum(x[c] * matrix[c][oi] for c in cls) for oi in others)
            sol = solve(a, b)
            for v, val in zip(others, sol):
                x[v] = val
        norm = sum(xv * hv for xv, hv in zip(x, h1))
        x = tuple(xv / norm for xv in x)
        fm = np.array(matrix, dtype=float)
        residual = float(np.abs(np.array([float(v) for v in x]) @ fm - r * np.array([float(v) for v in x])).max())
        return DistinguishedMeasure(class_index, tuple(cls), rho, x, True, residual, h1)

    # float path: power iteration on the transpose restricted to the support
    idx = support
    sub = np.array([[matrix[v][w] for w in idx] for v in idx], dtype=float)
    b = sub.T + np.eye(len(idx))
    y = np.array([1.0 if v in cls else 0.0 for v in idx])
    y = np.where(y > 0, 1.0, 1e-3)
    for _ in range(200_000):
        z = b @ y
        z /= z.max()
        if np.abs(z - y).max() < POWER_TOL:
            y = z
            break
        y = z
    x = np.zeros(k)
    x[idx] = y
    x /= float(np.dot(x, np.array(h1, dtype=float)))
    fm = np.array(matrix, dtype=float)
    residual = float(np.abs(x @ fm - rho.value * x).max() / max(np.abs(x).max(), 1e-300))
    return DistinguishedMeasure(class_index, tuple(cls), rho, tuple(float(v) for v in x), False, residual, h1)


def cross_validate(diagram: BratteliDiagram, depth_m: int, levels: int = 3, gap_ratio=DEFAULT_GAP_RATIO) -> dict:
    """Compare distinguished-class measures against the polytope limits."""
    matrix = _stationary_matrix(diagram)
    graph = class_graph(matrix)
    statuses = classify_classes(graph)
    chosen = [s.index for s in statuses if s.status == "distinguished"]
    measures = [distinguished_measure(diagram, i, graph) for i in chosen]
    diagram = ensure_depth(diagram, levels + depth_m + 1)
    report = cluster_extremes(diagram, 1, depth_m, gap_ratio)
    out = {
        "distinguished": [list(graph.classes[i]) for i in chosen],
        "indeterminate": [list(s.vertices) for s in statuses if s.status == "indeterminate"],
        "clusters": report.count,
        "separated": report.separated,
        "count_match": report.separated and report.count == len(chosen),
    }
    try:
        estimates = trace_from_limit(diagram, levels, depth_m, gap_ratio)
    except Exception as exc:  # unseparated or inconsistent clustering
        out["trace_error"] = str(exc)
        out["supports_match"] = False
        out["max_discrepancy"] = None
        return out

    pairs = []
    for mu in measures:
        q = mu.trace(diagram, levels)
        best = None
        for e in estimates:
            disc = max(dstar(q.at(n), e.trace.at(n)) for n in range(1, levels + 1))
            if best is None or disc < best[0]:
                best = (disc, e)
        pairs.append((mu, q, best))
    supports_ok = True
    discrepancies = []
    for mu, q, (disc, est) in pairs:
        discrepancies.append(disc)
        support = {v for v, xv in enumerate(mu.x) if xv > 0}
        # the limit vector is supported on the same vertices at every level
        for n in range(1, levels + 1):
            centroid = est.trace.at(n)
            eps = max(float(disc) * 10, 1e-12)
            limit_support = {v for v, c in enumerate(centroid) if float(c) > eps}
            if limit_support != support:
                supports_ok = False
    out["supports_match"] = supports_ok
    out["max_discrepancy"] = max(discrepancies) if discrepancies else None
    out["residuals"] = [max(e.residuals, default=0) for e in estimates]
    out["measure_traces_valid"] = [
        verify_trace(diagram, mu.trace(diagram, levels)).ok if mu.exact else None for mu in measures
    ]
    return out
