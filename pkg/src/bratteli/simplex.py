"""Product matrices, the nested polytopes they span, clustering, measure traces."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .diagram import BratteliDiagram, ensure_depth, heights, stochastic_matrix
from .errors import DimensionError, LevelRangeError, UnseparatedError
from .linalg import dstar, matmul, rank, vecmat

DEFAULT_GAP_RATIO = 10


@dataclass(frozen=True)
class ProductMatrix:
    n: int
    m: int
    rows: tuple  # rows indexed by V_{n+m+1}, columns by V_n


@dataclass(frozen=True)
class Polytope:
    n: int
    m: int
    vectors: tuple
    tags: tuple  # generating vertex for each vector


def _check_product_range(diagram, n, m):
    if n < 1 or m < 0:
        raise LevelRangeError(f"product needs n >= 1 and m >= 0, got n={n}, m={m}")
    if n + m + 1 > diagram.depth:
        raise LevelRangeError(f"product ({n}, {m}) needs depth {n + m + 1}, diagram has {diagram.depth}")


def integer_products(diagram: BratteliDiagram, n: int, m_max: int):
    """Yield (m, F~_{n+m} ... F~_n) for m = 0..m_max."""
    _check_product_range(diagram, n, m_max)
    prod = diagram.matrices[n]
    yield 0, prod
    for m in range(1, m_max + 1):
        prod = matmul(diagram.matrices[n + m], prod)
        yield m, prod


def _normalize(diagram, n, m, prod) -> tuple:
    h = heights(diagram, n)
    top = heights(diagram, n + m + 1)
    return tuple(tuple(Fraction(x * hw, top[u]) for x, hw in zip(row, h)) for u, row in enumerate(prod))


def product_matrix(diagram: BratteliDiagram, n: int, m: int) -> ProductMatrix:
    """G_(n+m,n) = F_{n+m} ... F_n, computed from integer products and heights."""
    _check_product_range(diagram, n, m)
    prod = None
    for _, prod in integer_products(diagram, n, m):
        pass
    return ProductMatrix(n, m, _normalize(diagram, n, m, prod))


def product_matrix_rational(diagram: BratteliDiagram, n: int, m: int) -> ProductMatrix:
    """Same product, multiplying the stochastic matrices directly."""
    _check_product_range(diagram, n, m)
    g = stochastic_matrix(diagram, n)
    for k in range(n + 1, n + m + 1):
        g = matmul(stochastic_matrix(diagram, k), g)
    return ProductMatrix(n, m, g)


def polytope(diagram: BratteliDiagram, n: int, m: int) -> Polytope:
    """Spanning vectors of the level-n polytope after m steps."""
    if m == 0:
        k = diagram.width(n)
        basis = tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
        return Polytope(n, 0, basis, tuple(range(k)))
    diagram = ensure_depth(diagram, n + m)
    g = product_matrix(diagram, n, m - 1)
    return Polytope(n, m, g.rows, tuple(range(len(g.rows))))


def diameter_dstar(poly: Polytope | Sequence) -> Fraction:
    vecs = poly.vectors if isinstance(poly, Polytope) else poly
    best = Fraction(0)
    for i in range(len(vecs)):
        for j in range(i + 1, len(vecs)):
            d = dstar(vecs[i], vecs[j])
            if d > best:
                best = d
    return best


def diameter_series(diagram: BratteliDiagram, n: int, m_max: int) -> list[tuple[int, Fraction]]:
    """Diameters of the polytopes at steps 0..m_max (step 0 is the simplex)."""
    diagram = ensure_depth(diagram, n + m_max)
    k = diagram.width(n)
    out = [(0, Fraction(2) if k > 1 else Fraction(0))]
    if m_max == 0:
        return out
    for m, prod in integer_products(diagram, n, m_max - 1):
        out.append((m + 1, diameter_dstar(_normalize(diagram, n, m, prod))))
    return out


# ---------------------------------------------------------------------------
# clustering


@dataclass(frozen=True)
class Cluster:
    members: tuple
    centroid: tuple
    diameter: Fraction


@dataclass(frozen=True)
class ClusterReport:
    n: int
    m: int
    clusters: tuple
    gap: Fraction
    max_diameter: Fraction
    separated: bool
    gap_ratio: Fraction

    @property
    def count(self) -> int:
        return len(self.clusters)


def single_linkage(vectors: Sequence, gap_ratio=DEFAULT_GAP_RATIO):
    """Cluster vectors under d* and pick the coarsest separated cut.

    A cut is separated when the smallest distance between clusters exceeds
    gap_ratio times the largest cluster diameter.  The single-cluster cut
    counts as separated when 2, the diameter of the simplex, beats the
    ratio.  Returns (groups, gap, max_diameter, separated); when no cut is
    separated the cut with the best gap-to-diameter ratio is returned.
    """
    gap_ratio = Fraction(gap_ratio)
    size = len(vectors)
    dist = {}
    edges = []
    for i in range(size):
        for j in range(i + 1, size):
            d = dstar(vectors[i], vectors[j])
            dist[i, j] = d
            edges.append((d, i, j))
    edges.sort()

    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    members = {i: [i] for i in range(size)}
    diam = {i: Fraction(0) for i in range(size)}
    # walk the merges; the state before each MST edge is a candidate cut
    mst = []
    snapshots = []  # (groups, max_diameter) with len(mst) merges applied
    snapshots.append(([[i] for i in range(size)], Fraction(0)))
    for d, i, j in edges:
        a, b = find(i), find(j)
        if a == b:
            continue
        cross = max(dist[min(x, y), max(x, y)] for x in members[a] for y in members[b])
        parent[b] = a
        members[a] = members[a] + members.pop(b)
        diam[a] = max(diam[a], diam.pop(b), cross)
        mst.append(d)
        snapshots.append(([sorted(g) for g in members.values()], max(diam.values())))

    best = None
    chosen = None
    # coarsest first: the snapshot with the most merges has the fewest clusters
    for merges in range(len(snapshots) - 1, -1, -1):
        groups, max_d = snapshots[merges]
        gap = mst[merges] if merges < len(mst) else Fraction(2)
        separated = gap > gap_ratio * max_d
        if separated:
            chosen = (groups, gap, max_d, True)
            break
        score = gap / max_d if max_d else Fraction(0)
        if best is None or score > best[0]:
            best = (score, (groups, gap, max_d, False))
    if chosen is None:
        chosen = best[1]
    groups = sorted(chosen[0], key=lambda g: g[0])
    return groups, chosen[1], chosen[2], chosen[3]


def centroid(vectors: Sequence) -> tuple:
    k = len(vectors)
    return tuple(sum(col, Fraction(0)) / k for col in zip(*vectors))


def cluster_vectors(vectors, tags, n, m, gap_ratio=DEFAULT_GAP_RATIO) -> ClusterReport:
    groups, gap, max_d, separated = single_linkage(vectors, gap_ratio)
    clusters = []
    for g in groups:
        pts = [vectors[i] for i in g]
        clusters.append(Cluster(tuple(tags[i] for i in g), centroid(pts), diameter_dstar(pts)))
    return ClusterReport(n, m, tuple(clusters), gap, max_d, separated, Fraction(gap_ratio))


def cluster_extremes(diagram: BratteliDiagram, n: int, m: int, gap_ratio=DEFAULT_GAP_RATIO) -> ClusterReport:
    if m < 1:
        raise LevelRangeError("clustering needs m >= 1")
    if Fraction(gap_ratio) <= 1:
        raise ValueError("gap_ratio must exceed 1")
    poly = polytope(diagram, n, m)
    return cluster_vectors(poly.vectors, poly.tags, n, m, gap_ratio)


def affine_dimension(points: Sequence) -> int:
    """Affine dimension of a finite point set, exactly."""
    if len(points) <= 1:
        return 0
    base = points[0]
    diffs = [tuple(x - y for x, y in zip(p, base)) for p in points[1:]]
    return rank(diffs)


# ---------------------------------------------------------------------------
# measure traces


@dataclass(frozen=True)
class MeasureTrace:
    """Tower masses q^(start), q^(start+1), ... of an invariant measure."""

    vectors: tuple
    start: int = 1

    @property
    def end(self) -> int:
        return self.start + len(self.vectors) - 1

    def at(self, n: int) -> tuple:
        if not self.start <= n <= self.end:
            raise LevelRangeError(f"trace covers levels {self.start}..{self.end}, asked for {n}")
        return self.vectors[n - self.start]

    def levels(self):
        return range(self.start, self.end + 1)


@dataclass(frozen=True)
class TraceCheck:
    ok: bool
    failing_level: int | None
    residual: Fraction  # largest consistency residual seen
    residuals: tuple  # per adjacent pair, starting at trace.start
    reason: str = ""


def verify_trace(diagram: BratteliDiagram, trace: MeasureTrace, tol=0) -> TraceCheck:
    """Check probability constraints and F_n^T q^(n+1) = q^(n) for every pair."""
    tol = Fraction(tol)
    if trace.start < 1:
        raise LevelRangeError("traces start at level 1 or later")
    diagram = ensure_depth(diagram, trace.end)
    for n in trace.levels():
        q = trace.at(n)
        if len(q) != diagram.width(n):
            raise DimensionError(f"trace level {n} has {len(q)} entries, level has {diagram.width(n)} vertices")
    residuals = []
    failing = None
    reason = ""
    for n in trace.levels():
        q = trace.at(n)
        bad = min(q) < 0 or abs(sum(q) - 1) > tol
        if bad and failing is None:
            failing, reason = n, "not a probability vector"
        if n < trace.end:
            pushed = vecmat(trace.at(n + 1), stochastic_matrix(diagram, n))
            r = Fraction(dstar(pushed, q))
            residuals.append(r)
            if r > tol and failing is None:
                failing, reason = n, "consistency relation fails"
    worst = max(residuals, default=Fraction(0))
    return TraceCheck(failing is None, failing, worst, tuple(residuals), reason)


def decompose_check(diagram: BratteliDiagram, trace: MeasureTrace, n: int, m: int) -> Fraction:
    """d* residual of q^(n) against the convex combination of level-(n+m+1) masses."""
    diagram = ensure_depth(diagram, n + m + 1)
    g = product_matrix(diagram, n, m)
    combo = vecmat(trace.at(n + m + 1), g.rows)
    return Fraction(dstar(combo, trace.at(n)))


@dataclass(frozen=True)
class TraceEstimate:
    trace: MeasureTrace
    residuals: tuple  # d*(F_n^T q^(n+1), q^(n)) per level
    members: tuple  # cluster members per level


def _match(projected: list, targets: list) -> list[int]:
    """Greedy matching of projected centroids to targets by d*."""
    pairs = sorted((dstar(p, t), i, j) for i, p in enumerate(projected) for j, t in enumerate(targets))
    taken_i, taken_j = set(), set()
    match = [None] * len(projected)
    for _, i, j in pairs:
        if i in taken_i or j in taken_j:
            continue
        match[i] = j
        taken_i.add(i)
        taken_j.add(j)
    return match


def trace_from_limit(
    diagram: BratteliDiagram, n_max: int, m: int, gap_ratio=DEFAULT_GAP_RATIO, start: int = 1
) -> list[TraceEstimate]:
    """Centroid traces of the separated clusters at levels start..n_max."""
    diagram = ensure_depth(diagram, n_max + m + 1)
    reports = [cluster_extremes(diagram, n, m, gap_ratio) for n in range(start, n_max + 1)]
    for r in reports:
        if not r.separated:
            raise UnseparatedError(
                f"level {r.n}: clusters not separated (gap {float(r.gap):.3g}, diameter {float(r.max_diameter):.3g})"
            )
    counts = {r.count for r in reports}
    if len(counts) != 1:
        raise UnseparatedError(f"cluster counts differ across levels: {[r.count for r in reports]}")

    # chains[j][n-1] is the index of the level-n cluster in chain j
    chains = [[j] for j in range(reports[0].count)]
    for i in range(1, len(reports)):
        f = stochastic_matrix(diagram, start + i - 1)
        upper = reports[i].clusters
        lower_now = [reports[i - 1].clusters[c[-1]].centroid for c in chains]
        projected = [vecmat(c.centroid, f) for c in upper]
        match = _match(lower_now, projected)
        for chain, j in zip(chains, match):
            chain.append(j)

    out = []
    for chain in chains:
        vecs = tuple(reports[n].clusters[j].centroid for n, j in enumerate(chain))
        members = tuple(reports[n].clusters[j].members for n, j in enumerate(chain))
        trace = MeasureTrace(vecs, start)
        res = tuple(
            Fraction(dstar(vecmat(vecs[i + 1], stochastic_matrix(diagram, start + i)), vecs[i])) for i in range(len(vecs) - 1)
        )
        out.append(TraceEstimate(trace, res, members))
    return out
