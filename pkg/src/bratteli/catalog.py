"""Built-in diagrams with facts known about them.

Each fact carries a zero-argument check returning ``(ok, detail)`` so the
regression suite can run every fact of every entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable

from . import series as ser
from .diagram import ers_check, heights, materialize, stochastic_matrix
from .errors import BratteliError, DimensionError
from .exprs import Poly, parse_expr
from .simplex import MeasureTrace, cluster_extremes, product_matrix, verify_trace
from .spec import DiagramSpec, spec_from_dict


@dataclass(frozen=True)
class Fact:
    name: str
    statement: str
    check: Callable[[], tuple]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    spec: DiagramSpec
    description: str
    facts: tuple = field(default_factory=tuple)

    def diagram(self, depth: int | None = None):
        return materialize(self.spec, depth)

    def run_facts(self) -> dict:
        return {f.name: f.check() for f in self.facts}


class CatalogError(BratteliError):
    pass


# ---------------------------------------------------------------------------
# two-vertex examples with growing diagonals


def _expression_spec(name, entries, depth):
    return spec_from_dict({"generator": "expression", "entries": entries, "depth": depth, "name": name})


def example_b1(depth: int = 12) -> CatalogEntry:
    spec = _expression_spec("b1", [["n", "1"], ["1", "n"]], depth)

    def closed_form():
        d = materialize(spec, depth)
        for n in range(1, depth):
            want = Fraction(1, n + 1)
            f = stochastic_matrix(d, n)
            if f != ((1 - want, want), (want, 1 - want)):
                return False, {"level": n, "got": f}
        return True, {"levels": depth - 1}

    def uniquely_ergodic():
        from .ergodicity import min_entry_divergence

        v = min_entry_divergence(materialize(spec, depth))
        return v.certified, v.certificate

    def gap_formula():
        from .ergodicity import row_gap

        d = materialize(spec, 14)
        for n in range(1, 7):
            for m in range(0, 7):
                want = Fraction(2 * (n - 1) * n, (n + m) * (n + m + 1))
                if row_gap(d, n, m) != want:
                    return False, {"n": n, "m": m}
        return True, {}

    return CatalogEntry(
        "b1",
        spec,
        "two vertices, diagonal n, off-diagonal 1",
        (
            Fact("stochastic-entries", "F_n has diagonal 1-1/(n+1) and off-diagonal 1/(n+1)", closed_form),
            Fact("uniquely-ergodic", "the minimum stochastic entries sum to infinity", uniquely_ergodic),
            Fact("row-gap-formula", "row gap of G_(n+m,n) is 2(n-1)n/((n+m)(n+m+1))", gap_formula),
        ),
    )


def example_b2(depth: int = 12) -> CatalogEntry:
    spec = _expression_spec("b2", [["n^2", "1"], ["1", "n^2"]], depth)

    def closed_form():
        d = materialize(spec, depth)
        for n in range(1, depth):
            off = Fraction(1, n * n + 1)
            if stochastic_matrix(d, n) != ((1 - off, off), (off, 1 - off)):
                return False, {"level": n}
        return True, {}

    def two_clusters():
        report = cluster_extremes(materialize(spec, 44), 2, 40)
        return report.separated and report.count == 2, {"count": report.count, "gap": report.gap}

    def column_chains():
        from .ergodicity import Partition, subdiagram_unique_ergodicity

        part = Partition.constant([[0], [1]])
        d = materialize(spec, depth)
        verdicts = [subdiagram_unique_ergodicity(d, part, j).status for j in (1, 2)]
        return all(v == "Certified" for v in verdicts), verdicts

    return CatalogEntry(
        "b2",
        spec,
        "two vertices, diagonal n^2, off-diagonal 1",
        (
            Fact("stochastic-entries", "off-diagonal entries are 1/(n^2+1)", closed_form),
            Fact("two-measures", "the level-2 polytope limit has two separated clusters at m=40", two_clusters),
            Fact("column-subdiagrams", "each column subdiagram is uniquely ergodic", column_chains),
        ),
    )


# ---------------------------------------------------------------------------
# stationary


def stationary_3odometer(depth: int = 22) -> CatalogEntry:
    spec = spec_from_dict(
        {"generator": "stationary", "matrix": [[3, 0], [1, 2]], "root_edges": [3, 3], "depth": depth, "name": "odometer3"}
    )

    def first_matrix():
        f = stochastic_matrix(materialize(spec, 2), 1)
        return f == ((1, 0), (Fraction(1, 3), Fraction(2, 3))), f

    def powers():
        d = materialize(spec, depth)
        for m in range(1, min(20, depth - 2) + 1):
            r = Fraction(2, 3) ** m
            got = product_matrix(d, 1, m - 1).rows
            if got != ((1, 0), (1 - r, r)):
                return False, {"m": m}
        return True, {}

    def classes():
        from .stationary import class_graph, distinguished_classes

        got = distinguished_classes(class_graph(spec.matrix))
        return got == [(0,)], got

    def trace():
        from .stationary import class_graph, distinguished_measure

        g = class_graph(spec.matrix)
        d = materialize(spec, 6)
        mu = distinguished_measure(d, g.class_of(0), g)
        q = mu.trace(d, 5)
        ok = all(q.at(n) == (1, 0) for n in range(1, 6)) and verify_trace(d, q).ok
        return ok, q.at(1)

    return CatalogEntry(
        "odometer3",
        spec,
        "stationary [[3,0],[1,2]]; the invariant measure lives on the 3-odometer",
        (
            Fact("stochastic-matrix", "F = [[1,0],[1/3,2/3]]", first_matrix),
            Fact("matrix-powers", "F^m = [[1,0],[1-(2/3)^m,(2/3)^m]]", powers),
            Fact("distinguished-classes", "only class {0} is distinguished", classes),
            Fact("measure-trace", "the distinguished measure has trace (1,0) at every level", trace),
        ),
    )


def stationary_two_classes(depth: int = 10) -> CatalogEntry:
    spec = spec_from_dict(
        {"generator": "stationary", "matrix": [[2, 0], [1, 3]], "depth": depth, "name": "two-classes"}
    )

    def classes():
        from .stationary import class_graph, distinguished_classes

        got = distinguished_classes(class_graph(spec.matrix))
        return got == [(0,), (1,)], got

    return CatalogEntry(
        "two-classes",
        spec,
        "stationary [[2,0],[1,3]]; both classes carry a measure",
        (Fact("distinguished-classes", "classes {0} and {1} are both distinguished", classes),),
    )


# ---------------------------------------------------------------------------
# Pascal


def pascal_measure(p, depth: int) -> MeasureTrace:
    """Binomial trace q_i^(n) = C(n,i) p^i (1-p)^(n-i) for levels 1..depth."""
    p = Fraction(p)
    if not 0 < p < 1:
        raise DimensionError(f"p must lie strictly between 0 and 1, got {p}")
    if depth < 1:
        raise DimensionError("depth must be at least 1")
    vectors = tuple(tuple(comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(n + 1)) for n in range(1, depth + 1))
    return MeasureTrace(vectors, 1)


def pascal(depth: int = 12) -> CatalogEntry:
    spec = spec_from_dict({"generator": "pascal", "depth": depth, "name": "pascal"})

    def entries():
        d = materialize(spec, 31)
        for n in range(1, 31):
            f = stochastic_matrix(d, n)
            for k, row in enumerate(f):
                for w, x in enumerate(row):
                    want = Fraction(k, n + 1) if w == k - 1 else Fraction(n + 1 - k, n + 1) if w == k else 0
                    if x != want:
                        return False, {"level": n, "row": k, "col": w}
        return True, {}

    def binomial():
        d = materialize(spec, depth)
        res = {}
        for p in (Fraction(1, 2), Fraction(1, 3), Fraction(2, 5)):
            check = verify_trace(d, pascal_measure(p, depth))
            res[str(p)] = check.residual
            if not check.ok or check.residual != 0:
                return False, res
        return True, res

    def no_partition():
        from .ergodicity import NoAdmissiblePartition, chain_partition_search

        out = chain_partition_search(materialize(spec, depth), window=6)
        ok = isinstance(out, NoAdmissiblePartition) and out.witness.get("min_row_distance", 0) >= Fraction(1, 2)
        return ok, getattr(out, "condition", None)

    return CatalogEntry(
        "pascal",
        spec,
        "Pascal graph; the ergodic measures are the binomial ones",
        (
            Fact("stochastic-entries", "F_n entries are k/(n+1) and 1-k/(n+1)", entries),
            Fact("binomial-traces", "binomial traces are exactly consistent", binomial),
            Fact("no-admissible-partition", "no chain partition satisfies the row-distance condition", no_partition),
        ),
    )


# ---------------------------------------------------------------------------
# countably many measures


def _mass_term(a_rule) -> ser.RationalTerm | None:
    a = a_rule.to_poly()
    if a is None:
        return None
    return ser.RationalTerm(Poly.var(), a + Poly.var(), 1)


def countable_example(a_rule="n^3+2", depth: int = 8) -> CatalogEntry:
    """The diagram with vertex n+1 attached to vertex n by a_n edges.

    Rejected unless the series of n/(a_n+n) has a convergence certificate.
    """
    expr = parse_expr(a_rule)
    term = _mass_term(expr)
    cert = ser.convergence_certificate([term]) if term is not None else None
    if cert is None:
        raise CatalogError(f"cannot certify that the sum of n/(a_n+n) converges for a_n = {expr}")
    if any(expr.evaluate(n) < 1 for n in range(0, 50)):
        raise CatalogError(f"a_n = {expr} must be a positive integer for every n")
    spec = spec_from_dict({"generator": "countable", "params": {"a_n": str(expr)}, "depth": depth, "name": "countable"})

    def heights_law():
        d = materialize(spec, depth)
        for n in range(1, depth):
            a = expr.evaluate(n)
            h = heights(d, n + 1)
            if len(set(h)) != 1 or h[0] != heights(d, n)[0] * (a + n):
                return False, {"level": n + 1}
        return True, {}

    def cluster_counts():
        d = materialize(spec, 30)
        counts = [cluster_extremes(d, n, 25).count for n in range(1, 5)]
        return counts == [2, 3, 4, 5], counts

    def columns_extend():
        from .subdiagram import extension_finiteness

        d = materialize(spec, depth)
        out = []
        for i in range(5):
            W = [[min(n, i)] for n in range(1, depth + 1)]
            out.append(extension_finiteness(d, W, depth - 1).status)
        return all(s == "Certified-Finite" for s in out), out

    def product_bound():
        return product_lower_bound(spec, 12)

    return CatalogEntry(
        "countable",
        spec,
        f"countably many ergodic measures, a_n = {expr}",
        (
            Fact("heights", "h^(n+1) = h^(n)(a_n+n) at every vertex", heights_law),
            Fact("cluster-counts", "level n shows n+1 clusters at m=25", cluster_counts),
            Fact("column-extensions", "column subdiagrams B_0..B_4 extend to finite measures", columns_extend),
            Fact("product-bound", "g_vw >= prod a_s/(a_s+s) on the stay/step pairs", product_bound),
        ),
    )


def product_lower_bound(spec: DiagramSpec, top: int = 12) -> tuple:
    """Check g_vw^(n+m,n) >= prod_{s=n}^{n+m} a_s/(a_s+s) where v=w<=n or v>n, w=n."""
    a = spec.a_rule
    d = materialize(spec, top + 1)
    checked = 0
    worst = None
    for n in range(1, top):
        for m in range(1, top - n + 1):
            g = product_matrix(d, n, m).rows
            bound = Fraction(1)
            for s in range(n, n + m + 1):
                bound *= Fraction(a.evaluate(s), a.evaluate(s) + s)
            pairs = [(v, v) for v in range(n + 1)] + [(v, n) for v in range(n + 1, n + m + 2)]
            for v, w in pairs:
                checked += 1
                slack = g[v][w] - bound
                if worst is None or slack < worst[0]:
                    worst = (slack, n, m, v, w)
                if slack < 0:
                    return False, {"n": n, "m": m, "v": v, "w": w, "g": g[v][w], "bound": bound}
    return True, {"pairs": checked, "min_slack": worst[0]}


# ---------------------------------------------------------------------------
# Toeplitz


def ers_toeplitz(lam="2", block0=(0, None, 1), fills=None, depth: int = 6) -> CatalogEntry:
    params = {"lambda": str(lam), "block0": list(block0)}
    if fills is not None:
        params["fills"] = [[list(pair) for pair in rule] for rule in fills]
    spec = spec_from_dict({"generator": "ers-toeplitz", "params": params, "depth": depth, "name": "toeplitz"})
    try:
        d = materialize(spec, depth)
    except BratteliError as exc:
        raise CatalogError(f"inconsistent Toeplitz seed: {exc}") from None

    def ers():
        from .toeplitz import ToeplitzSeed

        seed = ToeplitzSeed.from_params(spec.params)
        report = ers_check(d)
        sums_ok = all(report.row_sums[n] == seed.lam_at(n + 1) for n in range(1, d.depth))
        return report.ers and report.identities_ok and sums_ok, report.row_sums

    def frequencies():
        from .toeplitz import ToeplitzSeed

        seed = ToeplitzSeed.from_params(spec.params)
        for n in range(1, d.depth):
            lam_next = seed.lam_at(n + 1)
            f = stochastic_matrix(d, n)
            inc = d.matrices[n]
            if any(f[v][w] != Fraction(inc[v][w], lam_next) for v in range(len(inc)) for w in range(len(inc[0]))):
                return False, {"level": n}
        return True, {}

    def heights_are_periods():
        from .toeplitz import ToeplitzSeed

        seed = ToeplitzSeed.from_params(spec.params)
        ok = all(set(heights(d, n)) == {seed.p(n)} for n in range(1, d.depth + 1))
        return ok, [seed.p(n) for n in range(1, d.depth + 1)]

    return CatalogEntry(
        "toeplitz",
        spec,
        "Toeplitz diagram from a partially filled seed block",
        (
            Fact("ers", "every level has common row sum lambda_{n+1}", ers),
            Fact("frequencies", "f = incidence / lambda_{n+1}", frequencies),
            Fact("heights", "every tower at level n has height p_n", heights_are_periods),
        ),
    )


BUILDERS = {
    "b1": example_b1,
    "b2": example_b2,
    "odometer3": stationary_3odometer,
    "two-classes": stationary_two_classes,
    "pascal": pascal,
    "countable": countable_example,
    "toeplitz": ers_toeplitz,
}


def names() -> list[str]:
    return list(BUILDERS)


def entry(name: str) -> CatalogEntry:
    try:
        return BUILDERS[name]()
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; choose from {', '.join(BUILDERS)}") from None


def emit(name: str) -> str:
    """Spec file text for a catalog entry."""
    return entry(name).spec.to_json()
