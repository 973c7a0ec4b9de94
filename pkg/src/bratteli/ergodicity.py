"""Unique ergodicity certificates and the finite-rank structure checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import series as ser
from .closed_forms import min_entry_terms, row_mass_term
from .diagram import BratteliDiagram, ensure_depth, stochastic_matrix, telescope
from .errors import DimensionError, LevelRangeError
from .linalg import det, dstar, matmul, max_row_distance
from .simplex import MeasureTrace, _normalize, integer_products, single_linkage
from .verdict import CERTIFIED, UNDETERMINED, Verdict

DEFAULT_BUDGET = 64
DEFAULT_C = Fraction(1, 4)
DEFAULT_C1 = Fraction(1, 4)
DEFAULT_LEAK = Fraction(3, 10)


def default_schedule(length: int = 10) -> list[Fraction]:
    return [Fraction(1, 2**k) for k in range(1, length + 1)]


# ---------------------------------------------------------------------------
# telescoping search


def unique_ergodicity_search(diagram: BratteliDiagram, eps_schedule=None, m_budget: int = DEFAULT_BUDGET) -> Verdict:
    """Greedy telescoping whose stochastic matrices have row gaps under the schedule.

    Starting at level 1, for each eps_k the smallest m <= m_budget with
    max row d*(G_(n+m,n)) <= eps_k is taken and the next level is n+m+1.
    """
    eps = [Fraction(e) for e in (eps_schedule if eps_schedule is not None else default_schedule())]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_schedule must be positive and strictly decreasing")
    if m_budget < 1:
        raise ValueError("m_budget must be at least 1")

    n = 1
    levels = [0]
    steps = []
    for k, e in enumerate(eps, start=1):
        try:
            diagram = ensure_depth(diagram, n + m_budget + 1)
        except LevelRangeError:
            pass
        m_avail = min(m_budget, diagram.depth - n - 1)
        best = None
        found = None
        if m_avail >= 0:
            for m, prod in integer_products(diagram, n, m_avail):
                gap = max_row_distance(_normalize(diagram, n, m, prod))
                if best is None or gap < best[0]:
                    best = (gap, m)
                if gap <= e:
                    found = (m, gap)
                    break
        if found is None:
            witness = {
                "k": k,
                "eps": e,
                "n": n,
                "m_searched": m_avail + 1 if m_avail >= 0 else 0,
                "m_budget": m_budget,
                "best_gap": None if best is None else best[0],
                "best_m": None if best is None else best[1],
                "depth_limited": m_avail < m_budget,
            }
            cert = {"levels": levels + [n], "steps": steps, "complete": False}
            return Verdict("unique-ergodicity", UNDETERMINED, cert, steps, witness)
        m, gap = found
        steps.append({"k": k, "n": n, "m": m, "eps": e, "gap": gap})
        levels.append(n)
        n += m + 1
    levels.append(n)
    cert = {"levels": levels, "eps_schedule": eps, "gaps": [s["gap"] for s in steps], "complete": True}
    return Verdict("unique-ergodicity", CERTIFIED, cert, steps, {})


def replay_certificate(diagram: BratteliDiagram, certificate: dict) -> tuple[bool, list[Fraction]]:
    """Telescope to the certified levels and recompute every row gap."""
    levels = certificate["levels"]
    eps = certificate["eps_schedule"]
    diagram = ensure_depth(diagram, levels[-1])
    tel = telescope(diagram, levels)
    gaps = [max_row_distance(stochastic_matrix(tel, k)) for k in range(1, len(eps) + 1)]
    return all(g <= e for g, e in zip(gaps, eps)), gaps


def row_gap(diagram: BratteliDiagram, n: int, m: int) -> Fraction:
    diagram = ensure_depth(diagram, n + m + 1)
    prod = None
    for _, prod in integer_products(diagram, n, m):
        pass
    return max_row_distance(_normalize(diagram, n, m, prod))


# ---------------------------------------------------------------------------
# divergence tests


def _series_rows(levels, values):
    return [{"n": n, "term": v, "partial_sum": s} for n, v, s in zip(levels, values, ser.partial_sums(values))]


def _divergence_verdict(analysis, levels, values, terms, stable_from: int = 1) -> Verdict:
    rows = _series_rows(levels, values)
    exact = dict(zip(levels, values))
    if isinstance(terms, tuple) and terms and terms[0] == "bound":
        _, bound, n0 = terms
        if all(v >= bound for n, v in exact.items() if n >= n0):
            return Verdict(analysis, CERTIFIED, ser.constant_bound_certificate(bound, n0), rows, {})
        terms = None
    if terms:
        start = max([stable_from] + [t.n0 for t in terms])
        agree = all(min(t(n) for t in terms) == v for n, v in exact.items() if n >= start)
        if not agree:
            return Verdict(analysis, UNDETERMINED, {}, rows, {"reason": "closed form disagrees with exact entries"})
        cert = ser.divergence_certificate(terms)
        if cert is not None:
            return Verdict(analysis, CERTIFIED, cert, rows, {})
        if ser.refutes_divergence(terms):
            return Verdict(
                analysis,
                UNDETERMINED,
                {},
                rows,
                {"reason": "the minimum-entry series converges, so this test does not apply", "terms": [str(t) for t in terms]},
            )
    return Verdict(analysis, UNDETERMINED, {}, rows, {"reason": "no comparison certificate available"})


def min_entry_divergence(diagram: BratteliDiagram, window: int | None = None) -> Verdict:
    """Sum of the smallest stochastic entries diverges => uniquely ergodic."""
    if window is None:
        window = diagram.depth - 1
    diagram = ensure_depth(diagram, window + 1)
    levels = list(range(1, window + 1))
    values = [min(min(r) for r in stochastic_matrix(diagram, n)) for n in levels]
    return _divergence_verdict("min-entry-divergence", levels, values, min_entry_terms(diagram.spec))


# ---------------------------------------------------------------------------
# partitions


@dataclass(frozen=True)
class Partition:
    """Per-level blocks V_{n,1..l}; everything else is the remainder V_{n,0}."""

    rule: Callable[[int], Sequence[Iterable[int]]]

    @classmethod
    def constant(cls, blocks) -> "Partition":
        fixed = tuple(tuple(b) for b in blocks)
        return cls(lambda n: fixed)

    @classmethod
    def from_levels(cls, table: dict, tail=None) -> "Partition":
        """Explicit blocks for listed levels, ``tail`` for the rest."""
        fixed = {int(k): tuple(tuple(b) for b in v) for k, v in table.items()}
        last = tail if tail is not None else fixed[max(fixed)]

        def rule(n):
            return fixed.get(n, last)

        return cls(rule)

    def blocks(self, n: int, width: int) -> tuple[frozenset, ...]:
        out = tuple(frozenset(b) for b in self.rule(n))
        seen = set()
        for b in out:
            if any(not 0 <= v < width for v in b):
                raise DimensionError(f"partition block {sorted(b)} is outside level {n} (width {width})")
            if seen & b:
                raise DimensionError(f"partition blocks overlap at level {n}")
            seen |= b
        return out

    def rest(self, n: int, width: int) -> frozenset:
        used = frozenset().union(*self.blocks(n, width))
        return frozenset(range(width)) - used


def _decay(values: Sequence) -> str:
    """Classify a non-negative sequence that should tend to 0."""
    vals = [Fraction(v) for v in values]
    if not vals:
        return "vacuous"
    half = vals[len(vals) // 2:]
    if all(v == 0 for v in half):
        return "holds"
    peak = max(vals)
    tail = vals[-max(2, len(vals) // 3):]
    if vals[-1] <= peak / 4 and all(b <= a for a, b in zip(tail, tail[1:])):
        return "evidence"
    if vals[-1] >= peak / 2:
        return "violated-evidence"
    return "inconclusive"


def gram_volume_sq(points: Sequence) -> Fraction:
    """Squared l-volume of the simplex spanned by l+1 points (exact)."""
    if len(points) <= 1:
        return Fraction(0)
    base = points[0]
    vecs = [tuple(Fraction(x) - y for x, y in zip(p, base)) for p in points[1:]]
    gram = tuple(tuple(sum(a * b for a, b in zip(u, v)) for v in vecs) for u in vecs)
    return det(gram) / math.factorial(len(vecs)) ** 2


def _stable_block(partition, diagram, j, window):
    """Block j if it is the same set on the last three levels, else None."""
    sets = [partition.blocks(n, diagram.width(n))[j] for n in range(max(1, window - 1), window + 2)]
    return sets[-1] if all(s == sets[-1] for s in sets) else None


def _stable_from(partition, diagram, j, window, stable) -> int:
    """First level n such that block j equals ``stable`` at n and n+1 up to the window."""
    n = window
    while n >= 1 and partition.blocks(n, diagram.width(n))[j] == stable:
        n -= 1
    return n + 1


def _convergence_summary(levels, values, terms, stable_from: int = 1) -> dict:
    out = ser.convergence_evidence(levels, values)
    if terms:
        exact = dict(zip(levels, values))
        start = max([stable_from] + [t.n0 for t in terms])
        agree = all(max(t(n) for t in terms) == v for n, v in exact.items() if n >= start)
        cert = ser.convergence_certificate(terms) if agree else None
        if cert is not None:
            out["certificate"] = cert
            out["verdict"] = "certified"
        elif agree and ser.refutes_convergence(terms):
            out["verdict"] = "divergent"
            out["rigorous"] = True
    return out


def check_main1(
    diagram: BratteliDiagram,
    partition: Partition,
    window: int | None = None,
    C=DEFAULT_C,
    C1=DEFAULT_C1,
) -> dict:
    """Evaluate the finite-rank structure conditions on a partition."""
    C, C1 = Fraction(C), Fraction(C1)
    if window is None:
        window = diagram.depth - 1
    diagram = ensure_depth(diagram, window + 1)
    levels = list(range(1, window + 1))
    all_levels = list(range(1, window + 2))
    blocks = {n: partition.blocks(n, diagram.width(n)) for n in all_levels}
    rest = {n: partition.rest(n, diagram.width(n)) for n in all_levels}
    counts = {len(b) for b in blocks.values()}
    if len(counts) != 1:
        raise DimensionError(f"partition has a varying number of blocks: {sorted(counts)}")
    l = counts.pop()

    report: dict = {"levels": levels, "blocks": l}
    report["a"] = {"holds": all(all(b) for b in blocks.values())}
    sizes = [[len(b) for b in blocks[n]] for n in all_levels]
    rest_sizes = [len(rest[n]) for n in all_levels]
    tail = sizes[len(sizes) // 2:]
    report["b"] = {
        "holds": all(s == sizes[0] for s in sizes),
        "eventually": all(s == tail[-1] for s in tail),
        "sizes": sizes[-1],
        "remainder_sizes": rest_sizes,
        "remainder_constant": len(set(rest_sizes)) == 1,
    }

    c_rep, d_rep, rv_rep = [], [], []
    for j in range(l):
        c_vals, d_vals, ratios = [], [], []
        rv_ok = True
        for n in levels:
            f = stochastic_matrix(diagram, n)
            up, here = blocks[n + 1][j], blocks[n][j]
            inside = [sum(f[v][w] for w in here) for v in sorted(up)]
            c_vals.append(1 - min(inside) if inside else Fraction(0))
            rows = [f[v] for v in sorted(up)]
            d_vals.append(max_row_distance(rows) if len(rows) > 1 else Fraction(0))
            leaks = [1 - x for x in inside]
            lo, hi = (min(leaks), max(leaks)) if leaks else (0, 0)
            ratios.append(lo / hi if hi else None)
            if hi and lo < C1 * hi:
                rv_ok = False
        terms = None
        stable = _stable_block(partition, diagram, j, window)
        if stable is not None:
            ts = [row_mass_term(diagram.spec, v, stable, complement=True) for v in sorted(stable)]
            terms = ts if ts and all(t is not None for t in ts) else None
        summary = _convergence_summary(levels, c_vals, terms, _stable_from(partition, diagram, j, window, stable) if stable else 1)
        c_rep.append({"block": j + 1, "terms": c_vals, **summary})
        d_rep.append({"block": j + 1, "values": d_vals, "verdict": _decay(d_vals)})
        rv_rep.append({"block": j + 1, "min_over_max": ratios, "C1": C1, "holds": rv_ok})
    report["c"] = c_rep
    report["d"] = d_rep
    report["regularly_vanishing"] = rv_rep

    # (e1): simplex volumes in level-1 coordinates
    width1 = diagram.width(1)
    y = tuple(tuple(Fraction(int(i == k)) for k in range(width1)) for i in range(width1))
    e1_vals = []
    for n in all_levels:
        if n > 1:
            y = matmul(stochastic_matrix(diagram, n - 1), y)
        if not rest[n] or l == 0:
            e1_vals.append(Fraction(0))
            continue
        means = []
        for b in blocks[n]:
            pts = [y[w] for w in b]
            means.append(tuple(sum(c) / len(pts) for c in zip(*pts)))
        e1_vals.append(max(gram_volume_sq(means + [y[w]]) for w in sorted(rest[n])))
    report["e1"] = {"volume_sq": e1_vals, "verdict": _decay(e1_vals)}

    # (e2): block row sums of remainder rows
    e2_vals = []
    for n in levels:
        f = stochastic_matrix(diagram, n)
        vals = [sum(f[v][w] for w in blocks[n][j]) for v in rest[n + 1] for j in range(l)]
        e2_vals.append(max(vals) if vals else None)
    present = [v for v in e2_vals if v is not None]
    report["e2"] = {"values": e2_vals, "bound": 1 - C, "holds": all(v < 1 - C for v in present)}
    return report


# ---------------------------------------------------------------------------
# subdiagram unique ergodicity


def subdiagram_unique_ergodicity(diagram: BratteliDiagram, partition: Partition, j: int, window: int | None = None) -> Verdict:
    """Divergence test for block j (1-based) of a partition."""
    if window is None:
        window = diagram.depth - 1
    diagram = ensure_depth(diagram, window + 1)
    pre = check_main1(diagram, partition, window)
    if not 1 <= j <= pre["blocks"]:
        raise DimensionError(f"block index {j} outside 1..{pre['blocks']}")
    c_ok = pre["c"][j - 1]["verdict"] in ("certified", "convergent")
    # only the tail matters for unique ergodicity, so (b) is checked eventually
    if not (pre["a"]["holds"] and pre["b"]["eventually"]):
        return Verdict(
            "subdiagram-unique-ergodicity",
            UNDETERMINED,
            {},
            [],
            {"reason": "partition fails the structural conditions (a)/(b)", "a": pre["a"], "b": pre["b"]},
        )
    levels = list(range(1, window + 1))
    values, decay, prod = [], [], Fraction(1)
    singleton = True
    for n in levels:
        f = stochastic_matrix(diagram, n)
        up = partition.blocks(n + 1, diagram.width(n + 1))[j - 1]
        here = partition.blocks(n, diagram.width(n))[j - 1]
        singleton = singleton and len(up) == 1 and len(here) == 1
        m = min(f[v][w] for v in up for w in here)
        values.append(m)
        if n >= 2:
            prod *= max(Fraction(0), 1 - 2 * m)
        decay.append(prod)

    terms = None
    stable_from = 1
    stable = _stable_block(partition, diagram, j - 1, window)
    if stable is not None:
        ts = [row_mass_term(diagram.spec, v, {w}) for v in sorted(stable) for w in sorted(stable)]
        terms = ts if all(t is not None for t in ts) else None
        stable_from = _stable_from(partition, diagram, j - 1, window, stable)
    verdict = _divergence_verdict("subdiagram-unique-ergodicity", levels, values, terms, stable_from)
    rows = verdict.series
    for row, d in zip(rows, decay):
        row["oscillation_bound"] = d
    witness = dict(verdict.witness)
    witness["condition_c"] = pre["c"][j - 1]["verdict"]
    cert = dict(verdict.certificate)
    status = verdict.status
    if status != CERTIFIED and singleton:
        status = CERTIFIED
        cert = {"kind": "singleton-blocks", "rigorous": True}
    elif status != CERTIFIED:
        witness["note"] = "the divergence test is only sufficient; the block may still be uniquely ergodic"
    if not c_ok:
        witness["warning"] = "condition (c) is not supported by the computed window"
    return Verdict("subdiagram-unique-ergodicity", status, cert, rows, witness)


# ---------------------------------------------------------------------------
# chain structures


@dataclass(frozen=True)
class ChainStructure:
    """Blocks per level (levels 1..top), remainders, and parent links.

    ``parents[n][j]`` is the index of the level-n block that level-(n+1)
    block j hangs from.
    """

    blocks: dict
    rest: dict
    parents: dict
    conditions: dict

    @property
    def top(self) -> int:
        return max(self.blocks)

    def successors(self, n: int, i: int) -> list[int]:
        return [j for j, p in enumerate(self.parents[n]) if p == i]

    def chains(self) -> list[tuple[int, ...]]:
        """Every chain through the computed levels, one per top-level block."""
        out = []
        for j in range(len(self.blocks[self.top])):
            chain = [j]
            for n in range(self.top - 1, 0, -1):
                chain.append(self.parents[n][chain[-1]])
            out.append(tuple(reversed(chain)))
        return sorted(out)

    def chain_sets(self, chain) -> list[frozenset]:
        return [self.blocks[n][i] for n, i in zip(range(1, len(chain) + 1), chain)]


@dataclass(frozen=True)
class NoAdmissiblePartition:
    condition: str
    witness: dict
    structure: ChainStructure | None = None


def chain_partition_search(
    diagram: BratteliDiagram,
    window: int = 8,
    gap_ratio=10,
    leak_tol=DEFAULT_LEAK,
    C=DEFAULT_C,
):
    """Greedy chain structure from clustered rows, then check (c1), (d1), (e1)."""
    if window < 3:
        raise ValueError("window must be at least 3")
    leak_tol, C = Fraction(leak_tol), Fraction(C)
    diagram = ensure_depth(diagram, window + 1)
    top = window + 1

    blocks = {1: [frozenset({v}) for v in range(diagram.width(1))]}
    rest = {1: set()}
    parents = {}
    leaks = {}
    min_row_distance = None
    for n in range(1, window + 1):
        f = stochastic_matrix(diagram, n)
        for a in range(len(f)):
            for b in range(a + 1, len(f)):
                d = dstar(f[a], f[b])
                if min_row_distance is None or d < min_row_distance:
                    min_row_distance = d
        groups, *_ = single_linkage(f, gap_ratio)
        kept, links, level_leaks = [], [], []
        new_rest = set()
        for g in groups:
            masses = [sum(f[v][w] for v in g for w in blk) for blk in blocks[n]]
            if not masses:
                new_rest |= set(g)
                continue
            best = max(range(len(masses)), key=lambda i: (masses[i], -i))
            parent = blocks[n][best]
            leak = max(1 - sum(f[v][w] for w in parent) for v in g)
            if leak > leak_tol:
                new_rest |= set(g)
                continue
            kept.append(frozenset(g))
            links.append(best)
            level_leaks.append(leak)
        blocks[n + 1], parents[n], rest[n + 1], leaks[n] = kept, links, new_rest, level_leaks

    # blocks without children drop into the remainder, top level excepted
    for n in range(window, 0, -1):
        alive = sorted(set(parents[n]))
        if len(alive) == len(blocks[n]):
            continue
        for i, b in enumerate(blocks[n]):
            if i not in alive:
                rest[n] |= set(b)
        remap = {old: new for new, old in enumerate(alive)}
        blocks[n] = [blocks[n][i] for i in alive]
        parents[n] = [remap[p] for p in parents[n]]
        if n > 1:
            parents[n - 1] = [parents[n - 1][i] for i in alive]
            leaks[n - 1] = [leaks[n - 1][i] for i in alive]

    levels = list(range(1, window + 1))
    c1_vals = []
    d1_vals = []
    e11_vals = []
    e12_vals = []
    for n in levels:
        f = stochastic_matrix(diagram, n)
        worst = Fraction(0)
        for j, p in enumerate(parents[n]):
            for v in blocks[n + 1][j]:
                worst = max(worst, 1 - sum(f[v][w] for w in blocks[n][p]))
        c1_vals.append(worst)
        d1_vals.append(max((max_row_distance([f[v] for v in sorted(b)]) for b in blocks[n + 1] if len(b) > 1), default=Fraction(0)))
        out_mass = [sum(f[v][w] for w in range(len(f[0])) if w not in rest[n]) for v in rest[n + 1]]
        e11_vals.append(1 - min(out_mass) if out_mass else Fraction(0))
        into = [sum(f[v][w] for w in b) for v in rest[n + 1] for b in blocks[n]]
        e12_vals.append(max(into) if into else Fraction(0))

    c1 = ser.convergence_evidence(levels, c1_vals)
    d1 = {"values": d1_vals, "verdict": _decay(d1_vals)}
    e11 = {"values": e11_vals, "verdict": _decay(e11_vals)}
    tail = e12_vals[len(e12_vals) // 2:]
    e12 = {"values": e12_vals, "bound": 1 - C, "holds": all(v <= 1 - C for v in tail)}
    conditions = {"c1": c1, "d1": d1, "e1.1": e11, "e1.2": e12}
    structure = ChainStructure(
        {n: tuple(b) for n, b in blocks.items()},
        {n: frozenset(r) for n, r in rest.items()},
        {n: tuple(p) for n, p in parents.items()},
        conditions,
    )
    witness_base = {"min_row_distance": min_row_distance, "window": window}
    if c1["verdict"] == "divergent":
        return NoAdmissiblePartition("c1", {**witness_base, "terms": c1_vals, "partial_sums": c1["partial_sums"]}, structure)
    if d1["verdict"] == "violated-evidence":
        return NoAdmissiblePartition("d1", {**witness_base, "values": d1_vals}, structure)
    if e11["verdict"] == "violated-evidence":
        return NoAdmissiblePartition("e1.1", {**witness_base, "values": e11_vals}, structure)
    if not e12["holds"]:
        return NoAdmissiblePartition("e1.2", {**witness_base, "values": e12_vals}, structure)
    return structure


# ---------------------------------------------------------------------------
# support diagnostics


def support_diagnostics(diagram: BratteliDiagram, trace: MeasureTrace, partition: Partition | None = None, window: int | None = None) -> dict:
    levels = [n for n in trace.levels() if window is None or n <= window]
    if partition is None:
        masses = [max(trace.at(n)) for n in levels]
        vanishing = all(b <= a for a, b in zip(masses, masses[1:])) and masses[-1] < masses[0]
        return {"levels": levels, "max_mass": masses, "all_towers_vanish_evidence": vanishing}
    l = len(partition.blocks(levels[0], diagram.width(levels[0])))
    out = {"levels": levels, "blocks": []}
    for j in range(l):
        mins, offs = [], []
        for n in levels:
            q = trace.at(n)
            blk = partition.blocks(n, diagram.width(n))[j]
            mins.append(min(q[v] for v in blk) if blk else None)
            off = [q[v] for v in range(len(q)) if v not in blk]
            offs.append(max(off) if off else Fraction(0))
        present = [x for x in mins if x is not None]
        out["blocks"].append({"block": j + 1, "delta": min(present) if present else None, "off_support": offs})
    return out
