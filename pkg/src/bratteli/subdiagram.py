"""Vertex subdiagrams, measure extension tests and extension masses."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import series as ser
from .closed_forms import row_mass_term
from .diagram import BratteliDiagram, ensure_depth, from_matrices, heights, stochastic_matrix
from .ergodicity import ChainStructure, Partition
from .errors import DimensionError, InvalidDiagramError, PathError
from .simplex import MeasureTrace, verify_trace
from .verdict import CERTIFIED_FINITE, UNDETERMINED, Verdict


def selection(spec) -> Callable[[int], frozenset]:
    """Turn a vertex selection into a level -> set function.

    Accepts a callable, a single set (same at every level), or a list whose
    entry i is the set at level i+1 (the last entry repeats).
    """
    if callable(spec):
        return lambda n: frozenset(spec(n))
    items = list(spec)
    if items and all(isinstance(x, int) for x in items):
        fixed = frozenset(items)
        return lambda n: fixed
    sets = [frozenset(s) for s in items]
    if not sets:
        raise DimensionError("empty vertex selection")
    return lambda n: sets[min(n, len(sets)) - 1]


@dataclass(frozen=True)
class VertexSubdiagram:
    sets: tuple  # sorted vertex tuples for levels 1..depth
    inner: BratteliDiagram  # restricted incidence matrices, own heights

    @property
    def depth(self) -> int:
        return len(self.sets)

    def W(self, n: int) -> tuple:
        return self.sets[n - 1]

    def heights(self, n: int) -> tuple:
        return heights(self.inner, n)


def restrict(diagram: BratteliDiagram, W, depth: int | None = None) -> VertexSubdiagram:
    depth = depth or diagram.depth
    diagram = ensure_depth(diagram, depth)
    pick = selection(W)
    sets = []
    for n in range(1, depth + 1):
        s = pick(n)
        width = diagram.width(n)
        if not s:
            raise InvalidDiagramError(f"level {n}: empty vertex set", n)
        if any(not 0 <= v < width for v in s):
            raise DimensionError(f"level {n}: vertex set {sorted(s)} outside 0..{width - 1}")
        if len(s) == width and width > 1:
            raise InvalidDiagramError(f"level {n}: the vertex set must be a proper subset", n)
        sets.append(tuple(sorted(s)))
    mats = [tuple((diagram.matrices[0][v][0],) for v in sets[0])]
    for n in range(1, depth):
        full = diagram.matrices[n]
        mats.append(tuple(tuple(full[v][w] for w in sets[n - 1]) for v in sets[n]))
    for n, m in enumerate(mats):
        for i, row in enumerate(m):
            if not any(row):
                raise InvalidDiagramError(f"level {n}: restricted vertex {sets[n][i]} of level {n + 1} has no incoming edge", n, sets[n][i])
        if n:
            for j in range(len(m[0])):
                if not any(row[j] for row in m):
                    raise InvalidDiagramError(f"level {n}: restricted vertex {sets[n - 1][j]} has no outgoing edge", n, sets[n - 1][j])
    return VertexSubdiagram(tuple(sets), from_matrices(mats, None))


def _leak_terms(diagram, pick, window):
    values = []
    for n in range(1, window + 1):
        f = stochastic_matrix(diagram, n)
        here, up = pick(n), pick(n + 1)
        values.append(max(sum(f[v][w] for w in range(len(f[0])) if w not in here) for v in up))
    return values


def extension_finiteness(diagram: BratteliDiagram, W, window: int | None = None) -> Verdict:
    """Summability of the leak t_n = max over W_{n+1} rows of the mass outside W_n."""
    if window is None:
        window = diagram.depth - 1
    diagram = ensure_depth(diagram, window + 1)
    pick = selection(W)
    restrict(diagram, pick, window + 1)
    levels = list(range(1, window + 1))
    values = _leak_terms(diagram, pick, window)
    rows = [{"n": n, "term": v, "partial_sum": s} for n, v, s in zip(levels, values, ser.partial_sums(values))]

    tail = [pick(n) for n in range(max(1, window - 1), window + 2)]
    if all(s == tail[-1] for s in tail):
        stable = tail[-1]
        terms = [row_mass_term(diagram.spec, v, stable, complement=True) for v in sorted(stable)]
        if all(t is not None for t in terms):
            start = max(t.n0 for t in terms)
            stable_from = min(n for n in range(1, window + 2) if all(pick(k) == stable for k in range(n, window + 2)))
            checked = {n: v for n, v in zip(levels, values) if n >= max(start, stable_from)}
            if all(max(t(n) for t in terms) == v for n, v in checked.items()):
                cert = ser.convergence_certificate(terms)
                if cert is not None:
                    cert["stable_set"] = sorted(stable)
                    return Verdict("extension-finiteness", CERTIFIED_FINITE, cert, rows, {})
                if ser.refutes_convergence(terms):
                    return Verdict(
                        "extension-finiteness",
                        UNDETERMINED,
                        {},
                        rows,
                        {"reason": "the leak series diverges, so this test does not apply", "terms": [str(t) for t in terms]},
                    )
    ratio = ser.ratio_window_certificate(values)
    if ratio is not None:
        return Verdict("extension-finiteness", CERTIFIED_FINITE, ratio, rows, {})
    return Verdict("extension-finiteness", UNDETERMINED, {}, rows, {"reason": "no comparison certificate available"})


@dataclass(frozen=True)
class ExtensionMass:
    masses: tuple  # M_1..M_depth
    nondecreasing: bool
    flag: str  # finite | diverging-evidence | undetermined
    finiteness: Verdict | None


def diverging_evidence(masses: Sequence[Fraction], count: int = 5) -> bool:
    """Last `count` ratios M_{N+1}/M_N all exceed 1 + 1/N (heuristic)."""
    if len(masses) < count + 1:
        return False
    start = len(masses) - count  # ratio index N runs over the last `count` steps
    for N in range(start, len(masses)):
        if masses[N] <= masses[N - 1] * (1 + Fraction(1, N)):
            return False
    return True


def extension_mass(diagram: BratteliDiagram, W, sub_trace: MeasureTrace, depth: int | None = None) -> ExtensionMass:
    depth = depth or sub_trace.end
    diagram = ensure_depth(diagram, depth)
    sub = restrict(diagram, W, depth)
    if sub_trace.end < depth or sub_trace.start != 1:
        raise DimensionError(f"sub_trace must cover levels 1..{depth}")
    check = verify_trace(sub.inner, MeasureTrace(sub_trace.vectors[:depth], 1))
    if not check.ok:
        raise DimensionError(f"sub_trace is not consistent on the subdiagram (level {check.failing_level}: {check.reason})")
    masses = []
    for N in range(1, depth + 1):
        h = heights(diagram, N)
        hs = sub.heights(N)
        q = sub_trace.at(N)
        masses.append(sum(Fraction(h[v], hv) * qv for v, hv, qv in zip(sub.W(N), hs, q)))
    nondecreasing = all(b >= a for a, b in zip(masses, masses[1:]))
    fin = extension_finiteness(diagram, W, depth - 1) if depth >= 2 else None
    if fin is not None and fin.certified:
        flag = "finite"
    elif diverging_evidence(masses):
        flag = "diverging-evidence"
    else:
        flag = "undetermined"
    return ExtensionMass(tuple(masses), nondecreasing, flag, fin)


def single_vertex_trace(sub: VertexSubdiagram) -> MeasureTrace:
    """The only probability trace on a one-vertex-per-level subdiagram."""
    if any(len(s) != 1 for s in sub.sets):
        raise DimensionError("subdiagram has a level with more than one vertex")
    return MeasureTrace(tuple((Fraction(1),) for _ in sub.sets), 1)


def chain_subdiagram(diagram: BratteliDiagram, structure: ChainStructure, chain: Sequence[int], depth: int | None = None) -> VertexSubdiagram:
    chain = list(chain)
    depth = depth or len(chain)
    if depth > len(chain) or depth > structure.top:
        raise PathError(f"chain covers {min(len(chain), structure.top)} levels, asked for {depth}")
    for n in range(1, depth):
        i, j = chain[n - 1], chain[n]
        if not 0 <= j < len(structure.parents[n]) or structure.parents[n][j] != i:
            raise PathError(f"chain step {n}->{n + 1}: block {j} is not a successor of block {i}")
    sets = [structure.blocks[n][chain[n - 1]] for n in range(1, depth + 1)]
    return restrict(diagram, sets, depth)


def chain_partition(structure: ChainStructure, chain: Sequence[int]) -> Partition:
    """One-block partition following a chain, repeating its last block."""
    sets = [tuple(structure.blocks[n][i]) for n, i in zip(range(1, len(chain) + 1), chain)]
    return Partition(lambda n: (sets[min(n, len(sets)) - 1],))
