"""Closed-form stochastic entries for generators where they are known.

These feed the symbolic series certificates.  Every formula is cross-checked
against the exact matrices on the computed window before it is trusted.
"""

from __future__ import annotations

from fractions import Fraction

from .diagram import BratteliDiagram, stochastic_matrix
from .exprs import Poly
from .series import RationalTerm
from .spec import DiagramSpec


def _ers_entry_polys(spec: DiagramSpec):
    """(entry polys, common row-sum poly) for fixed-width ERS specs, else None."""
    root = spec.root()
    if len(set(root)) != 1:
        return None
    if spec.generator == "stationary":
        polys = [[Poly.const(x) for x in row] for row in spec.matrix]
    elif spec.generator == "expression":
        polys = [[e.to_poly() for e in row] for row in spec.entries]
        if any(p is None for row in polys for p in row):
            return None
    else:
        return None
    sums = set()
    for row in polys:
        total = Poly()
        for p in row:
            total = total + p
        sums.add(total)
    if len(sums) != 1:
        return None
    return polys, sums.pop()


def row_mass_term(spec: DiagramSpec | None, row: int, cols, complement: bool = False) -> RationalTerm | None:
    """Sum of f_{row,w} over w in cols (or outside cols) as a rational term in n."""
    if spec is None:
        return None
    cols = frozenset(cols)
    g = spec.generator
    if g in ("stationary", "expression"):
        got = _ers_entry_polys(spec)
        if got is None:
            return None
        polys, total = got
        width = len(polys)
        if row >= width or any(c >= width for c in cols):
            return None
        inside = Poly()
        for w in cols:
            inside = inside + polys[row][w]
        num = total - inside if complement else inside
        return RationalTerm(num, total, 1)
    if g == "countable":
        a = spec.a_rule.to_poly()
        if a is None:
            return None
        total = a + Poly.var()
        inside = (a if row in cols else Poly()) + Poly.const(len(cols - {row}))
        num = total - inside if complement else inside
        # for n >= max(row, cols) the row has a_n at column `row` and ones elsewhere
        return RationalTerm(num, total, max([row, 1, *cols]))
    if g == "pascal":
        n = Poly.var()
        one = Poly.const(1)
        entries = {row: n + one - Poly.const(row), row - 1: Poly.const(row)} if row else {0: n + one}
        inside = Poly()
        for w in cols:
            if w in entries:
                inside = inside + entries[w]
        total = n + one
        num = total - inside if complement else inside
        return RationalTerm(num, total, max([row, 1, *cols]))
    return None


def min_entry_terms(spec: DiagramSpec | None):
    """Terms whose minimum is the smallest entry of F_n for large n.

    Returns a list of RationalTerm, a Fraction constant lower bound with its
    starting level as ("bound", c, n0), or None.
    """
    if spec is None:
        return None
    g = spec.generator
    if g in ("stationary", "expression"):
        got = _ers_entry_polys(spec)
        if got is not None:
            polys, total = got
            return [RationalTerm(p, total, 1) for row in polys for p in row]
        if g == "stationary":
            flat = [x for row in spec.matrix for x in row]
            if min(flat) > 0:
                top = max(sum(row) for row in spec.matrix)
                return ("bound", Fraction(min(flat), top) ** 2, 2)
        return None
    if g == "countable":
        a = spec.a_rule.to_poly()
        if a is None:
            return None
        return [RationalTerm(Poly.const(1), a + Poly.var(), 1)]
    if g == "pascal":
        return [RationalTerm(Poly(), Poly.var() + 1, 1)]
    return None


def check_terms(diagram: BratteliDiagram, term: RationalTerm, values: dict) -> bool:
    """Confirm a closed form against exact values {n: value}."""
    return all(term(n) == v for n, v in values.items() if n >= term.n0)


def exact_min_entries(diagram: BratteliDiagram, levels) -> dict:
    return {n: min(min(r) for r in stochastic_matrix(diagram, n)) for n in levels}
