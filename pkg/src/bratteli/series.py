"""Convergence and divergence certificates for non-negative term series.

Only three kinds of claims are ever made:

* symbolic comparison for rational terms N(n)/D(n) with positive leading
  coefficients (constant lower bound, harmonic comparison, p-series);
* a geometric ratio test over a trailing window, with ratio margin 0.9;
* plain partial sums, which never certify anything on their own.

Anything else is reported as undetermined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exprs import Poly

RATIO_MARGIN = Fraction(9, 10)


@dataclass(frozen=True)
class RationalTerm:
    """The term N(n)/D(n), valid for n >= n0."""

    num: Poly
    den: Poly
    n0: int = 1

    def __call__(self, n: int) -> Fraction:
        return Fraction(self.num(n), self.den(n))

    def __str__(self):
        return f"({self.num})/({self.den})"

    def kind(self) -> str:
        """Asymptotic class of the series sum of this term."""
        if self.num.is_zero():
            return "zero"
        if self.num.lead < 0 or self.den.lead <= 0:
            return "unknown"
        gap = self.den.degree - self.num.degree
        if gap <= 0:
            return "constant"
        if gap == 1:
            return "harmonic"
        return "p-series"


DIVERGENT_KINDS = ("constant", "harmonic")


def divergence_certificate(terms: Sequence[RationalTerm]) -> dict | None:
    """Certificate that the sum of min(terms) diverges, or None.

    Each term is at least c/n for large n, hence so is their minimum.
    """
    if not terms:
        return None
    kinds = [t.kind() for t in terms]
    if not all(k in DIVERGENT_KINDS for k in kinds):
        return None
    worst = "harmonic" if "harmonic" in kinds else "constant"
    return {
        "kind": f"{worst}-comparison",
        "rigorous": True,
        "terms": sorted({str(t) for t in terms}),
        "valid_from": max(t.n0 for t in terms),
    }


def convergence_certificate(terms: Sequence[RationalTerm]) -> dict | None:
    """Certificate that the sum of max(terms) converges, or None."""
    if not terms:
        return None
    kinds = [t.kind() for t in terms]
    if not all(k in ("zero", "p-series") for k in kinds):
        return None
    kind = "zero" if all(k == "zero" for k in kinds) else "p-series-comparison"
    return {
        "kind": kind,
        "rigorous": True,
        "terms": sorted({str(t) for t in terms}),
        "valid_from": max(t.n0 for t in terms),
    }


def refutes_divergence(terms: Sequence[RationalTerm]) -> bool:
    """True when some term is summable, so the minimum is summable too."""
    return any(t.kind() in ("zero", "p-series") for t in terms)


def refutes_convergence(terms: Sequence[RationalTerm]) -> bool:
    return any(t.kind() in DIVERGENT_KINDS for t in terms)


def constant_bound_certificate(bound: Fraction, valid_from: int) -> dict:
    return {"kind": "constant-lower-bound", "rigorous": True, "bound": bound, "valid_from": valid_from}


def ratio_window_certificate(values: Sequence[Fraction], window: int = 8) -> dict | None:
    """Trailing ratios all at most 0.9.  Evidence over the window only."""
    tail = list(values[-(window + 1):])
    if len(tail) < 3:
        return None
    if all(v == 0 for v in tail):
        return {"kind": "zero-tail", "rigorous": False, "window": len(tail)}
    if any(v <= 0 for v in tail):
        return None
    ratios = [b / a for a, b in zip(tail, tail[1:])]
    if max(ratios) <= RATIO_MARGIN:
        return {"kind": "geometric-ratio-window", "rigorous": False, "max_ratio": max(ratios), "window": len(tail)}
    return None


def partial_sums(values: Sequence[Fraction]) -> list[Fraction]:
    out, acc = [], Fraction(0)
    for v in values:
        acc += v
        out.append(acc)
    return out


def loglog_slope(levels: Sequence[int], values: Sequence) -> float | None:
    """Least-squares slope of log(term) against log(n) over the trailing half."""
    pts = [(n, v) for n, v in zip(levels, values) if v > 0]
    pts = pts[len(pts) // 2:]
    if len(pts) < 3:
        return None
    xs = [math.log(n) for n, _ in pts]
    ys = [_log(v) for _, v in pts]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        return None
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx


def _log(v) -> float:
    if isinstance(v, Fraction):
        # exact values can underflow float; take logs of numerator and denominator
        return math.log(v.numerator) - math.log(v.denominator)
    return math.log(v)


def convergence_evidence(levels: Sequence[int], values: Sequence[Fraction]) -> dict:
    """Heuristic summary of whether sum(values) looks finite."""
    sums = partial_sums(values)
    ratio = ratio_window_certificate(values)
    slope = loglog_slope(levels, values)
    tail_zero = bool(values) and all(v == 0 for v in values[len(values) // 2:])
    if tail_zero or ratio is not None:
        verdict = "convergent"
    elif slope is not None and slope < -1.2:
        verdict = "convergent"
    elif slope is not None and slope > -0.8:
        verdict = "divergent"
    else:
        verdict = "inconclusive"
    return {
        "partial_sums": sums,
        "loglog_slope": slope,
        "ratio_window": ratio is not None,
        "verdict": verdict,
        "rigorous": False,
    }
