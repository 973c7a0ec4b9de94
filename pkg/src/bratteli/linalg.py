"""Small exact linear algebra over integers and Fractions.

Matrices are tuples of row tuples.  Sizes here stay in the tens, so plain
Python loops over unbounded ints are fast enough and keep everything exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = tuple  # tuple[tuple[int | Fraction, ...], ...]


def as_matrix(rows) -> Matrix:
    return tuple(tuple(r) for r in rows)


def shape(a: Matrix) -> tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in cols) for row in a)


def matvec(a: Matrix, v: Sequence) -> tuple:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vecmat(v: Sequence, a: Matrix) -> tuple:
    """Row vector times matrix, i.e. a^T v."""
    return tuple(sum(v[i] * a[i][j] for i in range(len(a))) for j in range(len(a[0])))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def identity(k: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(k)) for i in range(k))


def dstar(x: Sequence, y: Sequence):
    """The l1 distance used throughout: sum of |x_i - y_i|."""
    return sum(abs(a - b) for a, b in zip(x, y))


def max_row_distance(a: Matrix):
    best = Fraction(0)
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            d = dstar(a[i], a[j])
            if d > best:
                best = d
    return best


def _to_fractions(a) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in a]


def det(a: Matrix) -> Fraction:
    m = _to_fractions(a)
    k = len(m)
    sign = 1
    out = Fraction(1)
    for c in range(k):
        pivot = next((r for r in range(c, k) if m[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            sign = -sign
        p = m[c][c]
        out *= p
        for r in range(c + 1, k):
            if m[r][c]:
                f = m[r][c] / p
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return out * sign


def rref(a) -> tuple[list[list[Fraction]], list[int]]:
    m = _to_fractions(a)
    rows = len(m)
    cols = len(m[0]) if m else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def nullspace(a) -> list[tuple[Fraction, ...]]:
    """Basis of {x : a x = 0}."""
    m, pivots = rref(a)
    cols = len(a[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * cols
        x[f] = Fraction(1)
        for row, p in zip(m, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(a, b) -> tuple[Fraction, ...]:
    """Solve a x = b for square nonsingular a."""
    k = len(a)
    aug = [list(row) + [b[i]] for i, row in enumerate(a)]
    m, pivots = rref(aug)
    if pivots[:k] != list(range(k)):
        raise ZeroDivisionError("singular system")
    return tuple(m[i][k] for i in range(k))


def rank(a) -> int:
    if not a:
        return 0
    return len(rref(a)[1])
