"""Materialized Bratteli diagrams, tower heights and stochastic matrices.

Level conventions: V_0 is the root.  ``matrices[0]`` is the root column
(|V_1| x 1), ``matrices[n]`` maps V_n to V_{n+1} with rows indexed by
V_{n+1}.  A diagram of depth N holds matrices 0..N-1, so heights are known
for levels 1..N and stochastic matrices for levels 1..N-1.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvalidDiagramError, LevelRangeError, ResourceLimitError
from .linalg import matmul, matvec
from .spec import DiagramSpec

DEFAULT_MAX_DIGITS = 100_000


def max_digits() -> int:
    raw = os.environ.get("BRATTELI_MAX_DIGITS")
    if not raw:
        return DEFAULT_MAX_DIGITS
    try:
        return int(raw)
    except ValueError:
        raise ResourceLimitError(f"BRATTELI_MAX_DIGITS must be an integer, got {raw!r}") from None


def check_size(value: int, what: str) -> None:
    limit = max_digits()
    # bit_length * log10(2) under-counts digits by at most one
    if value and value.bit_length() * 0.30103 > limit + 1:
        raise ResourceLimitError(f"{what} exceeds {limit} decimal digits; raise BRATTELI_MAX_DIGITS or use float mode")


@dataclass(frozen=True, eq=False)
class BratteliDiagram:
    matrices: tuple
    spec: DiagramSpec | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def depth(self) -> int:
        return len(self.matrices)

    @property
    def counts(self) -> tuple[int, ...]:
        """|V_n| for n = 0..depth."""
        return (1,) + tuple(len(m) for m in self.matrices)

    def width(self, n: int) -> int:
        return self.counts[n]

    def incidence(self, n: int) -> tuple:
        if not 0 <= n < self.depth:
            raise LevelRangeError(f"incidence level {n} outside 0..{self.depth - 1}")
        return self.matrices[n]

    def heights(self, n: int) -> tuple[int, ...]:
        return heights(self, n)

    def stochastic(self, n: int) -> tuple:
        return stochastic_matrix(self, n)


def _check_matrix(m, level: int) -> None:
    for i, row in enumerate(m):
        if not any(row):
            raise InvalidDiagramError(f"level {level}: vertex {i} of level {level + 1} has no incoming edge", level, i)
    for j in range(len(m[0])):
        if not any(row[j] for row in m):
            raise InvalidDiagramError(f"level {level}: vertex {j} of level {level} has no outgoing edge", level, j)


def from_matrices(matrices, spec: DiagramSpec | None = None, exact: bool = True) -> BratteliDiagram:
    """Validate a list [root column, F_1, F_2, ...] and wrap it."""
    mats = tuple(tuple(tuple(int(x) for x in row) for row in m) for m in matrices)
    if not mats:
        raise InvalidDiagramError("a diagram needs at least the root level")
    if len(mats[0][0]) != 1:
        raise InvalidDiagramError("the root matrix must have a single column")
    for n, m in enumerate(mats):
        if n and len(m[0]) != len(mats[n - 1]):
            raise InvalidDiagramError(
                f"level {n}: matrix has {len(m[0])} columns but level {n} has {len(mats[n - 1])} vertices", n
            )
        if any(x < 0 for row in m for x in row):
            raise InvalidDiagramError(f"level {n}: negative entry", n)
        _check_matrix(m, n)
    d = BratteliDiagram(mats, spec)
    if exact:
        heights(d, d.depth)
    return d


def materialize(spec: DiagramSpec, depth: int | None = None, exact: bool = True) -> BratteliDiagram:
    if depth is None:
        depth = spec.depth or 8
    if depth < 1:
        raise LevelRangeError("depth must be at least 1")
    if spec.max_depth is not None and depth > spec.max_depth:
        raise LevelRangeError(f"explicit spec supports depth at most {spec.max_depth}, asked for {depth}")
    if spec.generator == "ers-toeplitz":
        from .toeplitz import toeplitz_matrices

        mats = toeplitz_matrices(spec, depth)
    else:
        root = spec.root()
        mats = [tuple((x,) for x in root)]
        for n in range(1, depth):
            mats.append(spec.incidence(n))
    return from_matrices(mats, spec, exact=exact)


def ensure_depth(diagram: BratteliDiagram, depth: int) -> BratteliDiagram:
    """Return a diagram with at least ``depth`` levels, regenerating if needed."""
    if depth <= diagram.depth:
        return diagram
    spec = diagram.spec
    if spec is None or (spec.max_depth is not None and depth > spec.max_depth):
        raise LevelRangeError(f"need depth {depth} but only {diagram.depth} levels are available")
    return materialize(spec, depth)


def heights(diagram: BratteliDiagram, n: int) -> tuple[int, ...]:
    """Tower heights h^(n), the number of root paths ending at each vertex."""
    if not 1 <= n <= diagram.depth:
        raise LevelRangeError(f"heights level {n} outside 1..{diagram.depth}")
    table = diagram._cache.setdefault("heights", [None, tuple(r[0] for r in diagram.matrices[0])])
    while len(table) <= n:
        k = len(table) - 1
        h = matvec(diagram.matrices[k], table[k])
        check_size(max(h), f"height at level {k + 1}")
        table.append(h)
    return table[n]


def stochastic_matrix(diagram: BratteliDiagram, n: int) -> tuple:
    """Row-stochastic F_n with f_vw = f~_vw h_w^(n) / h_v^(n+1)."""
    if not 1 <= n <= diagram.depth - 1:
        raise LevelRangeError(f"stochastic level {n} outside 1..{diagram.depth - 1}")
    cache = diagram._cache.setdefault("stochastic", {})
    if n not in cache:
        h = heights(diagram, n)
        up = heights(diagram, n + 1)
        cache[n] = tuple(
            tuple(Fraction(x * hw, up[v]) for x, hw in zip(row, h)) for v, row in enumerate(diagram.matrices[n])
        )
    return cache[n]


def float_heights(diagram: BratteliDiagram, n: int) -> np.ndarray:
    """Heights rescaled to max 1 at every level, in float64."""
    if not 1 <= n <= diagram.depth:
        raise LevelRangeError(f"heights level {n} outside 1..{diagram.depth}")
    h = np.array([float(r[0]) for r in diagram.matrices[0]])
    h /= h.max()
    for k in range(1, n):
        h = np.array(diagram.matrices[k], dtype=float) @ h
        h /= h.max()
    return h


def stochastic_matrix_float(diagram: BratteliDiagram, n: int) -> np.ndarray:
    if not 1 <= n <= diagram.depth - 1:
        raise LevelRangeError(f"stochastic level {n} outside 1..{diagram.depth - 1}")
    h = float_heights(diagram, n)
    m = np.array(diagram.matrices[n], dtype=float) * h[None, :]
    return m / m.sum(axis=1, keepdims=True)


def telescope(diagram: BratteliDiagram, levels) -> BratteliDiagram:
    """Collapse the diagram onto the given levels (0 = n_0 < n_1 < ...)."""
    levels = list(levels)
    if len(levels) < 2 or levels[0] != 0:
        raise LevelRangeError("telescoping levels must start at 0 and keep at least one more level")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise LevelRangeError(f"telescoping levels must be strictly increasing: {levels}")
    if levels[-1] > diagram.depth:
        raise LevelRangeError(f"level {levels[-1]} beyond depth {diagram.depth}")
    mats = []
    for a, b in zip(levels, levels[1:]):
        prod = diagram.matrices[a]
        for k in range(a + 1, b):
            prod = matmul(diagram.matrices[k], prod)
        mats.append(prod)
    return from_matrices(mats, None)


@dataclass(frozen=True)
class ErsReport:
    ers: bool
    row_sums: tuple  # r_n per level, None where rows differ
    identities_ok: bool

    def to_dict(self):
        return {
            "ers": self.ers,
            "row_sums": [None if r is None else str(r) for r in self.row_sums],
            "identities_ok": self.identities_ok,
        }


def ers_check(diagram: BratteliDiagram) -> ErsReport:
    """Equal-row-sum check per level, with the height and frequency identities."""
    sums = []
    for m in diagram.matrices:
        rs = {sum(row) for row in m}
        sums.append(rs.pop() if len(rs) == 1 else None)
    ers = all(r is not None for r in sums)
    ok = True
    if ers:
        prod = 1
        for n in range(1, diagram.depth + 1):
            prod *= sums[n - 1]
            if any(h != prod for h in heights(diagram, n)):
                ok = False
                break
        if ok:
            for n in range(1, diagram.depth):
                f = stochastic_matrix(diagram, n)
                r = sums[n]
                if any(f[v][w] != Fraction(x, r) for v, row in enumerate(diagram.matrices[n]) for w, x in enumerate(row)):
                    ok = False
                    break
    else:
        ok = False
    return ErsReport(ers, tuple(sums), ok)


def structural_warnings(diagram: BratteliDiagram) -> list[str]:
    """Vertices with exactly one incoming and one outgoing edge.

    Long chains of these make the path space look rigid; they are legal but
    worth a look.
    """
    out = []
    for n in range(1, diagram.depth):
        below = diagram.matrices[n - 1]
        above = diagram.matrices[n]
        for v in range(len(below)):
            if sum(below[v]) == 1 and sum(row[v] for row in above) == 1:
                out.append(f"level {n} vertex {v} has a single incoming and a single outgoing edge")
    return out


def log10_height(diagram: BratteliDiagram, n: int) -> float:
    return max(math.log10(h) for h in heights(diagram, n))
