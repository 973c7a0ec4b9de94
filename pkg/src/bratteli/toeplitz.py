"""Toeplitz sequences from partially filled periodic blocks, and their diagrams.

Stage 0 is the seed block.  Stage n+1 concatenates lambda_{n+1} copies of
stage n and fills the holes named by that stage's fill rule.  A fill rule is
a list of ``(ordinal, symbol)`` pairs; the ordinal counts holes of the
concatenation from the left (negative ordinals count from the right).  The
rule list is cycled when it is shorter than the number of stages.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ToeplitzError
from .exprs import EntryExpr, parse_expr

HOLE = None
DEFAULT_FILLS = (((0, 0),), ((-1, 1),))
MAX_EXTRA_STAGES = 30
MAX_BLOCK = 4_000_000  # cells per stage block


@dataclass(frozen=True)
class Stage:
    n: int
    block: tuple  # symbols, HOLE for empty positions
    p: int
    l: int  # first hole
    k: int  # last hole

    @property
    def holes(self) -> int:
        return sum(1 for x in self.block if x is HOLE)


@dataclass(frozen=True, eq=False)
class ToeplitzSeed:
    block0: tuple
    lam: EntryExpr = field(default_factory=lambda: parse_expr(2))
    fills: tuple = DEFAULT_FILLS
    _stages: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        b = self.block0
        if len(b) < 3:
            raise ToeplitzError("seed block needs at least 3 cells")
        if b[0] is HOLE or b[-1] is HOLE:
            raise ToeplitzError("seed block must start and end with a symbol")
        if HOLE not in b:
            raise ToeplitzError("seed block needs at least one hole")
        if not self.fills or any(not rule for rule in self.fills):
            raise ToeplitzError("every fill rule must fill at least one hole")

    @classmethod
    def from_params(cls, params: dict) -> "ToeplitzSeed":
        block0 = tuple(params["block0"])
        lam = parse_expr(params.get("lambda", 2))
        raw = params.get("fills")
        fills = DEFAULT_FILLS if raw is None else tuple(tuple((int(o), int(s)) for o, s in rule) for rule in raw)
        return cls(block0, lam, fills)

    def lam_at(self, n: int) -> int:
        if n == 0:
            return len(self.block0)
        value = self.lam.evaluate(n)
        if value < 2:
            raise ToeplitzError(f"lambda_{n} = {value}, must be at least 2")
        return value

    def p(self, n: int) -> int:
        out = 1
        for i in range(n + 1):
            out *= self.lam_at(i)
        return out

    def stage(self, n: int) -> Stage:
        if not self._stages:
            self._stages.append(_make_stage(0, self.block0))
        while len(self._stages) <= n:
            prev = self._stages[-1]
            m = prev.n + 1
            if prev.p * self.lam_at(m) > MAX_BLOCK:
                raise ToeplitzError(f"stage {m} block would exceed {MAX_BLOCK} cells")
            cells = list(prev.block) * self.lam_at(m)
            holes = [i for i, x in enumerate(cells) if x is HOLE]
            for ordinal, symbol in self.fills[(m - 1) % len(self.fills)]:
                if not -len(holes) <= ordinal < len(holes):
                    raise ToeplitzError(f"stage {m}: hole ordinal {ordinal} out of range ({len(holes)} holes)")
                cells[holes[ordinal]] = symbol
            if HOLE not in cells:
                raise ToeplitzError(f"stage {m}: fill rule leaves no hole")
            self._stages.append(_make_stage(m, tuple(cells)))
        return self._stages[n]


def _make_stage(n: int, block: tuple) -> Stage:
    holes = [i for i, x in enumerate(block) if x is HOLE]
    return Stage(n, block, len(block), holes[0], holes[-1])


def toeplitz_window(seed: ToeplitzSeed, stage: int, radius: int) -> tuple:
    """omega[-radius .. radius] read from the periodic stage sequence."""
    st = seed.stage(stage)
    reach = min(st.l - 1, st.p - st.k - 1)
    if radius > reach:
        raise ToeplitzError(f"stage {stage} determines omega only on [-{st.p - st.k - 1}, {st.l - 1}]; radius {radius} is too large")
    return tuple(st.block[i % st.p] for i in range(-radius, radius + 1))


def first_stage_for(seed: ToeplitzSeed, radius: int, limit: int = 200) -> int:
    for n in range(limit + 1):
        st = seed.stage(n)
        if min(st.l - 1, st.p - st.k - 1) >= radius:
            return n
    raise ToeplitzError(f"no stage up to {limit} determines a window of radius {radius}")


@dataclass(frozen=True)
class SymbolFamilies:
    """Distinct n-symbols for levels 1..depth and how each splits into (n-1)-symbols."""

    seed: ToeplitzSeed
    stage: int
    words: tuple  # words[n-1] lists the n-symbols
    parts: tuple  # parts[n-1][j] = indices of the (n-1)-symbols in n-symbol j, for n >= 2

    @property
    def depth(self) -> int:
        return len(self.words)

    def matrices(self) -> list:
        """Root column and occurrence-count incidence matrices."""
        p1 = self.seed.p(1)
        mats = [tuple((p1,) for _ in self.words[0])]
        for n in range(1, self.depth):
            width = len(self.words[n - 1])
            rows = []
            for seq in self.parts[n]:
                rows.append(tuple(seq.count(w) for w in range(width)))
            mats.append(tuple(rows))
        return mats

    def orders(self) -> dict:
        """Edge orders in the ``level:v`` form used by spec files."""
        out = {}
        for n in range(1, self.depth):
            for v, seq in enumerate(self.parts[n]):
                out[f"{n + 1}:{v}"] = tuple(seq)
        return out


def symbol_families(seed: ToeplitzSeed, depth: int) -> SymbolFamilies:
    """n-symbols as seen in a stage far enough past ``depth``.

    The top level takes the filled aligned blocks of that stage; lower
    levels are whatever those blocks are built from, so every vertex has an
    edge going up.
    """
    for extra in range(3, MAX_EXTRA_STAGES + 1):
        try:
            st = seed.stage(depth + extra)
        except ToeplitzError as exc:
            last = seed._stages[-1]
            raise ToeplitzError(
                f"no filled {depth}-symbol found: stage {last.n} still has {last.holes} holes "
                f"(the fill rules may not keep pace with lambda); {exc}"
            ) from None
        width = seed.p(depth)
        top = _distinct(st.block[i:i + width] for i in range(0, st.p, width))
        top = [w for w in top if HOLE not in w]
        if top:
            break
    else:
        raise ToeplitzError(f"no filled {depth}-symbol appears up to stage {depth + MAX_EXTRA_STAGES}")

    words = [None] * depth
    parts = [None] * depth
    words[depth - 1] = top
    for n in range(depth - 1, 0, -1):
        size = seed.p(n)
        lower = _distinct(w[i:i + size] for w in words[n] for i in range(0, len(w), size))
        index = {w: j for j, w in enumerate(lower)}
        parts[n] = tuple(tuple(index[w[i:i + size]] for i in range(0, len(w), size)) for w in words[n])
        words[n - 1] = lower
    return SymbolFamilies(seed, st.n, tuple(tuple(ws) for ws in words), tuple(parts))


def _distinct(blocks) -> list:
    seen = {}
    for b in blocks:
        seen.setdefault(tuple(b), None)
    return list(seen)


def toeplitz_matrices(spec, depth: int) -> list:
    seed = ToeplitzSeed.from_params(spec.params)
    return symbol_families(seed, depth).matrices()
