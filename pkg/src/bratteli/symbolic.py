"""Ordered diagrams, the Vershik successor on finite paths, and block codings.

A finite path to level N is a tuple of ``(vertex, position)`` pairs, one per
level 1..N.  ``position`` indexes the ordered list of edges entering that
vertex; at level 1 it numbers the parallel edges from the root.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby

from .diagram import BratteliDiagram, ensure_depth, heights
from .errors import DimensionError, OrderError, PathError

MAXIMAL = "Maximal"
MINIMAL = "Minimal"
ROOT = -1


@dataclass(frozen=True)
class OrderedDiagram:
    diagram: BratteliDiagram
    orders: tuple  # orders[n][v]: sources at level n of vertex v at level n+1, n >= 1
    consecutive: bool

    @property
    def depth(self) -> int:
        return self.diagram.depth

    def sources(self, level: int, v: int) -> tuple:
        """Ordered sources of the edges entering vertex v of ``level``."""
        if level == 1:
            return (ROOT,) * self.diagram.matrices[0][v][0]
        return self.orders[level - 1][v]

    def in_degree(self, level: int, v: int) -> int:
        return len(self.sources(level, v))


def _default_sources(row) -> tuple:
    return tuple(w for w, count in enumerate(row) for _ in range(count))


def _declared(spec, level: int, v: int):
    if spec is None or not spec.order:
        return None
    return spec.order.get(f"{level}:{v}", spec.order.get(str(v)))


def ordered_diagram(diagram: BratteliDiagram, orders=None, consecutive: bool = True) -> OrderedDiagram:
    """Attach edge orders to a diagram.

    ``orders`` maps ``(level, v)`` to a source list, where ``level`` is the
    level of v (2..depth).  Missing entries come from the spec's ``order``
    field, then from the Toeplitz block structure, then default to ascending
    sources.  With ``consecutive`` the equal sources must be adjacent.
    """
    orders = dict(orders or {})
    spec = diagram.spec
    toeplitz = None
    if spec is not None and spec.generator == "ers-toeplitz" and not spec.order:
        from .toeplitz import ToeplitzSeed, symbol_families

        toeplitz = symbol_families(ToeplitzSeed.from_params(spec.params), diagram.depth).orders()
    levels = [()]
    for n in range(1, diagram.depth):
        mat = diagram.matrices[n]
        rows = []
        for v, row in enumerate(mat):
            level = n + 1
            src = orders.get((level, v))
            if src is None:
                src = _declared(spec, level, v)
            if src is None and toeplitz is not None:
                src = toeplitz.get(f"{level}:{v}")
            src = tuple(src) if src is not None else _default_sources(row)
            _check_sources(level, v, row, src, consecutive)
            rows.append(src)
        levels.append(tuple(rows))
    return OrderedDiagram(diagram, tuple(levels), consecutive)


def consecutive_order(diagram: BratteliDiagram, orders=None) -> OrderedDiagram:
    return ordered_diagram(diagram, orders, consecutive=True)


def _check_sources(level, v, row, src, consecutive):
    counts = [0] * len(row)
    for w in src:
        if not 0 <= w < len(row):
            raise OrderError(f"level {level} vertex {v}: source {w} out of range")
        counts[w] += 1
    if tuple(counts) != tuple(row):
        raise OrderError(f"level {level} vertex {v}: sources {list(src)} do not match incidence row {list(row)}")
    if consecutive:
        runs = [w for w, _ in groupby(src)]
        if len(runs) != len(set(runs)):
            raise OrderError(f"level {level} vertex {v}: equal sources are not contiguous in {list(src)}")


# ---------------------------------------------------------------------------
# paths


def check_path(od: OrderedDiagram, path) -> tuple:
    path = tuple(tuple(e) for e in path)
    if not path:
        raise PathError("empty path")
    if len(path) > od.depth:
        raise PathError(f"path has {len(path)} levels, diagram has {od.depth}")
    prev = ROOT
    for level, (v, pos) in enumerate(path, start=1):
        if not 0 <= v < od.diagram.width(level):
            raise PathError(f"level {level}: no vertex {v}")
        src = od.sources(level, v)
        if not 0 <= pos < len(src):
            raise PathError(f"level {level}: vertex {v} has {len(src)} incoming edges, position {pos} given")
        if src[pos] != prev:
            raise PathError(f"level {level}: edge {pos} into {v} starts at {src[pos]}, path is at {prev}")
        prev = v
    return path


def extremal_path(od: OrderedDiagram, level: int, v: int, kind: str = "min") -> tuple:
    """The minimal (or maximal) finite path ending at vertex v."""
    out = []
    while level >= 1:
        src = od.sources(level, v)
        pos = 0 if kind == "min" else len(src) - 1
        out.append((v, pos))
        v = src[pos]
        level -= 1
    return tuple(reversed(out))


def vershik_successor(od: OrderedDiagram, path):
    path = check_path(od, path)
    for i, (v, pos) in enumerate(path):
        level = i + 1
        if pos + 1 < od.in_degree(level, v):
            nxt = pos + 1
            src = od.sources(level, v)[nxt]
            head = extremal_path(od, level - 1, src, "min") if level > 1 else ()
            return head + ((v, nxt),) + path[i + 1:]
    return MAXIMAL


def vershik_predecessor(od: OrderedDiagram, path):
    path = check_path(od, path)
    for i, (v, pos) in enumerate(path):
        level = i + 1
        if pos > 0:
            prv = pos - 1
            src = od.sources(level, v)[prv]
            head = extremal_path(od, level - 1, src, "max") if level > 1 else ()
            return head + ((v, prv),) + path[i + 1:]
    return MINIMAL


def _h(od: OrderedDiagram, level: int, w: int) -> int:
    return 1 if level == 0 else heights(od.diagram, level)[w]


def path_rank(od: OrderedDiagram, path) -> int:
    """Position of the path among all paths to its end vertex, minimal first."""
    path = check_path(od, path)
    rank = 0
    for i, (v, pos) in enumerate(path):
        level = i + 1
        for w in od.sources(level, v)[:pos]:
            rank += _h(od, level - 1, w)
    return rank


def path_unrank(od: OrderedDiagram, level: int, v: int, rank: int) -> tuple:
    total = _h(od, level, v)
    if not 0 <= rank < total:
        raise PathError(f"rank {rank} out of range for {total} paths")
    out = []
    while level >= 1:
        for pos, w in enumerate(od.sources(level, v)):
            size = _h(od, level - 1, w)
            if rank < size:
                out.append((v, pos))
                v = w
                break
            rank -= size
        level -= 1
    return tuple(reversed(out))


def orbit(od: OrderedDiagram, level: int, v: int) -> list:
    """Successor orbit of the minimal path to v, ending at the maximal one."""
    path = extremal_path(od, level, v, "min")
    out = [path]
    while True:
        path = vershik_successor(od, path)
        if path == MAXIMAL:
            return out
        out.append(path)


def extremal_counts(od: OrderedDiagram, kind: str = "min") -> list:
    """Distinct level-L prefixes of the extremal paths from the top level, for each L.

    A properly ordered diagram should show counts settling at 1.
    """
    top = od.depth
    paths = {extremal_path(od, top, v, kind) for v in range(od.diagram.width(top))}
    return [len({p[:L] for p in paths}) for L in range(1, top + 1)]


# ---------------------------------------------------------------------------
# blocks


@dataclass(frozen=True)
class BlockFamily:
    level: int
    base: int  # n0
    alphabet: int  # s_{n0}
    words: tuple  # words[w] = A_w^(level)

    def __len__(self):
        return len(self.words)


def _offsets(od: OrderedDiagram, n0: int) -> list:
    h = heights(od.diagram, n0)
    out, acc = [], 0
    for x in h:
        out.append(acc)
        acc += x
    return out


def blocks(od: OrderedDiagram, n0: int, n: int) -> BlockFamily:
    if not 1 <= n0 <= n:
        raise DimensionError(f"need 1 <= n0 <= n, got n0={n0}, n={n}")
    if n > od.depth:
        raise DimensionError(f"level {n} beyond depth {od.depth}")
    offsets = _offsets(od, n0)
    h = heights(od.diagram, n0)
    words = [tuple(range(offsets[w], offsets[w] + h[w])) for w in range(len(h))]
    for level in range(n0 + 1, n + 1):
        words = [
            tuple(s for w in od.sources(level, v) for s in words[w])
            for v in range(od.diagram.width(level))
        ]
    return BlockFamily(n, n0, sum(h), tuple(words))


def path_symbol(od: OrderedDiagram, path, n0: int) -> int:
    prefix = path[:n0]
    return _offsets(od, n0)[prefix[-1][0]] + path_rank(od, prefix)


@dataclass(frozen=True)
class CodedWindow:
    word: tuple
    start_path: tuple  # the start path after extension
    max_radius: int


def _extend(od: OrderedDiagram, path: tuple, radius: int) -> tuple:
    """Grow the path upward through middle-position edges until the orbit window fits."""
    while True:
        r = path_rank(od, path)
        total = _h(od, len(path), path[-1][0])
        room = min(r, total - 1 - r)
        if room >= radius or len(path) >= od.depth:
            return path, room
        level, v = len(path), path[-1][0]
        best = None
        for u in range(od.diagram.width(level + 1)):
            src = od.sources(level + 1, u)
            below = 0
            for p, w in enumerate(src):
                if w == v:
                    r2 = r + below
                    t2 = _h(od, level + 1, u)
                    key = min(r2, t2 - 1 - r2)
                    if best is None or key > best[0]:
                        best = (key, u, p)
                below += _h(od, level, w)
        if best is None:
            return path, room
        path = path + ((best[1], best[2]),)


def code_orbit(od: OrderedDiagram, n0: int, start_path, radius: int) -> CodedWindow:
    """The level-n0 coding of the orbit window of length 2*radius+1 around start_path."""
    path = check_path(od, start_path)
    if len(path) < n0:
        while len(path) < n0:
            level, v = len(path), path[-1][0]
            u = next((u for u in range(od.diagram.width(level + 1)) if v in od.sources(level + 1, u)), None)
            if u is None:
                raise PathError(f"cannot extend the path above level {level}")
            path = path + ((u, od.sources(level + 1, u).index(v)),)
    path, room = _extend(od, path, radius)
    if room < radius:
        raise PathError(f"radius {radius} needs deeper levels; the materialized depth supports radius {room}")
    fwd, back = [], []
    p = path
    for _ in range(radius):
        p = vershik_successor(od, p)
        fwd.append(path_symbol(od, p, n0))
    p = path
    for _ in range(radius):
        p = vershik_predecessor(od, p)
        back.append(path_symbol(od, p, n0))
    word = tuple(reversed(back)) + (path_symbol(od, path, n0),) + tuple(fwd)
    return CodedWindow(word, path, room)


# ---------------------------------------------------------------------------
# recovering the incidence matrix from words


@dataclass(frozen=True)
class RecoveredIncidence:
    matrix: tuple
    classes: tuple  # groups of level-n vertices with identical words
    merged: bool
    splits: tuple  # per upper vertex, the lower-word indices it was parsed into


def _parse(word: tuple, pieces: list) -> list | None:
    """Split word into a concatenation of pieces (indices), depth-first."""
    stack = [(0, [])]
    while stack:
        at, used = stack.pop()
        if at == len(word):
            return used
        for j in reversed(range(len(pieces))):
            p = pieces[j]
            if word[at:at + len(p)] == p:
                stack.append((at + len(p), used + [j]))
    return None


def incidence_from_blocks(lower: BlockFamily, upper: BlockFamily) -> RecoveredIncidence:
    """Occurrence counts of the lower words inside the upper words.

    Identical lower words are merged into one column; ``merged`` flags it.
    """
    distinct, classes = [], []
    for w, word in enumerate(lower.words):
        if word in distinct:
            classes[distinct.index(word)].append(w)
        else:
            distinct.append(word)
            classes.append([w])
    rows, splits = [], []
    for v, word in enumerate(upper.words):
        parts = _parse(word, distinct)
        if parts is None:
            raise DimensionError(f"upper word {v} is not a concatenation of lower words")
        splits.append(tuple(parts))
        rows.append(tuple(parts.count(j) for j in range(len(distinct))))
    return RecoveredIncidence(
        tuple(rows),
        tuple(tuple(c) for c in classes),
        len(distinct) < len(lower.words),
        tuple(splits),
    )


def format_word(word, compact: bool = False) -> str:
    if not compact:
        return " ".join(str(s) for s in word)
    alphabet = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if any(s is None or s >= len(alphabet) for s in word):
        raise DimensionError("compact format needs symbols between 0 and 61")
    return "".join(alphabet[s] for s in word)


def ensure_ordered(od: OrderedDiagram, depth: int) -> OrderedDiagram:
    if depth <= od.depth:
        return od
    return ordered_diagram(ensure_depth(od.diagram, depth), consecutive=od.consecutive)
