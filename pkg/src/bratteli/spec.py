"""Diagram specifications: the generator rule behind a materialized diagram.

A spec file is JSON.  Keys:

``generator``
    one of ``explicit``, ``stationary``, ``expression``, ``pascal``,
    ``countable``, ``ers-toeplitz``.
``matrices``
    list of integer matrices F_1, F_2, ... (explicit).
``matrix``
    a square integer matrix repeated at every level (stationary).
``entries``
    a square matrix of expression strings in ``n`` (expression).
``root_edges``
    the edge counts from the root to level 1, one per vertex.
``depth``
    default materialization depth.
``params``
    generator parameters, for instance ``{"a_n": "n^3+2"}``.
``order``
    optional edge orders for the symbolic tools, ``{"v": [sources]}`` or
    ``{"level:v": [sources]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import DimensionError, NegativeEntryError, SpecSyntaxError
from .exprs import EntryExpr, parse_expr

GENERATORS = ("explicit", "stationary", "expression", "pascal", "countable", "ers-toeplitz")
KNOWN_KEYS = {"generator", "matrices", "matrix", "entries", "root_edges", "depth", "params", "order", "name"}


@dataclass(frozen=True, eq=False)
class DiagramSpec:
    generator: str
    matrices: tuple | None = None
    matrix: tuple | None = None
    entries: tuple | None = None
    root_edges: tuple | None = None
    depth: int | None = None
    params: dict = field(default_factory=dict)
    order: dict | None = None
    name: str | None = None

    # -- level rules --------------------------------------------------------

    @property
    def max_depth(self) -> int | None:
        """Largest depth this spec can materialize, None when unbounded."""
        if self.generator == "explicit":
            return len(self.matrices) + 1
        return None

    @property
    def fixed_width(self) -> int | None:
        """Vertex count per level when it does not depend on the level."""
        if self.generator == "stationary":
            return len(self.matrix)
        if self.generator == "expression":
            return len(self.entries)
        return None

    @property
    def a_rule(self) -> EntryExpr:
        return parse_expr(self.params.get("a_n", "n^3+2"))

    def incidence(self, n: int) -> tuple:
        """Integer matrix from level n to level n+1, for n >= 1."""
        g = self.generator
        if g == "explicit":
            return self.matrices[n - 1]
        if g == "stationary":
            return self.matrix
        if g == "expression":
            return tuple(tuple(e.evaluate(n) for e in row) for row in self.entries)
        if g == "pascal":
            return pascal_incidence(n)
        if g == "countable":
            return countable_incidence(n, self.a_rule.evaluate(n))
        raise ValueError(f"generator {g!r} has no closed-form level rule")

    def root(self) -> tuple:
        """Column of edge counts from the root to the vertices of level 1."""
        if self.root_edges is not None:
            return self.root_edges
        g = self.generator
        if g == "pascal":
            return (1, 1)
        if g == "countable":
            a0 = self.a_rule.evaluate(0)
            return (a0, a0)
        if g == "explicit":
            return (1,) * len(self.matrices[0][0]) if self.matrices else (1,)
        if g in ("stationary", "expression"):
            return (1,) * self.fixed_width
        raise ValueError(f"generator {g!r} has no closed-form root rule")

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"generator": self.generator}
        if self.matrices is not None:
            out["matrices"] = [[list(r) for r in m] for m in self.matrices]
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.entries is not None:
            out["entries"] = [[str(e) for e in row] for row in self.entries]
        if self.root_edges is not None:
            out["root_edges"] = list(self.root_edges)
        if self.depth is not None:
            out["depth"] = self.depth
        if self.params:
            out["params"] = dict(self.params)
        if self.order is not None:
            out["order"] = {k: list(v) for k, v in self.order.items()}
        if self.name is not None:
            out["name"] = self.name
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def pascal_incidence(n: int) -> tuple:
    rows = []
    for k in range(n + 2):
        rows.append(tuple(1 if w in (k, k - 1) else 0 for w in range(n + 1)))
    return tuple(rows)


def countable_incidence(n: int, a: int) -> tuple:
    rows = []
    for v in range(n + 2):
        big = v if v <= n else n
        rows.append(tuple(a if w == big else 1 for w in range(n + 1)))
    return tuple(rows)


# ---------------------------------------------------------------------------
# parsing


def _locate(text: str, needle: str) -> tuple[int, int] | None:
    idx = text.find(json.dumps(needle))
    if idx < 0:
        return None
    line = text.count("\n", 0, idx) + 1
    col = idx - (text.rfind("\n", 0, idx) + 1) + 2  # skip the opening quote
    return line, col


def _int_matrix(obj, where: str) -> tuple:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SpecSyntaxError(f"{where}: expected a non-empty list of rows")
    width = len(obj[0])
    if width == 0:
        raise DimensionError(f"{where}: empty row")
    rows = []
    for i, row in enumerate(obj):
        if len(row) != width:
            raise DimensionError(f"{where}: row {i} has {len(row)} entries, expected {width}")
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, int):
                raise SpecSyntaxError(f"{where}[{i}][{j}]: expected an integer, got {x!r}")
            if x < 0:
                raise NegativeEntryError(f"{where}[{i}][{j}]: negative entry {x}")
        rows.append(tuple(row))
    return tuple(rows)


def _expr(obj, text: str, where: str) -> EntryExpr:
    try:
        return parse_expr(obj)
    except SpecSyntaxError as exc:
        spot = _locate(text, obj) if isinstance(obj, str) else None
        if spot is None:
            raise SpecSyntaxError(f"{where}: {exc.message}") from None
        line, col = spot
        raise SpecSyntaxError(f"{where}: {exc.message}", line, col + (exc.column or 1) - 1) from None


def parse_spec(text: str) -> DiagramSpec:
    """Parse and validate a JSON spec document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SpecSyntaxError("top level must be an object")
    return spec_from_dict(doc, text)


def spec_from_dict(doc: dict, text: str = "") -> DiagramSpec:
    unknown = set(doc) - KNOWN_KEYS
    if unknown:
        raise SpecSyntaxError(f"unknown keys: {sorted(unknown)}")
    gen = doc.get("generator")
    if gen not in GENERATORS:
        raise SpecSyntaxError(f"generator must be one of {', '.join(GENERATORS)}, got {gen!r}")

    params = doc.get("params") or {}
    if not isinstance(params, dict):
        raise SpecSyntaxError("params must be an object")

    kwargs: dict[str, Any] = {"generator": gen, "params": dict(params), "name": doc.get("name")}

    if gen == "explicit":
        mats = doc.get("matrices")
        if not isinstance(mats, list) or not mats:
            raise SpecSyntaxError("explicit generator needs a non-empty 'matrices' list")
        parsed = tuple(_int_matrix(m, f"matrices[{i}]") for i, m in enumerate(mats))
        for i in range(1, len(parsed)):
            if len(parsed[i][0]) != len(parsed[i - 1]):
                raise DimensionError(
                    f"matrices[{i}] has {len(parsed[i][0])} columns but matrices[{i - 1}] has {len(parsed[i - 1])} rows"
                )
        kwargs["matrices"] = parsed
        width = len(parsed[0][0])
    elif gen == "stationary":
        m = _int_matrix(doc.get("matrix"), "matrix")
        if len(m) != len(m[0]):
            raise DimensionError("stationary matrix must be square")
        kwargs["matrix"] = m
        width = len(m)
    elif gen == "expression":
        ent = doc.get("entries")
        if not isinstance(ent, list) or not ent or not all(isinstance(r, list) for r in ent):
            raise SpecSyntaxError("expression generator needs an 'entries' matrix")
        k = len(ent)
        if any(len(r) != k for r in ent):
            raise DimensionError("expression entries must form a square matrix")
        kwargs["entries"] = tuple(
            tuple(_expr(x, text, f"entries[{i}][{j}]") for j, x in enumerate(r)) for i, r in enumerate(ent)
        )
        width = k
    elif gen == "countable":
        _expr(params.get("a_n", "n^3+2"), text, "params.a_n")
        width = 2
    elif gen == "pascal":
        width = 2
    else:  # ers-toeplitz
        _expr(params.get("lambda", 2), text, "params.lambda")
        block0 = params.get("block0")
        if not isinstance(block0, list) or len(block0) < 3:
            raise SpecSyntaxError("ers-toeplitz needs params.block0 with at least 3 cells")
        for x in block0:
            if x is not None and (isinstance(x, bool) or not isinstance(x, int) or x < 0):
                raise SpecSyntaxError(f"params.block0: bad cell {x!r}")
        fills = params.get("fills")
        if fills is not None:
            ok = isinstance(fills, list) and fills and all(
                isinstance(rule, list) and rule and all(
                    isinstance(pair, list) and len(pair) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
                    for pair in rule
                )
                for rule in fills
            )
            if not ok:
                raise SpecSyntaxError("params.fills must be a list of stages, each a list of [hole ordinal, symbol] pairs")
        width = None

    root = doc.get("root_edges")
    if root is not None:
        if not isinstance(root, list) or not root:
            raise SpecSyntaxError("root_edges must be a non-empty integer list")
        for x in root:
            if isinstance(x, bool) or not isinstance(x, int):
                raise SpecSyntaxError(f"root_edges: expected an integer, got {x!r}")
            if x < 0:
                raise NegativeEntryError(f"root_edges: negative entry {x}")
        if width is not None and len(root) != width:
            raise DimensionError(f"root_edges has {len(root)} entries, level 1 has {width} vertices")
        kwargs["root_edges"] = tuple(root)

    depth = doc.get("depth")
    if depth is not None:
        if isinstance(depth, bool) or not isinstance(depth, int) or depth < 1:
            raise SpecSyntaxError("depth must be a positive integer")
        kwargs["depth"] = depth

    order = doc.get("order")
    if order is not None:
        if not isinstance(order, dict):
            raise SpecSyntaxError("order must be an object")
        clean = {}
        for key, src in order.items():
            if not isinstance(src, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in src):
                raise SpecSyntaxError(f"order[{key!r}] must be a list of vertex indices")
            clean[str(key)] = tuple(src)
        kwargs["order"] = clean

    return DiagramSpec(**kwargs)


def load_spec(path) -> DiagramSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())
