"""Integer expressions in the level index ``n``.

The accepted language is

    expr    := product ('+' product)*
    product := power ('*' power)*
    power   := postfix ('^' uint)?
    postfix := atom '!'*
    atom    := uint | 'n' | '(' expr ')'

There is no subtraction or division, so every expression evaluates to a
non-negative integer for every n >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import SpecSyntaxError


class Poly:
    """Polynomial in n with integer coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def const(cls, value: int) -> "Poly":
        return cls((value,))

    @classmethod
    def var(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        # the zero polynomial gets degree -1
        return len(self.coeffs) - 1

    @property
    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, n):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * n + c
        return acc

    def __add__(self, other: "Poly") -> "Poly":
        if isinstance(other, int):
            other = Poly.const(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (size - len(self.coeffs))
        b = other.coeffs + (0,) * (size - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other: "Poly") -> "Poly":
        if isinstance(other, int):
            other = Poly.const(other)
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if isinstance(other, int):
            other = Poly.const(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    out[i + j] += x * y
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            if k == 0:
                parts.append(str(c))
            else:
                mono = "n" if k == 1 else f"n^{k}"
                parts.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(parts).replace("+-", "-")


# ---------------------------------------------------------------------------
# expression trees


@dataclass(frozen=True)
class EntryExpr:
    """Base node.  Use :func:`parse_expr` to build one from text."""

    def evaluate(self, n: int) -> int:
        raise NotImplementedError

    def to_poly(self) -> Poly | None:
        """Polynomial form, or None when a factorial depends on n."""
        raise NotImplementedError

    def __call__(self, n: int) -> int:
        return self.evaluate(n)


@dataclass(frozen=True)
class Const(EntryExpr):
    value: int

    def evaluate(self, n):
        return self.value

    def to_poly(self):
        return Poly.const(self.value)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(EntryExpr):
    def evaluate(self, n):
        return n

    def to_poly(self):
        return Poly.var()

    def __str__(self):
        return "n"


@dataclass(frozen=True)
class Add(EntryExpr):
    terms: tuple

    def evaluate(self, n):
        return sum(t.evaluate(n) for t in self.terms)

    def to_poly(self):
        out = Poly()
        for t in self.terms:
            p = t.to_poly()
            if p is None:
                return None
            out = out + p
        return out

    def __str__(self):
        return "+".join(str(t) for t in self.terms)


@dataclass(frozen=True)
class Mul(EntryExpr):
    factors: tuple

    def evaluate(self, n):
        out = 1
        for f in self.factors:
            out *= f.evaluate(n)
        return out

    def to_poly(self):
        out = Poly.const(1)
        for f in self.factors:
            p = f.to_poly()
            if p is None:
                return None
            out = out * p
        return out

    def __str__(self):
        return "*".join(_wrap(f, isinstance(f, Add)) for f in self.factors)


@dataclass(frozen=True)
class Pow(EntryExpr):
    base: EntryExpr
    exponent: int

    def evaluate(self, n):
        return self.base.evaluate(n) ** self.exponent

    def to_poly(self):
        p = self.base.to_poly()
        return None if p is None else p ** self.exponent

    def __str__(self):
        return _wrap(self.base, isinstance(self.base, (Add, Mul, Pow))) + f"^{self.exponent}"


@dataclass(frozen=True)
class Fact(EntryExpr):
    arg: EntryExpr

    def evaluate(self, n):
        return _factorial(self.arg.evaluate(n))

    def to_poly(self):
        p = self.arg.to_poly()
        if p is None or p.degree > 0:
            return None
        return Poly.const(_factorial(p(0)))

    def __str__(self):
        return _wrap(self.arg, not isinstance(self.arg, (Const, Var, Fact))) + "!"


def _wrap(node, needed):
    return f"({node})" if needed else str(node)


@lru_cache(maxsize=4096)
def _factorial(k: int) -> int:
    return math.factorial(k)


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise SpecSyntaxError(f"{message} in expression {self.text!r}", 1, self.pos + 1)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def uint(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an unsigned integer")
        return int(self.text[start:self.pos])

    def parse(self) -> EntryExpr:
        node = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return node

    def expr(self):
        terms = [self.product()]
        while self.take("+"):
            terms.append(self.product())
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def product(self):
        factors = [self.power()]
        while self.take("*"):
            factors.append(self.power())
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def power(self):
        base = self.postfix()
        if self.take("^"):
            return Pow(base, self.uint())
        return base

    def postfix(self):
        node = self.atom()
        while self.take("!"):
            node = Fact(node)
        return node

    def atom(self):
        ch = self.peek()
        if ch == "n":
            self.pos += 1
            return Var()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            if not self.take(")"):
                self.error("expected ')'")
            return node
        if ch.isdigit():
            return Const(self.uint())
        if not ch:
            self.error("unexpected end of input")
        self.error(f"unexpected {ch!r}")


def parse_expr(text) -> EntryExpr:
    """Parse an expression string.  Plain non-negative ints are accepted too."""
    if isinstance(text, bool):
        raise SpecSyntaxError(f"expected an expression, got {text!r}")
    if isinstance(text, int):
        if text < 0:
            raise SpecSyntaxError(f"negative constant {text}")
        return Const(text)
    if not isinstance(text, str):
        raise SpecSyntaxError(f"expected an expression string, got {text!r}")
    return _Parser(text).parse()
