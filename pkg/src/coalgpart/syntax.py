"""Functor expressions and their decomposition into sorts.

Grammar (whitespace insignificant, ``x`` binds tighter than ``+``)::

    F ::= 'X' | 'P(' F ')' | 'B(' F ')' | 'R(' F ')' | 'D(' F ')'
        | F 'x' F | F '+' F | '{' id (',' id)* '}' | F '^' nat | '(' F ')'

Chains ``F x G x H`` become one n-ary product; ``+`` is binary and
left-associative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .functors import REGISTRY

BASE_KINDS = tuple(REGISTRY)


@dataclass(frozen=True)
class Var:
    def __str__(self):
        return "X"


@dataclass(frozen=True)
class Base:
    kind: str  # one of P, B, R, D
    arg: object

    def __str__(self):
        return f"{self.kind}({self.arg})"


@dataclass(frozen=True)
class Prod:
    parts: tuple

    def __str__(self):
        return " x ".join(_wrap(p, (Coprod,)) for p in self.parts)


@dataclass(frozen=True)
class Coprod:
    left: object
    right: object

    def __str__(self):
        return f"{self.left} + {_wrap(self.right, (Coprod,))}"


@dataclass(frozen=True)
class Const:
    names: tuple

    def __str__(self):
        return "{" + ",".join(self.names) + "}"


@dataclass(frozen=True)
class Exp:
    arg: object
    k: int

    def __str__(self):
        return f"{_wrap(self.arg, (Coprod, Prod, Exp))}^{self.k}"


def _wrap(node, kinds):
    return f"({node})" if isinstance(node, kinds) else str(node)


_TOKEN = re.compile(r"\s*(?:([(){},+^])|([A-Za-z0-9_]+))")


def _tokenize(text, line, col0):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad + 1)
        tok = m.group(1) or m.group(2)
        tokens.append((tok, col0 + m.start(m.lastindex) + 1))
        pos = m.end()
    return tokens


class _FunctorParser:
    def __init__(self, text, line, col0):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.end_col = col0 + len(text.rstrip()) + 1

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def error(self, msg):
        col = self.toks[self.i][1] if self.i < len(self.toks) else self.end_col
        raise ParseError(msg, self.line, col)

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            self.error(f"expected {expected!r}" if expected else "unexpected end of expression")
        self.i += 1
        return tok

    def parse(self):
        node = self.sum()
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()!r}")
        return node

    def sum(self):
        node = self.product()
        while self.peek() == "+":
            self.take()
            node = Coprod(node, self.product())
        return node

    def product(self):
        parts = [self.power()]
        while self.peek() == "x":
            self.take()
            parts.append(self.power())
        return parts[0] if len(parts) == 1 else Prod(tuple(parts))

    def power(self):
        node = self.atom()
        while self.peek() == "^":
            self.take()
            tok = self.peek()
            if tok is None or not tok.isdigit():
                self.error("expected exponent")
            k = int(self.take())
            if k == 0:
                self.i -= 1
                self.error("exponent must be at least 1")
            node = Exp(node, k)
        return node

    def atom(self):
        tok = self.peek()
        if tok == "X":
            self.take()
            return Var()
        if tok in BASE_KINDS and self.i + 1 < len(self.toks) and self.toks[self.i + 1][0] == "(":
            self.take()
            self.take("(")
            arg = self.sum()
            self.take(")")
            return Base(tok, arg)
        if tok == "(":
            self.take()
            node = self.sum()
            self.take(")")
            return node
        if tok == "{":
            self.take()
            if self.peek() == "}":
                self.error("constant set must be nonempty")
            names = [self.ident()]
            while self.peek() == ",":
                self.take()
                name = self.ident()
                if name in names:
                    self.i -= 1
                    self.error(f"duplicate identifier {name!r} in constant set")
                names.append(name)
            self.take("}")
            return Const(tuple(names))
        self.error(f"unexpected {tok!r}" if tok else "unexpected end of expression")

    def ident(self):
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[A-Za-z0-9_]+", tok):
            self.error("expected identifier")
        return self.take()


def parse_functor(text, line=1, column=0):
    """Parse a functor expression; ``column`` offsets error positions."""
    return _FunctorParser(text, line, column).parse()


# -- sort decomposition ------------------------------------------------------


@dataclass
class Sort:
    """One sort of the multi-sorted system.

    A base sort (``kind`` in P/B/R/D) has a single ``successor`` sort.  A
    polynomial sort (``kind == "poly"``) covers a maximal region of
    products, coproducts, constants and exponents; its ``holes`` list the
    sorts of the region's X/base-functor leaves in left-to-right order.
    """

    index: int
    kind: str
    expr: object
    successor: int | None = None
    holes: list = field(default_factory=list)

    @property
    def is_base(self):
        return self.kind != "poly"


@dataclass
class SortPlan:
    functor: object
    sorts: list

    def __len__(self):
        return len(self.sorts)

    def describe(self):
        lines = []
        for s in self.sorts:
            if s.is_base:
                lines.append(f"sort {s.index}: {s.kind} -> sort {s.successor}")
            else:
                lines.append(f"sort {s.index}: poly {s.expr} holes {s.holes}")
        return "\n".join(lines)


def plan_sorts(functor) -> SortPlan:
    """Cut the expression at every base functor node.

    Sort 0 is the root.  Each base node owns one sort; each maximal
    polynomial region owns one sort, except that a bare ``X`` argument
    refers back to sort 0 directly.
    """
    sorts: list[Sort] = []
    memo: dict = {}

    def new_sort(kind, expr):
        s = Sort(len(sorts), kind, expr)
        sorts.append(s)
        return s

    # structurally equal subexpressions share a sort
    def region(expr):
        if expr in memo:
            return memo[expr]
        s = new_sort("poly", expr)
        memo[expr] = s.index
        s.holes = holes_of(expr)
        return s.index

    def base(expr):
        if expr in memo:
            return memo[expr]
        s = new_sort(expr.kind, expr)
        memo[expr] = s.index
        s.successor = argument(expr.arg)
        return s.index

    def argument(expr):
        if isinstance(expr, Var):
            return 0
        if isinstance(expr, Base):
            return base(expr)
        return region(expr)

    def holes_of(expr):
        out = []

        def walk(e):
            if isinstance(e, Var):
                out.append(0)
            elif isinstance(e, Base):
                out.append(base(e))
            elif isinstance(e, Prod):
                for p in e.parts:
                    walk(p)
            elif isinstance(e, Coprod):
                # both branches reserve their sorts; a term uses only one
                walk(e.left)
                walk(e.right)
            elif isinstance(e, Exp):
                for _ in range(e.k):
                    walk(e.arg)
            elif isinstance(e, Const):
                pass
            else:
                raise TypeError(e)

        walk(expr)
        return out

    if isinstance(functor, Base):
        base(functor)
    else:
        region(functor)
    return SortPlan(functor, sorts)
