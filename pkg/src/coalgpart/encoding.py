"""Coalgebra files, the multi-sorted edge encoding, and quotients.

File format (UTF-8, line oriented)::

    # comment
    functor {tri,sq,circ} x P(X)
    state t1 = (tri, {c1, c2, c3})

Term syntax, driven by the functor expression: powerset ``{t, ...}``, bag
``[t, ...]`` (repetition allowed), weight maps for R/D ``{t: p/q, ...}``,
products ``(t, u, ...)``, coproducts ``inl t`` / ``inr t``, exponents
``[t0, ..., tk-1]``, constants and state names as bare identifiers.

Every occurrence of a sub-term of an inner sort becomes a fresh
intermediate state; all sorts share one state space and the sort is part
of each state's type value.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ParseError
from .functors import REGISTRY, PolynomialInterface
from .syntax import Base, Const, Coprod, Exp, Prod, Var, parse_functor, plan_sorts

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass
class Encoding:
    """Edge-array encoding of a (multi-sorted) coalgebra.

    States ``0 .. n_roots-1`` are the named states of sort 0, in file order.
    ``types[x]`` is ``(sort, interface type value, child types)``; only the
    middle component is handed to ``init``.
    """

    functor: object
    plan: object
    interfaces: list
    names: list
    sorts: list
    types: list
    src: list
    label: list
    tgt: list
    out: list
    n_roots: int
    terms: list = field(default_factory=list)
    _pred: list | None = field(default=None, repr=False)

    @property
    def n_states(self):
        return len(self.names)

    @property
    def n_edges(self):
        return len(self.src)

    @property
    def pred(self):
        if self._pred is None:
            pred = [[] for _ in range(self.n_states)]
            for e, y in enumerate(self.tgt):
                pred[y].append(e)
            self._pred = pred
        return self._pred

    def interface_of(self, x):
        return self.interfaces[self.sorts[x]]

    def root_names(self):
        return self.names[: self.n_roots]


# -- term lexer/parser -------------------------------------------------------

_TERM_TOKEN = re.compile(r"\s*(?:([{}\[\](),:])|(-?[A-Za-z0-9_]+(?:/[0-9]+)?))")
_RATIONAL = re.compile(r"-?[0-9]+(?:/[0-9]+)?\Z")


class _TermParser:
    def __init__(self, text, line, col0):
        self.line = line
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TERM_TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise ParseError(f"unexpected character {text[bad]!r}", line, col0 + bad + 1)
            self.toks.append((m.group(1) or m.group(2), col0 + m.start(m.lastindex) + 1))
            pos = m.end()
        self.end_col = col0 + len(text) + 1
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def error(self, msg, back=0):
        i = self.i - back
        col = self.toks[i][1] if i < len(self.toks) else self.end_col
        raise ParseError(msg, self.line, col)

    def take(self, expected=None):
        tok = self.peek()
        if tok is None:
            self.error(f"expected {expected!r}" if expected else "unexpected end of term")
        if expected is not None and tok != expected:
            self.error(f"expected {expected!r}, got {tok!r}")
        self.i += 1
        return tok

    def word(self):
        tok = self.peek()
        if tok is None or tok in "{}[](),:":
            self.error("expected identifier")
        return self.take()

    def items(self, close, item):
        out = []
        if self.peek() == close:
            self.take()
            return out
        out.append(item())
        while self.peek() == ",":
            self.take()
            out.append(item())
        self.take(close)
        return out

    def term(self, expr):
        """Parse one term of functor ``expr`` into a tuple-tagged tree."""
        if isinstance(expr, Var):
            name = self.word()
            if not NAME_RE.match(name):
                self.error(f"invalid state name {name!r}", back=1)
            return ("ref", name, self.toks[self.i - 1][1])
        if isinstance(expr, Const):
            name = self.word()
            if name not in expr.names:
                self.error(f"{name!r} is not one of {{{','.join(expr.names)}}}", back=1)
            return ("const", name)
        if isinstance(expr, Prod):
            self.take("(")
            parts = []
            for k, p in enumerate(expr.parts):
                if k:
                    self.take(",")
                parts.append(self.term(p))
            self.take(")")
            return ("tuple", parts)
        if isinstance(expr, Coprod):
            tag = self.word()
            if tag == "inl":
                return ("inl", self.term(expr.left))
            if tag == "inr":
                return ("inr", self.term(expr.right))
            self.error("expected 'inl' or 'inr'", back=1)
        if isinstance(expr, Exp):
            self.take("[")
            parts = self.items("]", lambda: self.term(expr.arg))
            if len(parts) != expr.k:
                self.error(f"expected {expr.k} components, got {len(parts)}", back=1)
            return ("vec", parts)
        if isinstance(expr, Base):
            if expr.kind == "P":
                self.take("{")
                return ("set", self.items("}", lambda: self.term(expr.arg)))
            if expr.kind == "B":
                self.take("[")
                return ("bag", self.items("]", lambda: self.term(expr.arg)))
            self.take("{")
            return ("map", self.items("}", lambda: self.entry(expr.arg)))
        raise TypeError(expr)

    def entry(self, expr):
        t = self.term(expr)
        self.take(":")
        tok = self.peek()
        if tok is None or not _RATIONAL.match(tok):
            self.error("expected rational weight")
        self.take()
        try:
            q = Fraction(tok)
        except ZeroDivisionError:
            self.error("zero denominator", back=1)
        if q == 0:
            self.error("zero weight in weight map", back=1)
        return (t, q, self.toks[self.i - 1][1])

    def done(self):
        if self.peek() is not None:
            self.error(f"unexpected {self.peek()!r}")


def parse_term(text, expr, line=1, column=0):
    p = _TermParser(text, line, column)
    t = p.term(expr)
    p.done()
    return t


# -- canonical rendering ---------------------------------------------------


def render_term(t) -> str:
    """Render a term tree back to file syntax, canonically ordered."""
    tag = t[0]
    if tag in ("ref", "const"):
        return t[1]
    if tag == "tuple":
        return "(" + ", ".join(render_term(p) for p in t[1]) + ")"
    if tag in ("inl", "inr"):
        return f"{tag} {render_term(t[1])}"
    if tag == "vec":
        return "[" + ", ".join(render_term(p) for p in t[1]) + "]"
    if tag == "set":
        return "{" + ", ".join(sorted(set(render_term(p) for p in t[1]))) + "}"
    if tag == "bag":
        return "[" + ", ".join(sorted(render_term(p) for p in t[1])) + "]"
    if tag == "map":
        merged = defaultdict(Fraction)
        for sub, q, *_ in t[1]:
            merged[render_term(sub)] += q
        return "{" + ", ".join(f"{k}: {q}" for k, q in sorted(merged.items()) if q != 0) + "}"
    raise TypeError(tag)


# -- building the encoding ---------------------------------------------------


class _Builder:
    def __init__(self, plan):
        self.plan = plan
        self.names = []
        self.sorts = []
        self.types = []
        self.src = []
        self.label = []
        self.tgt = []
        self.out = []
        self.symbols = [dict() for _ in plan.sorts]
        self.arities = [[] for _ in plan.sorts]
        self.index = {}
        self.line = None

    def new_state(self, name, sort):
        x = len(self.names)
        self.names.append(name)
        self.sorts.append(sort)
        self.types.append(None)
        self.out.append([])
        return x

    def edge(self, x, a, y):
        e = len(self.src)
        self.src.append(x)
        self.label.append(a)
        self.tgt.append(y)
        self.out[x].append(e)

    def resolve(self, t, sort, owner, k):
        """State id for sub-term ``t`` of ``sort``; fresh unless sort 0."""
        if sort == 0:
            if t[0] != "ref":
                raise ParseError("expected a state name", self.line)
            y = self.index.get(t[1])
            if y is None:
                raise ParseError(f"undeclared state {t[1]!r}", self.line, t[2])
            return y, False
        y = self.new_state(f"{self.names[owner]}.{k}", sort)
        self.fill(y, t)
        return y, True

    def fill(self, x, t):
        sort = self.plan.sorts[self.sorts[x]]
        if sort.is_base:
            self.fill_base(x, t, sort)
        else:
            self.fill_poly(x, t, sort)

    def fill_base(self, x, t, sort):
        succ = sort.successor
        kind = sort.kind
        if kind == "P":
            seen = set()
            k = 0
            for sub in t[1]:
                if succ == 0:
                    if sub[1] in seen:
                        continue
                    seen.add(sub[1])
                y, _ = self.resolve(sub, succ, x, k)
                k += 1
                self.edge(x, 1, y)
            self.types[x] = (sort.index, k > 0, None)
        elif kind == "B":
            counts = {}
            order = []
            for k, sub in enumerate(t[1]):
                if succ == 0:
                    y, _ = self.resolve(sub, succ, x, k)
                    if y not in counts:
                        order.append(y)
                        counts[y] = 0
                    counts[y] += 1
                else:
                    y, _ = self.resolve(sub, succ, x, k)
                    order.append(y)
                    counts[y] = 1
            for y in order:
                self.edge(x, counts[y], y)
            self.types[x] = (sort.index, len(t[1]), None)
        else:
            seen = set()
            total = Fraction(0)
            for k, (sub, q, col) in enumerate(t[1]):
                key = render_term(sub)
                if key in seen:
                    raise ParseError(f"duplicate key {key!r} in weight map", self.line, col)
                seen.add(key)
                if kind == "D" and q < 0:
                    raise ParseError("negative probability", self.line, col)
                y, _ = self.resolve(sub, succ, x, k)
                self.edge(x, q, y)
                total += q
            if kind == "D":
                if total != 1:
                    raise ParseError(f"distribution sums to {total}, not 1", self.line)
                self.types[x] = (sort.index, None, None)
            else:
                self.types[x] = (sort.index, total, None)

    def fill_poly(self, x, t, sort):
        children = []  # (sort, subterm) per hole

        def shape(e, t):
            if isinstance(e, Var):
                children.append((0, t))
                return "_"
            if isinstance(e, Base):
                children.append((self.plan_index(e), t))
                return "_"
            if isinstance(e, Const):
                return t[1]
            if isinstance(e, Prod):
                return "(" + ",".join(shape(p, s) for p, s in zip(e.parts, t[1])) + ")"
            if isinstance(e, Coprod):
                if t[0] == "inl":
                    return "inl " + shape(e.left, t[1])
                return "inr " + shape(e.right, t[1])
            if isinstance(e, Exp):
                return "[" + ",".join(shape(e.arg, s) for s in t[1]) + "]"
            raise TypeError(e)

        sym_name = shape(sort.expr, t)
        table = self.symbols[sort.index]
        sym = table.get(sym_name)
        if sym is None:
            sym = table[sym_name] = len(table)
            self.arities[sort.index].append(len(children))
        child_types = []
        for pos, (csort, sub) in enumerate(children, start=1):
            y, fresh = self.resolve(sub, csort, x, pos)
            self.edge(x, pos, y)
            child_types.append(self.types[y] if fresh else None)
        self.types[x] = (sort.index, sym, tuple(child_types))

    def plan_index(self, expr):
        for s in self.plan.sorts:
            if s.is_base and s.expr == expr:
                return s.index
        raise KeyError(expr)

    def interfaces(self):
        out = []
        for s in self.plan.sorts:
            if s.is_base:
                out.append(REGISTRY[s.kind])
            else:
                out.append(PolynomialInterface(self.arities[s.index]))
        return out


def _logical_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            yield lineno, line


_STATE_RE = re.compile(r"\s*state\s+(\S+)\s*=")


def parse_coalgebra(text, plan=None) -> Encoding:
    """Parse a coalgebra file into its multi-sorted edge encoding.

    ``plan`` overrides the sort plan derived from the file's functor line.
    """
    lines = list(_logical_lines(text))
    if not lines:
        raise ParseError("empty file: expected 'functor <expr>'", 1)
    lineno, first = lines[0]
    m = re.match(r"\s*functor\b", first)
    if not m:
        raise ParseError("expected 'functor <expr>'", lineno, 1)
    functor = parse_functor(first[m.end():], lineno, m.end())
    if plan is None:
        plan = plan_sorts(functor)
    root_expr = plan.sorts[0].expr

    decls = []
    seen = {}
    for lineno, line in lines[1:]:
        m = _STATE_RE.match(line)
        if not m:
            raise ParseError("expected 'state <name> = <term>'", lineno, 1)
        name = m.group(1)
        if not NAME_RE.match(name):
            raise ParseError(f"invalid state name {name!r}", lineno, m.start(1) + 1)
        if name in seen:
            raise ParseError(f"duplicate state {name!r} (first declared on line {seen[name]})", lineno, m.start(1) + 1)
        seen[name] = lineno
        term = parse_term(line[m.end():], root_expr, lineno, m.end())
        decls.append((lineno, name, term))

    b = _Builder(plan)
    for _, name, _ in decls:
        b.index[name] = b.new_state(name, 0)
    for x, (lineno, _, term) in enumerate(decls):
        b.line = lineno
        b.fill(x, term)

    interfaces = b.interfaces()
    pred = [[] for _ in b.names]
    for e, y in enumerate(b.tgt):
        pred[y].append(e)
    enc = Encoding(
        functor=functor,
        plan=plan,
        interfaces=interfaces,
        names=b.names,
        sorts=b.sorts,
        types=b.types,
        src=b.src,
        label=b.label,
        tgt=b.tgt,
        out=b.out,
        n_roots=len(decls),
        terms=[t for _, _, t in decls],
        _pred=pred,
    )
    return enc


def read_coalgebra(path) -> Encoding:
    with open(path, encoding="utf-8") as fh:
        return parse_coalgebra(fh.read())


# -- output -------------------------------------------------------------------


def root_blocks(enc, blocks):
    """Restrict a partition of all states to the named sort-0 states."""
    out = []
    for block in blocks:
        names = sorted(enc.names[x] for x in block if x < enc.n_roots)
        if names:
            out.append(names)
    out.sort(key=lambda b: b[0])
    return out


def format_partition(enc, blocks) -> str:
    """One ``{a,b,...}`` line per block, names sorted, blocks by least name."""
    return "".join("{" + ",".join(b) + "}\n" for b in root_blocks(enc, blocks))


def quotient_coalgebra(enc, blocks) -> str:
    """Coalgebra file of the quotient system over block representatives.

    Blocks are named ``B0, B1, ...`` in partition output order; each block's
    term is its least-named member's term with successors renamed, merged
    targets summed (weights) or deduplicated (sets).
    """
    named = root_blocks(enc, blocks)
    block_name = {}
    for i, members in enumerate(named):
        for n in members:
            block_name[n] = f"B{i}"
    index = {n: x for x, n in enumerate(enc.root_names())}

    def rename(t):
        tag = t[0]
        if tag == "ref":
            return ("ref", block_name[t[1]])
        if tag == "const":
            return t
        if tag in ("inl", "inr"):
            return (tag, rename(t[1]))
        if tag == "map":
            return (tag, [(rename(s), q) for s, q, *_ in t[1]])
        return (tag, [rename(s) for s in t[1]])

    lines = [f"functor {enc.functor}\n"]
    for i, members in enumerate(named):
        rep = index[members[0]]
        lines.append(f"state B{i} = {render_term(rename(enc.terms[rep]))}\n")
    return "".join(lines)
