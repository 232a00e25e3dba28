"""Brute-force semantics of the interfaces, used to check them.

Terms ``t`` in HY are represented directly:

* powerset: a ``frozenset`` of carrier elements
* bag / group / distribution: a ``dict`` carrier element -> nonzero weight
* polynomial: ``(symbol, (y_1, ..., y_n))``

``weight``, ``three_valued``, ``type_of`` and ``flat`` evaluate the
definitions on such terms without going through ``init``/``update``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantError
from .functors import (
    BagInterface,
    DistributionInterface,
    GroupInterface,
    PolynomialInterface,
    PowersetInterface,
)


def _kind(iface):
    if isinstance(iface, PowersetInterface):
        return "P"
    if isinstance(iface, PolynomialInterface):
        return "poly"
    if isinstance(iface, DistributionInterface):
        return "D"
    if isinstance(iface, GroupInterface):
        return "R"
    if isinstance(iface, BagInterface):
        return "B"
    raise TypeError(f"no brute-force semantics for {iface!r}")


def _zero(kind):
    return 0 if kind == "B" else Fraction(0)


def weight(iface, C, t):
    """w(C, t): the weight of term ``t`` with respect to block ``C``."""
    kind = _kind(iface)
    if kind == "P":
        inside = sum(1 for y in t if y in C)
        return (len(t) - inside, inside)
    if kind == "poly":
        sym, args = t
        return (sym, tuple(int(y in C) for y in args))
    out = inside = _zero(kind)
    for y, a in t.items():
        if y in C:
            inside += a
        else:
            out += a
    return (out, inside)


def three_valued(iface, S, C, t):
    """H chi_S^C applied to ``t`` (0 outside C, 1 in C minus S, 2 in S)."""
    kind = _kind(iface)

    def chi(y):
        return 2 if y in S else 1 if y in C else 0

    if kind == "P":
        vals = {chi(y) for y in t}
        return (0 in vals, 1 in vals, 2 in vals)
    if kind == "poly":
        sym, args = t
        return (sym, tuple(chi(y) for y in args))
    acc = [_zero(kind)] * 3
    for y, a in t.items():
        acc[chi(y)] += a
    return tuple(acc)


def type_of(iface, t):
    """H! applied to ``t``."""
    kind = _kind(iface)
    if kind == "P":
        return len(t) > 0
    if kind == "poly":
        return t[0]
    if kind == "D":
        return None
    return sum(t.values(), _zero(kind))


def flat(iface, t):
    """The edge bag [(label, target)] of ``t``."""
    kind = _kind(iface)
    if kind == "P":
        return [(1, y) for y in t]
    if kind == "poly":
        return [(i, y) for i, y in enumerate(t[1], start=1)]
    return [(a, y) for y, a in t.items() if a != 0]


def term_from_edges(iface, type_value, edges):
    """Rebuild the abstract term of a state from its (label, target) edges."""
    kind = _kind(iface)
    if kind == "P":
        return frozenset(y for _, y in edges)
    if kind == "poly":
        args = [None] * iface.arities[type_value]
        for i, y in edges:
            args[i - 1] = y
        return (type_value, tuple(args))
    t: dict = {}
    for a, y in edges:
        t[y] = t.get(y, _zero(kind)) + a
    return {y: a for y, a in t.items() if a != 0}


# -- the interface axioms ------------------------------------------------------


@dataclass
class AxiomReport:
    interface: str
    checked: int
    counterexample: dict | None = None

    @property
    def passed(self):
        return self.counterexample is None

    def __str__(self):
        if self.passed:
            return f"{self.interface}: pass ({self.checked} checks)"
        return f"{self.interface}: FAIL after {self.checked} checks: {self.counterexample}"


def check_term(iface, t, S, C, Y):
    """Check both axiom equations for one term and chain S <= C <= Y.

    Returns None or a dict describing the violation.
    """
    edges = flat(iface, t)
    labels = [a for a, _ in edges]
    got = iface.init(type_of(iface, t), labels)
    want = weight(iface, Y, t)
    if got != want:
        return {"equation": "init", "term": t, "got": got, "want": want}
    in_s = [a for a, y in edges if y in S]
    got = iface.update(in_s, weight(iface, C, t))
    want = (weight(iface, S, t), three_valued(iface, S, C, t), weight(iface, C - S, t))
    if got != want:
        return {"equation": "update", "term": t, "S": set(S), "C": set(C), "got": got, "want": want}
    return None


def _chains(Y):
    """All (S, C) with S <= C <= Y, via every map Y -> {0, 1, 2}."""
    for chi in itertools.product((0, 1, 2), repeat=len(Y)):
        C = frozenset(y for y, v in zip(Y, chi) if v)
        S = frozenset(y for y, v in zip(Y, chi) if v == 2)
        yield S, C


def _random_chain(rng, Y):
    chi = [rng.randrange(3) for _ in Y]
    C = frozenset(y for y, v in zip(Y, chi) if v)
    S = frozenset(y for y, v in zip(Y, chi) if v == 2)
    return S, C


def _terms(iface, Y, weights):
    kind = _kind(iface)
    if kind == "P":
        for r in range(len(Y) + 1):
            for sub in itertools.combinations(Y, r):
                yield frozenset(sub)
    elif kind == "poly":
        for sym, arity in enumerate(iface.arities):
            for args in itertools.product(Y, repeat=arity):
                yield (sym, args)
    elif kind in ("B", "R"):
        for ws in itertools.product(weights, repeat=len(Y)):
            yield {y: w for y, w in zip(Y, ws) if w != 0}
    else:
        raise ValueError("distributions are sampled, not enumerated")


def _random_term(iface, rng, Y, weights):
    kind = _kind(iface)
    if kind == "P":
        return frozenset(y for y in Y if rng.random() < 0.5)
    if kind == "poly":
        sym = rng.randrange(len(iface.arities))
        return (sym, tuple(rng.choice(Y) for _ in range(iface.arities[sym])))
    if kind == "D":
        support = [y for y in Y if rng.random() < 0.6] or [rng.choice(Y)]
        raw = {y: rng.randint(1, 12) for y in support}
        total = sum(raw.values())
        return {y: Fraction(v, total) for y, v in raw.items()}
    t = {}
    for y in Y:
        w = rng.choice(weights)
        if w != 0:
            t[y] = w
    return t


def check_interface_axioms(iface, carrier_size, samples=None, weights=None, seed=0):
    """Check the init/update equations against the brute-force semantics.

    With ``samples=None`` every term over a carrier of ``carrier_size``
    elements is combined with every chain S <= C <= Y (weighted interfaces
    draw their weights from ``weights``).  Otherwise ``samples`` random
    (term, S, C) triples are drawn.  Distributions are always sampled.
    """
    if carrier_size > 8:
        raise ValueError("carrier size is limited to 8")
    Y = list(range(carrier_size))
    Yset = frozenset(Y)
    kind = _kind(iface)
    if weights is None:
        weights = [Fraction(k) for k in range(-2, 3)] if kind == "R" else list(range(0, 4))
    report = AxiomReport(iface.name, 0)
    if samples is None and kind == "D":
        samples = 10_000
    if samples is None:
        chains = list(_chains(Y))
        for t in _terms(iface, Y, weights):
            for S, C in chains:
                report.checked += 1
                bad = check_term(iface, t, S, C, Yset)
                if bad:
                    report.counterexample = bad
                    return report
        return report
    rng = random.Random(seed)
    for _ in range(samples):
        t = _random_term(iface, rng, Y, weights)
        S, C = _random_chain(rng, Y)
        report.checked += 1
        bad = check_term(iface, t, S, C, Yset)
        if bad:
            report.counterexample = bad
            return report
    return report


# -- auditing a refiner run ------------------------------------------------------


def audit_refiner(r):
    """Recheck the four loop invariants of a Refiner by brute force."""
    enc = r.enc
    P, Q = r.P, r.Q
    P.audit()
    Q.audit()
    if any(r.toSub.values()):
        raise InvariantError("toSub must be empty between splits")
    qblock = [Q.qblock_of[P.block_of[y]] for y in range(enc.n_states)]
    members: dict[int, set] = {}
    for y, q in enumerate(qblock):
        members.setdefault(q, set()).add(y)

    # states alone in their P-block are frozen and keep stale cells
    frozen = [P.size(P.block_of[x]) == 1 for x in range(enc.n_states)]
    live_edges = [e for e in range(enc.n_edges) if not frozen[enc.src[e]]]
    seen_cells: dict[int, tuple] = {}
    for e in live_edges:
        cell = r.lastW[e]
        key = (enc.src[e], qblock[enc.tgt[e]])
        if seen_cells.setdefault(cell, key) != key:
            raise InvariantError(f"cell {cell} shared by edges of different (source, Q-block)")
    by_key: dict[tuple, int] = {}
    for e in live_edges:
        cell = r.lastW[e]
        key = (enc.src[e], qblock[enc.tgt[e]])
        if by_key.setdefault(key, cell) != cell:
            raise InvariantError(f"edges with key {key} use different cells")

    terms = {}
    for x in range(enc.n_states):
        iface = enc.interface_of(x)
        edges = [(enc.label[e], enc.tgt[e]) for e in enc.out[x]]
        terms[x] = term_from_edges(iface, enc.types[x][1], edges)
    for e in live_edges:
        cell = r.lastW[e]
        x = enc.src[e]
        C = members[qblock[enc.tgt[e]]]
        want = weight(enc.interface_of(x), C, terms[x])
        if r.deref[cell] != want:
            raise InvariantError(f"cell of edge {e} holds {r.deref[cell]}, expected {want}")

    for b in P.block_ids():
        xs = list(P.elements(b))
        if len({qblock[x] for x in xs}) != 1:
            raise InvariantError(f"P-block {b} straddles Q-blocks")
        for C in members.values():
            vals = {three_valued(enc.interface_of(x), frozenset(), C, terms[x]) for x in xs}
            if len(vals) > 1:
                raise InvariantError(f"P-block {b} disagrees on H chi_C: {vals}")

