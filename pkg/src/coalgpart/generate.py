"""Seeded random coalgebras for any functor expression."""

from __future__ import annotations

import math
import random
from fractions import Fraction

from .encoding import render_term
from .syntax import Base, Const, Coprod, Exp, Prod, Var, parse_functor


def _size(rng, density, trials):
    """Binomial(trials, density/trials) by inversion; mean ``density``.

    With many trials this is close to Poisson, so empty collections
    (deadlocks) stay common and random systems do not collapse to one block.
    """
    trials = max(trials, 1)
    p = min(density / trials, 1.0)
    if p >= 1.0:
        return trials
    if p <= 0.0:
        return 0
    ratio = p / (1.0 - p)
    pmf = (1.0 - p) ** trials
    u = rng.random()
    k = 0
    acc = pmf
    while u > acc and k < trials:
        pmf *= (trials - k) / (k + 1) * ratio
        k += 1
        acc += pmf
        if pmf == 0.0 and k > density:
            break
    return k


class _Gen:
    def __init__(self, rng, names, density, weight_range):
        self.rng = rng
        self.names = names
        self.density = density
        self.wr = max(1, weight_range)

    def term(self, expr):
        rng = self.rng
        if isinstance(expr, Var):
            return ("ref", rng.choice(self.names))
        if isinstance(expr, Const):
            return ("const", rng.choice(expr.names))
        if isinstance(expr, Prod):
            return ("tuple", [self.term(p) for p in expr.parts])
        if isinstance(expr, Coprod):
            if rng.random() < 0.5:
                return ("inl", self.term(expr.left))
            return ("inr", self.term(expr.right))
        if isinstance(expr, Exp):
            return ("vec", [self.term(expr.arg) for _ in range(expr.k)])
        if isinstance(expr, Base):
            k = _size(rng, self.density, max(len(self.names), math.ceil(2 * self.density)))
            if expr.kind == "D":
                k = max(k, 1)
            if expr.kind == "B":
                return ("bag", [self.term(expr.arg) for _ in range(k)])
            keys = self.distinct(expr.arg, k)
            if expr.kind == "P":
                return ("set", keys)
            if expr.kind == "D":
                raw = [rng.randint(1, self.wr) for _ in keys]
                total = sum(raw)
                return ("map", [(t, Fraction(w, total)) for t, w in zip(keys, raw)])
            entries = []
            for t in keys:
                num = rng.randint(1, self.wr) * rng.choice((1, -1))
                entries.append((t, Fraction(num, rng.choice((1, 2)))))
            return ("map", entries)
        raise TypeError(expr)

    def distinct(self, expr, k):
        if isinstance(expr, Var):
            return [("ref", n) for n in self.rng.sample(self.names, min(k, len(self.names)))]
        seen = {}
        for _ in range(k):
            t = self.term(expr)
            seen.setdefault(render_term(t), t)
        return list(seen.values())


def generate(functor, states, density=3.0, weight_range=3, seed=0):
    """Text of a random coalgebra file with ``states`` named states.

    Raises ValueError for non-positive parameters.
    """
    if states <= 0:
        raise ValueError("--states must be positive")
    if density < 0:
        raise ValueError("--density must be non-negative")
    if weight_range <= 0:
        raise ValueError("weight range must be positive")
    expr = parse_functor(functor) if isinstance(functor, str) else functor
    rng = random.Random(seed)
    width = len(str(states - 1))
    names = [f"s{i:0{width}d}" for i in range(states)]
    gen = _Gen(rng, names, density, weight_range)
    lines = [f"functor {expr}\n"]
    for name in names:
        lines.append(f"state {name} = {render_term(gen.term(expr))}\n")
    return "".join(lines)
