"""Naive final-chain partition refinement, used as a correctness oracle.

Each round regroups every state by its full one-step behaviour with
successors replaced by their current block ids, until the block count
stops growing.  Quadratic in the worst case and deliberately independent of
the refiner's incremental machinery.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction


def signature(x, assignment, enc):
    """Canonical hashable form of ``H(assignment)(xi(x))``, typed by sort."""
    kind = enc.plan.sorts[enc.sorts[x]].kind
    label, tgt = enc.label, enc.tgt
    edges = enc.out[x]
    if kind == "P":
        body = tuple(sorted({assignment[tgt[e]] for e in edges}))
    elif kind == "poly":
        body = tuple(assignment[tgt[e]] for e in sorted(edges, key=lambda e: label[e]))
    else:
        acc: dict = {}
        for e in edges:
            b = assignment[tgt[e]]
            acc[b] = acc.get(b, 0) + label[e]
        body = tuple(sorted((b, w) for b, w in acc.items() if w != 0))
    return (enc.types[x], body)


def _group(keys):
    ids: dict = {}
    out = []
    for k in keys:
        b = ids.get(k)
        if b is None:
            b = ids[k] = len(ids)
        out.append(b)
    return out, len(ids)


def _blocks(assignment, count):
    blocks = [[] for _ in range(count)]
    for x, b in enumerate(assignment):
        blocks[b].append(x)
    return blocks


def naive_refine(enc, max_rounds=None):
    """Behavioural equivalence on all states of ``enc`` (as list of blocks)."""
    n = enc.n_states
    assignment, count = _group(enc.types)
    rounds = 0
    while True:
        rounds += 1
        sigs = [signature(x, assignment, enc) for x in range(n)]
        new, new_count = _group(sigs)
        if new_count == count:
            break
        assignment, count = new, new_count
        if max_rounds is not None and rounds >= max_rounds:
            break
    return _blocks(assignment, count)


def naive_rounds(enc):
    """Every partition of the final chain, starting with the typing."""
    n = enc.n_states
    assignment, count = _group(enc.types)
    history = [_blocks(assignment, count)]
    while True:
        sigs = [signature(x, assignment, enc) for x in range(n)]
        new, new_count = _group(sigs)
        if new_count == count:
            return history
        assignment, count = new, new_count
        history.append(_blocks(assignment, count))


# -- composite-term oracle ----------------------------------------------------


def term_signature(t, block):
    """``H(block)`` applied to a parsed term of the composite functor."""
    tag = t[0]
    if tag == "ref":
        return block[t[1]]
    if tag == "const":
        return ("c", t[1])
    if tag in ("inl", "inr"):
        return (tag, term_signature(t[1], block))
    if tag in ("tuple", "vec"):
        return tuple(term_signature(s, block) for s in t[1])
    if tag == "set":
        return ("set", frozenset(term_signature(s, block) for s in t[1]))
    if tag == "bag":
        return ("bag", frozenset(Counter(term_signature(s, block) for s in t[1]).items()))
    if tag == "map":
        acc: dict = {}
        for s, q, *_ in t[1]:
            k = term_signature(s, block)
            acc[k] = acc.get(k, Fraction(0)) + q
        return ("map", frozenset((k, q) for k, q in acc.items() if q != 0))
    raise TypeError(tag)


def naive_refine_terms(enc):
    """Final-chain refinement on the named states using the parsed terms.

    Works on the composite functor directly, bypassing the sort
    decomposition; returns blocks of root state ids.
    """
    names = enc.root_names()
    n = len(names)
    assignment = [0] * n
    count = 1 if n else 0
    while True:
        block = dict(zip(names, assignment))
        new, new_count = _group(term_signature(t, block) for t in enc.terms)
        if new_count == count:
            break
        assignment, count = new, new_count
    return _blocks(assignment, count)
