"""The O((m+n) log n) partition refinement loop.

The refiner keeps two partitions of the state space: the finer P (blocks)
and the coarser Q (compound blocks, groups of P-blocks).  Each step picks a
P-block S at most half the size of its compound block C, splits C into S
and C minus S, and refines every P-block with an edge into S by the
three-valued behaviour of its states with respect to S and C.  Weights
w(C, x) are cached in cells shared by the edges of x into C, so a step
costs time proportional to the number of edges into S.
"""

from __future__ import annotations

import gc
import math
import time
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvariantError
from .partition import CompoundStructure, RefinablePartition, group_by_value


class SplitterChoice(NamedTuple):
    subblock: int  # P-block id of S
    compound: int  # Q-block id that held S; afterwards holds C minus S
    subblock_size: int
    compound_size: int


class Refiner:
    """Mutable refinement state for one encoding.

    ``audit`` re-checks the four loop invariants after initialization and
    after every split by brute-force recomputation (slow; for tests).
    """

    def __init__(self, enc, audit=False, record=False):
        self.enc = enc
        self.audit_enabled = audit
        self.history = [] if record else None
        self.iterations = 0
        self.counter = [0] * enc.n_states
        self.toSub: dict[int, list] = {}
        self._initialize()
        if audit:
            self.audit()

    # -- initialization --------------------------------------------------

    def _initialize(self):
        enc = self.enc
        n = enc.n_states
        label = enc.label
        types = enc.types
        sorts = enc.sorts
        ifaces = enc.interfaces
        self.pred = enc.pred
        lastW = [0] * enc.n_edges
        deref = []
        for x, edges in enumerate(enc.out):
            if not edges:
                continue
            cell = len(deref)
            deref.append(ifaces[sorts[x]].init(types[x][1], [label[e] for e in edges]))
            for e in edges:
                lastW[e] = cell
        self.lastW = lastW
        self.deref = deref
        self.P = RefinablePartition(n, types)
        self.Q = CompoundStructure(self.P)

    # -- main loop ---------------------------------------------------------

    def select_splitter(self):
        """Carve the smaller of the front compound block's first two members."""
        Q = self.Q
        q = Q.pop_compound()
        if q is None:
            return None
        members = Q.members[q]
        b1 = members[0]
        b2 = members[1]
        size = self.P.size
        s = b1 if size(b1) <= size(b2) else b2
        choice = SplitterChoice(s, q, size(s), Q.count[q])
        Q.carve(q, s)
        return choice

    def choose(self, subblock):
        """Explicitly carve P-block ``subblock`` out of its compound block."""
        Q = self.Q
        q = Q.qblock_of[subblock]
        if not Q.is_compound(q):
            raise ValueError(f"P-block {subblock} is alone in its compound block")
        choice = SplitterChoice(subblock, q, self.P.size(subblock), Q.count[q])
        Q.carve(q, subblock)
        return choice

    def step(self):
        """One select + split; returns the choice, or None when done."""
        choice = self.select_splitter()
        if choice is not None:
            self.split(choice)
        return choice

    def run(self):
        while self.step() is not None:
            pass
        return self.P.as_sets()

    # -- Split ---------------------------------------------------------------

    def split(self, choice: SplitterChoice):
        enc = self.enc
        P = self.P
        Q = self.Q
        block_of = P.block_of
        start = P.start
        end = P.end
        pred = self.pred
        src = enc.src
        label = enc.label
        sorts = enc.sorts
        ifaces = enc.interfaces
        lastW = self.lastW
        deref = self.deref
        counter = self.counter
        toSub = self.toSub
        marks: dict[int, list] = {}
        touched = []
        self.iterations += 1

        # (a) collect predecessor blocks; singleton blocks can never split
        # again, so their states are skipped and their cells left stale
        s = choice.subblock
        for y in P.elems[start[s]:end[s]]:
            counter[y] += 1
            for e in pred[y]:
                x = src[e]
                edges = toSub.get(x)
                if edges is None:
                    b = block_of[x]
                    if end[b] - start[b] == 1:
                        continue
                    mark = marks.get(b)
                    if mark is None:
                        v_empty = ifaces[sorts[x]].update((), deref[lastW[e]])[1]
                        touched.append((b, v_empty))
                        mark = marks[b] = []
                    mark.append((x, lastW[e]))
                    toSub[x] = [e]
                else:
                    edges.append(e)

        # (b) split predecessor blocks
        split_log = [] if self.history is not None else None
        for b, v_empty in touched:
            mark = marks[b]
            iface = ifaces[sorts[mark[0][0]]]
            update = iface.update
            leaving = []
            for x, cell in mark:
                edges = toSub.pop(x, None)
                if not edges:
                    raise InvariantError(f"marked state {x} has no edges into the splitter")
                w_s, v_x, w_rest = update([label[e] for e in edges], deref[cell])
                deref[cell] = w_rest
                fresh = len(deref)
                deref.append(w_s)
                for e in edges:
                    lastW[e] = fresh
                if v_x != v_empty:
                    leaving.append((x, v_x))
            if not leaving:
                continue
            if len(leaving) == 1:
                if end[b] - start[b] > 1:
                    nb = P.new_block((leaving[0][0],))
                    Q.add_subblock(b, nb)
                    if split_log is not None:
                        split_log.append((b, [nb]))
                continue
            groups = group_by_value(leaving, iface.encode_h3)
            if len(leaving) == end[b] - start[b]:
                # every state leaves: keep the largest group in b
                keep = max(range(len(groups)), key=lambda i: len(groups[i]))
                del groups[keep]
            new_ids = []
            for g in groups:
                nb = P.new_block(g)
                Q.add_subblock(b, nb)
                new_ids.append(nb)
            if split_log is not None:
                split_log.append((b, new_ids))
        if toSub:
            raise InvariantError("toSub not empty after split")

        if self.history is not None:
            self.history.append((choice, split_log))
        if self.audit_enabled:
            self.audit()

    # -- reporting -----------------------------------------------------------

    def max_counter(self):
        return max(self.counter, default=0)

    def counter_bound(self):
        n = self.enc.n_states
        return int(math.floor(math.log2(n))) if n > 0 else 0

    def audit(self):
        from .axioms import audit_refiner

        audit_refiner(self)


def refine(enc, audit=False):
    """Coarsest behavioural-equivalence partition of all states of ``enc``."""
    return Refiner(enc, audit=audit).run()


@dataclass
class RunStats:
    states: int
    edges: int
    iterations: int
    max_counter: int
    bound: int
    seconds: float
    histogram: dict

    def as_text(self):
        hist = ",".join(f"{k}:{v}" for k, v in sorted(self.histogram.items()))
        return (
            f"states={self.states}\n"
            f"edges={self.edges}\n"
            f"iterations={self.iterations}\n"
            f"max_splitter_entries={self.max_counter}\n"
            f"log2_bound={self.bound}\n"
            f"splitter_entry_histogram={hist}\n"
            f"seconds={self.seconds:.6f}\n"
        )


def refine_with_stats(enc):
    # the refiner allocates many long-lived small lists; cyclic GC passes
    # over them cost more than they reclaim
    enabled = gc.isenabled()
    gc.disable()
    try:
        t0 = time.perf_counter()
        r = Refiner(enc)
        blocks = r.run()
        elapsed = time.perf_counter() - t0
    finally:
        if enabled:
            gc.enable()
    hist: dict[int, int] = {}
    for c in r.counter:
        hist[c] = hist.get(c, 0) + 1
    stats = RunStats(
        enc.n_states, enc.n_edges, r.iterations, r.max_counter(), r.counter_bound(), elapsed, hist
    )
    return blocks, stats
