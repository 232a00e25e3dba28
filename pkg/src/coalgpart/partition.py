"""Refinable partitions, compound blocks, and PMC-based grouping."""

from __future__ import annotations

from collections import deque

from .errors import InvariantError


class RefinablePartition:
    """Partition of ``range(n)`` with O(1) lookup and O(1) moves.

    Elements live in one permutation array; every block is a contiguous
    segment ``elems[start[b]:end[b]]`` and ``pos`` is the inverse
    permutation.  Moving an element swaps it to the tail of its segment and
    shrinks the segment, so iterating a block never touches elements that
    have left it.  Block ids are never reused.
    """

    def __init__(self, n, assignment=None):
        self.block_of = [0] * n
        self.start: list[int] = []
        self.end: list[int] = []
        if n == 0:
            self.elems: list[int] = []
            self.pos: list[int] = []
            return
        if assignment is None:
            self.elems = list(range(n))
            self.start.append(0)
            self.end.append(n)
        else:
            groups: dict = {}
            for x, key in enumerate(assignment):
                members = groups.get(key)
                if members is None:
                    members = groups[key] = []
                members.append(x)
            self._layout(groups.values())
            return
        self.pos = list(range(n))

    def _layout(self, groups):
        elems = []
        block_of = self.block_of
        for b, members in enumerate(groups):
            self.start.append(len(elems))
            elems.extend(members)
            self.end.append(len(elems))
            for x in members:
                block_of[x] = b
        self.elems = elems
        pos = [0] * len(elems)
        for i, x in enumerate(elems):
            pos[x] = i
        self.pos = pos

    @classmethod
    def from_blocks(cls, n, blocks):
        p = cls(0)
        p.block_of = [-1] * n
        p._layout([list(b) for b in blocks])
        return p

    def __len__(self):
        return sum(1 for b in range(len(self.start)) if self.end[b] > self.start[b])

    def size(self, b):
        return self.end[b] - self.start[b]

    def elements(self, b):
        return self.elems[self.start[b]:self.end[b]]

    def first(self, b):
        return self.elems[self.start[b]]

    def block_ids(self):
        return [b for b in range(len(self.start)) if self.end[b] > self.start[b]]

    def new_block(self, elements):
        """Move ``elements``, all from one block, into a fresh block."""
        elems = self.elems
        pos = self.pos
        block_of = self.block_of
        end = self.end
        nb = len(self.start)
        b = block_of[elements[0]]
        for x in elements:
            if block_of[x] != b:
                raise ValueError("new_block elements must come from one block")
            last = end[b] - 1
            y = elems[last]
            px = pos[x]
            elems[px] = y
            pos[y] = px
            elems[last] = x
            pos[x] = last
            end[b] = last
            block_of[x] = nb
        self.start.append(end[b])
        end.append(end[b] + len(elements))
        return nb

    def split_block(self, block, selected):
        """Move ``selected`` (a nonempty proper subset of ``block``) out."""
        selected = list(selected)
        if not selected:
            raise ValueError("cannot split off an empty selection")
        if len(set(selected)) >= self.size(block):
            raise ValueError("selection must be a proper subset of the block")
        for x in selected:
            if self.block_of[x] != block:
                raise ValueError(f"element {x} is not in block {block}")
        return self.new_block(selected)

    def as_sets(self):
        return [self.elements(b) for b in self.block_ids()]

    def audit(self):
        n = len(self.elems)
        for i, x in enumerate(self.elems):
            if self.pos[x] != i:
                raise InvariantError(f"pos[{x}] = {self.pos[x]}, expected {i}")
        covered = 0
        for b in range(len(self.start)):
            if self.end[b] < self.start[b]:
                raise InvariantError(f"block {b} has negative size")
            for i in range(self.start[b], self.end[b]):
                if self.block_of[self.elems[i]] != b:
                    raise InvariantError(f"element {self.elems[i]} in segment of {b} but mapped elsewhere")
            covered += self.size(b)
        if covered != n:
            raise InvariantError(f"blocks cover {covered} of {n} elements")


class CompoundStructure:
    """The coarser partition Q, as groups of P-blocks.

    Each Q-block keeps its P-blocks in a list with swap-removal.  A Q-block
    with at least two P-blocks is *compound* and sits in the FIFO worklist
    until it is no longer compound.
    """

    def __init__(self, partition: RefinablePartition):
        self.partition = partition
        self.members: list[list[int]] = []
        self.count: list[int] = []
        self.queued: list[bool] = []
        # P-block ids never exceed the universe size
        cap = max(len(partition.block_of), len(partition.start))
        self.qblock_of: list[int] = [-1] * cap
        self.slot: list[int] = [-1] * cap  # index of a P-block in its Q-block's list
        self.worklist: deque = deque()
        live = partition.block_ids()
        if live:
            self._new_qblock(live)

    def _new_qblock(self, pblocks):
        q = len(self.members)
        self.members.append(list(pblocks))
        self.count.append(sum(self.partition.size(b) for b in pblocks))
        self.queued.append(False)
        for i, b in enumerate(pblocks):
            self.qblock_of[b] = q
            self.slot[b] = i
        self._maybe_enqueue(q)
        return q

    def _maybe_enqueue(self, q):
        if not self.queued[q] and len(self.members[q]) > 1:
            self.queued[q] = True
            self.worklist.append(q)

    def add_subblock(self, parent_pblock, new_pblock):
        """Register ``new_pblock`` (split off ``parent_pblock``) in its Q-block."""
        q = self.qblock_of[parent_pblock]
        members = self.members[q]
        self.qblock_of[new_pblock] = q
        self.slot[new_pblock] = len(members)
        members.append(new_pblock)
        if not self.queued[q]:
            self.queued[q] = True
            self.worklist.append(q)

    def is_compound(self, q):
        return len(self.members[q]) > 1

    def pop_compound(self):
        """Front compound Q-block id, or None when P equals Q."""
        while self.worklist:
            q = self.worklist.popleft()
            self.queued[q] = False
            if len(self.members[q]) > 1:
                return q
        return None

    def carve(self, q, pblock):
        """Replace Q-block ``q`` by ``{pblock}`` and the rest; return new id."""
        members = self.members[q]
        slot = self.slot
        i = slot[pblock]
        last = members.pop()
        if last != pblock:
            members[i] = last
            slot[last] = i
        size = self.partition.end[pblock] - self.partition.start[pblock]
        self.count[q] -= size
        if len(members) > 1 and not self.queued[q]:
            self.queued[q] = True
            self.worklist.append(q)
        new = len(self.members)
        self.members.append([pblock])
        self.count.append(size)
        self.queued.append(False)
        self.qblock_of[pblock] = new
        slot[pblock] = 0
        return new

    def audit(self):
        p = self.partition
        for b in p.block_ids():
            q = self.qblock_of[b]
            if self.members[q][self.slot[b]] != b:
                raise InvariantError(f"P-block {b} not at its slot in Q-block {q}")
        for q, members in enumerate(self.members):
            total = sum(p.size(b) for b in members)
            if total != self.count[q]:
                raise InvariantError(f"Q-block {q} count {self.count[q]} != member sum {total}")
            for b in members:
                if self.qblock_of[b] != q:
                    raise InvariantError(f"P-block {b} listed in Q-block {q} but mapped to {self.qblock_of[b]}")
            if len(members) > 1 and not self.queued[q]:
                raise InvariantError(f"compound Q-block {q} missing from worklist")


def pmc(values):
    """Possible majority candidate by a majority-vote pass.

    Returns a value occurring at least half the time if there is one,
    otherwise whatever survives the vote; ``None`` for an empty input.
    """
    if not values:
        return None
    candidate = None
    count = 0
    for v in values:
        if count == 0:
            candidate, count = v, 1
        elif v == candidate:
            count += 1
        else:
            count -= 1
    n = len(values)
    if 2 * values.count(candidate) >= n:
        return candidate
    # a value with exactly half the occurrences survives the vote unless it
    # is paired off by the final element
    last = values[-1]
    if last != candidate and 2 * values.count(last) >= n:
        return last
    return candidate


def group_by_value(pairs, encode=None):
    """Group ``(element, value)`` pairs by value.

    Elements carrying the PMC value form the first group without being
    sorted; the rest are sorted by ``encode(value)`` (bytes) and grouped.
    """
    if not pairs:
        return []
    values = [v for _, v in pairs]
    p = pmc(values)
    first = [x for x, v in pairs if v == p]
    rest = [(x, v) for x, v in pairs if v != p]
    groups = [first]
    if rest:
        if encode is not None:
            rest.sort(key=lambda xv: encode(xv[1]))
        else:
            rest.sort(key=lambda xv: xv[1])
        current = [rest[0][0]]
        prev = rest[0][1]
        for x, v in rest[1:]:
            if v == prev:
                current.append(x)
            else:
                groups.append(current)
                current = [x]
                prev = v
        groups.append(current)
    return groups
