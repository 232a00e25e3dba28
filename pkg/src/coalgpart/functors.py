"""Refinement interfaces for the base functors.

Each interface bundles the label kind, the weight kind and the two
operations ``init`` and ``update`` the refiner needs to split blocks while
looking only at edges into the current splitter.  Interfaces are stateless
value transformers; the polynomial one carries its (fixed) signature.

Value conventions
-----------------
* powerset: labels are ``1``; type is ``bool`` (successor set nonempty);
  weights are ``(outside, inside)`` edge counts; three-valued results are
  ``(bool, bool, bool)``.
* bag / group: labels are positive ints / nonzero ``Fraction``; type is the
  total weight; weights are ``(outside, inside)`` sums; three-valued results
  are ``(outside C, in C minus S, in S)`` sums.
* distribution: as group, type is ``None`` and ``init`` is always ``(0, 1)``.
* polynomial: labels are 1-based argument positions; type is the interned
  operation symbol; weights and three-valued results are
  ``(symbol, (b_1, ..., b_n))``.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InterfaceError, InvariantError


def encode_value(v) -> bytes:
    """Canonical, injective byte encoding of nested interface values."""
    out = bytearray()
    _encode_into(v, out)
    return bytes(out)


def _encode_into(v, out: bytearray) -> None:
    # bool before int: bool is an int subclass
    if v is None:
        out += b"N"
    elif v is True:
        out += b"T"
    elif v is False:
        out += b"F"
    elif isinstance(v, int):
        out += b"i%d;" % v
    elif isinstance(v, Fraction):
        out += b"q%d/%d;" % (v.numerator, v.denominator)
    elif isinstance(v, str):
        raw = v.encode()
        out += b"s%d:" % len(raw) + raw
    elif isinstance(v, tuple):
        out += b"(%d:" % len(v)
        for item in v:
            _encode_into(item, out)
        out += b")"
    else:
        raise TypeError(f"cannot encode {type(v).__name__}")


class RefinementInterface:
    """Base class; subclasses implement ``init`` and ``update``."""

    name = "abstract"
    #: Python type every label must have (checked by ``check_labels``).
    label_type: type | tuple = object

    def init(self, type_value, labels):
        raise NotImplementedError

    def update(self, labels, weight):
        raise NotImplementedError

    def encode_h3(self, value) -> bytes:
        return encode_value(value)

    def check_labels(self, labels) -> None:
        kinds = self.label_type if isinstance(self.label_type, tuple) else (self.label_type,)
        for a in labels:
            if type(a) not in kinds:
                raise InterfaceError(
                    f"{self.name} interface got label {a!r} of kind {type(a).__name__}"
                )

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return type(self) is type(other)

    def __hash__(self):
        return hash(type(self))


class PowersetInterface(RefinementInterface):
    """Finite powerset; weights count edges outside and inside a block."""

    name = "powerset"
    label_type = int

    def init(self, type_value, labels):
        self.check_labels(labels)
        return (0, len(labels))

    def update(self, labels, weight):
        r, c = weight
        n = len(labels)
        rest = c - n
        return (r + rest, n), (r > 0, rest > 0, n > 0), (r + n, rest)

    def encode_h3(self, value) -> bytes:
        outside, middle, inside = value
        return bytes((outside << 2 | middle << 1 | inside,))


class _MonoidInterface(RefinementInterface):
    """Shared arithmetic for the monoid-valued interfaces.

    ``up`` yields the triple (outside C, C minus S, S); ``val`` spreads it
    into the weights for S and for C minus S.
    """

    zero = 0

    def init(self, type_value, labels):
        self.check_labels(labels)
        return (self.zero, sum(labels, self.zero))

    def _junk(self, triple):
        raise NotImplementedError

    def update(self, labels, weight):
        r, c = weight
        s = sum(labels, self.zero)
        triple = (r, c - s, s)
        if triple[1] < 0:
            triple = self._junk(triple)
        r, m, s = triple
        return (r + m, s), triple, (r + s, m)


class BagInterface(_MonoidInterface):
    """Finite multisets, i.e. the monoid-valued functor for (N, +, 0)."""

    name = "bag"
    label_type = int

    def _junk(self, triple):
        # only reachable with corrupted weights
        return (0, 0, 0)


class GroupInterface(_MonoidInterface):
    """Rational-weighted systems (the functor for the group (Q, +, 0))."""

    name = "group"
    label_type = (int, Fraction)
    zero = Fraction(0)

    def update(self, labels, weight):
        r, c = weight
        s = sum(labels, self.zero)
        m = c - s
        return (r + m, s), (r, m, s), (r + s, m)


class DistributionInterface(_MonoidInterface):
    """Probability distributions; every state has total mass one."""

    name = "distribution"
    label_type = (int, Fraction)
    zero = Fraction(0)

    def init(self, type_value, labels):
        self.check_labels(labels)
        return (self.zero, Fraction(1))

    def _junk(self, triple):
        raise InvariantError(f"distribution weights left the simplex: {triple}")


class PolynomialInterface(RefinementInterface):
    """Polynomial functor for a finite signature of bounded arity.

    ``arities[k]`` is the arity of operation symbol ``k``; labels are the
    1-based argument positions.
    """

    name = "polynomial"
    label_type = int

    def __init__(self, arities):
        self.arities = tuple(arities)

    def __repr__(self):
        return f"PolynomialInterface({list(self.arities)})"

    def __eq__(self, other):
        return isinstance(other, PolynomialInterface) and self.arities == other.arities

    def __hash__(self):
        return hash(self.arities)

    def init(self, type_value, labels):
        self.check_labels(labels)
        arity = self.arities[type_value]
        if any(not 1 <= i <= arity for i in labels):
            raise InterfaceError(f"argument position out of range 1..{arity}: {labels}")
        return (type_value, (1,) * arity)

    def update(self, labels, weight):
        sym, bits = weight
        up = list(bits)
        for i in labels:
            up[i - 1] += 1
        return (
            (sym, tuple(int(v == 2) for v in up)),
            (sym, tuple(up)),
            (sym, tuple(int(v == 1) for v in up)),
        )

    def encode_h3(self, value) -> bytes:
        sym, args = value
        return b"%d:" % sym + bytes(args)


POWERSET = PowersetInterface()
BAG = BagInterface()
GROUP = GroupInterface()
DISTRIBUTION = DistributionInterface()

#: Base functor letter in functor expressions -> interface.
REGISTRY = {
    "P": POWERSET,
    "B": BAG,
    "R": GROUP,
    "D": DISTRIBUTION,
}
