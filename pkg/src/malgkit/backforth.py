"""Back-and-forth between countable structures with an extension property.

The engine alternates two moves.  *Forth*: the next enumerated element of the
left structure, if new, is given an image realizing its relations to the
current domain.  *Back*: the same for the next element of the right
structure.  Every new pair is checked against all existing pairs, so the
partial map is an isomorphism of induced substructures at every stage.

Two structures are provided:

* the Rado graph in its BIT presentation: for ``i < j``, ``i ~ j`` iff bit i
  of j is set;
* the dense linear order of the rationals.

BIT witnesses are built from sums of powers of two over earlier vertices,
so values grow as towers of exponentials.  Vertices at or above ``2**64``
are therefore stored as :class:`BigVertex`, the set of their bit positions.
"""

from __future__ import annotations

import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, total_ordering
from typing import Hashable, Iterable, Sequence, Union

SMALL_BITS = 64


class BackForthError(RuntimeError):
    """A structure adapter could not realize the requested relations."""

    def __init__(self, message: str, constraints=None):
        super().__init__(message)
        self.constraints = constraints


# ---------------------------------------------------------------------------
# BIT vertices


@total_ordering
class BigVertex:
    """Natural number ``Σ_{b ∈ bits} 2^b`` too large to store directly."""

    def __init__(self, bits: Iterable["Vertex"]):
        self.bits = frozenset(bits)
        self._hash = hash(("big", self.bits))

    @cached_property
    def desc(self) -> tuple:
        return tuple(sorted(self.bits, key=_order_key, reverse=True))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, BigVertex) and self.bits == other.bits

    def __lt__(self, other):
        if isinstance(other, int):
            return False
        if not isinstance(other, BigVertex):
            return NotImplemented
        return vertex_lt(self, other)

    def __gt__(self, other):
        if isinstance(other, int):
            return True
        if not isinstance(other, BigVertex):
            return NotImplemented
        return vertex_lt(other, self)

    def __repr__(self):
        return f"BigVertex({sorted(self.bits, key=_order_key)!r})"

    def to_json(self):
        return {"bits": [vertex_to_json(b) for b in sorted(self.bits, key=_order_key)]}


Vertex = Union[int, BigVertex]


class _Key:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return vertex_lt(self.v, other.v)

    def __eq__(self, other):
        return self.v == other.v


def _order_key(v: Vertex):
    return _Key(v)


def vertex_lt(x: Vertex, y: Vertex) -> bool:
    if isinstance(x, int) and isinstance(y, int):
        return x < y
    if isinstance(x, int):
        return True
    if isinstance(y, int):
        return False
    if x == y:
        return False
    # compare as binary numbers: highest differing bit decides
    for bx, by in zip(x.desc, y.desc):
        if bx != by:
            return vertex_lt(bx, by)
    return len(x.desc) < len(y.desc)


def vertex_max(vs: Iterable[Vertex]) -> Vertex:
    best = None
    for v in vs:
        if best is None or vertex_lt(best, v):
            best = v
    return best


def from_bits(bits: Iterable[Vertex]) -> Vertex:
    bits = set(bits)
    if all(isinstance(b, int) and b < SMALL_BITS for b in bits):
        return sum(1 << b for b in bits)
    return BigVertex(bits)


def has_bit(v: Vertex, position: Vertex) -> bool:
    if isinstance(v, int):
        return isinstance(position, int) and (v >> position) & 1 == 1
    return position in v.bits


def successor(v: Vertex) -> Vertex:
    if isinstance(v, int):
        return from_bits(_int_bits(v + 1))
    bits = set(v.bits)
    j = 0
    while j in bits:
        bits.discard(j)
        j += 1
    bits.add(j)
    return from_bits(bits)


def _int_bits(n: int) -> list[int]:
    return [i for i in range(n.bit_length()) if (n >> i) & 1]


def vertex_to_json(v: Vertex):
    return v if isinstance(v, int) else v.to_json()


def rado_adjacent(i: Vertex, j: Vertex) -> bool:
    """BIT adjacency: with m < M, m ~ M iff bit m of M is set."""
    if i == j:
        raise ValueError("no loops in the Rado graph")
    lo, hi = (i, j) if vertex_lt(i, j) else (j, i)
    return has_bit(hi, lo)


def rado_witness(S1: Iterable[Vertex], S2: Iterable[Vertex]) -> Vertex:
    """Fresh vertex adjacent to all of S1 and none of S2.

    ``s = Σ_{i ∈ S1} 2^i``, plus ``2^m`` for the least ``m > max(S1 ∪ S2)``
    when s does not already exceed every constrained vertex.
    """
    S1, S2 = set(S1), set(S2)
    if S1 & S2:
        raise ValueError(f"S1 and S2 overlap: {S1 & S2}")
    s = from_bits(S1)
    used = S1 | S2
    if used:
        top = vertex_max(used)
        if not vertex_lt(top, s):
            s = from_bits(S1 | {successor(top)})
    return s


# ---------------------------------------------------------------------------
# rationals


def dlo_witness(lower: Iterable[Fraction], upper: Iterable[Fraction]) -> Fraction:
    """Rational strictly above every lower bound and below every upper bound."""
    lower, upper = [Fraction(x) for x in lower], [Fraction(x) for x in upper]
    lo = max(lower) if lower else None
    hi = min(upper) if upper else None
    if lo is not None and hi is not None:
        if not lo < hi:
            raise ValueError(f"incompatible cut: {lo} >= {hi}")
        return (lo + hi) / 2
    if lo is not None:
        return lo + 1
    if hi is not None:
        return hi - 1
    return Fraction(0)


# ---------------------------------------------------------------------------
# adapters


class StructureAdapter(ABC):
    """A countable structure with a binary relation and a witness oracle."""

    @abstractmethod
    def element(self, i: int) -> Hashable:
        """The i-th element of the enumeration."""

    @abstractmethod
    def relation(self, x, y) -> Hashable:
        """Atomic facts about the ordered pair (x, y), x != y."""

    @abstractmethod
    def witness(self, profile: Sequence[tuple[Hashable, Hashable]]) -> Hashable:
        """Element z outside the profile with relation(z, e) == r for each (e, r)."""


class RadoAdapter(StructureAdapter):
    """BIT graph, optionally relabelled by a permutation of ``range(block)``."""

    def __init__(self, perm: Sequence[int] | None = None):
        self.perm = list(perm) if perm is not None else None
        if self.perm is not None:
            self.inv = [0] * len(self.perm)
            for i, p in enumerate(self.perm):
                self.inv[p] = i

    @classmethod
    def permuted(cls, seed: int, block: int = 256) -> "RadoAdapter":
        perm = list(range(block))
        random.Random(seed).shuffle(perm)
        return cls(perm)

    def _to_base(self, v: Vertex) -> Vertex:
        if self.perm is not None and isinstance(v, int) and v < len(self.perm):
            return self.perm[v]
        return v

    def _from_base(self, v: Vertex) -> Vertex:
        if self.perm is not None and isinstance(v, int) and v < len(self.perm):
            return self.inv[v]
        return v

    def element(self, i: int) -> Vertex:
        return i

    def relation(self, x, y) -> bool:
        return rado_adjacent(self._to_base(x), self._to_base(y))

    def witness(self, profile):
        S1 = [self._to_base(e) for e, r in profile if r]
        S2 = [self._to_base(e) for e, r in profile if not r]
        return self._from_base(rado_witness(S1, S2))


class DloAdapter(StructureAdapter):
    """The rationals, enumerated by a seeded sequence of distinct fractions."""

    def __init__(self, seed: int = 0, max_den: int = 64, span: int = 50):
        self.rng = random.Random(seed)
        self.max_den = max_den
        self.span = span
        self._seq: list[Fraction] = []
        self._seen: set[Fraction] = set()

    def element(self, i: int) -> Fraction:
        while len(self._seq) <= i:
            q = Fraction(self.rng.randint(-self.span * self.max_den, self.span * self.max_den),
                         self.rng.randint(1, self.max_den))
            if q not in self._seen:
                self._seen.add(q)
                self._seq.append(q)
        return self._seq[i]

    def relation(self, x, y) -> int:
        return -1 if x < y else 1

    def witness(self, profile):
        lower = [e for e, r in profile if r == 1]
        upper = [e for e, r in profile if r == -1]
        return dlo_witness(lower, upper)


# ---------------------------------------------------------------------------
# engine


@dataclass
class PartialIso:
    pairs: list[tuple[Hashable, Hashable]] = field(default_factory=list)

    def __post_init__(self):
        self.fwd = {l: r for l, r in self.pairs}
        self.bwd = {r: l for l, r in self.pairs}

    def add(self, left, right) -> None:
        if left in self.fwd or right in self.bwd:
            raise BackForthError(f"pair ({left!r}, {right!r}) reuses an element")
        self.pairs.append((left, right))
        self.fwd[left] = right
        self.bwd[right] = left

    def domain(self) -> list:
        return [l for l, _ in self.pairs]

    def image(self) -> list:
        return [r for _, r in self.pairs]

    def to_json(self) -> list:
        return [[_jsonable(l), _jsonable(r)] for l, r in self.pairs]


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, BigVertex):
        return x.to_json()
    return x


def verify_partial_iso(left: StructureAdapter, right: StructureAdapter, iso: PartialIso) -> bool:
    """Exhaustive check that relations agree on every ordered pair of pairs."""
    if len(iso.fwd) != len(iso.pairs) or len(iso.bwd) != len(iso.pairs):
        return False
    ps = iso.pairs
    for a in range(len(ps)):
        for b in range(len(ps)):
            if a != b and left.relation(ps[a][0], ps[b][0]) != right.relation(ps[a][1], ps[b][1]):
                return False
    return True


class BackAndForth:
    """Single-use engine; call :meth:`run` once."""

    def __init__(self, left: StructureAdapter, right: StructureAdapter):
        self.left = left
        self.right = right
        self.iso = PartialIso()
        self.stage_sizes: list[int] = []

    def _extend(self, src: StructureAdapter, dst: StructureAdapter, x, fwd: dict, forth: bool):
        profile_src = [(e, src.relation(x, e)) for e in fwd]
        profile = [(fwd[e], r) for e, r in profile_src]
        y = dst.witness(profile)
        if y in fwd.values() or any(dst.relation(y, e) != r for e, r in profile):
            raise BackForthError(f"witness {y!r} violates its constraints", profile)
        if forth:
            self._add_checked(x, y)
        else:
            self._add_checked(y, x)

    def _add_checked(self, l, r) -> None:
        for l2, r2 in self.iso.pairs:
            if (self.left.relation(l, l2) != self.right.relation(r, r2)
                    or self.left.relation(l2, l) != self.right.relation(r2, r)):
                raise BackForthError(f"pair ({l!r}, {r!r}) breaks the isomorphism", (l2, r2))
        self.iso.add(l, r)

    def run(self, k: int) -> PartialIso:
        if self.iso.pairs:
            raise RuntimeError("engine instances are single-use")
        if k <= 0:
            return self.iso
        self._add_checked(self.left.element(0), self.right.element(0))
        self.stage_sizes.append(len(self.iso.pairs))
        for n in range(1, k):
            x = self.left.element(n)
            if x not in self.iso.fwd:
                self._extend(self.left, self.right, x, self.iso.fwd, forth=True)
            y = self.right.element(n)
            if y not in self.iso.bwd:
                self._extend(self.right, self.left, y, self.iso.bwd, forth=False)
            self.stage_sizes.append(len(self.iso.pairs))
        return self.iso


def run_back_and_forth(left: StructureAdapter, right: StructureAdapter, k: int) -> PartialIso:
    return BackAndForth(left, right).run(k)
