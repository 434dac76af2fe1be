"""Exact measure algebra of ([0,1), Lebesgue) on rational interval unions.

Elements are :class:`MSet` values: canonical finite unions of half-open
intervals ``[lo, hi)`` with rational endpoints.  Automorphisms are
:class:`Iet` values (interval exchange transformations): finitely many
rational translations whose sources and targets both tile ``[0, 1)``.

Everything is computed with :class:`fractions.Fraction`; no floats.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class MalformedInput(ValueError):
    """Raised for endpoints outside [0,1], reversed intervals or bad literals."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise MalformedInput(f"floating point endpoint {x!r}; use a rational")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise MalformedInput(f"not a rational: {x!r}") from exc


def fmt(q: Fraction) -> str:
    """Rational as ``num/den`` (integers print without a denominator)."""
    return str(q)


@dataclass(frozen=True)
class MSet:
    """Canonical union of disjoint, non-adjacent, sorted half-open intervals."""

    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        prev_hi = None
        for lo, hi in self.intervals:
            if not (isinstance(lo, Fraction) and isinstance(hi, Fraction)):
                raise MalformedInput("endpoints must be Fractions; use normalize()")
            if not (ZERO <= lo < hi <= ONE):
                raise MalformedInput(f"bad interval [{lo},{hi})")
            if prev_hi is not None and lo <= prev_hi:
                raise MalformedInput("intervals not canonical; use normalize()")
            prev_hi = hi

    # constructors -------------------------------------------------------

    @classmethod
    def empty(cls) -> "MSet":
        return cls(())

    @classmethod
    def full(cls) -> "MSet":
        return cls(((ZERO, ONE),))

    @classmethod
    def interval(cls, lo, hi) -> "MSet":
        return normalize([(lo, hi)])

    @classmethod
    def parse(cls, text: str) -> "MSet":
        return parse_mset(text)

    # queries ------------------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def endpoints(self) -> list[Fraction]:
        return [x for iv in self.intervals for x in iv]

    def contains_point(self, x) -> bool:
        x = as_fraction(x)
        i = bisect.bisect_right(self.intervals, (x, ONE + 1)) - 1
        return i >= 0 and self.intervals[i][0] <= x < self.intervals[i][1]

    def measure(self) -> Fraction:
        return measure(self)

    # operators ----------------------------------------------------------

    def __or__(self, other: "MSet") -> "MSet":
        return union(self, other)

    def __and__(self, other: "MSet") -> "MSet":
        return intersection(self, other)

    def __xor__(self, other: "MSet") -> "MSet":
        return symmetric_difference(self, other)

    def __sub__(self, other: "MSet") -> "MSet":
        return difference(self, other)

    def __invert__(self) -> "MSet":
        return complement(self)

    def translate(self, shift) -> "MSet":
        shift = as_fraction(shift)
        return normalize([(lo + shift, hi + shift) for lo, hi in self.intervals])

    def __str__(self) -> str:
        return format_mset(self)

    def to_json(self) -> list[list[str]]:
        return [[fmt(lo), fmt(hi)] for lo, hi in self.intervals]

    @classmethod
    def from_json(cls, data) -> "MSet":
        return normalize([(as_fraction(lo), as_fraction(hi)) for lo, hi in data])


def normalize(raw: Iterable[Sequence]) -> MSet:
    """Sort, drop empty intervals and merge overlapping or adjacent ones."""
    items = []
    for pair in raw:
        if len(pair) != 2:
            raise MalformedInput(f"interval needs two endpoints: {pair!r}")
        lo, hi = as_fraction(pair[0]), as_fraction(pair[1])
        if lo < 0 or hi > 1 or lo > 1 or hi < 0:
            raise MalformedInput(f"endpoint outside [0,1]: [{lo},{hi})")
        if lo > hi:
            raise MalformedInput(f"reversed interval [{lo},{hi})")
        if lo < hi:
            items.append((lo, hi))
    items.sort()
    merged: list[list[Fraction]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            if hi > merged[-1][1]:
                merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return MSet(tuple((lo, hi) for lo, hi in merged))


# ---------------------------------------------------------------------------
# Boolean operations


def _combine(a: MSet, b: MSet, keep: Callable[[bool, bool], bool]) -> MSet:
    cuts = sorted({ZERO, ONE, *a.endpoints(), *b.endpoints()})
    ia = ib = 0
    out: list[tuple[Fraction, Fraction]] = []
    for lo, hi in zip(cuts, cuts[1:]):
        while ia < len(a.intervals) and a.intervals[ia][1] <= lo:
            ia += 1
        while ib < len(b.intervals) and b.intervals[ib][1] <= lo:
            ib += 1
        in_a = ia < len(a.intervals) and a.intervals[ia][0] <= lo
        in_b = ib < len(b.intervals) and b.intervals[ib][0] <= lo
        if keep(in_a, in_b):
            if out and out[-1][1] == lo:
                out[-1] = (out[-1][0], hi)
            else:
                out.append((lo, hi))
    return MSet(tuple(out))


def union(a: MSet, b: MSet) -> MSet:
    return _combine(a, b, lambda x, y: x or y)


def intersection(a: MSet, b: MSet) -> MSet:
    return _combine(a, b, lambda x, y: x and y)


def symmetric_difference(a: MSet, b: MSet) -> MSet:
    return _combine(a, b, lambda x, y: x != y)


def difference(a: MSet, b: MSet) -> MSet:
    return _combine(a, b, lambda x, y: x and not y)


def complement(a: MSet) -> MSet:
    out = []
    cur = ZERO
    for lo, hi in a.intervals:
        if lo > cur:
            out.append((cur, lo))
        cur = hi
    if cur < ONE:
        out.append((cur, ONE))
    return MSet(tuple(out))


def measure(a: MSet) -> Fraction:
    return sum((hi - lo for lo, hi in a.intervals), ZERO)


def dist(a: MSet, b: MSet) -> Fraction:
    """d(A, B) = measure of the symmetric difference."""
    return measure(symmetric_difference(a, b))


# ---------------------------------------------------------------------------
# Interval exchange transformations


class IetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Iet:
    """Piecewise translation ``[lo, hi) -> [lo + shift, hi + shift)``.

    Pieces are stored sorted by source; they need not be maximal.  Equality
    compares the maps, i.e. the canonical forms obtained by merging adjacent
    pieces with the same shift.
    """

    pieces: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self):
        pieces = tuple(sorted((as_fraction(lo), as_fraction(hi), as_fraction(s))
                              for lo, hi, s in self.pieces))
        object.__setattr__(self, "pieces", pieces)
        _check_tiling([(lo, hi) for lo, hi, _ in pieces], "source")
        _check_tiling(sorted((lo + s, hi + s) for lo, hi, s in pieces), "target")

    @classmethod
    def identity(cls) -> "Iet":
        return cls(((ZERO, ONE, ZERO),))

    @classmethod
    def rotation(cls, r) -> "Iet":
        r = as_fraction(r) % 1
        if r == 0:
            return cls.identity()
        return cls(((ZERO, ONE - r, r), (ONE - r, ONE, r - 1)))

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> "Iet":
        """Exchange of the ``len(perm)`` equal atoms: atom i goes to atom perm[i]."""
        m = len(perm)
        if sorted(perm) != list(range(m)):
            raise IetError("not a permutation")
        return cls(tuple((Fraction(i, m), Fraction(i + 1, m), Fraction(perm[i] - i, m))
                         for i in range(m))).canonical()

    def canonical(self) -> "Iet":
        merged: list[list[Fraction]] = []
        for lo, hi, s in self.pieces:
            if merged and merged[-1][1] == lo and merged[-1][2] == s:
                merged[-1][1] = hi
            else:
                merged.append([lo, hi, s])
        return Iet(tuple(tuple(p) for p in merged))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Iet):
            return NotImplemented
        return self.canonical().pieces == other.canonical().pieces

    def __hash__(self) -> int:
        return hash(self.canonical().pieces)

    def is_identity(self) -> bool:
        return all(s == 0 for _, _, s in self.pieces)

    def __call__(self, a: MSet) -> MSet:
        return apply(self, a)

    def __matmul__(self, other: "Iet") -> "Iet":
        return compose(self, other)

    def point(self, x) -> Fraction:
        x = as_fraction(x)
        i = bisect.bisect_right(self.pieces, (x, ONE + 1, ONE + 1)) - 1
        lo, hi, s = self.pieces[i]
        return x + s

    def __str__(self) -> str:
        return format_iet(self)

    def to_json(self) -> list[list[str]]:
        return [[fmt(lo), fmt(hi), fmt(s)] for lo, hi, s in self.canonical().pieces]

    @classmethod
    def from_json(cls, data) -> "Iet":
        return cls(tuple((as_fraction(lo), as_fraction(hi), as_fraction(s)) for lo, hi, s in data))


def _check_tiling(ivs: list[tuple[Fraction, Fraction]], what: str) -> None:
    cur = ZERO
    for lo, hi in ivs:
        if lo != cur or not lo < hi:
            raise IetError(f"{what} intervals do not tile [0,1) at {cur}")
        cur = hi
    if cur != ONE:
        raise IetError(f"{what} intervals do not cover [0,1)")


def apply(t: Iet, a: MSet) -> MSet:
    """Image of A under T."""
    out = []
    ia = 0
    ivs = a.intervals
    for lo, hi, s in t.pieces:
        while ia < len(ivs) and ivs[ia][1] <= lo:
            ia += 1
        j = ia
        while j < len(ivs) and ivs[j][0] < hi:
            x, y = max(ivs[j][0], lo), min(ivs[j][1], hi)
            if x < y:
                out.append((x + s, y + s))
            j += 1
    return normalize(out)


def compose(t: Iet, u: Iet) -> Iet:
    """``t ∘ u``: apply u first, then t."""
    starts = [lo for lo, _, _ in t.pieces]
    out = []
    for lo, hi, s in u.pieces:
        tlo, thi = lo + s, hi + s
        k = bisect.bisect_right(starts, tlo) - 1
        while k < len(t.pieces) and t.pieces[k][0] < thi:
            plo, phi, ps = t.pieces[k]
            x, y = max(tlo, plo), min(thi, phi)
            if x < y:
                out.append((x - s, y - s, s + ps))
            k += 1
    return Iet(tuple(out))


def invert(t: Iet) -> Iet:
    return Iet(tuple((lo + s, hi + s, -s) for lo, hi, s in t.pieces))


# ---------------------------------------------------------------------------
# Literal syntax

_RAT = r"-?\d+(?:/\d+)?"
_IV_RE = re.compile(r"\[\s*(" + _RAT + r")\s*,\s*(" + _RAT + r")\s*\)")


def parse_mset(text: str) -> MSet:
    """Parse ``[0,1/3)u[1/2,1)``; ``{}``, ``∅`` and the empty string denote ∅."""
    s = text.strip()
    if s in ("", "{}", "∅", "empty"):
        return MSet.empty()
    parts = re.split(r"\s*[uU∪]\s*", s)
    raw = []
    for part in parts:
        m = _IV_RE.fullmatch(part.strip())
        if not m:
            raise MalformedInput(f"bad interval literal {part!r} in {text!r}")
        raw.append((Fraction(m.group(1)), Fraction(m.group(2))))
    return normalize(raw)


def format_mset(a: MSet) -> str:
    if not a.intervals:
        return "{}"
    return "u".join(f"[{fmt(lo)},{fmt(hi)})" for lo, hi in a.intervals)


_PIECE_RE = re.compile(r"\[\s*(" + _RAT + r")\s*,\s*(" + _RAT + r")\s*\)\s*->\s*(" + _RAT + r")")


def parse_iet(text: str) -> Iet:
    """Parse ``[0,3/4)->1/4; [3/4,1)->-3/4``."""
    pieces = []
    for part in re.split(r"\s*;\s*", text.strip()):
        if not part:
            continue
        m = _PIECE_RE.fullmatch(part)
        if not m:
            raise MalformedInput(f"bad Iet piece {part!r}")
        pieces.append(tuple(Fraction(g) for g in m.groups()))
    return Iet(tuple(pieces))


def format_iet(t: Iet) -> str:
    return "; ".join(f"[{fmt(lo)},{fmt(hi)})->{fmt(s)}" for lo, hi, s in t.pieces)


def parse_tuple(text: str) -> list[MSet]:
    """Tuple literal: MSet literals separated by ``;``."""
    return [parse_mset(part) for part in text.split(";")]


def dyadic_atom(depth: int, k: int) -> MSet:
    return MSet(((Fraction(k, 2 ** depth), Fraction(k + 1, 2 ** depth)),))
