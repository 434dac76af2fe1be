"""The Bernoulli shift of the free group on cylinder sets of ``{0,1}^(ℕ × F₂)``.

A coordinate is a pair ``(n, g)``.  A cylinder set is a finite support of
coordinates with a truth table over the assignments of the support; the
product measure of fair coin flips gives it measure ``|truth| / 2^|support|``.

The group acts by ``(γ·x)(n, g) = x(n, γ⁻¹g)``, so ``y ∈ γA`` is decided by
the values ``y(n, γg)`` for ``(n, g)`` in the support of A: the shift
relabels ``(n, g)`` as ``(n, γg)`` and keeps the truth table.

Truth tables are bitmasks: bit ``a`` is set when the assignment whose j-th
bit is the value at ``support[j]`` lies in the set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest
from typing import NamedTuple, Sequence

import numpy as np

from .freegroup import ReducedWord, word
from .malg import Iet, MSet, normalize
from .qftypes import TypeVector

SUPPORT_CAP = 20
IET_DEPTH_CAP = 16


class BernoulliError(ValueError):
    pass


class WindowTooLarge(MemoryError):
    pass


@dataclass(frozen=True, order=False)
class Coord:
    n: int
    g: ReducedWord

    def __post_init__(self):
        if self.n < 0:
            raise BernoulliError("level must be a natural number")
        if isinstance(self.g, str):
            object.__setattr__(self, "g", word(self.g))

    @property
    def key(self) -> tuple:
        return (self.n, len(self.g), self.g.letters)

    def __lt__(self, other: "Coord") -> bool:
        return self.key < other.key

    @classmethod
    def parse(cls, text: str) -> "Coord":
        """``"0:ab"`` or ``"(0,ab)"``."""
        m = re.fullmatch(r"\s*\(?\s*(\d+)\s*[:,]\s*([^)\s]*)\s*\)?\s*", text)
        if not m:
            raise BernoulliError(f"bad coordinate {text!r}")
        return cls(int(m.group(1)), word(m.group(2)))

    def __str__(self) -> str:
        return f"{self.n}:{self.g}"

    def shifted(self, gamma: ReducedWord) -> "Coord":
        return Coord(self.n, gamma * self.g)


def parse_window(text: str) -> list[Coord]:
    """Comma- or semicolon-separated coordinates, e.g. ``"0:e;0:a"``; empty text is the empty window."""
    text = text.strip()
    if not text:
        return []
    parts = re.findall(r"\(\s*\d+\s*,[^)]*\)|[^;,\s]+:[^;,\s]*|[^;,\s]+", text)
    return sorted({Coord.parse(p) for p in parts})


# ---------------------------------------------------------------------------
# truth tables


def _to_array(truth: int, k: int) -> np.ndarray:
    size = 1 << k
    raw = truth.to_bytes((size + 7) // 8, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:size].astype(bool)


def _from_array(table: np.ndarray) -> int:
    return int.from_bytes(np.packbits(table.astype(np.uint8), bitorder="little").tobytes(), "little")


def _axis(j: int, k: int) -> int:
    # C-order reshape puts the most significant assignment bit first
    return k - 1 - j


@dataclass(frozen=True)
class CylinderSet:
    support: tuple[Coord, ...]
    truth: int

    def __post_init__(self):
        k = len(self.support)
        if k > SUPPORT_CAP:
            raise WindowTooLarge(f"support of size {k} over cap {SUPPORT_CAP}")
        if list(self.support) != sorted(set(self.support)):
            raise BernoulliError("support must be sorted without repeats")
        if not 0 <= self.truth < 1 << (1 << k):
            raise BernoulliError("truth table out of range")

    # construction

    @classmethod
    def from_table(cls, support: Sequence[Coord], table: np.ndarray) -> "CylinderSet":
        """Canonical set from a boolean table indexed by assignments over ``support``."""
        support = list(support)
        k = len(support)
        if len(set(support)) != k:
            raise BernoulliError("repeated coordinate")
        if k > SUPPORT_CAP:
            raise WindowTooLarge(f"support of size {k} over cap {SUPPORT_CAP}")
        t = np.asarray(table, dtype=bool).reshape((2,) * k) if k else np.asarray(table, bool).reshape(())
        # drop coordinates the table ignores
        keep = []
        for j in range(k):
            ax = _axis(j, k)
            if np.array_equal(np.take(t, 0, axis=ax), np.take(t, 1, axis=ax)):
                continue
            keep.append(j)
        drop_axes = [_axis(j, k) for j in range(k) if j not in keep]
        for ax in sorted(drop_axes, reverse=True):
            t = np.take(t, 0, axis=ax)
        # axes of t now follow kept coordinates from most to least significant
        kept = [support[j] for j in keep]
        order = sorted(range(len(kept)), key=lambda i: kept[i].key)
        m = len(kept)
        # new coordinate i (sorted) sits at bit i, i.e. axis m-1-i
        src_axes = [m - 1 - order[m - 1 - ax] for ax in range(m)]
        t = np.transpose(t, src_axes) if m else t
        return cls(tuple(kept[i] for i in order), _from_array(t.reshape(-1)))

    @classmethod
    def literal(cls, coord: Coord, value: int = 1) -> "CylinderSet":
        if value not in (0, 1):
            raise BernoulliError("coordinate values are 0 or 1")
        return cls((coord,), 0b10 if value else 0b01)

    @classmethod
    def full(cls) -> "CylinderSet":
        return cls((), 1)

    @classmethod
    def empty(cls) -> "CylinderSet":
        return cls((), 0)

    # views

    def table(self) -> np.ndarray:
        return _to_array(self.truth, len(self.support))

    def aligned(self, support: Sequence[Coord]) -> np.ndarray:
        """Table over a sorted superset of the support."""
        U = list(support)
        pos = {c: i for i, c in enumerate(U)}
        if any(c not in pos for c in self.support):
            raise BernoulliError("alignment target does not contain the support")
        idx = np.arange(1 << len(U), dtype=np.int64)
        a = np.zeros_like(idx)
        for j, c in enumerate(self.support):
            a |= ((idx >> pos[c]) & 1) << j
        return self.table()[a]

    def columns(self) -> frozenset[ReducedWord]:
        return frozenset(c.g for c in self.support)

    def measure(self) -> Fraction:
        return Fraction(bin(self.truth).count("1"), 1 << len(self.support))

    # boolean algebra

    def _binary(self, other: "CylinderSet", op) -> "CylinderSet":
        U = sorted(set(self.support) | set(other.support))
        return CylinderSet.from_table(U, op(self.aligned(U), other.aligned(U)))

    def __and__(self, other):
        return self._binary(other, np.logical_and)

    def __or__(self, other):
        return self._binary(other, np.logical_or)

    def __xor__(self, other):
        return self._binary(other, np.logical_xor)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x & ~y)

    def __invert__(self):
        return CylinderSet(self.support, self.truth ^ ((1 << (1 << len(self.support))) - 1))

    def __str__(self) -> str:
        sup = ",".join(str(c) for c in self.support)
        return f"Cyl[{sup}]#{self.truth:x}"

    def to_json(self) -> dict:
        return {"support": [str(c) for c in self.support], "truth": format(self.truth, "x")}


def cyl_measure(a: CylinderSet) -> Fraction:
    return a.measure()


def shift(gamma: ReducedWord | str, a: CylinderSet) -> CylinderSet:
    """The set γA: coordinate (n, g) becomes (n, γg), truth table unchanged."""
    gamma = word(gamma) if isinstance(gamma, str) else gamma
    return CylinderSet.from_table([c.shifted(gamma) for c in a.support], a.table())


# ---------------------------------------------------------------------------
# independence


class IndependenceResult(NamedTuple):
    independent: bool
    lhs: Fraction
    rhs: Fraction


def independence_check(a: CylinderSet, b: CylinderSet) -> IndependenceResult:
    """μ(A ∩ B) against μ(A)μ(B)."""
    lhs = (a & b).measure()
    rhs = a.measure() * b.measure()
    return IndependenceResult(lhs == rhs, lhs, rhs)


def cyl_qf_type(sets: Sequence[CylinderSet]) -> TypeVector:
    """Atom measures of a tuple of cylinder sets, δ(1) most significant."""
    n = len(sets)
    if n == 0:
        return TypeVector(0, (Fraction(1),))
    U = sorted(set().union(*(s.support for s in sets)))
    if len(U) > SUPPORT_CAP:
        raise WindowTooLarge(f"joint support of size {len(U)} over cap {SUPPORT_CAP}")
    delta = np.zeros(1 << len(U), dtype=np.int64)
    for i, s in enumerate(sets):
        delta |= (~s.aligned(U)).astype(np.int64) << (n - 1 - i)
    counts = np.bincount(delta, minlength=1 << n)
    return TypeVector(n, tuple(Fraction(int(c), 1 << len(U)) for c in counts))


def _single_column(sets: Sequence[CylinderSet], name: str) -> ReducedWord | None:
    cols = frozenset().union(*(s.columns() for s in sets)) if sets else frozenset()
    if len(cols) > 1:
        raise BernoulliError(f"{name} uses several columns: {sorted(str(c) for c in cols)}")
    return next(iter(cols)) if cols else None


@dataclass
class FactorizationReport:
    ok: bool
    joint: TypeVector
    left: TypeVector
    right: TypeVector
    order: list[tuple[str, int]]

    def __bool__(self) -> bool:
        return self.ok


def joint_type_factorization(left: Sequence[CylinderSet], right: Sequence[CylinderSet]) -> FactorizationReport:
    """Check that the joint type of two single-column tuples is the product of their types.

    The joint tuple interleaves the two (``A1, B1, A2, B2, ...``, leftovers
    at the end).  Each joint atom weight must equal the product of the
    corresponding atom weights of the two marginal types, exactly.
    """
    ca = _single_column(left, "left tuple")
    cb = _single_column(right, "right tuple")
    if ca is not None and ca == cb:
        raise BernoulliError(f"both tuples live in column {ca}")
    order = []
    for i, j in zip_longest(range(len(left)), range(len(right))):
        if i is not None:
            order.append(("L", i))
        if j is not None:
            order.append(("R", j))
    joint_sets = [left[i] if side == "L" else right[i] for side, i in order]
    pa, pb = cyl_qf_type(left), cyl_qf_type(right)
    joint = cyl_qf_type(joint_sets)
    n = len(order)
    ok = True
    for delta, w in enumerate(joint.weights):
        da = db = 0
        for pos, (side, _) in enumerate(order):
            bit = (delta >> (n - 1 - pos)) & 1
            if side == "L":
                da = (da << 1) | bit
            else:
                db = (db << 1) | bit
        if w != pa.weights[da] * pb.weights[db]:
            ok = False
            break
    return FactorizationReport(ok, joint, pa, pb, order)


# ---------------------------------------------------------------------------
# generators as interval exchanges


def _point_index(values_at: dict[Coord, np.ndarray], order: Sequence[Coord]) -> np.ndarray:
    m = len(order)
    out = np.zeros(1 << m if m else 1, dtype=np.int64)
    for i, c in enumerate(order):
        out |= values_at[c].astype(np.int64) << (m - 1 - i)
    return out


@dataclass
class WindowEmbedding:
    """Binary coding of coordinates as dyadic digits, first coordinate most significant.

    The window W comes first in canonical order; for each generator g the
    coordinates of ``gW`` outside W follow, again in canonical order.
    """

    window: tuple[Coord, ...]
    orders: dict[str, tuple[Coord, ...]]
    perms: dict[str, list[int]]

    def order(self, gen: str | None = None) -> tuple[Coord, ...]:
        return self.window if gen is None else self.orders[gen]

    def embed_mask(self, a: CylinderSet, gen: str | None = None) -> np.ndarray:
        """Membership of each depth-|order| dyadic atom."""
        order = self.order(gen)
        pos = {c: i for i, c in enumerate(order)}
        if any(c not in pos for c in a.support):
            raise BernoulliError(f"support of {a} is not inside the window")
        m = len(order)
        x = np.arange(1 << m, dtype=np.int64)
        idx = np.zeros_like(x)
        for j, c in enumerate(a.support):
            idx |= ((x >> (m - 1 - pos[c])) & 1) << j
        return a.table()[idx]

    def embed(self, a: CylinderSet, gen: str | None = None) -> MSet:
        mask = self.embed_mask(a, gen)
        den = len(mask)
        return normalize((Fraction(int(k), den), Fraction(int(k) + 1, den)) for k in np.flatnonzero(mask))

    def to_json(self) -> dict:
        return {"window": [str(c) for c in self.window],
                "orders": {g: [str(c) for c in o] for g, o in self.orders.items()}}


def _generator_perm(window: Sequence[Coord], g: ReducedWord) -> tuple[tuple[Coord, ...], list[int]]:
    W = list(window)
    gW = [c.shifted(g) for c in W]
    extra = sorted(set(gW) - set(W))
    order = tuple(W + extra)
    pos = {c: i for i, c in enumerate(order)}
    m = len(order)
    if m > IET_DEPTH_CAP:
        raise WindowTooLarge(f"window needs depth {m} > {IET_DEPTH_CAP}")
    # σ sends c to gc on W and V \ W onto V \ gW in order
    sigma = dict(zip(W, gW))
    rest_src = sorted(set(order) - set(W))
    rest_dst = sorted(set(order) - set(gW))
    sigma.update(zip(rest_src, rest_dst))
    x = np.arange(1 << m, dtype=np.int64)
    y = np.zeros_like(x)
    for v in order:
        y |= ((x >> (m - 1 - pos[v])) & 1) << (m - 1 - pos[sigma[v]])
    return order, y.tolist()


def generator_iets(window: Sequence[Coord], gens: Sequence[str] = ("a", "b")) -> tuple[Iet, Iet, WindowEmbedding]:
    """Dyadic interval exchanges T_g with ``T_g(embed A) = embed(gA)`` for A supported in the window."""
    W = sorted(set(window))
    if len(W) > SUPPORT_CAP:
        raise WindowTooLarge(f"window of size {len(W)} over cap {SUPPORT_CAP}")
    orders, perms, iets = {}, {}, []
    for g in gens:
        order, perm = _generator_perm(W, word(g))
        orders[g], perms[g] = order, perm
        iets.append(Iet.from_permutation(perm))
    emb = WindowEmbedding(tuple(W), orders, perms)
    return iets[0], iets[1], emb


@dataclass
class IntertwiningReport:
    gen: str
    checked: int
    exhaustive: bool
    ok: bool


def check_intertwining(emb: WindowEmbedding, gen: str, samples: int = 256, seed: int = 0,
                       exhaustive_cap: int = 4) -> IntertwiningReport:
    """Compare ``T(embed A)`` with ``embed(gA)`` for cylinder sets A over the window.

    All ``2^(2^|W|)`` truth tables are checked at once as a boolean matrix
    when ``|W| ≤ exhaustive_cap``; otherwise a seeded sample.
    """
    W = emb.window
    k = len(W)
    g = word(gen)
    order = emb.orders[gen]
    perm = np.array(emb.perms[gen], dtype=np.int64)
    m = len(order)
    pos = {c: i for i, c in enumerate(order)}
    x = np.arange(1 << m, dtype=np.int64)
    a_src = np.zeros_like(x)
    a_dst = np.zeros_like(x)
    for j, c in enumerate(W):
        a_src |= ((x >> (m - 1 - pos[c])) & 1) << j
        a_dst |= ((x >> (m - 1 - pos[c.shifted(g)])) & 1) << j
    exhaustive = k <= exhaustive_cap
    if exhaustive:
        t = np.arange(1 << (1 << k), dtype=np.int64)[:, None]
        truths = ((t >> np.arange(1 << k, dtype=np.int64)[None, :]) & 1).astype(bool)
    else:
        rng = np.random.default_rng(seed)
        truths = rng.integers(0, 2, size=(samples, 1 << k)).astype(bool)
    member = truths[:, a_src]
    image = np.zeros_like(member)
    image[:, perm] = member
    target = truths[:, a_dst]
    return IntertwiningReport(gen, len(truths), exhaustive, bool(np.array_equal(image, target)))
