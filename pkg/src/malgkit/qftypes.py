"""Quantifier-free types of tuples in the measure algebra.

The type of ``(A_1, ..., A_n)`` is the probability vector of atom measures
``μ(A_1^δ(1) ∩ ... ∩ A_n^δ(n))`` for ``δ ∈ {0,1}^n``, where ``A^0 = A`` and
``A^1`` is the complement.  Bitstrings are written with ``δ(1)`` first and
index the weight vector with ``δ(1)`` as the most significant bit.

Two tuples lie in the same orbit closure iff their types agree, and the
orbit-closure distance is the transport cost between types for the Hamming
metric on ``{0,1}^n``.  That transport problem is solved exactly here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .malg import ONE, ZERO, MSet, as_fraction, fmt, normalize

ARITY_CAP = 10


class ArityError(ValueError):
    pass


def bitstring(index: int, n: int) -> str:
    return format(index, f"0{n}b") if n else ""


def hamming(i: int, j: int) -> int:
    return bin(i ^ j).count("1")


@dataclass(frozen=True)
class TypeVector:
    """Probability vector on ``{0,1}^n`` with exact rational weights."""

    n: int
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ArityError("negative arity")
        if self.n > ARITY_CAP:
            raise ArityError(f"arity {self.n} over cap {ARITY_CAP}")
        w = tuple(as_fraction(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != 2 ** self.n:
            raise ValueError(f"need {2 ** self.n} weights, got {len(w)}")
        if any(x < 0 for x in w):
            raise ValueError("negative weight")
        if sum(w, ZERO) != 1:
            raise ValueError(f"weights sum to {sum(w, ZERO)}, not 1")

    @classmethod
    def from_dict(cls, weights: dict[str, object]) -> "TypeVector":
        if not weights:
            raise ArityError("empty weight map")
        n = len(next(iter(weights)))
        w = [ZERO] * (2 ** n)
        for key, val in weights.items():
            if len(key) != n or set(key) - {"0", "1"}:
                raise ValueError(f"bad bitstring {key!r}")
            w[int(key, 2) if n else 0] = as_fraction(val)
        return cls(n, tuple(w))

    def __getitem__(self, key: str | int) -> Fraction:
        if isinstance(key, str):
            key = int(key, 2) if key else 0
        return self.weights[key]

    def as_dict(self) -> dict[str, Fraction]:
        return {bitstring(i, self.n): w for i, w in enumerate(self.weights)}

    def marginal(self, k: int) -> "TypeVector":
        """Type of the first k coordinates."""
        if not 0 <= k <= self.n:
            raise ArityError(f"cannot project arity {self.n} to {k}")
        w = [ZERO] * (2 ** k)
        shift = self.n - k
        for i, x in enumerate(self.weights):
            w[i >> shift] += x
        return TypeVector(k, tuple(w))

    def to_json(self) -> dict:
        return {"n": self.n, "weights": {k: fmt(v) for k, v in self.as_dict().items()}}

    @classmethod
    def from_json(cls, data: dict) -> "TypeVector":
        tv = cls.from_dict(data["weights"])
        if tv.n != data["n"]:
            raise ArityError("n does not match bitstring length")
        return tv


# ---------------------------------------------------------------------------
# atoms and qf types


def atom_pieces(sets: Sequence[MSet]) -> dict[int, list[tuple[Fraction, Fraction]]]:
    """Map each atom index δ to its (sorted, possibly adjacent) elementary intervals.

    Only non-empty atoms appear.
    """
    n = len(sets)
    cuts = sorted({ZERO, ONE, *(x for s in sets for x in s.endpoints())})
    ptr = [0] * n
    out: dict[int, list[tuple[Fraction, Fraction]]] = {}
    for lo, hi in zip(cuts, cuts[1:]):
        idx = 0
        for i, s in enumerate(sets):
            ivs = s.intervals
            while ptr[i] < len(ivs) and ivs[ptr[i]][1] <= lo:
                ptr[i] += 1
            inside = ptr[i] < len(ivs) and ivs[ptr[i]][0] <= lo
            idx = (idx << 1) | (0 if inside else 1)
        out.setdefault(idx, []).append((lo, hi))
    return out


def atoms(sets: Sequence[MSet]) -> list[MSet]:
    """All 2^n atoms ``A_1^δ(1) ∩ ... ∩ A_n^δ(n)`` in δ order (empties included)."""
    pieces = atom_pieces(sets)
    return [normalize(pieces.get(i, [])) for i in range(2 ** len(sets))]


def qf_type(sets: Sequence[MSet]) -> TypeVector:
    n = len(sets)
    if n == 0:
        raise ArityError("qf_type needs at least one set")
    if n > ARITY_CAP:
        raise ArityError(f"arity {n} over cap {ARITY_CAP}")
    w = [ZERO] * (2 ** n)
    for idx, ivs in atom_pieces(sets).items():
        w[idx] = sum((hi - lo for lo, hi in ivs), ZERO)
    return TypeVector(n, tuple(w))


def realize(p: TypeVector) -> list[MSet]:
    """Stack the atoms as consecutive intervals in δ order and read off the sets."""
    raw: list[list[tuple[Fraction, Fraction]]] = [[] for _ in range(p.n)]
    cur = ZERO
    for idx, w in enumerate(p.weights):
        lo, cur = cur, cur + w
        for i in range(p.n):
            if not (idx >> (p.n - 1 - i)) & 1:
                raw[i].append((lo, cur))
    return [normalize(r) for r in raw]


# ---------------------------------------------------------------------------
# exact transport


def optimal_coupling(p: Sequence[Fraction], q: Sequence[Fraction],
                     cost: Sequence[Sequence[int]]) -> tuple[Fraction, dict[tuple[int, int], Fraction]]:
    """Exact min-cost transport between two rational probability vectors.

    Successive shortest augmenting paths on the residual bipartite network;
    costs are non-negative integers, amounts are Fractions.  Rows and columns
    with zero mass are skipped.  Iteration order is fixed, so the returned
    coupling is deterministic.
    """
    rows = [i for i, x in enumerate(p) if x > 0]
    cols = [j for j, x in enumerate(q) if x > 0]
    m, k = len(rows), len(cols)
    # nodes: 0 source, 1..m rows, m+1..m+k cols, m+k+1 sink
    src, snk = 0, m + k + 1
    N = m + k + 2
    INF = None  # uncapacitated
    to: list[int] = []
    cap: list[Fraction | None] = []
    cst: list[int] = []
    adj: list[list[int]] = [[] for _ in range(N)]

    def add(u, v, c, w):
        adj[u].append(len(to)); to.append(v); cap.append(c); cst.append(w)
        adj[v].append(len(to)); to.append(u); cap.append(ZERO); cst.append(-w)

    for a, i in enumerate(rows):
        add(src, 1 + a, p[i], 0)
    cell_edge = {}
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            cell_edge[(i, j)] = len(to)
            add(1 + a, 1 + m + b, INF, cost[i][j])
    for b, j in enumerate(cols):
        add(1 + m + b, snk, q[j], 0)

    def residual(e):
        c = cap[e]
        return c is None or c > 0

    flow_total = ZERO
    target = sum((p[i] for i in rows), ZERO)
    while flow_total < target:
        # SPFA: integer costs, no negative cycles in the residual graph of an optimal flow
        distv: list[int | None] = [None] * N
        prev = [-1] * N
        distv[src] = 0
        queue = deque([src])
        inq = [False] * N
        inq[src] = True
        while queue:
            u = queue.popleft()
            inq[u] = False
            du = distv[u]
            for e in adj[u]:
                if residual(e):
                    v = to[e]
                    nd = du + cst[e]
                    if distv[v] is None or nd < distv[v]:
                        distv[v] = nd
                        prev[v] = e
                        if not inq[v]:
                            queue.append(v)
                            inq[v] = True
        if distv[snk] is None:
            raise RuntimeError("transport infeasible: masses differ")
        amt = None
        v = snk
        while v != src:
            e = prev[v]
            if cap[e] is not None and (amt is None or cap[e] < amt):
                amt = cap[e]
            v = to[e ^ 1]
        v = snk
        while v != src:
            e = prev[v]
            if cap[e] is not None:
                cap[e] -= amt
            if cap[e ^ 1] is not None:
                cap[e ^ 1] += amt
            v = to[e ^ 1]
        flow_total += amt

    coupling = {}
    value = ZERO
    for (i, j), e in cell_edge.items():
        f = cap[e ^ 1]  # reverse residual = flow on the cell
        if f:
            coupling[(i, j)] = f
            value += f * cost[i][j]
    return value, coupling


def _hamming_matrix(n: int) -> list[list[int]]:
    size = 2 ** n
    return [[hamming(i, j) for j in range(size)] for i in range(size)]


def optimal_type_coupling(p: TypeVector, q: TypeVector) -> tuple[Fraction, dict[tuple[int, int], Fraction]]:
    if p.n != q.n:
        raise ArityError(f"arity mismatch: {p.n} vs {q.n}")
    return optimal_coupling(p.weights, q.weights, _hamming_matrix(p.n))


def orbit_distance(p: TypeVector, q: TypeVector) -> Fraction:
    """min over couplings of p and q of the expected Hamming distance."""
    return optimal_type_coupling(p, q)[0]


def distance_to_type(sets: Sequence[MSet], p: TypeVector) -> Fraction:
    """Distance from a tuple to the set of realizations of p."""
    if len(sets) != p.n:
        raise ArityError(f"tuple has {len(sets)} sets, type has arity {p.n}")
    return orbit_distance(qf_type(sets), p)


# ---------------------------------------------------------------------------
# finite nets of the type space

NET_SIZE_CAP = 1_000_000


def net_resolution(n: int, eps) -> int:
    """Grid denominator N with n * (2^n - 1) / N ≤ eps."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max(1, math.ceil(Fraction(n * (2 ** n - 1)) / eps))


def net_point(p: TypeVector, N: int) -> TypeVector:
    """Round every weight down to the 1/N grid; the remainder goes to the last atom."""
    w = [Fraction(math.floor(x * N), N) for x in p.weights[:-1]]
    w.append(ONE - sum(w, ZERO))
    return TypeVector(p.n, tuple(w))


def type_space_net(n: int, eps) -> list[TypeVector]:
    """Finite list of types within orbit distance ``eps`` of every type of arity n.

    Rounding a type to the grid moves at most ``(2^n - 1)/N`` of mass, each
    unit at Hamming cost at most n, hence the resolution above.  When eps is
    at least the diameter n a single point is returned.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n < 1:
        raise ArityError("arity must be at least 1")
    size = 2 ** n
    if eps >= n:
        return [TypeVector(n, tuple([ONE] + [ZERO] * (size - 1)))]
    N = net_resolution(n, eps)
    count = math.comb(N + size - 1, size - 1)
    if count > NET_SIZE_CAP:
        raise MemoryError(f"net would have {count} points (cap {NET_SIZE_CAP})")
    out = []
    # compositions of N into `size` non-negative parts, via stars and bars
    for bars in combinations(range(N + size - 1), size - 1):
        parts = []
        last = -1
        for b in bars:
            parts.append(b - last - 1)
            last = b
        parts.append(N + size - 2 - last)
        out.append(TypeVector(n, tuple(Fraction(x, N) for x in parts)))
    return out
