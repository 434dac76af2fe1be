"""Constructing automorphisms that move one tuple onto another.

* :func:`match_partitions` glues translations so that ``T(A_i) = B_i`` for
  two partitions with matching measures.
* :func:`transport_map` builds an automorphism realizing the orbit distance
  between two tuples (the primal side of the transport problem).
* :func:`back_and_forth_malg` runs the alternating extension over a dense
  schedule of dyadic intervals and returns the automorphism obtained at the
  last stage, together with per-stage defects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .malg import ONE, ZERO, Iet, MSet, apply, as_fraction, dist, measure, normalize, union
from .qftypes import ArityError, atom_pieces, atoms, optimal_type_coupling, qf_type


class HomogError(ValueError):
    pass


def _is_partition(parts: Sequence[MSet]) -> bool:
    total = ZERO
    acc = MSet.empty()
    for p in parts:
        total += measure(p)
        acc = union(acc, p)
    return total == 1 and acc == MSet.full()


def _rotation_matching(A: Sequence[MSet], B: Sequence[MSet]) -> Iet | None:
    """Smallest r in [0,1) with (x ↦ x + r mod 1)(A_i) = B_i for all i, if any."""
    for a, b in zip(A, B):
        if a and a != MSet.full():
            break
    else:
        return Iet.identity()
    lo0, hi0 = a.intervals[0]
    anchor = hi0 if hi0 < ONE else lo0
    candidates = sorted({(x - anchor) % 1 for x in b.endpoints()} | {ZERO})
    for r in candidates:
        rot = Iet.rotation(r)
        if all(apply(rot, x) == y for x, y in zip(A, B)):
            return rot
    return None


def _monotone_pairing(a: MSet, b: MSet) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Order-preserving measure-preserving pieces sending a onto b."""
    out = []
    ia = ib = 0
    pa = a.intervals[0][0] if a.intervals else None
    pb = b.intervals[0][0] if b.intervals else None
    while ia < len(a.intervals) and ib < len(b.intervals):
        ra = a.intervals[ia][1] - pa
        rb = b.intervals[ib][1] - pb
        step = min(ra, rb)
        out.append((pa, pa + step, pb - pa))
        pa += step
        pb += step
        if ra == step:
            ia += 1
            if ia < len(a.intervals):
                pa = a.intervals[ia][0]
        if rb == step:
            ib += 1
            if ib < len(b.intervals):
                pb = b.intervals[ib][0]
    return out


def match_partitions(A: Sequence[MSet], B: Sequence[MSet]) -> Iet:
    """Automorphism T with T(A_i) = B_i exactly.

    A rotation is returned when one already does the job (the identity when
    A = B).  Otherwise the tiles ``[k/q, (k+1)/q)`` of each A_i are sent, in
    ascending order, onto the tiles of B_i in ascending order; the pieces are
    computed interval by interval rather than tile by tile, which gives the
    same map.
    """
    if len(A) != len(B):
        raise ArityError(f"{len(A)} parts vs {len(B)} parts")
    if not _is_partition(A):
        raise HomogError("A is not a partition of [0,1)")
    if not _is_partition(B):
        raise HomogError("B is not a partition of [0,1)")
    for i, (a, b) in enumerate(zip(A, B)):
        if measure(a) != measure(b):
            raise HomogError(f"part {i}: measure {measure(a)} != {measure(b)}")
    rot = _rotation_matching(A, B)
    if rot is not None:
        return rot
    pieces = []
    for a, b in zip(A, B):
        pieces.extend(_monotone_pairing(a, b))
    return Iet(tuple(pieces)).canonical()


def match_partitions_tiled(A: Sequence[MSet], B: Sequence[MSet]) -> Iet:
    """Literal tile-by-tile construction (no rotation shortcut); slow for large q."""
    q = 1
    for s in list(A) + list(B):
        for x in s.endpoints():
            q = q * x.denominator // math.gcd(q, x.denominator)
    pieces = []
    for a, b in zip(A, B):
        ta = [k for lo, hi in a.intervals for k in range(int(lo * q), int(hi * q))]
        tb = [k for lo, hi in b.intervals for k in range(int(lo * q), int(hi * q))]
        if len(ta) != len(tb):
            raise HomogError("measure mismatch")
        for k, l in zip(ta, tb):
            pieces.append((Fraction(k, q), Fraction(k + 1, q), Fraction(l - k, q)))
    return Iet(tuple(pieces)).canonical()


def tuple_defect(t: Iet, A: Sequence[MSet], B: Sequence[MSet]) -> Fraction:
    """Σ_i d(T(A_i), B_i)."""
    return sum((dist(apply(t, a), b) for a, b in zip(A, B)), ZERO)


# ---------------------------------------------------------------------------


def split_by_measures(a: MSet, amounts: Sequence[Fraction]) -> list[MSet]:
    """Cut a into consecutive pieces (left to right) with the given measures."""
    if sum(amounts, ZERO) != measure(a):
        raise HomogError("amounts do not add up to the measure of the set")
    out = []
    ivs = list(a.intervals)
    k = 0
    pos = ivs[0][0] if ivs else ZERO
    for amt in amounts:
        piece = []
        need = amt
        while need > 0:
            lo, hi = pos, ivs[k][1]
            take = min(need, hi - lo)
            piece.append((lo, lo + take))
            need -= take
            pos = lo + take
            if pos == hi:
                k += 1
                if k < len(ivs):
                    pos = ivs[k][0]
        out.append(normalize(piece))
    return out


def transport_map(A: Sequence[MSet], B: Sequence[MSet], eps=Fraction(1, 10 ** 9)) -> tuple[Iet, Fraction]:
    """Automorphism T minimizing Σ d(T A_i, B_i), with the achieved value.

    The optimal coupling γ of the two types is realized by carving each atom
    of A (resp. B) into pieces of measure γ(δ, ε), then matching the two
    resulting partitions.  For rational data the optimum is attained, so
    ``eps`` only has to be positive.
    """
    if len(A) != len(B):
        raise ArityError(f"arity mismatch: {len(A)} vs {len(B)}")
    if as_fraction(eps) <= 0:
        raise ValueError("eps must be positive")
    if not A:
        return Iet.identity(), ZERO
    p, q = qf_type(A), qf_type(B)
    _, coupling = optimal_type_coupling(p, q)
    cells = sorted(coupling)
    atoms_a, atoms_b = atoms(A), atoms(B)
    parts_a: dict[tuple[int, int], MSet] = {}
    parts_b: dict[tuple[int, int], MSet] = {}
    for i in range(2 ** len(A)):
        row = [c for c in cells if c[0] == i]
        for c, piece in zip(row, split_by_measures(atoms_a[i], [coupling[c] for c in row])):
            parts_a[c] = piece
    for j in range(2 ** len(B)):
        col = sorted((c for c in cells if c[1] == j))
        for c, piece in zip(col, split_by_measures(atoms_b[j], [coupling[c] for c in col])):
            parts_b[c] = piece
    t = match_partitions([parts_a[c] for c in cells], [parts_b[c] for c in cells])
    return t, tuple_defect(t, A, B)


# ---------------------------------------------------------------------------


def dyadic_schedule() -> Iterator[MSet]:
    """Breadth-first enumeration of dyadic intervals: [0,1), [0,1/2), [1/2,1), [0,1/4), ..."""
    depth = 0
    while True:
        for k in range(2 ** depth):
            yield MSet(((Fraction(k, 2 ** depth), Fraction(k + 1, 2 ** depth)),))
        depth += 1


def _atom_partition_pair(U: Sequence[MSet], V: Sequence[MSet]) -> tuple[list[MSet], list[MSet]]:
    pu, pv = atom_pieces(U), atom_pieces(V)
    if set(pu) != set(pv):
        raise HomogError("tuples have different types")
    keys = sorted(pu)
    return [normalize(pu[k]) for k in keys], [normalize(pv[k]) for k in keys]


def _same_type(U: Sequence[MSet], V: Sequence[MSet]) -> bool:
    """Type equality via the non-empty atoms only, so long tuples stay cheap."""
    def sizes(S):
        return {k: sum((hi - lo for lo, hi in v), ZERO) for k, v in atom_pieces(S).items()}
    return sizes(U) == sizes(V)


def _partner(source: Sequence[MSet], target: Sequence[MSet], c: MSet) -> MSet:
    """Element c' with tp(target, c') = tp(source, c), via an exact atom matching."""
    src_parts, tgt_parts = _atom_partition_pair(source, target)
    return apply(match_partitions(src_parts, tgt_parts), c)


@dataclass
class BackForthStage:
    k: int
    budget: Fraction  # ε_k
    right_new: MSet   # schedule element added on the right
    left_partner: MSet
    left_new: MSet    # schedule element added on the left
    right_partner: MSet
    defect: Fraction  # Σ d over the matched prefix after this stage


@dataclass
class MalgBackForth:
    iet: Iet
    defect: Fraction
    eps: Fraction
    left: list[MSet]
    right: list[MSet]
    stages: list[BackForthStage] = field(default_factory=list)

    def schedule_defect(self) -> Fraction:
        """Σ d(T u_j, v_j) over the whole matched tuples (prefix A/B included)."""
        return tuple_defect(self.iet, self.left, self.right)


def back_and_forth_malg(A: Sequence[MSet], B: Sequence[MSet], k: int, eps=Fraction(1, 16),
                        gens: Iterator[MSet] | None = None) -> MalgBackForth:
    """Alternating extension of ``A ↦ B`` over a dense schedule.

    Stage j adds the next schedule element c to the right tuple and finds a
    left partner of the same joint type, then adds the following schedule
    element to the left tuple and finds its right partner.  Stage j
    may perturb the matched prefix by at most ``eps / 2^(j+2)``; with rational
    data partners are exact, so the realized perturbation is zero.  The final
    automorphism matches the two accumulated tuples atom for atom.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if len(A) != len(B):
        raise ArityError(f"arity mismatch: {len(A)} vs {len(B)}")
    if A and not _same_type(A, B):
        raise HomogError("A and B have different quantifier-free types")
    schedule = iter(gens) if gens is not None else dyadic_schedule()
    u, v = list(A), list(B)
    stages = []
    for j in range(1, k + 1):
        c_right = next(schedule)
        left_partner = _partner(v, u, c_right) if u else c_right
        u_next, v_next = u + [left_partner], v + [c_right]
        c_left = next(schedule)
        right_partner = _partner(u_next, v_next, c_left)
        u_next.append(c_left)
        v_next.append(right_partner)
        if not _same_type(u_next, v_next):
            raise HomogError(f"stage {j}: types diverged")
        # prefix perturbation: partners are exact, old coordinates are kept
        perturb = sum((dist(x, y) for x, y in zip(u, u_next)), ZERO) + \
            sum((dist(x, y) for x, y in zip(v, v_next)), ZERO)
        stages.append(BackForthStage(j, eps / 2 ** (j + 2), c_right, left_partner,
                                     c_left, right_partner, perturb))
        u, v = u_next, v_next
    if u:
        pu, pv = _atom_partition_pair(u, v)
        t = match_partitions(pu, pv)
    else:
        t = Iet.identity()
    defect = tuple_defect(t, A, B)
    return MalgBackForth(t, defect, eps, u, v, stages)
