"""The free group on a, b: reduced words, balls and the regular representation on a ball.

Letters are coded ``a=0, A=1, b=2, B=3`` with ``A = a^-1`` and ``B = b^-1``;
the inverse of letter l is ``l ^ 1``.  Balls are indexed length-lexicographically
with ``a < A < b < B``.  Inside a sphere the index of a word is computed
arithmetically: the first letter has 4 choices and every later letter 3,
ranked among the letters that do not cancel the previous one.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Iterator, TextIO

import numpy as np
import scipy.sparse as sp

LETTERS = "aAbB"
ALLOWED = tuple(tuple(l for l in range(4) if l != prev ^ 1) for prev in range(4))
BALL_CAP = 12


class GroupError(ValueError):
    pass


def _letter(c: str) -> int:
    i = LETTERS.find(c)
    if i < 0:
        raise GroupError(f"unknown letter {c!r}")
    return i


@total_ordering
@dataclass(frozen=True)
class ReducedWord:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        ls = tuple(int(l) for l in self.letters)
        object.__setattr__(self, "letters", ls)
        for x in ls:
            if not 0 <= x < 4:
                raise GroupError(f"letter code {x} out of range")
        for x, y in zip(ls, ls[1:]):
            if x ^ 1 == y:
                raise GroupError(f"word {ls} is not reduced")

    @classmethod
    def identity(cls) -> "ReducedWord":
        return cls(())

    @classmethod
    def reduce(cls, letters: Iterable[int]) -> "ReducedWord":
        stack: list[int] = []
        for l in letters:
            if stack and stack[-1] == l ^ 1:
                stack.pop()
            else:
                stack.append(l)
        return cls(tuple(stack))

    @classmethod
    def parse(cls, text: str) -> "ReducedWord":
        """Parse ``"abA"``, ``"a b⁻¹"``, ``"a^-1"``; ``"e"``, ``"1"`` or ``""`` is the identity."""
        t = text.replace("⁻¹", "^-1").replace(" ", "").replace("*", "")
        if t in ("", "e", "1"):
            return cls(())
        out = []
        i = 0
        while i < len(t):
            l = _letter(t[i])
            i += 1
            if t.startswith("^-1", i):
                l ^= 1
                i += 3
            out.append(l)
        return cls.reduce(out)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return mul(self, other)

    def __len__(self) -> int:
        return len(self.letters)

    def __lt__(self, other: "ReducedWord") -> bool:
        return (len(self.letters), self.letters) < (len(other.letters), other.letters)

    def inverse(self) -> "ReducedWord":
        return inv(self)

    def __str__(self) -> str:
        return "".join(LETTERS[l] for l in self.letters) or "e"


def mul(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    """Concatenate and cancel at the junction."""
    a, b = u.letters, v.letters
    k = 0
    while k < min(len(a), len(b)) and a[len(a) - 1 - k] == b[k] ^ 1:
        k += 1
    return ReducedWord(a[:len(a) - k] + b[k:])


def inv(w: ReducedWord) -> ReducedWord:
    return ReducedWord(tuple(l ^ 1 for l in reversed(w.letters)))


def word(text: str) -> ReducedWord:
    return ReducedWord.parse(text)


# ---------------------------------------------------------------------------
# balls


def ball_size(R: int) -> int:
    return 1 + 2 * (3 ** R - 1)


def sphere_size(r: int) -> int:
    return 1 if r == 0 else 4 * 3 ** (r - 1)


def _offset(r: int) -> int:
    return 0 if r == 0 else ball_size(r - 1)


def check_radius(R: int, cap: int = BALL_CAP) -> None:
    if not isinstance(R, (int, np.integer)) or R < 0:
        raise GroupError(f"radius must be a non-negative integer, got {R!r}")
    if R > cap:
        raise GroupError(f"radius {R} over cap {cap}")


def index_of(w: ReducedWord) -> int:
    r = len(w)
    if r == 0:
        return 0
    ls = w.letters
    rank = ls[0]
    for prev, cur in zip(ls, ls[1:]):
        rank = 3 * rank + ALLOWED[prev].index(cur)
    return _offset(r) + rank


def word_at(index: int) -> ReducedWord:
    if index < 0:
        raise GroupError("negative index")
    r = 0
    while ball_size(r) <= index:
        r += 1
    if r == 0:
        return ReducedWord(())
    rank = index - _offset(r)
    digits = []
    for _ in range(r - 1):
        digits.append(rank % 3)
        rank //= 3
    ls = [rank]
    for c in reversed(digits):
        ls.append(ALLOWED[ls[-1]][c])
    return ReducedWord(tuple(ls))


class Ball:
    """Indexed enumeration of the reduced words of length at most R.

    Per-index arrays (length, first letter) are built with numpy so the
    generator operators can be assembled without Python loops.
    """

    def __init__(self, R: int, cap: int = BALL_CAP):
        check_radius(R, cap)
        self.R = int(R)
        self.dim = ball_size(self.R)
        lengths = [np.zeros(1, dtype=np.int64)]
        firsts = [np.full(1, -1, dtype=np.int64)]
        for r in range(1, self.R + 1):
            n = sphere_size(r)
            lengths.append(np.full(n, r, dtype=np.int64))
            firsts.append(np.repeat(np.arange(4, dtype=np.int64), n // 4))
        self.length = np.concatenate(lengths)
        self.first = np.concatenate(firsts)

    def __len__(self) -> int:
        return self.dim

    def __iter__(self) -> Iterator[ReducedWord]:
        return (word_at(i) for i in range(self.dim))

    def index(self, w: ReducedWord) -> int:
        if len(w) > self.R:
            raise GroupError(f"{w} is outside the ball of radius {self.R}")
        return index_of(w)

    def word(self, i: int) -> ReducedWord:
        if not 0 <= i < self.dim:
            raise GroupError(f"index {i} outside the ball")
        return word_at(i)

    def tails(self) -> np.ndarray:
        """Index of w with its first letter removed (-1 for the identity)."""
        out = np.full(self.dim, -1, dtype=np.int64)
        for r in range(1, self.R + 1):
            lo, hi = _offset(r), _offset(r) + sphere_size(r)
            rank = np.arange(hi - lo, dtype=np.int64)
            if r == 1:
                out[lo:hi] = 0
                continue
            l0 = self.first[lo:hi]
            p = 3 ** (r - 2)
            c1 = (rank - l0 * 3 * p) // p
            rest = rank % p
            l1 = np.array(ALLOWED, dtype=np.int64)[l0, c1]
            out[lo:hi] = _offset(r - 1) + l1 * p + rest
        return out

    def prepend(self, letter: int) -> np.ndarray:
        """Index of ``letter·w`` for words where no cancellation occurs and the length stays ≤ R.

        Entries are -1 where the product cancels or leaves the ball.
        """
        out = np.full(self.dim, -1, dtype=np.int64)
        out[0] = 1 + letter if self.R >= 1 else -1
        for r in range(1, self.R):
            lo, hi = _offset(r), _offset(r) + sphere_size(r)
            rank = np.arange(hi - lo, dtype=np.int64)
            l0 = self.first[lo:hi]
            p = 3 ** (r - 1)
            rest = rank - l0 * p
            ok = l0 != (letter ^ 1)
            pos = np.array([ALLOWED[letter].index(l) if l != letter ^ 1 else 0 for l in range(4)],
                           dtype=np.int64)
            new = _offset(r + 1) + letter * 3 * p + pos[l0] * p + rest
            out[lo:hi] = np.where(ok, new, -1)
        return out


def enumerate_ball(R: int) -> list[ReducedWord]:
    """Grow spheres by right multiplication with generators, then sort length-lexicographically."""
    gens = [ReducedWord((l,)) for l in range(4)]
    sphere = {ReducedWord(())}
    out = set(sphere)
    for r in range(1, R + 1):
        sphere = {w * g for w in sphere for g in gens if len(w * g) == r}
        out |= sphere
    return sorted(out)


# ---------------------------------------------------------------------------
# sparse operators


@dataclass(frozen=True)
class SparseOperator:
    """Exact sparse matrix ``num / den`` in coordinate form."""

    dim: int
    rows: np.ndarray
    cols: np.ndarray
    nums: np.ndarray
    den: int = 1
    symmetric: bool = False
    R: int | None = None

    def __post_init__(self):
        if len(self.rows) != len(self.cols) or len(self.rows) != len(self.nums):
            raise ValueError("coordinate arrays differ in length")
        if len(self.rows) and (self.rows.max() >= self.dim or self.cols.max() >= self.dim
                               or min(self.rows.min(), self.cols.min()) < 0):
            raise ValueError("index out of range")
        if self.den <= 0:
            raise ValueError("denominator must be positive")

    @property
    def nnz(self) -> int:
        return len(self.rows)

    def to_scipy(self) -> sp.csr_matrix:
        data = self.nums.astype(np.float64) / self.den
        return sp.csr_matrix((data, (self.rows, self.cols)), shape=(self.dim, self.dim))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_scipy() @ x

    def entries(self) -> Iterator[tuple[int, int, Fraction]]:
        order = np.lexsort((self.cols, self.rows))
        for k in order:
            yield int(self.rows[k]), int(self.cols[k]), Fraction(int(self.nums[k]), self.den)

    def row(self, i: int) -> list[tuple[int, Fraction]]:
        mask = self.rows == i
        return sorted((int(c), Fraction(int(n), self.den))
                      for c, n in zip(self.cols[mask], self.nums[mask]))

    def row_sums(self) -> list[Fraction]:
        acc = np.zeros(self.dim, dtype=np.int64)
        np.add.at(acc, self.rows, self.nums)
        return [Fraction(int(x), self.den) for x in acc]

    def is_symmetric_exact(self) -> bool:
        a = sorted(zip(self.rows.tolist(), self.cols.tolist(), self.nums.tolist()))
        b = sorted(zip(self.cols.tolist(), self.rows.tolist(), self.nums.tolist()))
        return a == b

    def header(self) -> dict:
        return {"R": self.R, "dim": self.dim, "nnz": self.nnz, "symmetric": self.symmetric}

    def export(self, out: TextIO | None = None) -> str | None:
        """Write a JSON header line followed by ``i j num/den`` lines."""
        buf = out if out is not None else io.StringIO()
        buf.write(json.dumps(self.header(), sort_keys=True) + "\n")
        for i, j, v in self.entries():
            buf.write(f"{i} {j} {v}\n")
        return buf.getvalue() if out is None else None


def load_operator(text: str) -> SparseOperator:
    lines = text.splitlines()
    head = json.loads(lines[0])
    rows, cols, vals = [], [], []
    for line in lines[1:]:
        if line.strip():
            i, j, v = line.split()
            rows.append(int(i))
            cols.append(int(j))
            vals.append(Fraction(v))
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return SparseOperator(head["dim"], np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                          np.array([int(v * den) for v in vals], dtype=np.int64), den,
                          head["symmetric"], head["R"])


def _gen_letter(g) -> int:
    if isinstance(g, int):
        if not 0 <= g < 4:
            raise GroupError(f"letter code {g} out of range")
        return g
    w = ReducedWord.parse(g) if isinstance(g, str) else g
    if len(w) != 1:
        raise GroupError(f"{g!r} is not a generator or its inverse")
    return w.letters[0]


def generator_operator(g, R: int, ball: Ball | None = None) -> SparseOperator:
    """``(π(g)ξ)(w) = ξ(g⁻¹w)`` restricted to the ball; entries leaving the ball are dropped."""
    ball = ball or Ball(R)
    if ball.R != R:
        raise ValueError("ball radius mismatch")
    l = _gen_letter(g)
    idx = np.arange(ball.dim, dtype=np.int64)
    # g⁻¹w cancels when w starts with g, otherwise g⁻¹ is prepended
    cancel = ball.first == l
    col = np.where(cancel, ball.tails(), ball.prepend(l ^ 1))
    keep = col >= 0
    rows, cols = idx[keep], col[keep]
    return SparseOperator(ball.dim, rows, cols, np.ones(len(rows), dtype=np.int64), 1, False, R)


def markov_operator(R: int, ball: Ball | None = None) -> SparseOperator:
    """``M_R = (π(a) + π(a⁻¹) + π(b) + π(b⁻¹)) / 4`` compressed to the ball (tree adjacency / 4)."""
    ball = ball or Ball(R)
    if ball.R != R:
        raise ValueError("ball radius mismatch")
    child = np.arange(1, ball.dim, dtype=np.int64)
    parent = ball.tails()[1:]
    rows = np.concatenate([child, parent])
    cols = np.concatenate([parent, child])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    return SparseOperator(ball.dim, rows, cols, np.ones(len(rows), dtype=np.int64), 4, True, R)
