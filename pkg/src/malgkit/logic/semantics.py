"""Exact evaluation of formulas.

Quantifiers range over the finite subalgebra generated by the dyadic
intervals ``[k/2^d, (k+1)/2^d)``.  Every value handled is rational, so all
results are exact.

The evaluator works on a *frame*: the partition of [0,1) cut at every
endpoint of the environment and of the dyadic grid.  Sets become bitmasks
over the frame's segments and measures become integer sums over a common
denominator.

Two search strategies are available for a quantifier.

``exhaustive``
    Try all ``2^(2^d)`` dyadic sets (only for ``d <= 3``).

``auto``
    Orbit reduction plus branch and bound.  Grid atoms that meet every cell
    of the current environment in the same measures can be exchanged by a
    measure-preserving map that fixes the environment and permutes the grid,
    so the value only depends on how many atoms of each such class are
    chosen.  Counts are explored class by class; a partial choice P with
    undecided mass u brackets every completion within ``K*u`` of its value,
    where K is the Lipschitz modulus of the body in the bound variable.
    Branches whose bracket cannot beat the incumbent are skipped, and the
    search stops once the static range of the body is attained.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from ..malg import ONE, ZERO, MSet
from ..qftypes import ArityError, TypeVector
from .parser import parse
from .syntax import (Abs, Add, AtomD, AtomM, Const, Formula, Inf, Join, Max, Meet, Min, Monus,
                     One, Scale, Sub, Sup, Term, Var, Zero, free_vars,
                     is_quantifier_free, modulus, value_range)

DEPTH_CAP = 4
EXHAUSTIVE_CAP = 3


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# frames


class Frame:
    """Finitely many weighted cells; sets are bitmasks over the cells."""

    def __init__(self, weights: Sequence[Fraction]):
        den = 1
        for w in weights:
            den = den * w.denominator // math.gcd(den, w.denominator)
        self.den = den
        self.weights = [int(w * den) for w in weights]
        self.full = (1 << len(weights)) - 1
        self._cache: dict[int, Fraction] = {}

    def measure(self, mask: int) -> Fraction:
        v = self._cache.get(mask)
        if v is None:
            total = 0
            m = mask
            while m:
                low = m & -m
                total += self.weights[low.bit_length() - 1]
                m ^= low
            v = self._cache[mask] = Fraction(total, self.den)
        return v


def _segment_frame(sets: Sequence[MSet], depth: int) -> tuple[Frame, list[Fraction]]:
    grid = 2 ** depth
    pts = {Fraction(k, grid) for k in range(grid + 1)}
    for s in sets:
        pts.update(s.endpoints())
    pts = sorted(pts)
    return Frame([hi - lo for lo, hi in zip(pts, pts[1:])]), pts


def _mask_of(s: MSet, pts: list[Fraction]) -> int:
    mask = 0
    for lo, hi in s.intervals:
        a, b = bisect_left(pts, lo), bisect_left(pts, hi)
        mask |= ((1 << (b - a)) - 1) << a
    return mask


# ---------------------------------------------------------------------------
# evaluation core


@dataclass
class SearchStats:
    evaluations: int = 0
    pruned: int = 0
    early_stops: int = 0


class _Evaluator:
    def __init__(self, frame: Frame, grid_atoms: list[int], method: str, stats: SearchStats):
        self.frame = frame
        self.grid = grid_atoms
        self.method = method
        self.stats = stats
        self._modulus: dict[int, dict] = {}
        self._range: dict[int, tuple] = {}

    def term(self, t: Term, env: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Zero):
            return 0
        if isinstance(t, One):
            return self.frame.full
        a, b = self.term(t.left, env), self.term(t.right, env)
        if isinstance(t, Join):
            return a | b
        if isinstance(t, Meet):
            return a & b
        return a ^ b

    def value(self, f: Formula, env: Mapping[str, int]) -> Fraction:
        if isinstance(f, AtomM):
            return self.frame.measure(self.term(f.term, env))
        if isinstance(f, AtomD):
            return self.frame.measure(self.term(f.left, env) ^ self.term(f.right, env))
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Scale):
            return f.factor * self.value(f.body, env)
        if isinstance(f, Abs):
            return abs(self.value(f.body, env))
        if isinstance(f, (Inf, Sup)):
            return self.quantifier(f, env)
        a, b = self.value(f.left, env), self.value(f.right, env)
        if isinstance(f, Add):
            return a + b
        if isinstance(f, Sub):
            return a - b
        if isinstance(f, Monus):
            return max(a - b, ZERO)
        if isinstance(f, Max):
            return max(a, b)
        if isinstance(f, Min):
            return min(a, b)
        raise TypeError(f"not a formula: {f!r}")

    # quantifiers

    def quantifier(self, f: Inf | Sup, env: Mapping[str, int]) -> Fraction:
        if self.method == "exhaustive":
            return self._exhaustive(f, env)
        return self._branch_and_bound(f, env)

    def _body_value(self, f, env, mask) -> Fraction:
        self.stats.evaluations += 1
        inner = dict(env)
        inner[f.var] = mask
        return self.value(f.body, inner)

    def _exhaustive(self, f, env) -> Fraction:
        is_sup = isinstance(f, Sup)
        best = None
        for choice in range(1 << len(self.grid)):
            mask = 0
            for k, atom in enumerate(self.grid):
                if choice >> k & 1:
                    mask |= atom
            v = self._body_value(f, env, mask)
            if best is None or (v > best if is_sup else v < best):
                best = v
        return best

    def _classes(self, env: Mapping[str, int]) -> list[list[int]]:
        """Grid atoms grouped by the measures in which they meet each environment cell."""
        names = sorted(env)
        masks = [env[n] for n in names]
        groups: dict[frozenset, list[int]] = {}
        for atom in self.grid:
            sig: dict[tuple, int] = {}
            m = atom
            while m:
                low = m & -m
                i = low.bit_length() - 1
                pattern = tuple(bool(x & low) for x in masks)
                sig[pattern] = sig.get(pattern, 0) + self.frame.weights[i]
                m ^= low
            groups.setdefault(frozenset(sig.items()), []).append(atom)
        return list(groups.values())

    def _static(self, body: Formula) -> tuple:
        key = id(body)
        if key not in self._range:
            self._range[key] = value_range(body)
        return self._range[key]

    def _lipschitz(self, f) -> Fraction:
        key = id(f)
        if key not in self._modulus:
            self._modulus[key] = modulus(f.body)
        return self._modulus[key].get(f.var, ZERO)

    def _branch_and_bound(self, f, env) -> Fraction:
        is_sup = isinstance(f, Sup)
        lo, hi = self._static(f.body)
        target = hi if is_sup else lo
        K = self._lipschitz(f)
        classes = self._classes(env)
        rest = [ZERO] * (len(classes) + 1)
        for j in range(len(classes) - 1, -1, -1):
            rest[j] = rest[j + 1] + sum((self.frame.measure(a) for a in classes[j]), ZERO)
        memo: dict[int, Fraction] = {}
        best: list[Fraction | None] = [None]
        done = [False]

        def val(mask: int) -> Fraction:
            v = memo.get(mask)
            if v is None:
                v = memo[mask] = self._body_value(f, env, mask)
                b = best[0]
                if b is None or (v > b if is_sup else v < b):
                    best[0] = v
                    if v == target:
                        done[0] = True
            return v

        def search(j: int, mask: int) -> None:
            if done[0]:
                return
            v = val(mask)
            if j == len(classes) or done[0]:
                return
            slack = K * rest[j]
            if is_sup and v + slack <= best[0] or not is_sup and v - slack >= best[0]:
                self.stats.pruned += 1
                return
            acc = mask
            search(j + 1, acc)
            for atom in classes[j]:
                acc |= atom
                search(j + 1, acc)
                if done[0]:
                    return

        search(0, 0)
        if done[0]:
            self.stats.early_stops += 1
        return best[0]


def _check_depth(depth: int, method: str, max_depth: int) -> None:
    if not isinstance(depth, int) or depth < 0:
        raise EvalError(f"depth must be a non-negative integer, got {depth!r}")
    if depth > max_depth:
        raise EvalError(f"depth {depth} over cap {max_depth}")
    if method not in ("auto", "exhaustive"):
        raise EvalError(f"unknown method {method!r}")
    if method == "exhaustive" and depth > EXHAUSTIVE_CAP:
        raise EvalError(f"exhaustive search is limited to depth {EXHAUSTIVE_CAP}")


def eval_at_depth(f: Formula | str, env: Mapping[str, MSet] | None = None, depth: int = 0,
                  method: str = "auto", max_depth: int = DEPTH_CAP,
                  stats: SearchStats | None = None) -> Fraction:
    """Value of f under env with quantifiers over depth-``depth`` dyadic sets."""
    if isinstance(f, str):
        f = parse(f)
    env = dict(env or {})
    _check_depth(depth, method, max_depth)
    missing = sorted(free_vars(f) - set(env))
    if missing:
        raise EvalError(f"no binding for free variable(s): {', '.join(missing)}")
    names = sorted(free_vars(f))
    frame, pts = _segment_frame([env[n] for n in names], depth)
    grid = 2 ** depth
    grid_atoms = [_mask_of(MSet(((Fraction(k, grid), Fraction(k + 1, grid)),)), pts)
                  for k in range(grid)]
    ev = _Evaluator(frame, grid_atoms, method, stats if stats is not None else SearchStats())
    return ev.value(f, {n: _mask_of(env[n], pts) for n in names})


# ---------------------------------------------------------------------------
# quantifier-free evaluation on types


def natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


def qf_eval(f: Formula | str, p: TypeVector, variables: Sequence[str] | None = None) -> Fraction:
    """Value of a quantifier-free formula computed from the type alone.

    By default ``x1, ..., xn`` name the coordinates of p when the free
    variables are among them; otherwise the free variables are matched to
    the coordinates in natural order (``x2`` before ``x10``).
    """
    if isinstance(f, str):
        f = parse(f)
    if not is_quantifier_free(f):
        raise EvalError("qf_eval needs a quantifier-free formula")
    fv = free_vars(f)
    if variables is None:
        standard = [f"x{i}" for i in range(1, p.n + 1)]
        variables = standard if fv <= set(standard) else sorted(fv, key=natural_key)
    variables = list(variables)
    if len(set(variables)) != len(variables):
        raise EvalError("repeated variable")
    if not fv <= set(variables):
        raise EvalError(f"unassigned variable(s): {sorted(fv - set(variables))}")
    if len(variables) != p.n:
        raise ArityError(f"{len(variables)} variables but the type has arity {p.n}")
    frame = Frame(p.weights)
    n = p.n
    env = {}
    for i, name in enumerate(variables):
        env[name] = sum(1 << d for d in range(2 ** n) if not (d >> (n - 1 - i)) & 1)
    return _Evaluator(frame, [], "auto", SearchStats()).value(f, env)


# ---------------------------------------------------------------------------
# depth studies

ATOMLESS = parse("sup x . inf y . |m(x /\\ y) - 1/2 * m(x)|")
DIAMETER = parse("sup x1 . sup x2 . d(x1, x2)")


def _alpha(f: Formula, ren: dict | None = None, counter: list | None = None) -> Formula:
    """Rename bound variables to v0, v1, ... in order of binding."""
    ren = ren or {}
    counter = counter if counter is not None else [0]

    def term(t):
        if isinstance(t, Var):
            return Var(ren.get(t.name, t.name))
        if isinstance(t, (Zero, One)):
            return t
        return type(t)(term(t.left), term(t.right))

    if isinstance(f, AtomM):
        return AtomM(term(f.term))
    if isinstance(f, AtomD):
        return AtomD(term(f.left), term(f.right))
    if isinstance(f, Const):
        return f
    if isinstance(f, Scale):
        return Scale(f.factor, _alpha(f.body, ren, counter))
    if isinstance(f, Abs):
        return Abs(_alpha(f.body, ren, counter))
    if isinstance(f, (Inf, Sup)):
        fresh = f"v{counter[0]}"
        counter[0] += 1
        return type(f)(fresh, _alpha(f.body, {**ren, f.var: fresh}, counter))
    return type(f)(_alpha(f.left, ren, counter), _alpha(f.right, ren, counter))


def benchmark_law(f: Formula):
    """Known exact depth law for the benchmark sentences, else None."""
    g = _alpha(f)
    if g == _alpha(ATOMLESS):
        return "atomless", lambda d: Fraction(1, 2 ** (d + 1))
    if g == _alpha(DIAMETER):
        return "diameter", lambda d: ONE
    return None


@dataclass(frozen=True)
class BoundsValue:
    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower > upper")


@dataclass
class BoundsReport:
    values: list[tuple[int, Fraction]]
    bounds: BoundsValue
    nonincreasing: bool
    nondecreasing: bool
    benchmark: str | None = None
    benchmark_ok: bool | None = None
    stats: list[SearchStats] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "values": [{"depth": d, "value": str(v)} for d, v in self.values],
            "bounds": {"lower": str(self.bounds.lower), "upper": str(self.bounds.upper)},
            "nonincreasing": self.nonincreasing,
            "nondecreasing": self.nondecreasing,
            "benchmark": self.benchmark,
            "benchmark_ok": self.benchmark_ok,
        }


def eval_bounds(f: Formula | str, env: Mapping[str, MSet] | None = None,
                depths: Sequence[int] = (1, 2, 3, 4), method: str = "auto",
                max_depth: int = DEPTH_CAP) -> BoundsReport:
    """Values at several depths, the range they span and their trend."""
    if isinstance(f, str):
        f = parse(f)
    depths = sorted(depths)
    if not depths:
        raise EvalError("no depths given")
    values, all_stats = [], []
    for d in depths:
        st = SearchStats()
        values.append((d, eval_at_depth(f, env, d, method, max_depth, st)))
        all_stats.append(st)
    vs = [v for _, v in values]
    report = BoundsReport(
        values=values,
        bounds=BoundsValue(min(vs), max(vs)),
        nonincreasing=all(a >= b for a, b in zip(vs, vs[1:])),
        nondecreasing=all(a <= b for a, b in zip(vs, vs[1:])),
        stats=all_stats,
    )
    law = benchmark_law(f)
    if law is not None and not free_vars(f):
        report.benchmark = law[0]
        report.benchmark_ok = all(v == law[1](d) for d, v in values)
    return report
