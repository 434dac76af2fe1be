"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product

from malgkit.freegroup import ReducedWord


def hamming(i: int, j: int) -> int:
    return bin(i ^ j).count("1")


def transport_dual(p, q, n: int) -> Fraction:
    """max Σ f (p - q) over integer Hamming-1-Lipschitz f with f(0) = 0.

    The constraint matrix is an edge-node incidence matrix, so an integral
    dual optimum exists and this equals the transport cost.
    """
    size = 2 ** n
    best = None
    for vals in product(range(-n, n + 1), repeat=size - 1):
        f = (0,) + vals
        if any(abs(f[i] - f[j]) > hamming(i, j) for i in range(size) for j in range(i)):
            continue
        v = sum((f[i] * (p[i] - q[i]) for i in range(size)), Fraction(0))
        if best is None or v > best:
            best = v
    return best


def transport_primal(p, q, n: int) -> Fraction:
    """Minimum cost over all basic feasible couplings (spanning trees of the bipartite graph).

    Each spanning tree determines its flows by peeling leaves; the data are
    scaled to integers first so the peeling is plain integer arithmetic.
    """
    size = 2 ** n
    den = 1
    for x in list(p) + list(q):
        den = den * x.denominator // math.gcd(den, x.denominator)
    supply0 = [int(x * den) for x in p]
    demand0 = [int(x * den) for x in q]
    best = None
    for steps in _tree_peelings(size):
        supply, demand = list(supply0), list(demand0)
        cost = 0
        ok = True
        for i, j, from_row in steps:
            amount = supply[i] if from_row else demand[j]
            if amount < 0:
                ok = False
                break
            supply[i] -= amount
            demand[j] -= amount
            cost += amount * hamming(i, j)
        if ok and not any(supply) and not any(demand):
            if best is None or cost < best:
                best = cost
    return Fraction(best, den)


@lru_cache(maxsize=None)
def _tree_peelings(size: int) -> tuple:
    """For every spanning tree of K_{size,size}: its edges in leaf-peeling order.

    Each step is ``(i, j, from_row)``: edge (i, j) is fixed by the remaining
    supply of row i when ``from_row`` and by the demand of column j otherwise.
    """
    cells = [(i, j) for i in range(size) for j in range(size)]
    out = []
    for tree in combinations(cells, 2 * size - 1):
        parent = list(range(2 * size))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        acyclic = True
        for i, j in tree:
            a, b = find(i), find(size + j)
            if a == b:
                acyclic = False
                break
            parent[a] = b
        if acyclic:
            out.append(tuple(_peel_order(tree)))
    return tuple(out)


def _peel_order(tree):
    edges = set(tree)
    steps = []
    while edges:
        deg = {}
        for i, j in edges:
            deg[("r", i)] = deg.get(("r", i), 0) + 1
            deg[("c", j)] = deg.get(("c", j), 0) + 1
        side, node = next(k for k, d in sorted(deg.items()) if d == 1)
        e = next((i, j) for i, j in edges if (i if side == "r" else j) == node)
        steps.append((e[0], e[1], side == "r"))
        edges.remove(e)
    return steps


def brute_return_probability(steps: int) -> Fraction:
    """Count generator words of the given length that reduce to the identity."""
    count = 0
    for letters in product(range(4), repeat=steps):
        if not ReducedWord.reduce(letters).letters:
            count += 1
    return Fraction(count, 4 ** steps)
