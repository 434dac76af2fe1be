"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (bypassing output capture)
with its runtime, and fails if the check or its time limit fails.
"""

import math
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from malgkit.backforth import BackAndForth, DloAdapter, RadoAdapter, verify_partial_iso
from malgkit.bernoulli import (Coord, CylinderSet, check_intertwining, generator_iets,
                               independence_check, joint_type_factorization, shift)
from malgkit.cli import main
from malgkit.freegroup import ReducedWord, markov_operator, mul
from malgkit.homog import match_partitions, transport_map
from malgkit.kesten import (DISPLACEMENT, kesten_certificate, return_probability,
                            top_eigenvalue)
from malgkit.logic import (ATOMLESS, DIAMETER, Abs, Add, AtomD, AtomM, Const, Join, Max, Meet,
                           Min, Monus, One, Scale, Sub, SymDiff, Var, Zero, eval_at_depth, qf_eval)
from malgkit.malg import Iet, apply, measure, normalize, parse_tuple
from malgkit.qftypes import TypeVector, orbit_distance, qf_type, realize
from oracles import brute_return_probability, transport_dual, transport_primal


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(number: int, title: str, limit: float):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            ok = ok and elapsed < limit
            with capsys.disabled():
                print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} "
                      f"({elapsed:.2f}s, limit {limit:g}s)")
        assert elapsed < limit, f"criterion {number} took {elapsed:.2f}s (limit {limit}s)"
    return run


# ---------------------------------------------------------------------------
# seeded generators


def random_partition(rng, n, q):
    labels = [rng.randrange(n) for _ in range(q)]
    return labels, [normalize([(F(k, q), F(k + 1, q)) for k, l in enumerate(labels) if l == i])
                    for i in range(n)]


def random_equal_measure_pair(rng):
    n = rng.randint(1, 5)
    q = rng.choice((2, 3, 4, 6, 8, 12))
    labels, A = random_partition(rng, n, q)
    r = rng.choice((1, 2, 3))
    fine = [l for l in labels for _ in range(r)]
    rng.shuffle(fine)
    B = [normalize([(F(k, q * r), F(k + 1, q * r)) for k, l in enumerate(fine) if l == i])
         for i in range(n)]
    return A, B


def random_type(rng, n):
    N = rng.choice((1, 2, 3, 4, 6, 8, 12))
    cuts = sorted(rng.randint(0, N) for _ in range(2 ** n - 1))
    return TypeVector(n, tuple(F(b - a, N) for a, b in zip([0] + cuts, cuts + [N])))


def random_mset(rng):
    pairs = []
    for _ in range(rng.randint(0, 3)):
        q = rng.choice((2, 3, 4, 6, 8, 12))
        a, b = sorted((rng.randint(0, q), rng.randint(0, q)))
        pairs.append((F(a, q), F(b, q)))
    return normalize(pairs)


def random_term(rng, names, size=3):
    if size <= 1 or rng.random() < 0.3:
        return rng.choice([Var(rng.choice(names)), Var(rng.choice(names)), Zero(), One()])
    op = rng.choice((Join, Meet, SymDiff))
    return op(random_term(rng, names, size - 1), random_term(rng, names, size - 1))


def random_qf_formula(rng, names, budget=4):
    kinds = ["m", "d", "const"] + (["add", "sub", "monus", "abs", "max", "min", "scale"] if budget else [])
    kind = rng.choice(kinds)
    rec = lambda: random_qf_formula(rng, names, budget - 1)
    if kind == "m":
        return AtomM(random_term(rng, names))
    if kind == "d":
        return AtomD(random_term(rng, names), random_term(rng, names))
    if kind == "const":
        return Const(F(rng.randint(0, 4), rng.randint(1, 4)))
    if kind == "abs":
        return Abs(rec())
    if kind == "scale":
        return Scale(F(rng.randint(0, 3), rng.randint(1, 3)), rec())
    op = {"add": Add, "sub": Sub, "monus": Monus, "max": Max, "min": Min}[kind]
    return op(rec(), rec())


# ---------------------------------------------------------------------------


def test_criterion_1_exact_value(criterion):
    with criterion(1, "measure([0,1/3) & [1/4,1)) = 1/12 and qf_eval m(x1 /\\ x2) = 1/12", 1.0):
        A = parse_tuple("[0,1/3);[1/4,1)")
        assert measure(A[0] & A[1]) == F(1, 12)
        assert qf_eval("m(x1 /\\ x2)", qf_type(A)) == F(1, 12)


def test_criterion_2_benchmark_sentences(criterion):
    with criterion(2, "atomless sentence 1/4,1/8,1/16,1/32 at depths 1-4; diameter 1", 30.0):
        assert [eval_at_depth(ATOMLESS, depth=d) for d in (1, 2, 3, 4)] == \
            [F(1, 4), F(1, 8), F(1, 16), F(1, 32)]
        assert all(eval_at_depth(DIAMETER, depth=d) == 1 for d in range(5))


def test_criterion_3_kesten(criterion, capsys):
    with criterion(3, "Kesten constants, spectral radii R=1..12, return probabilities", 60.0):
        lams = [top_eigenvalue(markov_operator(R)) for R in range(1, 12)]
        rep = kesten_certificate(12)
        lams.append(rep.lambda_max)
        assert abs(lams[0] - 0.5) <= 1e-9
        assert all(a <= b for a, b in zip(lams, lams[1:]))
        assert max(lams) <= 0.8660255
        assert 0.2679 <= rep.min_avg_disp_sq <= 0.315
        assert rep.return_probs[0] == F(1, 4) and rep.return_probs[1] == F(7, 64)
        assert all(return_probability(s) == brute_return_probability(s) for s in range(0, 9))
        assert abs(DISPLACEMENT - math.sqrt(2 - math.sqrt(3))) < 1e-15
        capsys.readouterr()
        assert main(["kesten", "--radius", "1"]) == 0
        assert "0.517638090205" in capsys.readouterr().out


def test_criterion_4_partition_matching(criterion):
    with criterion(4, "match_partitions exact on 100 random pairs; rotation example", 5.0):
        rng = random.Random(4)
        for _ in range(100):
            A, B = random_equal_measure_pair(rng)
            t = match_partitions(A, B)
            assert [apply(t, a) for a in A] == B
        rot = match_partitions(parse_tuple("[0,1/2);[1/2,1)"),
                               parse_tuple("[1/4,3/4);[0,1/4)u[3/4,1)"))
        assert rot == Iet.rotation(F(1, 4))


def test_criterion_5_transport(criterion):
    with criterion(5, "orbit distance example 1/2; LP = coupling oracle = transport_map on 100 pairs", 10.0):
        p = TypeVector.from_dict({"00": 0, "01": F(1, 2), "10": F(1, 2), "11": 0})
        q = TypeVector.from_dict({"00": 0, "01": F(1, 4), "10": F(3, 4), "11": 0})
        assert orbit_distance(p, q) == F(1, 2)
        rng = random.Random(5)
        for _ in range(100):
            n = rng.choice((1, 2))
            p, q = random_type(rng, n), random_type(rng, n)
            d = orbit_distance(p, q)
            assert d == transport_primal(p.weights, q.weights, n)
            assert d == transport_dual(p.weights, q.weights, n)
            _, achieved = transport_map(realize(p), realize(q))
            assert achieved == d


def _staged_check(left, right, k):
    engine = BackAndForth(left, right)
    iso = engine.run(k)
    assert {left.element(i) for i in range(k)} <= set(iso.domain())
    assert {right.element(i) for i in range(k)} <= set(iso.image())
    # each stage is an isomorphism iff every pair it adds agrees with all earlier pairs
    pairs = iso.pairs
    prev = 0
    for size in engine.stage_sizes:
        for new in range(prev, size):
            l, r = pairs[new]
            for l2, r2 in pairs[:new]:
                assert left.relation(l, l2) == right.relation(r, r2)
                assert left.relation(l2, l) == right.relation(r2, r)
        prev = size
    assert verify_partial_iso(left, right, iso)


def test_criterion_6_back_and_forth(criterion):
    with criterion(6, "Rado vs permuted copy k=50; DLO k=100; every stage verified", 5.0):
        _staged_check(RadoAdapter(), RadoAdapter.permuted(seed=6), 50)
        _staged_check(DloAdapter(seed=1), DloAdapter(seed=2), 100)


def test_criterion_7_quantifier_elimination(criterion):
    with criterion(7, "300 qf formulas: equal values on equal-type tuples; qf_eval agrees", 60.0):
        rng = random.Random(7)
        for _ in range(300):
            n = rng.randint(1, 3)
            names = [f"x{i}" for i in range(1, n + 1)]
            f = random_qf_formula(rng, names)
            A = [random_mset(rng) for _ in range(n)]
            perm = list(range(rng.choice((2, 3, 4, 6))))
            rng.shuffle(perm)
            t = Iet.from_permutation(perm)
            B = [apply(t, a) for a in A]
            C = realize(qf_type(A))
            assert qf_type(B) == qf_type(A) == qf_type(C)
            env = lambda S: dict(zip(names, S))
            v = eval_at_depth(f, env(A), 0)
            assert eval_at_depth(f, env(B), 0) == v
            assert eval_at_depth(f, env(C), 0) == v
            assert qf_eval(f, qf_type(A), names) == v


def _column_set(rng, g):
    support = sorted(Coord(n, g) for n in rng.sample(range(3), rng.randint(0, 2)))
    table = np.array([rng.random() < 0.5 for _ in range(2 ** len(support))], dtype=bool)
    return CylinderSet.from_table(support, table)


def _random_word(rng, length=4):
    return ReducedWord.reduce(rng.randrange(4) for _ in range(rng.randint(0, length)))


def test_criterion_8_bernoulli(criterion):
    with criterion(8, "independence and factorization (200 cases); action law (200); intertwining", 30.0):
        rng = random.Random(8)
        columns = [ReducedWord.reduce(w) for w in ((), (0,), (1,), (2,), (0, 2), (3, 1))]
        for _ in range(200):
            g, h = rng.sample(columns, 2)
            left = [_column_set(rng, g) for _ in range(rng.randint(0, 3))]
            right = [_column_set(rng, h) for _ in range(rng.randint(0, 3))]
            for a in left:
                for b in right:
                    assert independence_check(a, b).independent
            assert joint_type_factorization(left, right).ok
        for _ in range(200):
            g1, g2 = _random_word(rng), _random_word(rng)
            a = _column_set(rng, _random_word(rng)) | _column_set(rng, _random_word(rng))
            assert shift(mul(g1, g2), a) == shift(g1, shift(g2, a))
        for coords in (["0:e"], ["0:e", "0:a"], ["0:e", "0:a", "0:b"], ["0:e", "1:e", "0:ab", "0:B"]):
            _, _, emb = generator_iets([Coord.parse(c) for c in coords])
            for gen in "ab":
                rep = check_intertwining(emb, gen)
                assert rep.ok and rep.exhaustive


PROPERTY_SUITES = [
    "tests/test_malg.py::TestBooleanOps::test_boolean_algebra_laws",
    "tests/test_malg.py::TestBooleanOps::test_ops_match_pointwise_oracle",
    "tests/test_malg.py::TestBooleanOps::test_metric",
    "tests/test_malg.py::TestIet::test_compose_with_inverse",
    "tests/test_malg.py::TestIet::test_associativity",
    "tests/test_malg.py::TestIet::test_action",
    "tests/test_logic.py::TestParse::test_round_trip",
    "tests/test_logic.py::TestModulus::test_sound_against_finite_differences",
]


def test_criterion_9_property_suites(criterion):
    # a separate process keeps each hypothesis test bound to a single executor
    root = Path(__file__).resolve().parent.parent
    with criterion(9, "property suites: boolean algebra, metric, Iet group, parser round trip, modulus", 300.0):
        proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SUITES],
                              cwd=root, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stdout[-2000:]
        assert f"{len(PROPERTY_SUITES)} passed" in proc.stdout
