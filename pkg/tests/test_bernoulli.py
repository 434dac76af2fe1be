import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from malgkit.bernoulli import (BernoulliError, Coord, CylinderSet, WindowTooLarge,
                               check_intertwining, cyl_measure, cyl_qf_type, generator_iets,
                               independence_check, joint_type_factorization, parse_window, shift)
from malgkit.freegroup import ReducedWord, mul, word
from malgkit.malg import Iet, apply, measure
from malgkit.qftypes import qf_type

group_words = st.lists(st.integers(0, 3), max_size=4).map(ReducedWord.reduce)
COLUMNS = [word(w) for w in ("e", "a", "A", "b", "B", "ab", "ba")]


def lit(text, value=1):
    return CylinderSet.literal(Coord.parse(text), value)


@st.composite
def cylinders(draw, columns=None, max_support=3):
    cols = columns if columns is not None else [draw(group_words) for _ in range(3)]
    pool = sorted({Coord(n, g) for n in range(2) for g in cols})
    support = sorted(draw(st.lists(st.sampled_from(pool), max_size=max_support, unique=True)))
    k = len(support)
    bits = draw(st.lists(st.booleans(), min_size=2 ** k, max_size=2 ** k))
    return CylinderSet.from_table(support, np.array(bits, dtype=bool))


def in_column(g):
    return cylinders(columns=[g])


def pointwise(a: CylinderSet, x: dict) -> bool:
    """Membership of a configuration given as a dict coordinate → bit."""
    idx = 0
    for j, c in enumerate(a.support):
        idx |= x[c] << j
    return bool(a.table().reshape(-1)[idx]) if a.support else bool(a.table())


class TestCylinderSet:
    def test_examples(self):
        e1 = lit("0:e")
        assert cyl_measure(e1) == F(1, 2)
        assert (e1 & ~e1) == CylinderSet.empty() and cyl_measure(e1 & ~e1) == 0
        assert cyl_measure(e1 & lit("0:a")) == F(1, 4)
        assert cyl_measure(CylinderSet.full()) == 1

    def test_minimized(self):
        e1, a1 = lit("0:e"), lit("0:a")
        # (e1 & a1) | (e1 & ~a1) no longer depends on (0,a)
        assert (e1 & a1) | (e1 & ~a1) == e1
        assert (e1 | ~e1) == CylinderSet.full()

    def test_canonical_checks(self):
        with pytest.raises(BernoulliError):
            CylinderSet((Coord(0, word("a")), Coord(0, word("e"))), 0b0110)
        with pytest.raises(WindowTooLarge):
            CylinderSet.from_table([Coord(n, word("e")) for n in range(21)], np.zeros(2 ** 21, bool))

    def test_coord_parsing(self):
        assert Coord.parse("(0,ab)") == Coord.parse("0:ab") == Coord(0, word("ab"))
        assert str(Coord.parse("1:a^-1")) == "1:A"
        assert parse_window("0:e;0:a") == [Coord(0, word("e")), Coord(0, word("a"))]
        assert parse_window("") == []

    @given(cylinders(), cylinders())
    def test_ops_match_pointwise(self, a, b):
        coords = sorted(set(a.support) | set(b.support))
        rng = random.Random(0)
        for _ in range(8):
            x = {c: rng.randint(0, 1) for c in coords}
            pa, pb = pointwise(a, x), pointwise(b, x)
            for s, v in ((a & b, pa and pb), (a | b, pa or pb), (a ^ b, pa != pb),
                         (a - b, pa and not pb), (~a, not pa)):
                assert pointwise(s, {c: x[c] for c in s.support}) == v

    @given(cylinders(), cylinders())
    def test_measure_modular(self, a, b):
        assert cyl_measure(a | b) + cyl_measure(a & b) == cyl_measure(a) + cyl_measure(b)


class TestShift:
    def test_examples(self):
        e1 = lit("0:e")
        assert shift("a", e1) == lit("0:a")
        assert shift("e", e1) == e1
        assert shift("A", shift("a", e1)) == e1

    @settings(max_examples=200)
    @given(group_words, group_words, cylinders())
    def test_action_law(self, g1, g2, a):
        assert shift(mul(g1, g2), a) == shift(g1, shift(g2, a))

    @given(group_words, cylinders())
    def test_measure_preserved(self, g, a):
        assert cyl_measure(shift(g, a)) == cyl_measure(a)

    @given(group_words, cylinders(), cylinders())
    def test_commutes_with_boolean_ops(self, g, a, b):
        assert shift(g, a & b) == shift(g, a) & shift(g, b)
        assert shift(g, a | b) == shift(g, a) | shift(g, b)
        assert shift(g, a ^ b) == shift(g, a) ^ shift(g, b)
        assert shift(g, ~a) == ~shift(g, a)


class TestIndependence:
    def test_examples(self):
        assert independence_check(lit("0:e"), lit("0:a")).independent
        a = lit("0:e") | lit("1:e")
        res = independence_check(a, a)
        assert not res.independent and res.lhs == F(3, 4) and res.rhs == F(9, 16)
        assert independence_check(CylinderSet.full(), CylinderSet.full()).independent

    def test_shifted_copy(self):
        a = lit("0:b") & ~lit("1:b")
        assert independence_check(a, shift("a", a)).independent

    @settings(max_examples=200)
    @given(st.data())
    def test_disjoint_columns(self, data):
        g, h = data.draw(st.lists(st.sampled_from(COLUMNS), min_size=2, max_size=2, unique=True))
        a, b = data.draw(in_column(g)), data.draw(in_column(h))
        res = independence_check(a, b)
        assert res.independent and res.lhs == res.rhs


class TestFactorization:
    def test_half_measures(self):
        rep = joint_type_factorization([lit("0:e")], [lit("0:a")])
        assert rep.ok
        assert rep.joint.weights == (F(1, 4),) * 4

    def test_empty_tuple(self):
        assert joint_type_factorization([], [lit("0:a")]).ok
        assert joint_type_factorization([], []).ok

    def test_overlap_rejected(self):
        with pytest.raises(BernoulliError):
            joint_type_factorization([lit("0:a")], [lit("1:a")])
        with pytest.raises(BernoulliError):
            joint_type_factorization([lit("0:a") & lit("0:b")], [lit("1:e")])

    def test_cyl_type_matches_interval_type(self):
        # the depth-2 embedding of a window turns cylinder types into interval types
        _, _, emb = generator_iets(parse_window("0:e;0:a"))
        sets = [lit("0:e"), lit("0:a") | ~lit("0:e")]
        assert cyl_qf_type(sets) == qf_type([emb.embed(s) for s in sets])

    @settings(max_examples=200)
    @given(st.data())
    def test_random_disjoint_columns(self, data):
        g, h = data.draw(st.lists(st.sampled_from(COLUMNS), min_size=2, max_size=2, unique=True))
        n1, n2 = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
        left = [data.draw(in_column(g)) for _ in range(n1)]
        right = [data.draw(in_column(h)) for _ in range(n2)]
        rep = joint_type_factorization(left, right)
        assert rep.ok
        assert len(rep.order) == n1 + n2


def all_cylinders(window):
    k = len(window)
    for t in range(2 ** (2 ** k)):
        bits = [(t >> i) & 1 for i in range(2 ** k)]
        yield CylinderSet.from_table(window, np.array(bits, dtype=bool))


class TestGenerators:
    def test_two_coordinate_window(self):
        W = parse_window("0:e;0:a")
        T1, T2, emb = generator_iets(W)
        assert emb.orders["a"] == (Coord(0, word("e")), Coord(0, word("a")), Coord(0, word("aa")))
        count = 0
        for A in all_cylinders(W):
            assert apply(T1, emb.embed(A)) == emb.embed(shift("a", A), "a")
            assert apply(T2, emb.embed(A)) == emb.embed(shift("b", A), "b")
            count += 1
        assert count == 16

    def test_single_coordinate(self):
        T1, _, emb = generator_iets(parse_window("0:e"))
        assert apply(T1, emb.embed(lit("0:e"))) == emb.embed(lit("0:a"), "a")

    def test_empty_window(self):
        T1, T2, _ = generator_iets([])
        assert T1 == Iet.identity() and T2 == Iet.identity()

    def test_measure_of_embedding(self):
        _, _, emb = generator_iets(parse_window("0:e;0:a;1:b"))
        for A in [lit("0:e"), lit("0:a") & lit("1:b"), lit("0:e") ^ lit("1:b")]:
            assert measure(emb.embed(A)) == cyl_measure(A)

    @pytest.mark.parametrize("text", ["0:e", "0:e;0:a", "0:e;0:a;0:b", "0:e;0:a;0:A;0:b",
                                      "0:e;1:e;0:ab;1:B", "0:a;0:aa;0:b;1:ba"])
    def test_exhaustive_intertwining(self, text):
        _, _, emb = generator_iets(parse_window(text))
        for g in "ab":
            rep = check_intertwining(emb, g)
            assert rep.exhaustive and rep.ok
            assert rep.checked == 2 ** (2 ** len(emb.window))

    def test_vectorized_check_matches_iet_apply(self):
        W = parse_window("0:e;0:b;1:a")
        T1, T2, emb = generator_iets(W)
        rng = np.random.default_rng(3)
        for _ in range(20):
            A = CylinderSet.from_table(W, rng.integers(0, 2, 8).astype(bool))
            assert apply(T1, emb.embed(A)) == emb.embed(shift("a", A), "a")
            assert apply(T2, emb.embed(A)) == emb.embed(shift("b", A), "b")

    def test_sampled_for_larger_windows(self):
        _, _, emb = generator_iets(parse_window("0:e;0:a;0:b;1:e;1:a;1:b"))
        rep = check_intertwining(emb, "a", samples=64, seed=1)
        assert rep.ok and not rep.exhaustive and rep.checked == 64

    def test_broken_permutation_is_caught(self):
        _, _, emb = generator_iets(parse_window("0:e;0:a"))
        emb.perms["a"] = list(range(len(emb.perms["a"])))
        assert not check_intertwining(emb, "a").ok

    def test_window_too_large(self):
        W = [Coord(n, word(g)) for n in range(3) for g in ("e", "a", "b", "ab", "ba", "bb")]
        with pytest.raises(WindowTooLarge):
            generator_iets(W)
