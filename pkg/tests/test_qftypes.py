from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import EMPTY, FULL, iets, tuples
from malgkit.malg import apply, dist, parse_mset, parse_tuple
from malgkit.qftypes import (ArityError, TypeVector, distance_to_type, net_point, net_resolution,
                             optimal_type_coupling, orbit_distance, qf_type, realize,
                             type_space_net)
from oracles import hamming, transport_dual, transport_primal


@st.composite
def types(draw, n=None, max_n=3, N=None):
    n = n if n is not None else draw(st.integers(1, max_n))
    N = N if N is not None else draw(st.sampled_from((1, 2, 3, 4, 6, 8, 12)))
    cuts = sorted(draw(st.lists(st.integers(0, N), min_size=2 ** n - 1, max_size=2 ** n - 1)))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [N])]
    return TypeVector(n, tuple(F(x, N) for x in parts))


def tv(d):
    return TypeVector.from_dict({k: F(v) for k, v in d.items()})


class TestTypeVector:
    def test_validation(self):
        with pytest.raises(ValueError):
            TypeVector(1, (F(1, 2), F(1, 3)))
        with pytest.raises(ValueError):
            TypeVector(1, (F(3, 2), F(-1, 2)))
        with pytest.raises(ValueError):
            TypeVector(2, (F(1),))
        with pytest.raises(ArityError):
            TypeVector(11, (F(1),) + (F(0),) * (2 ** 11 - 1))

    @given(types())
    def test_json_round_trip(self, p):
        assert TypeVector.from_json(p.to_json()) == p


class TestQfType:
    def test_worked_example(self):
        p = qf_type(parse_tuple("[0,1/3);[1/4,1)"))
        assert p.as_dict() == {"00": F(1, 12), "01": F(1, 4), "10": F(2, 3), "11": F(0)}

    def test_full_and_empty(self):
        assert qf_type([FULL]).as_dict() == {"0": 1, "1": 0}
        assert qf_type([EMPTY, EMPTY]).as_dict() == {"00": 0, "01": 0, "10": 0, "11": 1}

    def test_arity_zero(self):
        with pytest.raises(ArityError):
            qf_type([])

    @given(tuples())
    def test_atoms_by_intersection(self, sets):
        # oracle: build each atom with explicit boolean operations
        p = qf_type(sets)
        n = len(sets)
        for d in range(2 ** n):
            atom = FULL
            for i, s in enumerate(sets):
                atom = atom & (s if not (d >> (n - 1 - i)) & 1 else ~s)
            assert p[d] == atom.measure()

    @given(types())
    def test_realize_round_trip(self, p):
        assert qf_type(realize(p)) == p

    def test_realize_examples(self):
        assert realize(tv({"0": F(1, 2), "1": F(1, 2)})) == [parse_mset("[0,1/2)")]
        assert realize(tv({"00": 0, "01": 0, "10": 0, "11": 1})) == [EMPTY, EMPTY]

    @given(iets(), tuples())
    def test_equivariance(self, t, sets):
        assert qf_type([apply(t, s) for s in sets]) == qf_type(sets)

    @given(types(max_n=4), st.data())
    def test_marginal_consistency(self, p, data):
        k = data.draw(st.integers(0, p.n))
        sets = realize(p)
        if k:
            assert p.marginal(k) == qf_type(sets[:k])


class TestOrbitDistance:
    def test_examples(self):
        assert orbit_distance(tv({"0": F(1, 2), "1": F(1, 2)}), tv({"0": F(1, 4), "1": F(3, 4)})) == F(1, 4)
        p = tv({"00": 0, "01": F(1, 2), "10": F(1, 2), "11": 0})
        q = tv({"00": 0, "01": F(1, 4), "10": F(3, 4), "11": 0})
        assert orbit_distance(p, q) == F(1, 2)
        assert orbit_distance(p, p) == 0

    def test_arity_mismatch(self):
        with pytest.raises(ArityError):
            orbit_distance(tv({"0": 1, "1": 0}), tv({"00": 1, "01": 0, "10": 0, "11": 0}))

    @given(types(max_n=2), types(max_n=2))
    def test_matches_dual_and_primal_oracles(self, p, q):
        if p.n != q.n:
            return
        d = orbit_distance(p, q)
        assert d == transport_dual(p.weights, q.weights, p.n)
        assert d == transport_primal(p.weights, q.weights, p.n)

    @given(types(n=3), types(n=3))
    def test_coupling_is_feasible_and_optimal_value(self, p, q):
        value, coupling = optimal_type_coupling(p, q)
        for i in range(8):
            assert sum((m for (a, _), m in coupling.items() if a == i), F(0)) == p[i]
            assert sum((m for (_, b), m in coupling.items() if b == i), F(0)) == q[i]
        assert value == sum(m * hamming(a, b) for (a, b), m in coupling.items())
        assert all(m > 0 for m in coupling.values())

    @given(st.data())
    def test_metric(self, data):
        n = data.draw(st.integers(1, 3))
        p, q, r = (data.draw(types(n=n)) for _ in range(3))
        assert orbit_distance(p, q) == orbit_distance(q, p)
        assert orbit_distance(p, r) <= orbit_distance(p, q) + orbit_distance(q, r)
        assert (orbit_distance(p, q) == 0) == (p == q)

    @given(st.data())
    def test_contraction(self, data):
        n = data.draw(st.integers(1, 3))
        A, B = data.draw(tuples(n=n)), data.draw(tuples(n=n))
        assert orbit_distance(qf_type(A), qf_type(B)) <= sum(dist(a, b) for a, b in zip(A, B))

    @given(st.data())
    def test_lipschitz_functions_bound_distance(self, data):
        n = data.draw(st.integers(1, 3))
        p, q = data.draw(types(n=n)), data.draw(types(n=n))
        d = orbit_distance(p, q)
        for d0 in range(2 ** n):
            gap = sum((hamming(i, d0) * (p[i] - q[i]) for i in range(2 ** n)), F(0))
            assert abs(gap) <= d
        if n == 1:
            assert d == max(abs(sum((hamming(i, d0) * (p[i] - q[i]) for i in range(2)), F(0)))
                            for d0 in range(2))


class TestDistanceToType:
    def test_examples(self):
        assert distance_to_type([parse_mset("[0,1/2)")], tv({"0": F(1, 4), "1": F(3, 4)})) == F(1, 4)
        assert distance_to_type([EMPTY], tv({"0": 1, "1": 0})) == 1

    @given(types())
    def test_realization_has_distance_zero(self, p):
        assert distance_to_type(realize(p), p) == 0


class TestNet:
    def test_small_examples(self):
        assert len(type_space_net(1, F(1, 2))) <= 5
        assert len(type_space_net(1, 2)) == 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            type_space_net(1, 0)

    @pytest.mark.parametrize("n,eps", [(1, F(1, 2)), (1, F(1, 10)), (2, F(1, 2)), (2, F(1))])
    @given(data=st.data())
    def test_coverage(self, n, eps, data):
        net = set(type_space_net(n, eps))
        p = data.draw(types(n=n, N=data.draw(st.sampled_from((7, 12, 60)))))
        # the rounding point is a member, and some member is within eps
        N = net_resolution(n, eps)
        if eps < n:
            assert net_point(p, N) in net
        assert min(orbit_distance(p, x) for x in net) <= eps

    def test_size_cap(self):
        with pytest.raises(MemoryError):
            type_space_net(4, F(1, 100))
