from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from malgkit.malg import Iet, MSet, normalize

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DENOMS = (1, 2, 3, 4, 6, 8, 12)


@st.composite
def rationals01(draw, denoms=DENOMS):
    q = draw(st.sampled_from(denoms))
    return Fraction(draw(st.integers(0, q)), q)


@st.composite
def msets(draw, max_intervals=4):
    pairs = draw(st.lists(st.tuples(rationals01(), rationals01()), max_size=max_intervals))
    return normalize([(min(a, b), max(a, b)) for a, b in pairs])


@st.composite
def iets(draw, max_pieces=5):
    cuts = sorted(set(draw(st.lists(rationals01(), max_size=max_pieces - 1))) - {0, 1})
    pts = [Fraction(0), *cuts, Fraction(1)]
    srcs = list(zip(pts, pts[1:]))
    order = draw(st.permutations(range(len(srcs))))
    pieces = []
    pos = Fraction(0)
    for k in order:
        lo, hi = srcs[k]
        pieces.append((lo, hi, pos - lo))
        pos += hi - lo
    return Iet(tuple(pieces))


@st.composite
def partitions(draw, n=None, q=None):
    """n sets partitioning [0,1) along the grid 1/q (parts may be empty)."""
    n = n if n is not None else draw(st.integers(1, 5))
    q = q if q is not None else draw(st.sampled_from((2, 3, 4, 6, 8, 12)))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=q, max_size=q))
    return _from_labels(labels, n, q)


def _from_labels(labels, n, q):
    return [normalize([(Fraction(k, q), Fraction(k + 1, q)) for k, l in enumerate(labels) if l == i])
            for i in range(n)]


@st.composite
def equal_measure_partitions(draw, max_n=5):
    """Two partitions with the same measure vector; the second may use a finer grid."""
    n = draw(st.integers(1, max_n))
    q = draw(st.sampled_from((2, 3, 4, 6, 8, 12)))
    labels = draw(st.lists(st.integers(0, n - 1), min_size=q, max_size=q))
    r = draw(st.sampled_from((1, 2, 3)))
    fine = [l for l in labels for _ in range(r)]
    shuffled = draw(st.permutations(fine))
    return _from_labels(labels, n, q), _from_labels(list(shuffled), n, q * r)


@st.composite
def tuples(draw, n=None, max_n=3):
    n = n if n is not None else draw(st.integers(1, max_n))
    return [draw(msets()) for _ in range(n)]


@st.composite
def dyadic_msets(draw, depth=3):
    q = 2 ** depth
    bits = draw(st.lists(st.booleans(), min_size=q, max_size=q))
    return normalize([(Fraction(k, q), Fraction(k + 1, q)) for k, b in enumerate(bits) if b])


FULL = MSet.full()
EMPTY = MSet.empty()
