from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixlab.errors import EmptySetError, PartiallyUndefined, PreconditionError
from mixlab.maps import (
    PiecewiseTranslation,
    combine,
    compose,
    disagreement,
    dump_translation,
    iterate,
    load_translation,
    normalized_transport,
    piecewise_equal,
)
from mixlab.sets import IntervalSet


def iset(*pairs):
    return IntervalSet.from_pairs(pairs)


def rotation_by(p, q):
    step = F(p, q)
    return PiecewiseTranslation.from_pairs([(0, 1 - step, step), (1 - step, 1, step - 1)])


HALF_SWAP = PiecewiseTranslation.from_pairs([(0, F(1, 2), F(1, 2)), (F(1, 2), 1, F(-1, 2))])


def test_image_examples():
    assert rotation_by(1, 2).image(iset((0, F(1, 4)))) == iset((F(1, 2), F(3, 4)))
    ident = PiecewiseTranslation.identity()
    s = iset((F(1, 8), F(1, 3)))
    assert ident.image(s) == s
    assert HALF_SWAP.image(iset((0, F(1, 2)))) == iset((F(1, 2), 1))


def test_image_partial_raises():
    partial = PiecewiseTranslation.from_pairs([(0, F(1, 2), F(1, 2))])
    with pytest.raises(PartiallyUndefined) as exc:
        partial.image(iset((F(1, 4), F(3, 4))))
    assert exc.value.blocking_measure == F(1, 4)


def test_iterate_examples():
    m = rotation_by(1, 3)
    assert iterate(m, 0) == PiecewiseTranslation.identity(m.domain())
    quarter_cycle = PiecewiseTranslation.from_pairs(
        [(0, F(1, 4), F(1, 4)), (F(1, 4), F(1, 2), F(1, 4)),
         (F(1, 2), F(3, 4), F(1, 4)), (F(3, 4), 1, F(-3, 4))]
    )
    assert iterate(quarter_cycle, 4) == PiecewiseTranslation.identity()
    inv_then = compose(iterate(m, -1), m)
    assert piecewise_equal(inv_then, PiecewiseTranslation.identity(m.domain()))


def test_iterate_negative_matches_inverse_powers():
    m = HALF_SWAP
    assert iterate(m, -2) == iterate(m.invert(), 2)


def test_transport_equal_measure():
    t = normalized_transport(iset((0, F(1, 2))), iset((F(1, 2), 1)))
    assert len(t.pieces) == 1
    assert t.pieces[0].scale == 1
    assert t.pieces[0].offset == F(1, 2)


def test_transport_pushforward_of_normalized_measure():
    src = iset((0, F(1, 2)))
    dst = iset((0, F(1, 4)))
    t = normalized_transport(src, dst)
    assert len(t.pieces) == 1 and t.pieces[0].scale == F(1, 2) and t.pieces[0].offset == 0
    for sub in [iset((0, F(1, 8))), iset((F(1, 8), F(1, 4))), iset((F(1, 3), F(1, 2)))]:
        img = t.image(sub)
        assert img.measure() / dst.measure() == sub.measure() / src.measure()


def test_transport_two_piece_bijection():
    src = iset((0, F(1, 4)), (F(1, 2), F(3, 4)))
    dst = iset((0, F(1, 2)))
    t = normalized_transport(src, dst)
    assert all(p.scale == 1 for p in t.pieces)
    assert t.image(src) == dst
    assert t.domain() == src
    # images of the two pieces tile dst disjointly
    imgs = [IntervalSet((p.image,)) for p in t.pieces]
    assert imgs[0].intersect(imgs[1]).is_empty()


def test_transport_round_trip_identity():
    src = iset((0, F(1, 3)), (F(1, 2), F(2, 3)))
    dst = iset((F(1, 6), F(1, 4)), (F(3, 4), 1))
    t = normalized_transport(src, dst)
    back = normalized_transport(dst, src)
    assert piecewise_equal(compose(back, t), PiecewiseTranslation.identity(src))


def test_transport_empty_errors():
    with pytest.raises(EmptySetError):
        normalized_transport(IntervalSet.empty(), iset((0, F(1, 2))))


def test_combine_disjoint():
    left = PiecewiseTranslation.from_pairs([(0, F(1, 4), F(1, 4))])
    right = PiecewiseTranslation.from_pairs([(F(1, 2), F(3, 4), F(1, 4))])
    both = combine([left, right])
    assert both.domain() == iset((0, F(1, 4)), (F(1, 2), F(3, 4)))
    with pytest.raises(PreconditionError):
        combine([left, left])


dyadic_fracs = st.integers(min_value=0, max_value=32).map(lambda k: F(k, 32))


@st.composite
def dyadic_sets(draw):
    points = sorted(draw(st.sets(dyadic_fracs, min_size=2, max_size=8)))
    pairs = list(zip(points[::2], points[1::2]))
    return IntervalSet.from_pairs([(a, b) for a, b in pairs if a < b])


@st.composite
def dyadic_translations(draw):
    """A random measure-preserving rearrangement of dyadic blocks."""
    k = draw(st.integers(min_value=1, max_value=4))
    n = 2 ** k
    perm = draw(st.permutations(list(range(n))))
    return PiecewiseTranslation.from_pairs(
        [(F(i, n), F(i + 1, n), F(perm[i] - i, n)) for i in range(n)]
    )


@given(dyadic_translations(), dyadic_sets())
@settings(max_examples=150, deadline=None)
def test_measure_preservation(m, s):
    assert m.image(s).measure() == s.measure()


@given(dyadic_translations(), dyadic_sets(), st.integers(min_value=-16, max_value=16))
@settings(max_examples=150, deadline=None)
def test_iterate_matches_repeated_image(m, s, n):
    stepped = s
    step = m if n >= 0 else m.invert()
    for _ in range(abs(n)):
        stepped = step.image(stepped)
    assert iterate(m, n).image(s) == stepped


@given(dyadic_translations(), dyadic_sets(), st.integers(min_value=1, max_value=8))
@settings(max_examples=150, deadline=None)
def test_correlation_symmetry(m, a, n):
    fwd = iterate(m, n).image(a).intersect(a).measure()
    bwd = iterate(m, -n).image(a).intersect(a).measure()
    assert fwd == bwd


def test_disagreement_definedness_mismatch():
    full = rotation_by(1, 2)
    partial = PiecewiseTranslation.from_pairs([(0, F(1, 2), F(1, 2))])
    d = disagreement(full, partial)
    assert d == iset((F(1, 2), 1))
    assert piecewise_equal(full.restrict(iset((0, F(1, 2)))), partial)


def test_disagreement_law_mismatch():
    a = rotation_by(1, 2)
    b = PiecewiseTranslation.from_pairs(
        [(0, F(1, 2), F(1, 2)), (F(1, 2), F(3, 4), F(-1, 4)), (F(3, 4), 1, F(-3, 4))]
    )
    d = disagreement(a, b)
    assert d == iset((F(1, 2), 1))


def test_translation_serialization_round_trip():
    m = PiecewiseTranslation.from_pairs(
        [(0, F(1, 7), F(3, 7)), (F(1, 7), F(2, 7), F(-1, 7)), (F(5, 7), 1, F(-4, 7))]
    )
    text = dump_translation(m)
    assert load_translation(text) == m
    assert dump_translation(load_translation(text)) == text


def test_residual_is_complement_of_domain():
    m = PiecewiseTranslation.from_pairs([(0, F(1, 4), F(1, 2))])
    assert m.undefined_residual == iset((F(1, 4), 1)).difference(IntervalSet.empty())
    assert m.domain().union(m.undefined_residual) == IntervalSet.unit()
