from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from loopquant.errors import InputError
from loopquant.series import TruncatedSeries, Window, decode, encode, make_mono

W = Window(N=2, K=3, D=4, G=1, L=5)
VARS = W.variables()


@st.composite
def series(draw, graded=False, nilpotent=False):
    n = draw(st.integers(0, 6))
    terms = {}
    for _ in range(n):
        deg = draw(st.integers(1 if nilpotent else 0, 3))
        idx = tuple(draw(st.sampled_from(VARS)) for _ in range(deg))
        g = draw(st.integers(0, 1)) if graded else 0
        terms[(g, make_mono(idx))] = Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4)))
    return TruncatedSeries(W, terms, graded)


def test_encode_roundtrip():
    for mu in range(1, 5):
        for k in range(0, 20):
            assert decode(encode(mu, k)) == (mu, k)


def test_window_rejects_bad_fields():
    with pytest.raises(InputError):
        Window(N=0, K=1, D=1)
    with pytest.raises(InputError):
        Window(N=1, K=-1, D=1)


def test_truncation_drops_out_of_window_terms():
    s = TruncatedSeries.from_indices(W, {((1, 3), (2, 3)): 1, ((1, 1),): 2})
    assert len(s) == 1 and s.coeff(make_mono([(1, 1)])) == 2


def test_ungraded_rejects_grade():
    with pytest.raises(InputError):
        TruncatedSeries(W, {(1, ()): 1})


@given(series(), series(), series())
@settings(max_examples=60, deadline=None)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == TruncatedSeries.zero(W)


@given(series(nilpotent=True))
@settings(max_examples=40, deadline=None)
def test_exp_log_inverse(x):
    assert x.exp().log() == x


@given(series(graded=True, nilpotent=True))
@settings(max_examples=40, deadline=None)
def test_graded_exp_log_inverse(x):
    assert x.exp().log() == x


def test_exp_rejects_constant():
    with pytest.raises(InputError):
        TruncatedSeries.constant(W, 1).exp()


@given(series(graded=True))
@settings(max_examples=40, deadline=None)
def test_json_roundtrip(x):
    assert TruncatedSeries.from_json(x.to_json()) == x


def test_leibniz():
    a = TruncatedSeries.from_indices(W, {((1, 0), (1, 0)): 3, ((2, 1),): 1})
    b = TruncatedSeries.from_indices(W, {((1, 0),): 1, ((2, 0), (1, 1)): -2})
    lhs = (a * b).derive(1, 0)
    rhs = a.derive(1, 0) * b + a * b.derive(1, 0)
    assert lhs == rhs


def test_grade_part_is_ungraded():
    x = TruncatedSeries.from_indices(W, {(1, ((1, 0),)): 5, (0, ()): 1}, graded=True)
    part = x.grade_part(1)
    assert not part.graded and part.coeff(make_mono([(1, 0)])) == 5
