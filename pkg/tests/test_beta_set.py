from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polydisc_carleson import PolydiscError
from polydisc_carleson.beta_set import BetaSet, ParseError, as_exact, inf

endpoints = st.integers(min_value=-6, max_value=18).map(lambda k: Fraction(k, 6))
twelfths = st.integers(min_value=-12, max_value=48).map(lambda k: Fraction(k, 12))


@st.composite
def intervals(draw):
    lo = draw(endpoints)
    hi = draw(st.one_of(endpoints, st.just(inf)))
    return lo, draw(st.booleans()), hi, draw(st.booleans())


beta_sets = st.lists(intervals(), max_size=4).map(BetaSet)


def test_str_and_membership():
    j_discont = BetaSet.interval(-1, Fraction(-2, 3), hi_closed=False)
    assert str(j_discont) == '[-1, -2/3)'
    assert -1 in j_discont
    assert Fraction(-2, 3) not in j_discont
    assert '-0.7' in j_discont
    assert str(BetaSet.closed_from(0) | BetaSet.point(-1)) == '{-1} U [0, inf)'
    assert str(BetaSet.empty()) == '{}'


def test_merge_rules():
    assert BetaSet.interval(0, 1) | BetaSet.interval(1, 2, lo_closed=False, hi_closed=False) == \
        BetaSet.interval(0, 2, hi_closed=False)
    split = BetaSet.interval(0, 1, hi_closed=False) | BetaSet.interval(1, 2, lo_closed=False)
    assert len(split.intervals) == 2
    assert 1 not in split
    joined = BetaSet.interval(0, 1, hi_closed=False) | BetaSet.interval(1, 2)
    assert joined == BetaSet.interval(0, 2)


def test_complement_and_infimum():
    assert ~BetaSet.point(-1) == BetaSet.open_from(-1)
    assert ~BetaSet.universe() == BetaSet.empty()
    assert ~BetaSet.closed_from(Fraction(-1, 2)) == BetaSet.interval(-1, Fraction(-1, 2), hi_closed=False)
    assert BetaSet.open_from(-1).infimum() == (Fraction(-1), False)
    assert BetaSet.closed_from(Fraction(-3, 4)).infimum() == (Fraction(-3, 4), True)
    assert BetaSet.empty().infimum() == (None, False)


def test_json_round_trip():
    s = BetaSet.interval(-1, Fraction(-5, 6), hi_closed=False) | BetaSet.closed_from(Fraction(-1, 2))
    assert BetaSet.from_json(s.to_json()) == s
    assert s.to_json()[-1]['hi'] == 'inf'


def test_as_exact():
    assert as_exact('-1/2') == Fraction(-1, 2)
    assert as_exact('inf') == inf
    assert as_exact(0.25) == Fraction(1, 4)
    with pytest.raises(PolydiscError):
        as_exact(float('-inf'))
    for bad in ('abc', '1//2', None, float('nan')):
        with pytest.raises(ParseError):
            as_exact(bad)


def test_below_floor_raises():
    with pytest.raises(PolydiscError):
        BetaSet.closed_from(-2)


@given(beta_sets, beta_sets, twelfths)
def test_set_operations_match_membership(a, b, x):
    assert (x in (a | b)) == (x in a or x in b)
    assert (x in (a & b)) == (x in a and x in b)
    assert (x in (a - b)) == (x in a and x not in b)
    assert (x in ~a) == (x not in a)


@given(beta_sets, beta_sets)
def test_canonical_form(a, b):
    assert ~~a == a
    assert a | b == b | a
    assert a.isdisjoint(~a)
    assert a | ~a == BetaSet.universe()
