from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partwhole.logbounds import interval_mul, ln2_bounds, ln_bounds, ln_interval, scale

def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _encloses(x, bits):
    lo, hi = ln_bounds(x, bits)
    with mpmath.workdps(200):
        true = mpmath.log(_mp(Fraction(x)))
        return lo, hi, _mp(lo) <= true <= _mp(hi)


@pytest.mark.parametrize("x", [2, 3, 10, 403, 10**6, 2**64 - 1, Fraction(1, 3), Fraction(7, 5)])
@pytest.mark.parametrize("bits", [64, 160, 480])
def test_enclosure_against_mpmath(x, bits):
    lo, hi, ok = _encloses(x, bits)
    assert ok
    assert hi - lo < Fraction(1, 2 ** (bits - 8)) * max(1, abs(lo) + 1)


def test_ln_one_is_exact():
    assert ln_bounds(1) == (0, 0)


def test_ln2_is_cached_and_tight():
    lo, hi = ln2_bounds(64)
    assert ln2_bounds(64) is ln2_bounds(64)
    assert hi - lo < Fraction(1, 2**60)


def test_nonpositive_rejected():
    with pytest.raises(ValueError):
        ln_bounds(0)
    with pytest.raises(ValueError):
        ln_bounds(Fraction(-1, 2))


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=Fraction(1, 10**9), max_value=10**15))
def test_enclosure_property(x):
    if x <= 0:
        return
    assert _encloses(x, 64)[2]


@given(st.integers(2, 10**12), st.integers(2, 10**12))
def test_monotone_interval(a, b):
    a, b = sorted((a, b))
    lo, hi = ln_interval(a, b)
    assert lo <= ln_bounds(a)[1] and ln_bounds(b)[0] <= hi


def test_interval_helpers():
    assert interval_mul((Fraction(-1), Fraction(2)), (Fraction(3), Fraction(4))) == (-4, 8)
    assert scale(Fraction(-2), (Fraction(1), Fraction(3))) == (-6, -2)
