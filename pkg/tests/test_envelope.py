from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partwhole.envelope import (
    EnvelopeCertificate,
    EnvelopeTerm,
    certainly_less,
    crossover,
    env_compare,
)
from partwhole.errors import CertificateError

N = EnvelopeTerm(1)
N_OVER_LN = EnvelopeTerm(1, 1, -1)
SQRT = EnvelopeTerm(1, Fraction(1, 2))


def _value(t: EnvelopeTerm, n: int):
    with mpmath.workdps(60):
        coef = mpmath.mpf(t.coef.numerator) / t.coef.denominator
        exp = mpmath.mpf(t.exp.numerator) / t.exp.denominator
        return +(coef * mpmath.power(n, exp) * mpmath.log(n) ** t.log_exp)


def _brute_crossover(f, g, upto):
    last = 0
    for n in range(2, upto):
        if not _value(f, n) < _value(g, n):
            last = n
    return last


def test_crossover_examples():
    # derived by an mpmath scan
    assert crossover(EnvelopeTerm(3, 1, -1), EnvelopeTerm(Fraction(1, 2))) == 403
    assert crossover(SQRT, N_OVER_LN) == 1
    assert crossover(N, EnvelopeTerm(2)) == 0


def test_crossover_matches_mpmath_scan():
    f, g = EnvelopeTerm(3, 1, -1), EnvelopeTerm(Fraction(1, 2))
    assert crossover(f, g) == _brute_crossover(f, g, 1000)


def test_crossover_requires_dominance():
    with pytest.raises(CertificateError):
        crossover(EnvelopeTerm(2), N)


def test_env_compare_identical_terms_is_none():
    assert env_compare(N, N) is None
    assert env_compare(N, EnvelopeTerm(2), thresholds=(11, 5)) == 10


def test_undefined_at_one_fails():
    assert not certainly_less(SQRT, N_OVER_LN, 1)
    assert N_OVER_LN.at_one() is None
    assert EnvelopeTerm(1, 1, 1).at_one() == 0


def test_term_text():
    assert str(EnvelopeTerm(Fraction(1, 2), Fraction(1, 3))) == "(1/2)·n^(1/3)"
    assert str(N_OVER_LN) == "n/(ln n)"
    assert str(EnvelopeTerm(2, 2)) == "2·n^(2)"


terms = st.builds(
    EnvelopeTerm,
    st.fractions(min_value=Fraction(1, 8), max_value=8).filter(lambda c: c > 0),
    st.sampled_from([Fraction(1, 3), Fraction(1, 2), Fraction(1), Fraction(2)]),
    st.integers(-1, 1),
)


@given(terms, terms, terms)
def test_dominance_is_strict_weak_order(a, b, c):
    assert not a.precedes(a)
    if a.precedes(b):
        assert not b.precedes(a)
    if a.precedes(b) and b.precedes(c):
        assert a.precedes(c)


@settings(max_examples=60, deadline=None)
@given(terms, terms, st.integers(2, 10**6))
def test_certainly_less_is_sound(f, g, n):
    if certainly_less(f, g, n):
        assert _value(f, n) < _value(g, n)


@settings(max_examples=30, deadline=None)
@given(terms, terms)
def test_crossover_witness_is_sound(f, g):
    if not f.precedes(g) or (f.exp, f.log_exp) == (g.exp, g.log_exp) and g.coef / f.coef < 2:
        return
    m = crossover(f, g)
    for n in range(m + 1, m + 200):
        assert _value(f, n) < _value(g, n)
    if m >= 2:
        assert not _value(f, m) < _value(g, m)


def _squares(lo, hi):
    return np.arange(lo, hi + 1, dtype=np.uint64) ** 2


def test_audit_accepts_exact_boundary():
    EnvelopeCertificate(EnvelopeTerm(1, 2), EnvelopeTerm(1, 2), 1, "squares").audit(_squares, 5000)


def test_audit_reports_violation():
    cert = EnvelopeCertificate(EnvelopeTerm(1, 2), EnvelopeTerm(2, 2), 1)
    with pytest.raises(CertificateError, match="n=1"):
        EnvelopeCertificate(EnvelopeTerm(2, 2), EnvelopeTerm(3, 2), 1).audit(_squares, 10)
    cert.audit(_squares, 100)

    def shifted(lo, hi):
        out = _squares(lo, hi)
        if lo <= 77 <= hi:
            out[77 - lo] = 3 * 77 * 77
        return out

    with pytest.raises(CertificateError, match="n=77"):
        cert.audit(shifted, 100)


def test_certificate_product_and_text():
    a = EnvelopeCertificate(EnvelopeTerm(Fraction(1, 2)), N, 3, "a")
    b = EnvelopeCertificate(N, EnvelopeTerm(2), 5, "b")
    p = a * b
    assert p.lower == EnvelopeTerm(Fraction(1, 2), 2) and p.upper == EnvelopeTerm(2, 2)
    assert p.threshold == 5
    assert str(p) == "(1/2)·n^(2) ≤ σ_n ≤ 2·n^(2) for n ≥ 5"
