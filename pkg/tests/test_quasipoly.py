from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partwhole.errors import OutOfDomainError, UndefinedDifferenceError
from partwhole.quasipoly import (
    QuasiPolynomial,
    newton_coeffs,
    newton_eval,
    qp_add,
    qp_compare,
    qp_eval,
    qp_mul,
    qp_sub,
)
from partwhole.verdict import Relation

FLOOR2 = QuasiPolynomial.floor_div(2)
CEIL2 = QuasiPolynomial.fit(lambda n: (n + 1) // 2, 2, 1, 1)
SQUARE = QuasiPolynomial.polynomial((0, 1, 2))
LINEAR = QuasiPolynomial.polynomial((0, 1))
TWO_N_PLUS_ONE = QuasiPolynomial.polynomial((1, 2))


def test_eval_examples():
    assert qp_eval(FLOOR2, 7) == 3
    assert qp_eval(SQUARE, 9) == 81
    assert qp_eval(TWO_N_PLUS_ONE, 4) == 9


def test_eval_below_threshold():
    q = QuasiPolynomial.polynomial((0, 1), threshold=5)
    with pytest.raises(OutOfDomainError):
        qp_eval(q, 4)
    assert qp_eval(q, 5) == 5


def test_newton_roundtrip():
    values = [3, 1, 4, 1, 5, 9]
    c = newton_coeffs(values)
    assert [newton_eval(c, q) for q in range(len(values))] == values


def test_floor_plus_ceil_is_identity():
    s = qp_add(FLOOR2, CEIL2)
    assert s.period == 1
    assert s == LINEAR


def test_add_zero():
    zero = QuasiPolynomial.constant(0)
    assert qp_add(FLOOR2, zero) == FLOOR2


def test_mul_floor_ceil_values():
    p = qp_mul(FLOOR2, CEIL2)
    assert p.period == 2
    assert [p(n) for n in range(1, 10)] == [0, 1, 2, 4, 6, 9, 12, 16, 20]


def test_normal_form_has_minimal_period():
    q = QuasiPolynomial(6, 1, tuple((r, 6) for r in range(6)))
    assert q.normalized().period == 1
    lifted = LINEAR.lift(4)
    assert lifted.period == 4 and lifted.normalized() == LINEAR


def test_fit_rejects_wrong_shape():
    with pytest.raises(ValueError):
        QuasiPolynomial.fit(lambda n: n * n, 1, 1, 1)


def test_compare_examples():
    v = qp_compare(FLOOR2, CEIL2)
    assert v.relation is Relation.LESS_EQ
    assert dict(v.classes) == {0: 0, 1: -1}
    assert qp_compare(LINEAR, LINEAR).relation is Relation.EQUAL
    assert qp_compare(LINEAR, SQUARE).relation is Relation.LESS


def test_incomparable_has_proof():
    b_plus_one = QuasiPolynomial.fit(lambda n: 2 * (n // 2) + 1, 2, 1, 1)
    c = QuasiPolynomial.fit(lambda n: 2 * ((n + 1) // 2), 2, 1, 1)
    v = qp_compare(c, b_plus_one)
    assert v.relation is Relation.INCOMPARABLE
    neg, pos = v.proof
    assert c(2) < b_plus_one(2) and neg == 0
    assert c(3) > b_plus_one(3) and pos == 1


def test_sub_and_undefined_difference():
    d = qp_sub(SQUARE, LINEAR)
    assert [d(n) for n in range(2, 6)] == [n * n - n for n in range(2, 6)]
    with pytest.raises(UndefinedDifferenceError):
        qp_sub(LINEAR, SQUARE)
    with pytest.raises(UndefinedDifferenceError):
        qp_sub(FLOOR2, CEIL2)


def test_str_forms():
    assert str(TWO_N_PLUS_ONE) == "2n + 1"
    assert "mod 2" in str(FLOOR2)


# random quasi-polynomials with small coefficients ---------------------

qps = st.builds(
    lambda period, cls, thr: QuasiPolynomial(period, thr, tuple(cls[:period])),
    st.integers(1, 4),
    st.lists(st.lists(st.integers(-6, 6), min_size=0, max_size=3).map(tuple),
             min_size=4, max_size=4),
    st.integers(0, 5),
)


@settings(max_examples=150, deadline=None)
@given(qps, qps)
def test_add_mul_commute_with_evaluation(a, b):
    s, p = qp_add(a, b), qp_mul(a, b)
    start = max(a.threshold, b.threshold, 1)
    for n in range(start, start + 30):
        assert s(n) == a(n) + b(n)
        assert p(n) == a(n) * b(n)


@settings(max_examples=150, deadline=None)
@given(qps, qps)
def test_compare_never_contradicted_by_scan(a, b):
    v = qp_compare(a, b)
    if v.relation is Relation.INCOMPARABLE:
        neg, pos = v.proof
        start = max(a.threshold, b.threshold, 1) + 10**4 * v.period
        assert a.raw(start + (neg - start) % v.period) < b.raw(start + (neg - start) % v.period)
        assert a.raw(start + (pos - start) % v.period) > b.raw(start + (pos - start) % v.period)
        return
    op = v.relation.pointwise
    for n in range(v.witness_m + 1, v.witness_m + 2000):
        assert op(a.raw(n), b.raw(n)), (n, v)


@settings(max_examples=100, deadline=None)
@given(qps)
def test_normalized_is_equivalent(a):
    b = a.normalized()
    assert b.period <= a.period and a.period % b.period == 0
    for n in range(1, 40):
        assert a.raw(n) == b.raw(n)
