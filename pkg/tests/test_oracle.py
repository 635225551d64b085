from fractions import Fraction as F

import pytest

from partwhole import oracle
from partwhole.errors import NonCanonicalError, ResourceLimitError
from partwhole.expr import Atom, BinOp, Finite
from partwhole.sets import build

I = Atom("I")


def test_enumerate_unit_interval():
    inv = oracle.enumerate(I, 4)
    assert {x for x, _ in inv.entries} == {F(1), F(1, 2), F(1, 3), F(2, 3), F(1, 4), F(3, 4)}
    assert inv.counts() == [1, 1, 2, 2]


def test_enumerate_empty_expression():
    inv = oracle.enumerate(BinOp("minus", Atom("N"), Atom("N")), 10)
    assert len(inv) == 0 and inv.sigma() == [0] * 10


def test_enumerate_product_of_even_and_odd():
    inv = oracle.enumerate(BinOp("product", Atom("E"), Atom("O")), 6)
    assert len(inv) == 9


def test_brute_sigma_examples():
    assert oracle.brute_sigma(Atom("Z"), 5) == [3, 5, 7, 9, 11]
    assert oracle.brute_sigma(Finite((3, 4)), 6) == [0, 0, 1, 2, 2, 2]
    assert oracle.brute_sigma(Atom("Qpos"), 9) == [2, 6, 16, 30, 60, 84, 144, 198, 280]


def test_label_conflict_detected():
    with pytest.raises(NonCanonicalError):
        oracle.enumerate(BinOp("union", Atom("Q"), Atom("Qpos")), 3)


def test_resource_limit():
    with pytest.raises(ResourceLimitError):
        oracle.enumerate(BinOp("product", Atom("Qpos"), Atom("Qpos")), 30, limit=10**5)


def test_primitives():
    assert oracle.prime_count(100) == 25
    assert [oracle.phi_by_gcd(n) for n in range(1, 10)] == [1, 1, 2, 2, 4, 2, 6, 4, 6]
    assert oracle.is_prime_trial(97) and not oracle.is_prime_trial(91)


@pytest.mark.parametrize("text", ["I", "Qpos", "Q", "Z", "P", "S(2)", "E x O"])
def test_inventory_counts_match_characteristic(text):
    from partwhole.cli import parse
    expr = parse(f"size {text}").sets[0]
    inv = oracle.enumerate(expr, 30)
    assert inv.counts() == build(expr).characteristic().prefix(30)
