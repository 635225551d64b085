"""End-to-end acceptance checks, each tagged with the criterion it covers.

The summary printed at the end of the run lists one PASS/FAIL line per
criterion.
"""

import itertools
import json
import math
import random
import subprocess
import sys
import time
from functools import lru_cache
from fractions import Fraction

import numpy as np
import pytest

from partwhole import arith, oracle
from partwhole.envelope import EnvelopeCertificate, EnvelopeTerm
from partwhole.expr import Atom, to_text
from partwhole.sequences import add, alpha, bolzano_tail, compare, constant, mul, sub
from partwhole.sets import arrangement, atom, build, compare_sets, finite_subset, minus
from partwhole.verdict import Relation
from treegen import depth_of, random_tree

pytestmark = pytest.mark.acceptance

GOLDEN = "golden prefixes"
ORACLE = "oracle equivalence"
SEMIRING = "semiring laws"
PART_WHOLE = "part-whole and discreteness"
PRIMES = "primes between powers and multiples"
TOTIENT = "totient consistency"
RATIONALS = "rational structure"
INCOMPARABLE = "incomparability and arrangements"
BOLZANO = "Bolzano difference"


# golden prefixes ------------------------------------------------------------

GOLDEN_SIGMA = {
    "N": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
    "E": [0, 1, 1, 2, 2, 3, 3],
    "O": [1, 1, 2, 2, 3, 3],
    "S(2)": [1, 1, 1, 2, 2, 2, 2, 2, 3, 3],
    "Z": [3, 5, 7, 9, 11],
    "N x N": [1, 4, 9, 16, 25, 36, 49, 64, 81, 100],
    "E x O": [0, 1, 2, 4, 6, 9, 12, 16, 20],
    "E x E": [0, 1, 1, 4, 4, 9, 9, 16, 16],
    "O x O": [1, 1, 4, 4, 9, 9, 16, 16, 25],
    "I": [1, 2, 4, 6, 10, 12, 18, 22, 28],
    "Qpos": [2, 6, 16, 30, 60, 84, 144, 198, 280],
    "Q": [5, 13, 33, 61, 121, 169, 289],
}
GOLDEN_PRIMES = [1, 2, 3, 3, 4, 4, 5, 5, 5, 5]
GOLDEN_CHI_I = [1, 1, 2, 2, 4, 2, 6, 4, 6]


def _expr(text):
    from partwhole.cli import parse
    return parse(f"size {text}").sets[0]


@pytest.mark.criterion(GOLDEN)
@pytest.mark.parametrize("text", list(GOLDEN_SIGMA))
def test_golden_size_prefix(text):
    want = GOLDEN_SIGMA[text]
    assert build(_expr(text)).size().prefix(len(want)) == want


@pytest.mark.criterion(GOLDEN)
def test_golden_characteristic_of_unit_interval():
    assert build(_expr("I")).characteristic().prefix(9) == GOLDEN_CHI_I


@pytest.mark.criterion(GOLDEN)
def test_golden_size_prefix_of_primes():
    # the printed sequence equals pi(n) + 1; see the companion test below
    assert build(_expr("P")).size().prefix(10) == GOLDEN_PRIMES


@pytest.mark.criterion(GOLDEN)
def test_printed_prime_prefix_counts_one_as_prime():
    got = build(_expr("P")).size().prefix(10)
    assert [v + 1 for v in got] == GOLDEN_PRIMES
    assert got[9] == arith.prime_pi(10) == 4


@pytest.mark.criterion(GOLDEN)
def test_golden_prefixes_run_fast():
    # a fresh interpreter, so nothing is cached from other tests
    code = (
        "import time, json, sys\n"
        "from partwhole.cli import parse\n"
        "from partwhole.sets import build\n"
        f"texts = {json.dumps(list(GOLDEN_SIGMA) + ['P'])}\n"
        "t = time.perf_counter()\n"
        "for s in texts:\n"
        "    build(parse('size ' + s).sets[0]).size().prefix(10)\n"
        "build(parse('size I').sets[0]).characteristic().prefix(9)\n"
        "print(time.perf_counter() - t)\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert float(out.stdout) < 1.0


# oracle equivalence ---------------------------------------------------------

CATALOG = ([Atom(n) for n in ("N", "N0", "Z", "Q", "Qpos", "I", "E", "O", "P")]
           + [Atom("M", k) for k in range(1, 11)] + [Atom("S", k) for k in range(2, 11)])


@pytest.mark.criterion(ORACLE)
@pytest.mark.parametrize("expr", CATALOG, ids=to_text)
def test_catalog_atom_matches_oracle(expr):
    assert build(expr).size().prefix(50) == oracle.brute_sigma(expr, 50)


@pytest.mark.criterion(ORACLE)
def test_random_trees_match_oracle():
    rng = random.Random(20240611)
    trees = [random_tree(rng, 4) for _ in range(200)]
    assert all(depth_of(t) <= 4 for t in trees)
    start = time.perf_counter()
    mismatches = []
    for t in trees:
        if build(t).size().prefix(50) != oracle.brute_sigma(t, 50):
            mismatches.append(to_text(t))
    elapsed = time.perf_counter() - start
    assert not mismatches
    assert elapsed < 60, f"took {elapsed:.1f}s"


# semiring laws --------------------------------------------------------------

_SEMIRING_ATOMS = ["N", "N0", "Z", "E", "O", "P", "I", "Qpos", "Q"]


def _generated(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return constant(rng.randint(0, 50))
    if kind == 1:
        return bolzano_tail(rng.randint(0, 30))
    if kind == 2:
        return atom("S", rng.randint(2, 3)).size()
    if kind == 3:
        return atom(rng.choice(_SEMIRING_ATOMS)).size()
    return add(atom(rng.choice(_SEMIRING_ATOMS)).size(), atom("M", rng.randint(2, 3)).size())


@pytest.mark.criterion(SEMIRING)
def test_semiring_laws_on_random_triples():
    rng = random.Random(7)
    zero, one = constant(0), constant(1)
    for _ in range(1000):
        a, b, c = (_generated(rng) for _ in range(3))
        p = lambda s: s.prefix(100)
        pa = p(a)
        assert p(add(add(a, b), c)) == p(add(a, add(b, c)))
        assert p(add(a, b)) == p(add(b, a))
        assert p(mul(mul(a, b), c)) == p(mul(a, mul(b, c)))
        assert p(mul(a, b)) == p(mul(b, a))
        assert p(mul(a, add(b, c))) == p(add(mul(a, b), mul(a, c)))
        assert p(add(a, zero)) == pa
        assert p(mul(a, one)) == pa
        assert p(mul(a, zero)) == [0] * 100


# part-whole -----------------------------------------------------------------

_WHOLES = (["N", "N0", "Z", "E", "O", "P", "I", "Qpos", "Q"]
           + [("M", k) for k in range(1, 11)] + [("S", k) for k in range(2, 6)])


def _whole(key):
    return atom(*key) if isinstance(key, tuple) else atom(key)


@lru_cache(maxsize=None)
def _class_parts_for(key):
    whole = _whole(key)
    if whole.universe.kind == "rationals":
        return [atom("I")] if whole.name != "I" else []
    parts = [atom("E"), atom("O"), atom("N")] + [atom("M", j) for j in range(2, 11)]
    out = []
    for part in parts:
        # keep parts that meet the whole and leave something behind
        inside = [n for n in range(1, 2001) if any(part.contains(x) for x in whole.block(n))]
        outside = [n for n in range(1, 2001) if any(not part.contains(x) for x in whole.block(n))]
        if inside and outside:
            out.append(part)
    return tuple(out)


def _random_pair(rng):
    key = rng.choice(_WHOLES)
    whole = _whole(key)
    parts = _class_parts_for(key)
    if parts and rng.random() < 0.5:
        return whole, minus(whole, rng.choice(parts))
    members = []
    while not members:
        labels = [rng.randint(1, 200) for _ in range(rng.randint(1, 4))]
        members = [x for n in labels for x in whole.block(n)]
    chosen = rng.sample(members, min(len(members), rng.randint(1, 3)))
    return whole, minus(whole, finite_subset(whole, chosen))


@pytest.mark.criterion(PART_WHOLE)
def test_proper_parts_are_smaller():
    rng = random.Random(99)
    failures = []
    for _ in range(500):
        whole, part = _random_pair(rng)
        v = compare_sets(part, whole)
        if v.relation is not Relation.LESS:
            failures.append((part.name, str(v.relation)))
            continue
        m = v.witness_m
        if m < 10**4:
            a = part.size().values(m + 1, 10**4).astype(object)
            b = whole.size().values(m + 1, 10**4).astype(object)
            if not all(a + 1 <= b):
                failures.append((part.name, "discreteness"))
    assert not failures


# primes ---------------------------------------------------------------------


def _reference_pi(limit):
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = bytes(len(range(p * p, limit + 1, p)))
    return np.cumsum(np.frombuffer(bytes(flags), dtype=np.uint8).astype(np.int64))


def _check_strict_window(small, big, m, reference):
    n = np.arange(m + 1, m + 10**4 + 1)
    assert np.all(small(n, reference) < big(n, reference))
    if m >= 1:
        assert not small(np.array([m]), reference)[0] < big(np.array([m]), reference)[0]


@pytest.mark.criterion(PRIMES)
def test_primes_theorem():
    start = time.perf_counter()
    reference = _reference_pi(2 * 10**6)
    pi = lambda n, ref: ref[n]
    for k in range(1, 11):
        v = compare_sets(atom("P"), atom("M", k))
        assert v.relation is Relation.LESS and v.witness_m is not None
        _check_strict_window(pi, lambda n, ref, k=k: n // k, v.witness_m, reference)
        if k >= 2:
            w = compare_sets(atom("S", k), atom("P"))
            assert w.relation is Relation.LESS and w.witness_m is not None
            roots = lambda n, ref, k=k: np.array([arith.iroot(int(x), k) for x in n])
            _check_strict_window(roots, pi, w.witness_m, reference)
    cert = EnvelopeCertificate(EnvelopeTerm(1, 1, -1), EnvelopeTerm(3, 1, -1), 11)
    cert.audit(arith.prime_pi_values, 10**6)
    assert time.perf_counter() - start < 120


@pytest.mark.criterion(PRIMES)
def test_prime_bounds_match_reference_sieve():
    reference = _reference_pi(10**6)
    ours = arith.prime_pi_values(1, 10**6)
    assert np.array_equal(ours, reference[1:])
    n = np.arange(11, 10**6 + 1, dtype=np.float64)
    pi = reference[11:].astype(np.float64)
    assert np.all(n / np.log(n) <= pi) and np.all(pi <= 3 * n / np.log(n))


# totient --------------------------------------------------------------------


@pytest.mark.criterion(TOTIENT)
def test_unit_interval_counts_are_totients():
    chi = atom("I").characteristic().values(2, 10**4)
    ns = np.arange(1, 10**4 + 1)
    for n in range(2, 10**4 + 1):
        phi = int(np.count_nonzero(np.gcd(ns[:n], n) == 1))
        assert chi[n - 2] == phi == arith.totient(n), n


# rationals ------------------------------------------------------------------


def _sizes(name, hi):
    return atom(name).size().values(1, hi).astype(object)


@pytest.mark.criterion(RATIONALS)
def test_nonnegative_rationals_are_a_product():
    n0, i, qpos = _sizes("N0", 1000), _sizes("I", 1000), _sizes("Qpos", 1000)
    assert list(qpos) == list(n0 * i)


@pytest.mark.criterion(RATIONALS)
def test_rationals_double_the_nonnegative_part():
    q, qpos = _sizes("Q", 1000), _sizes("Qpos", 1000)
    assert list(q) == list(2 * qpos + 1)


@pytest.mark.criterion(RATIONALS)
def test_unit_interval_below_half_square():
    i = _sizes("I", 10**4)
    bad = [n for n in range(3, 10**4 + 1) if not i[n - 1] < Fraction(n * n - n, 2)]
    assert not bad, f"fails at n = {bad[:10]}"


@pytest.mark.criterion(RATIONALS)
def test_rationals_below_cube():
    q = _sizes("Q", 1000)
    bad = [n for n in range(2, 1001) if not q[n - 1] < n**3 - n]
    assert not bad, f"fails at n = {bad[:10]}"


# incomparability ------------------------------------------------------------


@pytest.mark.criterion(INCOMPARABLE)
def test_even_and_odd():
    v = compare(atom("E").size(), atom("O").size())
    assert v.relation is Relation.LESS_EQ
    assert v.period == 2 and dict(v.classes) == {0: 0, 1: -1}
    assert v.summary() == "LessEq, witness m=0: residue classes {even: equal, odd: less}"


@pytest.mark.criterion(INCOMPARABLE)
def test_arrangement_chain_lower_links():
    a, b, c = (arrangement(x).size() for x in "ABC")
    assert compare(b, a).relation is Relation.LESS_EQ
    assert compare(a, c).relation is Relation.LESS_EQ
    assert compare(b, c).relation is Relation.LESS_EQ


@pytest.mark.criterion(INCOMPARABLE)
def test_arrangement_chain_last_link():
    b, c = arrangement("B").size(), arrangement("C").size()
    v = compare(c, add(b, constant(1)))
    assert v.relation in (Relation.LESS_EQ, Relation.LESS, Relation.EQUAL), v.summary()


# Bolzano --------------------------------------------------------------------


@pytest.mark.criterion(BOLZANO)
@pytest.mark.parametrize("k", [1, 5, 100])
def test_bolzano_difference(k):
    d = sub(alpha, bolzano_tail(k))
    v = compare(d, constant(k))
    assert v.relation is Relation.EQUAL
    assert d.prefix(k + 5)[k - 1:] == [k] * 6
