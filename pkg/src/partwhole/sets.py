"""Calculable sets: countable sets arranged in finite labelled blocks.

Elements are plain Python values: ``int`` for the naturals and integers,
:class:`fractions.Fraction` for rationals and 2-tuples for pairs.  Every set
knows its membership test, its labelling, its blocks ``A_n`` and its size
sequence ``n -> |{x : label(x) <= n}|``; catalog sets also carry a
quasi-polynomial normal form or an envelope certificate.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from . import arith
from .envelope import EnvelopeCertificate, EnvelopeTerm
from .errors import (
    NonCanonicalError,
    NotAMemberError,
    OverlapError,
    ResourceLimitError,
)
from .expr import INT, NAT, RAT, Atom, BinOp, Finite, SetExpr, Universe, pair, unify, universe_of
from .quasipoly import QuasiPolynomial, qp_sub
from .sequences import (
    IntSequence,
    SizeSequence,
    compare,
    envelope_of,
    from_characteristic,
    mul,
)
from .verdict import ComparisonVerdict, Relation

AUDIT_LABELS = 8
ENUM_LIMIT = 5_000_000
PATTERN_PERIOD_CAP = 4096
SEARCH_LIMIT = 2000

Element = Union[int, Fraction, tuple]


# elements -------------------------------------------------------------


def coerce_element(universe: Universe, x) -> Optional[Element]:
    """Normalize ``x`` for ``universe``; None when it cannot belong there."""
    kind = universe.kind
    if kind in ("naturals", "integers"):
        if isinstance(x, bool):
            return None
        if isinstance(x, int):
            return x
        if isinstance(x, Fraction) and x.denominator == 1:
            return int(x)
        return None
    if kind == "rationals":
        if isinstance(x, bool):
            return None
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        return None
    if isinstance(x, tuple) and len(x) == 2:
        a = coerce_element(universe.parts[0], x[0])
        b = coerce_element(universe.parts[1], x[1])
        if a is None or b is None:
            return None
        return (a, b)
    return None


def format_element(x: Element) -> str:
    if isinstance(x, tuple):
        return "(" + ",".join(format_element(v) for v in x) + ")"
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    return str(x)


# base class -----------------------------------------------------------


class CalculableSet:
    """A countable set with a finite-to-one labelling.

    Subclasses implement ``contains``, ``_label`` and ``block``; sizes
    default to partial sums of the block cardinalities.
    """

    canonical = True
    # Labelling rules this set follows; two sets sharing a rule can never
    # disagree on a common element.  None means "not known statically".
    label_schemes: Optional[FrozenSet[str]] = None

    def __init__(self, universe: Universe, name: str, expr: Optional[SetExpr] = None):
        self.universe = universe
        self.name = name
        self.expr = expr
        self._size: Optional[SizeSequence] = None
        self._size_lock = threading.Lock()

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    # membership and labels

    def contains(self, x) -> bool:
        raise NotImplementedError

    def _label(self, x) -> int:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        x = coerce_element(self.universe, x)
        return x is not None and self.contains(x)

    def label(self, x) -> int:
        y = coerce_element(self.universe, x)
        if y is None or not self.contains(y):
            raise NotAMemberError(x, self.name)
        return self._label(y)

    def block(self, n: int) -> List[Element]:
        raise NotImplementedError

    def block_size(self, n: int) -> int:
        return len(self.block(n))

    @property
    def finite_elements(self) -> Optional[Tuple[Element, ...]]:
        """All members when the set is known to be finite, else None."""
        return None

    # sequences

    def chi_values(self, lo: int, hi: int) -> np.ndarray:
        out = np.zeros(hi - lo + 1, dtype=np.int64)
        total = 0
        for i, n in enumerate(range(lo, hi + 1)):
            c = self.block_size(n)
            total += c
            if total > ENUM_LIMIT:
                raise ResourceLimitError(
                    f"enumerating {self.name} beyond {ENUM_LIMIT} elements (at label {n})")
            out[i] = c
        return out

    def characteristic(self) -> IntSequence:
        return IntSequence(self.block_size, batch=self.chi_values, kind_tag=f"chi({self.name})")

    def symbolic(self) -> Optional[QuasiPolynomial]:
        return None

    def envelope(self) -> Optional[EnvelopeCertificate]:
        return None

    def _sigma_batch(self):
        """Optional fast ``(lo, hi) -> values`` for the size sequence."""
        return None

    def _build_size(self) -> SizeSequence:
        batch = self._sigma_batch()
        if batch is None:
            seq = from_characteristic(self.characteristic(), kind_tag=self.name)
            seq.symbolic = self.symbolic()
            seq.envelope = self.envelope()
            return seq
        return SizeSequence(batch=batch, symbolic=self.symbolic(), envelope=self.envelope(),
                            kind_tag=self.name)

    def size(self) -> SizeSequence:
        if self._size is None:
            with self._size_lock:
                if self._size is None:
                    self._size = self._build_size()
        return self._size


# integer universes ------------------------------------------------------


def _count_residue(n, p: int, r: int):
    """How many ``1 <= x <= n`` have ``x % p == r`` (n may be an array)."""
    return np.maximum((n - r) // p + (1 if r else 0), 0)


def _int_label(x: int) -> int:
    return max(abs(x), 1)


@dataclass(frozen=True)
class Pattern:
    """An eventually periodic set of integers.

    Positive ``x`` is a base member when ``x % period in pos``, negative
    ``x`` when ``(-x) % period in neg``; finitely many exceptions are listed
    in ``extra_in``/``extra_out``.
    """

    period: int
    pos: FrozenSet[int]
    neg: FrozenSet[int] = frozenset()
    extra_in: FrozenSet[int] = frozenset()
    extra_out: FrozenSet[int] = frozenset()

    @classmethod
    def make(cls, period: int, pos: Iterable[int], neg: Iterable[int] = (),
             extra_in: Iterable[int] = (), extra_out: Iterable[int] = ()) -> "Pattern":
        pos, neg = frozenset(pos), frozenset(neg)
        for p in range(1, period + 1):
            if period % p:
                continue
            if all((r % p in {s % p for s in pos}) == (r in pos) for r in range(period)) and \
               all((r % p in {s % p for s in neg}) == (r in neg) for r in range(period)):
                pos = frozenset(r % p for r in pos)
                neg = frozenset(r % p for r in neg)
                period = p
                break
        raw = cls(period, pos, neg)
        ei = frozenset(e for e in extra_in if not raw.base(e))
        eo = frozenset(e for e in extra_out if raw.base(e))
        return cls(period, pos, neg, ei, eo)

    def base(self, x: int) -> bool:
        if x > 0:
            return x % self.period in self.pos
        if x < 0:
            return (-x) % self.period in self.neg
        return False

    def contains(self, x: int) -> bool:
        if x in self.extra_in:
            return True
        if x in self.extra_out:
            return False
        return self.base(x)

    @property
    def exceptions(self) -> FrozenSet[int]:
        return self.extra_in | self.extra_out

    @property
    def threshold(self) -> int:
        return max((_int_label(e) for e in self.exceptions), default=1)

    @property
    def is_finite(self) -> bool:
        return not self.pos and not self.neg

    def combine(self, other: "Pattern", op: Callable[[bool, bool], bool]) -> Optional["Pattern"]:
        p = self.period * other.period // math.gcd(self.period, other.period)
        if p > PATTERN_PERIOD_CAP:
            return None
        pos = [r for r in range(p) if op(r % self.period in self.pos, r % other.period in other.pos)]
        neg = [r for r in range(p) if op(r % self.period in self.neg, r % other.period in other.neg)]
        raw = Pattern(p, frozenset(pos), frozenset(neg))
        ei, eo = [], []
        for e in self.exceptions | other.exceptions | {0}:
            actual = op(self.contains(e), other.contains(e))
            if actual and not raw.base(e):
                ei.append(e)
            elif raw.base(e) and not actual:
                eo.append(e)
        return Pattern.make(p, pos, neg, ei, eo)

    def subset_of(self, other: "Pattern") -> bool:
        p = self.period * other.period // math.gcd(self.period, other.period)
        for r in range(p):
            if r % self.period in self.pos and r % other.period not in other.pos:
                return False
            if r % self.period in self.neg and r % other.period not in other.neg:
                return False
        return all(other.contains(e) for e in self.exceptions | other.exceptions
                   if self.contains(e))

    def sigma(self, n):
        """Members with label ``<= n``; accepts an int64 array."""
        total = n * 0
        for r in self.pos:
            total = total + _count_residue(n, self.period, r)
        for r in self.neg:
            total = total + _count_residue(n, self.period, r)
        for e in self.extra_in:
            total = total + (_int_label(e) <= n) * 1
        for e in self.extra_out:
            total = total - (_int_label(e) <= n) * 1
        return total

    def mask(self, lo: int, hi: int, sign: int) -> np.ndarray:
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        residues = self.pos if sign > 0 else self.neg
        m = np.isin(ns % self.period, list(residues)) if residues else np.zeros(len(ns), bool)
        for e in self.exceptions:
            v = e * sign
            if lo <= v <= hi:
                m[v - lo] = self.contains(e)
        return m


class IntegerSet(CalculableSet):
    """Sets of integers labelled canonically: ``label(x) = |x|``, ``label(0) = 1``."""

    pattern: Optional[Pattern] = None
    label_schemes = frozenset({"abs"})

    def _contains_int(self, x: int) -> bool:
        raise NotImplementedError

    def pos_mask(self, lo: int, hi: int) -> np.ndarray:
        return np.array([self._contains_int(x) for x in range(lo, hi + 1)], dtype=bool)

    def neg_mask(self, lo: int, hi: int) -> np.ndarray:
        """Membership of ``-lo, ..., -hi``."""
        return np.zeros(hi - lo + 1, dtype=bool)

    def has_zero(self) -> bool:
        return self._contains_int(0)

    def contains(self, x) -> bool:
        return isinstance(x, int) and self._contains_int(x)

    def _label(self, x) -> int:
        return _int_label(x)

    def block(self, n: int) -> List[int]:
        if n < 1:
            return []
        cands = (-1, 0, 1) if n == 1 else (-n, n)
        return [c for c in cands if self._contains_int(c)]

    def block_size(self, n: int) -> int:
        return len(self.block(n))

    def chi_values(self, lo: int, hi: int) -> np.ndarray:
        out = self.pos_mask(lo, hi).astype(np.int64) + self.neg_mask(lo, hi)
        if lo == 1 and self.has_zero():
            out[0] += 1
        return out

    def _sigma_batch(self):
        def batch(lo, hi):
            return np.cumsum(self.chi_values(1, hi))[lo - 1:]
        return batch


class PatternSet(IntegerSet):
    """An integer set given by an eventually periodic pattern."""

    def __init__(self, pattern: Pattern, universe: Universe, name: str,
                 expr: Optional[SetExpr] = None, envelope: Optional[EnvelopeCertificate] = None):
        super().__init__(universe, name, expr)
        self.pattern = pattern
        self._envelope = envelope

    def _contains_int(self, x: int) -> bool:
        if self.universe.kind == "naturals" and x < 1:
            return False
        return self.pattern.contains(x)

    def pos_mask(self, lo, hi):
        return self.pattern.mask(lo, hi, 1)

    def neg_mask(self, lo, hi):
        return self.pattern.mask(lo, hi, -1)

    @property
    def finite_elements(self):
        if self.pattern.is_finite:
            return tuple(sorted(self.pattern.extra_in))
        return None

    def _sigma_batch(self):
        pattern = self.pattern

        def batch(lo, hi):
            return pattern.sigma(np.arange(lo, hi + 1, dtype=np.int64))
        return batch

    def symbolic(self):
        pat = self.pattern
        return QuasiPolynomial.fit(lambda n: int(pat.sigma(n)), pat.period, 1, pat.threshold)

    def envelope(self):
        return self._envelope


class Primes(IntegerSet):
    def __init__(self):
        super().__init__(NAT, "P", Atom("P"))

    def _contains_int(self, x):
        return arith.is_prime(x)

    def pos_mask(self, lo, hi):
        return arith.prime_mask(lo, hi)

    def _sigma_batch(self):
        return arith.prime_pi_values

    def envelope(self):
        # Rosser-Schoenfeld: n/ln n < pi(n) for n >= 17 and pi(n) < 1.25506 n/ln n
        # for n > 1; the range 11..16 is checked directly.
        return EnvelopeCertificate(
            EnvelopeTerm(1, 1, -1), EnvelopeTerm(Fraction(125506, 100000), 1, -1), 11,
            "prime number theorem bounds with explicit constants")


class Powers(IntegerSet):
    def __init__(self, k: int):
        if k < 2:
            raise ValueError("use the naturals for k = 1")
        super().__init__(NAT, f"S({k})", Atom("S", k))
        self.k = k

    def _contains_int(self, x):
        return x >= 1 and arith.iroot(x, self.k) ** self.k == x

    def pos_mask(self, lo, hi):
        ns = np.arange(lo, hi + 1, dtype=np.int64)
        return arith.iroot_values(lo, hi, self.k) ** self.k == ns

    def _sigma_batch(self):
        return lambda lo, hi: arith.iroot_values(lo, hi, self.k)

    def envelope(self):
        e = Fraction(1, self.k)
        return EnvelopeCertificate(EnvelopeTerm(Fraction(1, 2), e), EnvelopeTerm(1, e), 1,
                                   "floor(x) >= x/2 for x >= 1")


class IntegerCombination(IntegerSet):
    _OPS = {
        "union": (lambda a, b: a or b, np.logical_or),
        "inter": (lambda a, b: a and b, np.logical_and),
        "minus": (lambda a, b: a and not b, lambda a, b: a & ~b),
    }

    def __init__(self, op: str, a: IntegerSet, b: IntegerSet, universe: Universe,
                 expr: Optional[SetExpr]):
        name = str(expr) if expr is not None else f"({a.name} {op} {b.name})"
        super().__init__(universe, name, expr)
        self.op, self.left, self.right = op, a, b
        self._scalar, self._vector = self._OPS[op]
        if a.pattern is not None and b.pattern is not None:
            self.pattern = a.pattern.combine(b.pattern, self._scalar)

    def _contains_int(self, x):
        return self._scalar(self.left._contains_int(x), self.right._contains_int(x))

    def pos_mask(self, lo, hi):
        return self._vector(self.left.pos_mask(lo, hi), self.right.pos_mask(lo, hi))

    def neg_mask(self, lo, hi):
        return self._vector(self.left.neg_mask(lo, hi), self.right.neg_mask(lo, hi))

    @property
    def finite_elements(self):
        if self.pattern is not None and self.pattern.is_finite:
            return tuple(sorted(self.pattern.extra_in))
        fl, fr = self.left.finite_elements, self.right.finite_elements
        if self.op in ("inter", "minus") and fl is not None:
            return tuple(x for x in fl if self._contains_int(x))
        if self.op == "inter" and fr is not None:
            return tuple(x for x in fr if self._contains_int(x))
        if self.op == "union" and fl is not None and fr is not None:
            return tuple(sorted(set(fl) | set(fr)))
        return None

    def _sigma_batch(self):
        if self.pattern is not None:
            pattern = self.pattern
            return lambda lo, hi: pattern.sigma(np.arange(lo, hi + 1, dtype=np.int64))
        return super()._sigma_batch()

    def symbolic(self):
        if self.pattern is None:
            return None
        pat = self.pattern
        return QuasiPolynomial.fit(lambda n: int(pat.sigma(n)), pat.period, 1, pat.threshold)


def _nat_pattern(period: int, residues: Iterable[int]) -> Pattern:
    return Pattern.make(period, residues)


def multiples(k: int, name: Optional[str] = None, expr: Optional[SetExpr] = None) -> PatternSet:
    """Positive multiples of ``k``."""
    env = EnvelopeCertificate(EnvelopeTerm(Fraction(1, k + 1)), EnvelopeTerm(Fraction(1, k)),
                              max(k * k - 1, 1), "n/(k+1) <= floor(n/k) once n >= k^2 - 1")
    return PatternSet(_nat_pattern(k, [0]), NAT, name or f"M({k})", expr or Atom("M", k), env)


def finite_integers(elements: Iterable[int]) -> PatternSet:
    els = tuple(sorted(set(int(e) for e in elements)))
    if not els:
        return PatternSet(Pattern.make(1, ()), NAT, "∅")
    universe = NAT if els[0] > 0 else INT
    return PatternSet(Pattern.make(1, (), (), els), universe,
                      "{" + ",".join(map(str, els)) + "}", Finite(els))


# rationals ------------------------------------------------------------


def _unit_block(n: int) -> List[Fraction]:
    return [Fraction(m, n) for m in range(1, n + 1) if math.gcd(m, n) == 1]


class _RationalAtom(CalculableSet):
    def __init__(self, name: str):
        super().__init__(RAT, name, Atom(name))

    def chi_values(self, lo, hi):
        s = self._sigma_batch()(max(lo - 1, 1), hi).astype(object)
        if lo == 1:
            s = np.concatenate([[0], s])
        return np.diff(s)


class UnitInterval(_RationalAtom):
    """``(0, 1]`` with ``label(m/n) = n``."""

    label_schemes = frozenset({"mixed", "signed"})

    def __init__(self):
        super().__init__("I")

    def contains(self, x):
        return isinstance(x, Fraction) and 0 < x <= 1

    def _label(self, x):
        return x.denominator

    def block(self, n):
        return _unit_block(n) if n >= 1 else []

    def block_size(self, n):
        return arith.totient(n) if n >= 1 else 0

    def chi_values(self, lo, hi):
        return arith.totient_values(lo, hi)

    def _sigma_batch(self):
        return arith.totient_sum_values

    def envelope(self):
        return EnvelopeCertificate(EnvelopeTerm(Fraction(1, 6), 2), EnvelopeTerm(Fraction(2, 5), 2),
                                   5, "totient summatory bounds via Möbius inversion")


class NonNegRationals(_RationalAtom):
    """``[0, oo)`` as mixed fractions ``p + m/n`` labelled ``max(p, n)``.

    Conventions: ``label(0) = 1`` and an integer ``q >= 1`` has label ``q``.
    """

    label_schemes = frozenset({"mixed"})

    def __init__(self):
        super().__init__("Qpos")

    def contains(self, x):
        return isinstance(x, Fraction) and x >= 0

    def _label(self, x):
        if x == 0:
            return 1
        if x.denominator == 1:
            return x.numerator
        p = x.numerator // x.denominator
        return max(p, x.denominator)

    def block(self, n):
        if n < 1:
            return []
        out = [Fraction(0), Fraction(1)] if n == 1 else [Fraction(n)]
        if n >= 2:
            for p in range(n + 1):
                out.extend(p + f for f in _unit_block(n))
            for d in range(2, n):
                out.extend(n + f for f in _unit_block(d))
        return sorted(out)

    def block_size(self, n):
        if n == 1:
            return 2
        return (n + 1) * arith.totient(n) + arith.totient_sum(n - 1)

    def _sigma_batch(self):
        def batch(lo, hi):
            ns = np.arange(lo, hi + 1, dtype=object)
            return (ns + 1) * arith.totient_sum_values(lo, hi).astype(object)
        return batch

    def envelope(self):
        return EnvelopeCertificate(EnvelopeTerm(Fraction(1, 6), 3), EnvelopeTerm(Fraction(1, 2), 3),
                                   5, "(n+1) times the totient summatory bounds")


class Rationals(_RationalAtom):
    """All rationals: ``0`` and ``±(p + x)`` with ``x in (0, 1]``.

    ``label(±(p + x)) = max(max(p, 1), label_I(x))`` and ``label(0) = 1``,
    which gives ``sigma = 2 (n+1) Phi(n) + 1``.
    """

    label_schemes = frozenset({"signed"})

    def __init__(self):
        super().__init__("Q")

    def contains(self, x):
        return isinstance(x, Fraction)

    def _label(self, x):
        if x == 0:
            return 1
        a = abs(x)
        p = -(-a.numerator // a.denominator) - 1  # ceil(a) - 1
        frac = a - p
        return max(p, 1, frac.denominator)

    def block(self, n):
        if n < 1:
            return []
        if n == 1:
            half = [Fraction(1), Fraction(2)]
        else:
            half = []
            for p in range(n + 1):
                half.extend(p + f for f in _unit_block(n))
            half.append(Fraction(n + 1))
            for d in range(2, n):
                half.extend(n + f for f in _unit_block(d))
        out = half + [-h for h in half]
        if n == 1:
            out.append(Fraction(0))
        return sorted(out)

    def block_size(self, n):
        if n == 1:
            return 5
        return 2 * ((n + 1) * arith.totient(n) + arith.totient_sum(n - 1))

    def _sigma_batch(self):
        def batch(lo, hi):
            ns = np.arange(lo, hi + 1, dtype=object)
            return 2 * (ns + 1) * arith.totient_sum_values(lo, hi).astype(object) + 1
        return batch

    def envelope(self):
        return EnvelopeCertificate(EnvelopeTerm(Fraction(1, 3), 3), EnvelopeTerm(1, 3), 5,
                                   "2(n+1) times the totient summatory bounds, plus one")


# products and subsets -------------------------------------------------


class Product(CalculableSet):
    """``A x B`` with ``label((x, y)) = max(label_A(x), label_B(y))``.

    Block ``n`` is the n-th frame, listed along the right edge top to bottom
    and then along the bottom edge right to left.
    """

    def __init__(self, a: CalculableSet, b: CalculableSet, expr: Optional[SetExpr] = None):
        if expr is None and a.expr is not None and b.expr is not None:
            expr = BinOp("product", a.expr, b.expr)
        name = str(expr) if expr is not None else f"({a.name} x {b.name})"
        super().__init__(pair(a.universe, b.universe), name, expr)
        self.left, self.right = a, b
        self.canonical = a.canonical and b.canonical

    def contains(self, x):
        return isinstance(x, tuple) and self.left.contains(x[0]) and self.right.contains(x[1])

    def _label(self, x):
        return max(self.left._label(x[0]), self.right._label(x[1]))

    @staticmethod
    def _cell(xs, ys):
        return sorted((x, y) for x in xs for y in ys)

    def block(self, n):
        if n < 1:
            return []
        a, b = self.left, self.right
        out = []
        bn = b.block(n)
        if bn:
            for i in range(1, n + 1):
                out.extend(self._cell(a.block(i), bn))
        an = a.block(n)
        if an:
            for j in range(n - 1, 0, -1):
                out.extend(self._cell(an, b.block(j)))
        return out

    def block_size(self, n):
        sa, sb = self.left.size(), self.right.size()
        below_a = sa(n - 1) if n > 1 else 0
        return self.left.block_size(n) * sb(n) + below_a * self.right.block_size(n)

    @property
    def finite_elements(self):
        fl, fr = self.left.finite_elements, self.right.finite_elements
        if fl is not None and fr is not None:
            return tuple((x, y) for x in fl for y in fr)
        return None

    def _build_size(self):
        sa, sb = self.left.size(), self.right.size()
        seq = mul(sa, sb)
        seq.kind_tag = self.name
        if seq.envelope is None and seq.symbolic is None:
            ea, eb = envelope_of(sa), envelope_of(sb)
            if ea is not None and eb is not None:
                seq.envelope = ea * eb
        return seq


class SubsetOfProduct(CalculableSet):
    """``{p in A x B : pred(p)}`` with the product labelling."""

    def __init__(self, pred: Callable[[tuple], bool], a: CalculableSet, b: CalculableSet,
                 name: str = "C"):
        self.product = Product(a, b)
        super().__init__(self.product.universe, name)
        self.pred = pred
        self.canonical = self.product.canonical

    def contains(self, x):
        return self.product.contains(x) and bool(self.pred(x))

    def _label(self, x):
        return self.product._label(x)

    def block(self, n):
        return [p for p in self.product.block(n) if self.pred(p)]


class FiniteSubset(CalculableSet):
    """A finite part of ``parent`` carrying the parent's labels."""

    def __init__(self, parent: CalculableSet, elements: Iterable, name: Optional[str] = None):
        els = []
        for x in elements:
            y = coerce_element(parent.universe, x)
            if y is None or not parent.contains(y):
                raise NotAMemberError(x, parent.name)
            els.append(y)
        self.parent = parent
        self.elements = tuple(dict.fromkeys(els))
        super().__init__(parent.universe,
                         name or "{" + ",".join(format_element(e) for e in self.elements) + "}")
        self.canonical = parent.canonical
        self.label_schemes = parent.label_schemes
        self._labels = {e: parent._label(e) for e in self.elements}

    def contains(self, x):
        return x in self._labels

    def _label(self, x):
        return self._labels[x]

    def block(self, n):
        return sorted(e for e in self.elements if self._labels[e] == n)

    @property
    def finite_elements(self):
        return self.elements

    def _sigma_batch(self):
        labels = np.array(sorted(self._labels.values()), dtype=np.int64)

        def batch(lo, hi):
            return np.searchsorted(labels, np.arange(lo, hi + 1), side="right")
        return batch

    def symbolic(self):
        top = max(self._labels.values(), default=1)
        return QuasiPolynomial.constant(len(self.elements), threshold=top)


class EmptySet(CalculableSet):
    label_schemes = frozenset({"*"})

    def __init__(self, universe: Universe):
        super().__init__(universe, "∅")

    def contains(self, x):
        return False

    def block(self, n):
        return []

    @property
    def finite_elements(self):
        return ()

    def _sigma_batch(self):
        return lambda lo, hi: np.zeros(hi - lo + 1, dtype=np.int64)

    def symbolic(self):
        return QuasiPolynomial.constant(0)


class Combination(CalculableSet):
    """Union, intersection or difference of canonically arranged sets.

    Labels are inherited; a shared element whose two labels differ raises
    :class:`NonCanonicalError`.  Labels ``1..AUDIT_LABELS`` are audited at
    construction and every block query audits what it touches.
    """

    _OPS = {
        "union": lambda a, b: a or b,
        "inter": lambda a, b: a and b,
        "minus": lambda a, b: a and not b,
    }

    def __init__(self, op: str, a: CalculableSet, b: CalculableSet, universe: Universe,
                 expr: Optional[SetExpr] = None):
        name = str(expr) if expr is not None else f"({a.name} {op} {b.name})"
        super().__init__(universe, name, expr)
        self.op, self.left, self.right = op, a, b
        self._fn = self._OPS[op]
        self.label_schemes = _shared_schemes(a, b)
        self._a_in_b = provably_subset(a, b)
        self._b_in_a = provably_subset(b, a)
        for n in range(1, AUDIT_LABELS + 1):
            self.block(n)

    def contains(self, x):
        return self._fn(self.left.contains(x), self.right.contains(x))

    def _audit(self, x, n, other: CalculableSet):
        if other.contains(x):
            m = other._label(x)
            if m != n:
                raise NonCanonicalError(
                    f"{format_element(x)} has label {n} in one operand and {m} in "
                    f"{other.name}")

    def _label(self, x):
        a, b = self.left, self.right
        if a.contains(x):
            n = a._label(x)
            if self.label_schemes is None:
                self._audit(x, n, b)
            return n
        return b._label(x)

    def block(self, n):
        a, b = self.left, self.right
        if self.label_schemes is not None:
            # labels agree by construction: a shared element sits in both n-th blocks
            left, right = a.block(n), b.block(n)
            if self.op == "union":
                return _merge_blocks(left, right)
            rs = set(right)
            keep = self.op == "inter"
            return [x for x in left if (x in rs) == keep]
        left = a.block(n)
        for x in left:
            self._audit(x, n, b)
        if self.op == "inter":
            return [x for x in left if b.contains(x)]
        if self.op == "minus":
            return [x for x in left if not b.contains(x)]
        right = b.block(n)
        for x in right:
            self._audit(x, n, a)
        return _merge_blocks(left, right)

    @property
    def finite_elements(self):
        fl, fr = self.left.finite_elements, self.right.finite_elements
        if self.op in ("inter", "minus") and fl is not None:
            return tuple(x for x in fl if self.contains(x))
        if self.op == "inter" and fr is not None:
            return tuple(x for x in fr if self.contains(x))
        if self.op == "union" and fl is not None and fr is not None:
            return tuple(dict.fromkeys(fl + fr))
        return None

    def _build_size(self):
        a, b, op = self.left, self.right, self.op
        if self._a_in_b or self._b_in_a:
            small, big = (a, b) if self._a_in_b else (b, a)
            if op == "union":
                return _renamed(big.size(), self.name)
            if op == "inter":
                return _renamed(small.size(), self.name)
            if self._a_in_b:
                return _renamed(EmptySet(self.universe).size(), self.name)
            return _difference_size(a.size(), b.size(), self.name)
        fe = self.finite_elements
        if fe is not None:
            return _finite_size(self, fe)
        chain = self._chain_size()
        if chain is not None:
            return chain
        fb = b.finite_elements
        if fb is not None and op in ("minus", "union"):
            if op == "minus":
                gone = [a._label(x) for x in fb if a.contains(x)]
                return _shifted_size(a.size(), gone, -1, self.name)
            extra = [b._label(x) for x in fb if not a.contains(x)]
            return _shifted_size(a.size(), extra, 1, self.name)
        fa = a.finite_elements
        if fa is not None and op == "union":
            extra = [a._label(x) for x in fa if not b.contains(x)]
            return _shifted_size(b.size(), extra, 1, self.name)
        return super()._build_size()


    def _truth(self, leaf_value) -> bool:
        side = []
        for child in (self.left, self.right):
            if isinstance(child, Combination) and child.label_schemes is not None:
                side.append(child._truth(leaf_value))
            else:
                side.append(leaf_value(child))
        return self._fn(*side)

    def _leaves(self) -> List[CalculableSet]:
        out = []
        for child in (self.left, self.right):
            if isinstance(child, Combination) and child.label_schemes is not None:
                out.extend(child._leaves())
            else:
                out.append(child)
        return out

    def _chain_size(self) -> Optional[SizeSequence]:
        """Size when the leaves are nested, e.g. any combination of I and Q.

        With leaves ``A_1 <= A_2 <= ... <= A_k`` every element lies in exactly
        one layer ``A_j minus A_(j-1)``, and the expression either keeps or
        drops each whole layer.
        """
        if self.label_schemes is None:
            return None
        chain: List[CalculableSet] = []
        for leaf in self._leaves():
            if not any(provably_subset(leaf, c) and provably_subset(c, leaf) for c in chain):
                chain.append(leaf)
        members = tuple(chain)  # list.sort empties the list while it runs
        chain.sort(key=lambda x: sum(provably_subset(y, x) for y in members))
        if not all(provably_subset(x, y) for x, y in zip(chain, chain[1:])):
            return None

        def depth(leaf):
            return next(i for i, c in enumerate(chain)
                        if provably_subset(leaf, c) and provably_subset(c, leaf))

        coeffs = [0] * len(chain)
        for j in range(len(chain)):
            if self._truth(lambda leaf: depth(leaf) >= j):
                coeffs[j] += 1
                if j:
                    coeffs[j - 1] -= 1
        sizes = [c.size() for c in chain]

        def batch(lo, hi):
            total = np.zeros(hi - lo + 1, dtype=object)
            for c, seq in zip(coeffs, sizes):
                if c:
                    total = total + c * seq.values(lo, hi).astype(object)
            return total

        return SizeSequence(batch=batch, kind_tag=self.name)


def _shared_schemes(a: CalculableSet, b: CalculableSet) -> Optional[FrozenSet[str]]:
    sa, sb = a.label_schemes, b.label_schemes
    if sa is None or sb is None:
        return None
    if "*" in sa:
        return sb
    if "*" in sb:
        return sa
    return (sa & sb) or None


def _merge_blocks(left: List, right: List) -> List:
    seen = set(left)
    extra = [x for x in right if x not in seen]
    if extra and not isinstance(left[0] if left else extra[0], tuple):
        return sorted(left + extra)
    return left + extra


def _renamed(seq: SizeSequence, name: str) -> SizeSequence:
    return SizeSequence(seq.eval, batch=seq.values, symbolic=seq.symbolic, envelope=seq.envelope,
                        kind_tag=name)


def _difference_size(big: SizeSequence, small: SizeSequence, name: str) -> SizeSequence:
    """Size of ``B \\ A`` for ``A`` a canonical part of ``B``."""

    def batch(lo, hi):
        return big.values(lo, hi).astype(object) - small.values(lo, hi).astype(object)

    symbolic = None
    if big.symbolic is not None and small.symbolic is not None:
        symbolic = qp_sub(big.symbolic, small.symbolic)
    return SizeSequence(batch=batch, symbolic=symbolic, kind_tag=name)


def _shifted_size(base: SizeSequence, labels: List[int], sign: int, name: str) -> SizeSequence:
    labels_arr = np.array(sorted(labels), dtype=np.int64)

    def batch(lo, hi):
        counts = np.searchsorted(labels_arr, np.arange(lo, hi + 1), side="right").astype(object)
        return base.values(lo, hi).astype(object) + sign * counts

    symbolic = None
    if base.symbolic is not None:
        top = max(labels, default=1)
        shift = QuasiPolynomial.constant(len(labels), threshold=top)
        from .quasipoly import qp_add

        symbolic = qp_add(base.symbolic, shift) if sign > 0 else qp_sub(base.symbolic, shift)
    return SizeSequence(batch=batch, symbolic=symbolic, kind_tag=name)


def _finite_size(s: CalculableSet, elements) -> SizeSequence:
    labels = sorted(s._label(x) for x in elements)
    arr = np.array(labels, dtype=np.int64)
    top = labels[-1] if labels else 1
    return SizeSequence(batch=lambda lo, hi: np.searchsorted(arr, np.arange(lo, hi + 1), side="right"),
                        symbolic=QuasiPolynomial.constant(len(labels), threshold=top),
                        kind_tag=s.name)


# families and custom arrangements -------------------------------------


class CustomSet(CalculableSet):
    """A set given by its blocks; labels are whatever the blocks say.

    Without ``contains``/``label`` callbacks, membership is searched among
    labels ``<= search_limit``.
    """

    def __init__(self, universe: Universe, blocks: Callable[[int], Iterable], name: str = "custom",
                 contains: Optional[Callable] = None, label: Optional[Callable] = None,
                 canonical: bool = False, search_limit: int = SEARCH_LIMIT):
        super().__init__(universe, name)
        self._blocks = blocks
        self._contains = contains
        self._label_fn = label
        self.canonical = canonical
        self.search_limit = search_limit

    @classmethod
    def from_blocks(cls, universe: Universe, table: Dict[int, Iterable], name: str = "custom",
                    canonical: bool = False) -> "CustomSet":
        table = {n: list(v) for n, v in table.items()}
        where = {x: n for n, xs in table.items() for x in xs}
        s = cls(universe, lambda n: table.get(n, []), name, contains=lambda x: x in where,
                label=lambda x: where[x], canonical=canonical)
        s._finite = tuple(where)
        return s

    @property
    def finite_elements(self):
        return getattr(self, "_finite", None)

    def block(self, n):
        return list(self._blocks(n)) if n >= 1 else []

    def _search(self, x) -> Optional[int]:
        for n in range(1, self.search_limit + 1):
            if x in self.block(n):
                return n
        return None

    def contains(self, x):
        if self._contains is not None:
            return bool(self._contains(x))
        return self._search(x) is not None

    def _label(self, x):
        if self._label_fn is not None:
            return self._label_fn(x)
        return self._search(x)


class ArrangedNaturals(CalculableSet):
    """The naturals with ``label(x) = x + offsets[x % len(offsets)]``.

    Offsets ``(0, 1)`` and ``(-1, 0)`` give the two pairings of consecutive
    numbers into one block; neither labelling is canonical.
    """

    canonical = False

    def __init__(self, offsets: Tuple[int, ...], name: str):
        super().__init__(NAT, name)
        self.offsets = tuple(offsets)
        p = len(self.offsets)
        for r in range(p):
            x = r if r else p
            if x + self.offsets[r] < 1:
                raise ValueError("offsets must keep every label positive")

    def contains(self, x):
        return isinstance(x, int) and x >= 1

    def _label(self, x):
        return x + self.offsets[x % len(self.offsets)]

    def block(self, n):
        p = len(self.offsets)
        out = []
        for r, off in enumerate(self.offsets):
            x = n - off
            if x >= 1 and x % p == r:
                out.append(x)
        return sorted(out)

    def _sigma(self, n):
        p = len(self.offsets)
        return sum(_count_residue(n - off, p, r) for r, off in enumerate(self.offsets))

    def _sigma_batch(self):
        return lambda lo, hi: self._sigma(np.arange(lo, hi + 1, dtype=np.int64))

    def symbolic(self):
        start = max(max(self.offsets), 0) + 1
        return QuasiPolynomial.fit(lambda n: int(self._sigma(n)), len(self.offsets), 1, start)


def arrangement(which: str) -> CalculableSet:
    """The naturals under arrangement ``"A"`` (canonical), ``"B"`` or ``"C"``."""
    if which == "A":
        return atom("N")
    if which == "B":
        return ArrangedNaturals((0, 1), "N_B")
    if which == "C":
        return ArrangedNaturals((-1, 0), "N_C")
    raise ValueError(f"unknown arrangement {which}")


class FamilyUnion(CalculableSet):
    """``U A_i`` where ``A_i = gen(i)`` has blocks ``A_{i,j}``.

    ``label(x) = max(i, j)`` for the cell containing ``x``.  Cells are
    audited for overlaps up to the largest label queried so far.
    ``locate(x)`` may return the family index holding ``x`` (or None); without
    it membership is searched up to ``search_limit``.
    """

    def __init__(self, gen: Callable[[int], CalculableSet], universe: Optional[Universe] = None,
                 locate: Optional[Callable] = None, name: str = "family",
                 canonical: bool = False, search_limit: int = SEARCH_LIMIT):
        super().__init__(universe or gen(1).universe, name)
        self._gen = lru_cache(maxsize=None)(gen)
        self._locate = locate
        self.canonical = canonical
        self.search_limit = search_limit
        self._blocks: List[List] = []
        self._where: Dict = {}
        self._lock = threading.RLock()

    def _cells(self, n):
        for j in range(1, n + 1):
            yield (n, j)
        for i in range(1, n):
            yield (i, n)

    def _grow(self, n):
        with self._lock:
            while len(self._blocks) < n:
                m = len(self._blocks) + 1
                out = []
                for i, j in self._cells(m):
                    for x in self._gen(i).block(j):
                        if x in self._where:
                            raise OverlapError(x, self._where[x], (i, j))
                        self._where[x] = (i, j)
                        out.append(x)
                if out and not isinstance(out[0], tuple):
                    out.sort()
                self._blocks.append(out)

    def block(self, n):
        if n < 1:
            return []
        self._grow(n)
        return list(self._blocks[n - 1])

    def _find(self, x):
        if self._locate is not None:
            i = self._locate(x)
            if i is None:
                return None
            member = self._gen(i)
            if not member.contains(x):
                return None
            return max(i, member._label(x))
        with self._lock:
            if x in self._where:
                i, j = self._where[x]
                return max(i, j)
        for n in range(1, self.search_limit + 1):
            self._grow(n)
            if x in self._where:
                i, j = self._where[x]
                return max(i, j)
        return None

    def contains(self, x):
        return self._find(x) is not None

    def _label(self, x):
        return self._find(x)


# catalog and construction ---------------------------------------------


@lru_cache(maxsize=None)
def atom(name: str, arg: Optional[int] = None) -> CalculableSet:
    """Catalog sets (shared, so their size caches are shared too)."""
    if name == "N":
        return PatternSet(Pattern.make(1, [0]), NAT, "N", Atom("N"),
                          EnvelopeCertificate(EnvelopeTerm(1), EnvelopeTerm(1), 1, "exact"))
    if name == "E":
        s = multiples(2, "E", Atom("E"))
        return s
    if name == "O":
        return PatternSet(Pattern.make(2, [1]), NAT, "O", Atom("O"))
    if name == "M":
        return multiples(arg)
    if name == "S":
        return atom("N") if arg == 1 else Powers(arg)
    if name == "P":
        return Primes()
    if name == "Z":
        return PatternSet(Pattern.make(1, [0], [0], [0]), INT, "Z", Atom("Z"))
    if name == "N0":
        return PatternSet(Pattern.make(1, [0], (), [0]), INT, "N0", Atom("N0"))
    if name == "I":
        return UnitInterval()
    if name == "Qpos":
        return NonNegRationals()
    if name == "Q":
        return Rationals()
    raise ValueError(f"unknown atom {name}")


def _as_set(x) -> CalculableSet:
    if isinstance(x, CalculableSet):
        return x
    if isinstance(x, SetExpr):
        return build(x)
    raise TypeError(f"expected a set or set expression, got {type(x).__name__}")


def _combine(op: str, a, b) -> CalculableSet:
    a, b = _as_set(a), _as_set(b)
    universe = unify(op, a.universe, b.universe)
    if not (a.canonical and b.canonical):
        bad = a if not a.canonical else b
        raise NonCanonicalError(f"{op} needs canonically arranged operands; {bad.name} is not")
    expr = BinOp(op, a.expr, b.expr) if a.expr is not None and b.expr is not None else None
    if isinstance(a, IntegerSet) and isinstance(b, IntegerSet):
        return IntegerCombination(op, a, b, universe, expr)
    return Combination(op, a, b, universe, expr)


def union(a, b) -> CalculableSet:
    return _combine("union", a, b)


def inter(a, b) -> CalculableSet:
    return _combine("inter", a, b)


def minus(a, b) -> CalculableSet:
    return _combine("minus", a, b)


def product(a, b) -> CalculableSet:
    return Product(_as_set(a), _as_set(b))


def subset_of_product(pred: Callable[[tuple], bool], a, b, name: str = "C") -> CalculableSet:
    return SubsetOfProduct(pred, _as_set(a), _as_set(b), name)


def family_union(gen: Callable[[int], CalculableSet], **kwargs) -> CalculableSet:
    return FamilyUnion(gen, **kwargs)


def finite_subset(parent, elements: Iterable) -> CalculableSet:
    parent = _as_set(parent)
    if isinstance(parent, IntegerSet):
        els = list(elements)
        for x in els:
            if not parent.contains(coerce_element(parent.universe, x)):
                raise NotAMemberError(x, parent.name)
        return finite_integers(els)
    return FiniteSubset(parent, elements)


def build(expr: SetExpr) -> CalculableSet:
    """Turn an expression tree into a set (universes are checked first)."""
    universe_of(expr)
    if isinstance(expr, Atom):
        return atom(expr.name, expr.arg)
    if isinstance(expr, Finite):
        return finite_integers(expr.elements)
    left, right = build(expr.left), build(expr.right)
    if expr.op == "product":
        return Product(left, right, expr)
    return _combine(expr.op, left, right)


# queries --------------------------------------------------------------


def label(a, x) -> int:
    return _as_set(a).label(x)


def block(a, n: int) -> List[Element]:
    return _as_set(a).block(n)


def characteristic(a) -> IntSequence:
    return _as_set(a).characteristic()


def size(a) -> SizeSequence:
    return _as_set(a).size()


totient = arith.totient
prime_pi = arith.prime_pi


def _all_positive(p: Pattern) -> bool:
    return p.period == 1 and 0 in p.pos and not p.extra_out


def provably_subset(a: CalculableSet, b: CalculableSet) -> bool:
    """A structural, sound (not complete) proof that ``a`` is contained in ``b``."""
    if a is b or (a.expr is not None and a.expr == b.expr):
        return True
    if isinstance(b, EmptySet):
        return False
    fe = a.finite_elements
    if fe is not None:
        return all(b.contains(x) for x in fe)
    if isinstance(a, IntegerSet) and isinstance(b, IntegerSet):
        pa, pb = a.pattern, b.pattern
        if pa is not None and pb is not None:
            return pa.subset_of(pb)
        if pb is not None and a.universe == NAT and _all_positive(pb):
            return True
        if isinstance(a, Powers) and isinstance(b, Powers):
            return a.k % b.k == 0
        if isinstance(a, Primes) and isinstance(b, Primes):
            return True
    if isinstance(a, (Combination, IntegerCombination)):
        if a.op == "minus":
            return provably_subset(a.left, b)
        if a.op == "inter":
            return provably_subset(a.left, b) or provably_subset(a.right, b)
        if provably_subset(a.left, b) and provably_subset(a.right, b):
            return True
    if isinstance(b, (Combination, IntegerCombination)):
        if b.op == "union":
            return provably_subset(a, b.left) or provably_subset(a, b.right)
        if b.op == "inter":
            return provably_subset(a, b.left) and provably_subset(a, b.right)
    if isinstance(a, UnitInterval) and isinstance(b, (UnitInterval, NonNegRationals, Rationals)):
        return True
    if isinstance(a, NonNegRationals) and isinstance(b, NonNegRationals):
        return True
    if isinstance(a, Rationals) and isinstance(b, Rationals):
        return True
    if isinstance(a, Product) and isinstance(b, Product):
        return provably_subset(a.left, b.left) and provably_subset(a.right, b.right)
    if isinstance(a, FiniteSubset):
        return provably_subset(a.parent, b)
    return False


def compare_sets(a, b, budget: int = 10_000) -> ComparisonVerdict:
    """Compare the sizes of two sets.

    A structural inclusion between canonically arranged sets supplies the
    part-whole argument: the size of the complement is non-decreasing, so
    the first complement element settles the strict order for good.
    """
    a, b = _as_set(a), _as_set(b)
    sa, sb = a.size(), b.size()
    canonical = a.canonical and b.canonical
    a_in_b = canonical and provably_subset(a, b)
    b_in_a = canonical and provably_subset(b, a)
    if a_in_b and b_in_a:
        return ComparisonVerdict(Relation.EQUAL, witness_m=0, method="structure",
                                 observation="the two sets coincide")
    if a_in_b:
        diff = _difference_size(sb, sa, f"{b.name} minus {a.name}")
        return compare(sa, sb, budget, difference=diff)
    if b_in_a:
        diff = _difference_size(sa, sb, f"{a.name} minus {b.name}")
        return compare(sb, sa, budget, difference=diff).flipped()
    return compare(sa, sb, budget)
