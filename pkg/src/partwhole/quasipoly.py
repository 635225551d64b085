"""Quasi-polynomial normal forms for eventually periodic-polynomial sequences.

A :class:`QuasiPolynomial` with period ``p`` stores, for each residue class
``r``, integer coefficients ``c_j`` such that for ``n = p*q + r`` and
``n >= threshold``::

    value(n) = sum_j c_j * C(q, j)

Using the binomial basis in the quotient ``q`` (rather than in ``n``)
keeps floor-type forms such as ``n // 2`` integral.  All arithmetic goes
through exact evaluation and Newton forward differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, gcd
from typing import Callable, List, Optional, Sequence, Tuple

from .errors import OutOfDomainError, UndefinedDifferenceError
from .verdict import ComparisonVerdict, Relation

Coeffs = Tuple[int, ...]

REFINE_CAP = 10**6


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _binom(q: int, j: int) -> int:
    """Generalized binomial C(q, j) for any integer q."""
    if q >= 0:
        return comb(q, j)
    num = 1
    for i in range(j):
        num *= q - i
    return num // factorial(j)


def _strip(coeffs: Sequence[int]) -> Coeffs:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def newton_coeffs(values: Sequence[int]) -> Coeffs:
    """Forward differences at 0 of ``values[q]`` for ``q = 0..d``."""
    row = list(values)
    out = []
    while row:
        out.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    return _strip(out)


def newton_eval(coeffs: Coeffs, q: int) -> int:
    return sum(c * _binom(q, j) for j, c in enumerate(coeffs))


def _power_basis(coeffs: Coeffs) -> List[Fraction]:
    """Convert binomial-basis coefficients (in q) to the power basis."""
    result = [Fraction(0)] * max(len(coeffs), 1)
    falling = [Fraction(1)]  # q (q-1) ... (q-j+1)
    for j, c in enumerate(coeffs):
        if j > 0:
            nxt = [Fraction(0)] * (len(falling) + 1)
            for i, a in enumerate(falling):
                nxt[i + 1] += a
                nxt[i] -= a * (j - 1)
            falling = nxt
        scale = Fraction(c, factorial(j))
        for i, a in enumerate(falling):
            result[i] += scale * a
    return result


def _cauchy_bound(power: List[Fraction]) -> int:
    """An integer beyond every real root of the polynomial."""
    while power and power[-1] == 0:
        power = power[:-1]
    if len(power) <= 1:
        return 0
    lead = abs(power[-1])
    bound = 1 + max(abs(a) / lead for a in power[:-1])
    return int(bound) + 1


def _sign(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class QuasiPolynomial:
    period: int
    threshold: int
    classes: Tuple[Coeffs, ...]

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("period must be positive")
        if len(self.classes) != self.period:
            raise ValueError("need exactly one polynomial per residue class")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        object.__setattr__(self, "classes", tuple(_strip(c) for c in self.classes))

    # construction -----------------------------------------------------

    @classmethod
    def polynomial(cls, coeffs: Sequence[int], threshold: int = 1) -> "QuasiPolynomial":
        """Period-1 form from binomial coefficients in n."""
        return cls(1, threshold, (tuple(coeffs),))

    @classmethod
    def constant(cls, k: int, threshold: int = 1) -> "QuasiPolynomial":
        return cls(1, threshold, ((k,),))

    @classmethod
    def floor_div(cls, k: int) -> "QuasiPolynomial":
        """``n // k``."""
        return cls(k, 1, tuple((0, 1) for _ in range(k))).normalized()

    @classmethod
    def fit(cls, fn: Callable[[int], int], period: int, degree: int,
            threshold: int) -> "QuasiPolynomial":
        """Interpolate a sequence known to be quasi-polynomial.

        The caller asserts the shape (period, degree bound, threshold); the
        fit is then exact.  A few extra samples guard against false claims.
        """
        classes = []
        start = max(threshold, 1)
        for r in range(period):
            q0 = -((r - start) // period)  # smallest q with p*q + r >= start
            samples = [fn(period * (q0 + i) + r) for i in range(degree + 3)]
            local = newton_coeffs(samples[: degree + 1])
            for i in range(degree + 1, degree + 3):
                if newton_eval(local, i) != samples[i]:
                    raise ValueError("sequence does not have the claimed quasi-polynomial shape")
            at_zero = [newton_eval(local, q - q0) for q in range(degree + 1)]
            classes.append(newton_coeffs(at_zero))
        return cls(period, threshold, tuple(classes)).normalized()

    # evaluation -------------------------------------------------------

    def raw(self, n: int) -> int:
        """Polynomial value at ``n`` regardless of the threshold."""
        q, r = divmod(n, self.period)
        return newton_eval(self.classes[r], q)

    def __call__(self, n: int) -> int:
        return qp_eval(self, n)

    @property
    def degree(self) -> int:
        return max((len(c) - 1 for c in self.classes), default=-1)

    def class_degree(self, r: int) -> int:
        return len(self.classes[r]) - 1

    def is_zero(self) -> bool:
        return all(not c for c in self.classes)

    # normal form ------------------------------------------------------

    def lift(self, period: int, threshold: Optional[int] = None) -> "QuasiPolynomial":
        if period % self.period:
            raise ValueError(f"cannot lift period {self.period} to {period}")
        d = max(self.degree, 0)
        classes = tuple(
            newton_coeffs([self.raw(period * q + r) for q in range(d + 1)])
            for r in range(period))
        return QuasiPolynomial(period, self.threshold if threshold is None else threshold, classes)

    def normalized(self) -> "QuasiPolynomial":
        """Equivalent form with the minimal period."""
        d = max(self.degree, 0)
        for p in range(1, self.period):
            if self.period % p:
                continue
            cand = tuple(
                newton_coeffs([self.raw(p * q + r) for q in range(d + 1)])
                for r in range(p))
            trial = QuasiPolynomial(p, self.threshold, cand)
            if trial.lift(self.period).classes == self.classes:
                return trial
        return self

    def with_threshold(self, threshold: int) -> "QuasiPolynomial":
        return QuasiPolynomial(self.period, threshold, self.classes)

    # presentation -----------------------------------------------------

    def class_in_n(self, r: int) -> List[Fraction]:
        """Power-basis coefficients of class ``r`` as a polynomial in n."""
        coeffs = self.classes[r]
        d = len(coeffs) - 1
        if d < 0:
            return []
        xs = [self.period * q + r for q in range(d + 1)]
        ys = [newton_eval(coeffs, q) for q in range(d + 1)]
        return _interpolate(xs, ys)

    def __str__(self):
        body = [_poly_str(self.class_in_n(r)) for r in range(self.period)]
        if self.period == 1:
            text = body[0]
        else:
            text = "{" + "; ".join(
                f"n≡{r} (mod {self.period}): {b}" for r, b in enumerate(body)) + "}"
        if self.threshold > 1:
            text += f" for n ≥ {self.threshold}"
        return text

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "threshold": self.threshold,
            "classes": [list(c) for c in self.classes],
            "text": str(self),
        }


def _interpolate(xs: Sequence[int], ys: Sequence[int]) -> List[Fraction]:
    """Power coefficients of the interpolating polynomial (Newton form)."""
    n = len(xs)
    table = [Fraction(y) for y in ys]
    divided = [table[0]]
    for level in range(1, n):
        table = [(table[i + 1] - table[i]) / (xs[i + level] - xs[i]) for i in range(n - level)]
        divided.append(table[0])
    poly = [Fraction(0)] * n
    basis = [Fraction(1)]
    for k in range(n):
        for i, b in enumerate(basis):
            poly[i] += divided[k] * b
        nxt = [Fraction(0)] * (len(basis) + 1)
        for i, b in enumerate(basis):
            nxt[i + 1] += b
            nxt[i] -= b * xs[k]
        basis = nxt
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _poly_str(power: List[Fraction]) -> str:
    if not power or all(c == 0 for c in power):
        return "0"
    terms = []
    for i in range(len(power) - 1, -1, -1):
        c = power[i]
        if c == 0:
            continue
        mono = "" if i == 0 else ("n" if i == 1 else f"n^{i}")
        mag = abs(c)
        if not mono:
            body = _frac_str(mag)
        elif mag == 1:
            body = mono
        elif mag.denominator == 1:
            body = f"{mag.numerator}{mono}"
        else:
            body = f"{mono}/{mag.denominator}" if mag.numerator == 1 else f"{mag.numerator}{mono}/{mag.denominator}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    first_sign, first = terms[0]
    text = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        text += f" {sign} {body}"
    return text


# operations ---------------------------------------------------------------

def qp_eval(q: QuasiPolynomial, n: int) -> int:
    if n < max(q.threshold, 1):
        raise OutOfDomainError(f"index {n} is below the threshold {q.threshold}")
    return q.raw(n)


def _combine(a: QuasiPolynomial, b: QuasiPolynomial, op, degree: int) -> QuasiPolynomial:
    period = _lcm(a.period, b.period)
    threshold = max(a.threshold, b.threshold)
    degree = max(degree, 0)
    classes = tuple(
        newton_coeffs([op(a.raw(period * q + r), b.raw(period * q + r)) for q in range(degree + 1)])
        for r in range(period))
    return QuasiPolynomial(period, threshold, classes).normalized()


def qp_add(a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    return _combine(a, b, lambda x, y: x + y, max(a.degree, b.degree))


def qp_mul(a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    if a.is_zero() or b.is_zero():
        return QuasiPolynomial(1, max(a.threshold, b.threshold), ((),))
    return _combine(a, b, lambda x, y: x * y, a.degree + b.degree)


def qp_sub(a: QuasiPolynomial, b: QuasiPolynomial) -> QuasiPolynomial:
    """``a - b``; the threshold is raised past the last index where ``b > a``."""
    verdict = qp_compare(b, a)
    if verdict.relation not in (Relation.LESS, Relation.LESS_EQ, Relation.EQUAL):
        raise UndefinedDifferenceError(
            f"difference is eventually negative on some residue class ({verdict.relation})")
    diff = _combine(a, b, lambda x, y: x - y, max(a.degree, b.degree))
    return diff.with_threshold(max(diff.threshold, verdict.witness_m + 1))


def eventual_signs(diff: QuasiPolynomial) -> List[int]:
    return [_sign(c[-1]) if c else 0 for c in diff.classes]


def qp_compare(a: QuasiPolynomial, b: QuasiPolynomial) -> ComparisonVerdict:
    """Exact eventual comparison; never Unknown."""
    period = _lcm(a.period, b.period)
    threshold = max(a.threshold, b.threshold, 1)
    degree = max(a.degree, b.degree, 0)
    diffs = [
        newton_coeffs([a.raw(period * q + r) - b.raw(period * q + r) for q in range(degree + 1)])
        for r in range(period)]
    signs = [_sign(c[-1]) if c else 0 for c in diffs]
    relation = Relation.from_signs(signs)

    # present the breakdown on the coarsest period that still separates classes
    shown_period = period
    for p in range(1, period):
        if period % p == 0 and all(signs[r] == signs[r % p] for r in range(period)):
            shown_period = p
            break
    classes = tuple((r, signs[r]) for r in range(shown_period))

    if relation is Relation.INCOMPARABLE:
        neg = signs.index(-1) % shown_period
        pos = signs.index(1) % shown_period
        return ComparisonVerdict(relation, method="symbolic", period=shown_period,
                                 classes=classes, proof=(neg, pos))

    holds = relation.pointwise
    budget = REFINE_CAP
    witness = threshold - 1
    for r, coeffs in enumerate(diffs):
        q = _cauchy_bound(_power_basis(coeffs)) + 1
        # walk down from the root bound until the class relation fails
        while True:
            n = period * q + r
            if n < threshold:
                fail_n = n
                break
            if budget <= 0 or not holds(newton_eval(coeffs, q), 0):
                fail_n = n
                break
            budget -= 1
            q -= 1
        witness = max(witness, fail_n)
    return ComparisonVerdict(relation, witness_m=witness, method="symbolic",
                             period=shown_period, classes=classes)
