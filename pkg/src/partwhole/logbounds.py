"""Rigorous rational enclosures of natural logarithms.

``ln_bounds(x)`` returns dyadic rationals ``lo <= ln(x) <= hi``.  The
argument is reduced to ``x = 2**k * y`` with ``1 <= y < 2`` and
``ln y = 2 atanh((y - 1)/(y + 1))`` is summed with an explicit tail bound.
All rounding is outward, so the enclosure never depends on floating point.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Tuple, Union

Rational = Union[int, Fraction]
Interval = Tuple[Fraction, Fraction]


def _floor_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def _ceil_dyadic(x: Fraction, bits: int) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


def _cdiv(a: int, b: int) -> int:
    return -((-a) // b)


def _atanh2_fixed(z_num: int, work: int, terms: int, upper: bool) -> int:
    """``2 * sum_{i<terms} z^(2i+1)/(2i+1)`` scaled by ``2**work``.

    ``z = z_num / 2**work``; every step rounds down (or up when ``upper``),
    so the result bounds the exact partial sum from the chosen side.
    """
    div = _cdiv if upper else (lambda a, b: a // b)
    z2 = div(z_num * z_num, 1 << work)
    term = z_num
    total = 0
    for i in range(terms):
        total += div(term, 2 * i + 1)
        term = div(term * z2, 1 << work)
    return 2 * total


def _atanh2_tail(z: Fraction, terms: int) -> Fraction:
    # sum_{i >= terms} z^(2i+1)/(2i+1) <= z^(2 terms+1) / ((2 terms+1)(1 - z^2))
    return 2 * z ** (2 * terms + 1) / ((2 * terms + 1) * (1 - z * z))


def _terms_for(bits: int) -> int:
    # z <= 1/3 gives at least log2(9) > 3 bits per term
    return bits // 3 + 4


def _ln_unit(y: Fraction, bits: int) -> Interval:
    """Enclosure of ln(y) for 1 <= y <= 2."""
    if y == 1:
        return Fraction(0), Fraction(0)
    z = (y - 1) / (y + 1)
    work = bits + 16
    z_lo = (z.numerator << work) // z.denominator
    z_hi = _cdiv(z.numerator << work, z.denominator)
    n = _terms_for(bits)
    lo = Fraction(_atanh2_fixed(z_lo, work, n, False), 1 << work)
    hi = Fraction(_atanh2_fixed(z_hi, work, n, True), 1 << work)
    hi += _atanh2_tail(Fraction(z_hi, 1 << work), n)
    return _floor_dyadic(lo, bits), _ceil_dyadic(hi, bits)


@lru_cache(maxsize=None)
def ln2_bounds(bits: int = 64) -> Interval:
    return _ln_unit(Fraction(2), bits)


def ln_bounds(x: Rational, bits: int = 64) -> Interval:
    """Return ``(lo, hi)`` with ``lo <= ln(x) <= hi``; ``x`` must be positive."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"logarithm of non-positive value {x}")
    if x == 1:
        return Fraction(0), Fraction(0)
    k = x.numerator.bit_length() - x.denominator.bit_length()
    y = x / (Fraction(2) ** k)
    if y < 1:
        k -= 1
        y *= 2
    elif y >= 2:
        k += 1
        y /= 2
    ylo, yhi = _ln_unit(y, bits)
    l2lo, l2hi = ln2_bounds(bits)
    if k >= 0:
        return k * l2lo + ylo, k * l2hi + yhi
    return k * l2hi + ylo, k * l2lo + yhi


def ln_interval(lo: Rational, hi: Rational, bits: int = 64) -> Interval:
    """Enclosure of ln over ``[lo, hi]`` (ln is increasing)."""
    return ln_bounds(lo, bits)[0], ln_bounds(hi, bits)[1]


def interval_mul(a: Interval, b: Interval) -> Interval:
    products = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
    return min(products), max(products)


def scale(c: Fraction, a: Interval) -> Interval:
    if c >= 0:
        return c * a[0], c * a[1]
    return c * a[1], c * a[0]
