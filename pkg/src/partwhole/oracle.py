"""Brute-force reference enumeration.

Everything here is re-derived from the definitions with plain loops: trial
division for primes, gcd scans for reduced fractions, candidate scans for
the rational sets.  Nothing is shared with :mod:`partwhole.sets` beyond the
expression tree, which is the point: the two must agree independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

from .errors import NonCanonicalError, ResourceLimitError
from .expr import Atom, BinOp, Finite, SetExpr, universe_of

DEFAULT_LIMIT = 10**6


@dataclass
class LabelledInventory:
    """Members with label ``<= bound`` as ``(element, label)`` pairs."""

    bound: int
    entries: List[Tuple[object, int]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def counts(self) -> List[int]:
        """``counts()[n-1]`` is the number of members with label exactly n."""
        out = [0] * self.bound
        for _, lab in self.entries:
            out[lab - 1] += 1
        return out

    def sigma(self) -> List[int]:
        total, out = 0, []
        for c in self.counts():
            total += c
            out.append(total)
        return out

    def labels(self) -> Dict[object, int]:
        return dict(self.entries)


class _Rational(Fraction):
    """A Fraction with a cached hash; inventories hash every element often."""

    __slots__ = ("_hash",)

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            self._hash = Fraction.__hash__(self)
            return self._hash


def _plain(x):
    if isinstance(x, tuple):
        return tuple(_plain(v) for v in x)
    if isinstance(x, _Rational):
        return Fraction(x.numerator, x.denominator)
    return x


# primitive definitions --------------------------------------------------


def is_prime_trial(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def prime_count(n: int) -> int:
    """Pure-Python sieve of Eratosthenes."""
    if n < 2:
        return 0
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = bytes(len(range(p * p, n + 1, p)))
    return sum(flags)


def phi_by_gcd(n: int) -> int:
    return sum(1 for m in range(1, n + 1) if math.gcd(m, n) == 1)


def _is_power(x: int, k: int) -> bool:
    m = 1
    while m ** k < x:
        m += 1
    return m ** k == x


def _mixed_label(x: Fraction) -> int:
    # p + m/n with 0 <= m/n < 1; integers keep their own value
    if x == 0:
        return 1
    if x.denominator == 1:
        return x.numerator
    return max(math.floor(x), x.denominator)


def _signed_label(x: Fraction) -> int:
    # |x| = p + f with f in (0, 1]
    if x == 0:
        return 1
    a = abs(x)
    p = math.ceil(a) - 1
    return max(p, 1, (a - p).denominator)


def member(expr: SetExpr, x) -> bool:
    if isinstance(expr, Finite):
        return isinstance(x, int) and x in expr.elements
    if isinstance(expr, BinOp):
        if expr.op == "product":
            return isinstance(x, tuple) and len(x) == 2 and \
                member(expr.left, x[0]) and member(expr.right, x[1])
        a, b = member(expr.left, x), member(expr.right, x)
        return {"union": a or b, "inter": a and b, "minus": a and not b}[expr.op]
    name, k = expr.name, expr.arg
    if name in ("I", "Qpos", "Q"):
        if not isinstance(x, Fraction):
            return False
        return {"I": 0 < x <= 1, "Qpos": x >= 0, "Q": True}[name]
    if not isinstance(x, int) or isinstance(x, bool):
        return False
    if name == "Z":
        return True
    if name == "N0":
        return x >= 0
    if x < 1:
        return False
    if name == "N":
        return True
    if name == "E":
        return x % 2 == 0
    if name == "O":
        return x % 2 == 1
    if name == "M":
        return x % k == 0
    if name == "S":
        return _is_power(x, k)
    if name == "P":
        return is_prime_trial(x)
    raise ValueError(name)


def label_of(expr: SetExpr, x) -> int:
    """Label of a member, auditing agreement between operands."""
    if isinstance(expr, Finite):
        return max(abs(x), 1)
    if isinstance(expr, BinOp):
        if expr.op == "product":
            return max(label_of(expr.left, x[0]), label_of(expr.right, x[1]))
        in_a, in_b = member(expr.left, x), member(expr.right, x)
        if in_a and in_b:
            la, lb = label_of(expr.left, x), label_of(expr.right, x)
            if la != lb:
                raise NonCanonicalError(f"labels {la} and {lb} disagree on {x}")
            return la
        return label_of(expr.left if in_a else expr.right, x)
    name = expr.name
    if name == "I":
        return x.denominator
    if name == "Qpos":
        return _mixed_label(x)
    if name == "Q":
        return _signed_label(x)
    return max(abs(x), 1)


# enumeration ------------------------------------------------------------


@lru_cache(maxsize=256)
def _atom_entries(name: str, k, bound: int) -> Tuple[Tuple[object, int], ...]:
    out = []
    if name in ("N", "E", "O", "M", "P", "S", "N0", "Z"):
        expr = Atom(name, k)
        start = -bound if name == "Z" else (0 if name == "N0" else 1)
        for x in range(start, bound + 1):
            if member(expr, x):
                out.append((x, max(abs(x), 1)))
        return tuple(out)
    if name == "I":
        for d in range(1, bound + 1):
            for m in range(1, d + 1):
                if math.gcd(m, d) == 1:
                    out.append((_Rational(m, d), d))
        return tuple(out)
    seen = set()
    for d in range(1, bound + 1):
        for j in range(0, (bound + 1) * d + 1):
            a = _Rational(j, d)
            if a in seen:
                continue
            seen.add(a)
            if name == "Qpos":
                lab = _mixed_label(a)
                if lab <= bound:
                    out.append((a, lab))
            else:
                lab = _signed_label(a)
                if lab <= bound:
                    out.append((a, lab))
                    if a != 0:
                        out.append((_Rational(-a.numerator, a.denominator), lab))
    return tuple(out)


def _check_limit(n: int, limit: int):
    if n > limit:
        raise ResourceLimitError(f"oracle inventory would exceed {limit} entries")


def _leaves(expr: SetExpr, out: Dict[SetExpr, int]) -> Dict[SetExpr, int]:
    """Distinct atoms, literals and products, numbered left to right."""
    if isinstance(expr, BinOp) and expr.op != "product":
        _leaves(expr.left, out)
        _leaves(expr.right, out)
    elif expr not in out:
        out[expr] = len(out)
    return out


def _evaluate(expr: SetExpr, leaf_index: Dict[SetExpr, int], classes: tuple):
    """``(member, label class)`` of one element given its leaf classes.

    ``classes[i]`` is None when leaf ``i`` does not contain the element,
    otherwise a small integer naming its label there (equal integers mean
    equal labels).
    """
    if not isinstance(expr, BinOp) or expr.op == "product":
        c = classes[leaf_index[expr]]
        return c is not None, c
    a_in, a_c = _evaluate(expr.left, leaf_index, classes)
    b_in, b_c = _evaluate(expr.right, leaf_index, classes)
    if a_in and b_in and a_c != b_c:
        raise NonCanonicalError(f"operands of {expr.op} label a shared element differently")
    if expr.op == "union":
        return a_in or b_in, a_c if a_in else b_c
    if expr.op == "inter":
        return a_in and b_in, a_c
    return a_in and not b_in, a_c


def _leaf_entries(leaf: SetExpr, bound: int, limit: int) -> Dict[object, int]:
    if isinstance(leaf, Atom):
        return dict(_atom_entries(leaf.name, leaf.arg, bound))
    if isinstance(leaf, Finite):
        return {x: max(abs(x), 1) for x in leaf.elements if max(abs(x), 1) <= bound}
    a = _entries(leaf.left, bound, limit)
    b = _entries(leaf.right, bound, limit)
    _check_limit(len(a) * len(b), limit)
    return {(x, y): max(lx, ly) for x, lx in a.items() for y, ly in b.items()}


def _entries(expr: SetExpr, bound: int, limit: int) -> Dict[object, int]:
    leaf_index = _leaves(expr, {})
    leaves = list(leaf_index)
    invs = [_leaf_entries(leaf, bound, limit) for leaf in leaves]
    candidates = set().union(*invs)
    _check_limit(len(candidates), limit)
    verdicts: Dict[tuple, tuple] = {}
    out = {}
    for x in candidates:
        labels = []
        for leaf, inv in zip(leaves, invs):
            if x in inv:
                labels.append(inv[x])
            elif member(leaf, x):
                labels.append(label_of(leaf, x))  # beyond the bound here
            else:
                labels.append(None)
        distinct = list(dict.fromkeys(v for v in labels if v is not None))
        classes = tuple(None if v is None else distinct.index(v) for v in labels)
        hit = verdicts.get(classes)
        if hit is None:
            hit = verdicts[classes] = _evaluate(expr, leaf_index, classes)
        inside, c = hit
        if inside and distinct[c] <= bound:
            out[x] = distinct[c]
    return out


def enumerate(expr: SetExpr, bound: int, limit: int = DEFAULT_LIMIT) -> LabelledInventory:
    """All members of ``expr`` with label ``<= bound``."""
    if bound < 1:
        raise ValueError("bound must be positive")
    universe_of(expr)
    inv = _entries(expr, bound, limit)
    entries = sorted(((_plain(x), lab) for x, lab in inv.items()),
                     key=lambda e: (e[1], repr(e[0])))
    return LabelledInventory(bound, entries)


def brute_sigma(expr: SetExpr, k: int, limit: int = DEFAULT_LIMIT) -> List[int]:
    """``[sigma_1, ..., sigma_k]`` by counting the inventory."""
    return enumerate(expr, k, limit).sigma()
