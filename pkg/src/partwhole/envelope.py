"""Certified asymptotic envelopes ``c * n**a * (ln n)**b``.

Terms are compared in the dominance order (exponent, log exponent,
coefficient).  Crossover witnesses are computed with the rational log
enclosures of :mod:`partwhole.logbounds`; floating point only serves as a
filter in bulk audits, with an exact fallback near ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CertificateError
from .logbounds import ln_bounds, ln_interval, scale

PRECISIONS = (64, 160, 480)
DOUBLING_CAP = 4096
SCAN_CAP = 10**6
FLOAT_MARGIN = 1e-9


@dataclass(frozen=True)
class EnvelopeTerm:
    """``coef * n**exp * (ln n)**log_exp``."""

    coef: Fraction
    exp: Fraction = Fraction(1)
    log_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coef", Fraction(self.coef))
        object.__setattr__(self, "exp", Fraction(self.exp))
        if self.coef <= 0:
            raise ValueError("envelope coefficients must be positive")

    @property
    def key(self):
        return (self.exp, self.log_exp, self.coef)

    def precedes(self, other: "EnvelopeTerm") -> bool:
        return self.key < other.key

    def __mul__(self, other: "EnvelopeTerm") -> "EnvelopeTerm":
        return EnvelopeTerm(self.coef * other.coef, self.exp + other.exp,
                            self.log_exp + other.log_exp)

    def scaled(self, c) -> "EnvelopeTerm":
        return EnvelopeTerm(self.coef * Fraction(c), self.exp, self.log_exp)

    def at_one(self) -> Optional[Fraction]:
        """Exact value at n = 1, or None where ``(ln 1)**log_exp`` is undefined."""
        if self.log_exp > 0:
            return Fraction(0)
        if self.log_exp < 0:
            return None
        return self.coef

    def log_enclosure(self, n: int, bits: int):
        """Enclosure of ``ln(term(n))`` for ``n >= 2``."""
        ln_n = ln_bounds(n, bits)
        lo, hi = ln_bounds(self.coef, bits)
        a = scale(self.exp, ln_n)
        lo, hi = lo + a[0], hi + a[1]
        if self.log_exp:
            lnln = ln_interval(ln_n[0], ln_n[1], bits)
            b = scale(Fraction(self.log_exp), lnln)
            lo, hi = lo + b[0], hi + b[1]
        return lo, hi

    def float_log(self, n):
        """Approximate ``ln(term(n))``; accepts numpy arrays with n >= 2."""
        ln_n = np.log(n)
        out = math.log(self.coef) + float(self.exp) * ln_n
        if self.log_exp:
            out = out + self.log_exp * np.log(ln_n)
        return out

    def approx(self, n: int) -> float:
        if n == 1:
            v = self.at_one()
            return math.inf if v is None else float(v)
        return math.exp(self.float_log(n))

    def __str__(self):
        parts = []
        if self.coef != 1:
            parts.append(str(self.coef) if self.coef.denominator == 1
                         else f"({self.coef})")
        if self.exp == 1:
            parts.append("n")
        elif self.exp != 0:
            parts.append(f"n^({self.exp})")
        text = "·".join(parts) if parts else "1"
        if self.log_exp > 0:
            text += "·(ln n)" + (f"^{self.log_exp}" if self.log_exp != 1 else "")
        elif self.log_exp < 0:
            text += "/(ln n)" + (f"^{-self.log_exp}" if self.log_exp != -1 else "")
        return text

    def to_json(self) -> dict:
        return {"coef": str(self.coef), "exp": str(self.exp), "log_exp": self.log_exp}


def certainly_less(f: EnvelopeTerm, g: EnvelopeTerm, n: int) -> bool:
    """True only when ``f(n) < g(n)`` is proved by exact enclosures."""
    if n < 1:
        raise ValueError("index must be positive")
    if n == 1:
        fv, gv = f.at_one(), g.at_one()
        # an undefined side counts as a failure
        return fv is not None and gv is not None and fv < gv
    for bits in PRECISIONS:
        flo, fhi = f.log_enclosure(n, bits)
        glo, ghi = g.log_enclosure(n, bits)
        if fhi < glo:
            return True
        if flo >= ghi:
            return False
    return False


def _monotone_start(f: EnvelopeTerm, g: EnvelopeTerm) -> int:
    """An index beyond which ``g/f`` is non-decreasing in n.

    With t = ln n, ln(g/f) = const + da*t + db*ln t, whose derivative
    da + db/t is non-negative for t >= -db/da when db < 0.
    """
    da = g.exp - f.exp
    db = g.log_exp - f.log_exp
    if db >= 0 or da <= 0:
        return 2
    t_star = Fraction(-db) / da
    n = max(2, int(math.exp(float(t_star))) + 1)
    while ln_bounds(n, 64)[0] < t_star:
        n *= 2
    return n


def crossover(f: EnvelopeTerm, g: EnvelopeTerm) -> int:
    """Least ``m`` with ``f(n) < g(n)`` for every ``n > m``.

    Requires ``f`` to precede ``g`` in the dominance order.  Above the
    monotone region the certified predicate is searched by doubling and
    bisection; below it every index is checked individually.
    """
    if not f.precedes(g):
        raise CertificateError(f"{f} does not eventually stay below {g}")
    start = _monotone_start(f, g)
    hi = start
    steps = 0
    while not certainly_less(f, g, hi):
        hi *= 2
        steps += 1
        if steps > DOUBLING_CAP:
            raise CertificateError(f"no crossover found for {f} < {g}")
    lo = start
    if certainly_less(f, g, lo):
        n0 = lo
    else:
        # invariant: not certified at lo, certified at hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if certainly_less(f, g, mid):
                hi = mid
            else:
                lo = mid
        return lo
    n = n0 - 1
    scanned = 0
    while n >= 1 and certainly_less(f, g, n):
        n -= 1
        scanned += 1
        if scanned > SCAN_CAP:
            raise CertificateError("crossover scan exceeded its step cap")
    return n


def env_compare(a_upper: EnvelopeTerm, b_lower: EnvelopeTerm,
                thresholds: Sequence[int] = (1, 1)) -> Optional[int]:
    """Witness ``m`` with ``a_upper(n) < b_lower(n)`` for ``n > m``, or None."""
    if not a_upper.precedes(b_lower):
        return None
    m = crossover(a_upper, b_lower)
    return max([m] + [t - 1 for t in thresholds])


@dataclass(frozen=True)
class EnvelopeCertificate:
    """``lower(n) <= value(n) <= upper(n)`` for every ``n >= threshold``.

    ``fact`` names the analytic argument covering indices past the audited
    range.
    """

    lower: EnvelopeTerm
    upper: EnvelopeTerm
    threshold: int
    fact: str = ""

    def __mul__(self, other: "EnvelopeCertificate") -> "EnvelopeCertificate":
        return EnvelopeCertificate(
            self.lower * other.lower, self.upper * other.upper,
            max(self.threshold, other.threshold),
            fact=f"product of ({self.fact}) and ({other.fact})")

    def audit(self, values: Callable[[int, int], Sequence[int]], upto: int) -> None:
        """Check the bounds for ``threshold <= n <= upto``.

        ``values(lo, hi)`` returns the sequence on ``lo..hi`` inclusive.
        Raises :class:`CertificateError` on the first violation.
        """
        lo = max(self.threshold, 1)
        if upto < lo:
            return
        if lo == 1:
            self._check_exact(1, values(1, 1)[0])
            lo = 2
            if upto < lo:
                return
        chunk = 1 << 18
        for start in range(lo, upto + 1, chunk):
            stop = min(upto, start + chunk - 1)
            vals = np.asarray(values(start, stop), dtype=np.float64)
            ns = np.arange(start, stop + 1, dtype=np.float64)
            with np.errstate(divide="ignore"):
                lv = np.log(vals)
            low = self.lower.float_log(ns)
            up = self.upper.float_log(ns)
            tol = FLOAT_MARGIN * (1 + np.abs(lv))
            unsure = (np.abs(low - lv) <= tol) | (np.abs(up - lv) <= tol) | (vals == 0)
            bad = ((low > lv) | (up < lv)) & ~unsure
            if bad.any():
                i = int(np.argmax(bad))
                raise CertificateError(self._violation(start + i, int(vals[i])))
            raw = values(start, stop)
            for i in np.nonzero(unsure)[0]:
                self._check_exact(start + int(i), int(raw[int(i)]))

    def _check_exact(self, n: int, v: int) -> None:
        if n == 1:
            lo, hi = self.lower.at_one(), self.upper.at_one()
            if lo is None or hi is None or not (lo <= v <= hi):
                raise CertificateError(self._violation(n, v))
            return
        if v == 0:
            raise CertificateError(self._violation(n, v))
        if self.lower.log_exp == 0 and self.upper.log_exp == 0:
            # pure powers compare exactly after raising to the denominators
            if self._power_bounds_ok(n, v):
                return
            raise CertificateError(self._violation(n, v))
        for bits in PRECISIONS:
            vlo, vhi = ln_bounds(v, bits)
            llo, lhi = self.lower.log_enclosure(n, bits)
            ulo, uhi = self.upper.log_enclosure(n, bits)
            low_ok = lhi <= vlo
            up_ok = vhi <= ulo
            if low_ok and up_ok:
                return
            if llo > vhi or uhi < vlo:
                break
        raise CertificateError(self._violation(n, v))

    def _power_bounds_ok(self, n: int, v: int) -> bool:
        # c*n^(p/q) against v: compare c^q n^p with v^q
        for term, want_le in ((self.lower, True), (self.upper, False)):
            q = term.exp.denominator
            lhs = term.coef ** q * Fraction(n) ** term.exp.numerator
            rhs = Fraction(v) ** q
            if want_le and lhs > rhs:
                return False
            if not want_le and lhs < rhs:
                return False
        return True

    def _violation(self, n: int, v: int) -> str:
        return (f"envelope [{self.lower}, {self.upper}] violated at n={n} "
                f"(value {v})")

    def to_json(self) -> dict:
        return {
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "threshold": self.threshold,
            "fact": self.fact,
            "text": str(self),
        }

    def __str__(self):
        return f"{self.lower} ≤ σ_n ≤ {self.upper} for n ≥ {self.threshold}"
