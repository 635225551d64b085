"""Size sequences: partial sums of characteristic sequences.

Values are unsigned 64-bit integers with checked arithmetic; anything that
leaves the range raises :class:`SequenceOverflowError` naming the index.
Every sequence may carry a quasi-polynomial normal form and an envelope
certificate, which :func:`compare` uses before falling back to a scan.
"""

from __future__ import annotations

import threading
from array import array
from typing import Callable, List, Optional, Sequence

import numpy as np

from .envelope import EnvelopeCertificate, EnvelopeTerm, env_compare
from .errors import (
    CertificateError,
    ResourceLimitError,
    SequenceOverflowError,
    UndefinedDifferenceError,
)
from .quasipoly import (
    REFINE_CAP,
    QuasiPolynomial,
    _cauchy_bound,
    qp_add,
    qp_compare,
    qp_mul,
    qp_sub,
)
from .verdict import ComparisonVerdict, Relation

U64_MAX = 2**64 - 1
CACHE_LIMIT = 1 << 22
_CHUNK = 1 << 16

EvalFn = Callable[[int], int]
BatchFn = Callable[[int, int], Sequence[int]]


def _check(n: int, v) -> int:
    v = int(v)
    if v < 0 or v > U64_MAX:
        raise SequenceOverflowError(n, f"value {v}")
    return v


def _as_u64(lo: int, vals) -> np.ndarray:
    """Validate a batch of values and return it as uint64."""
    if isinstance(vals, np.ndarray) and vals.dtype == np.uint64:
        return vals
    if isinstance(vals, np.ndarray) and vals.dtype.kind in "iu" and vals.dtype.itemsize <= 8:
        if vals.dtype.kind == "i" and len(vals) and vals.min() < 0:
            i = int(np.argmax(vals < 0))
            raise SequenceOverflowError(lo + i, f"value {int(vals[i])}")
        return vals.astype(np.uint64)
    out = np.empty(len(vals), dtype=np.uint64)
    for i, v in enumerate(vals):
        out[i] = _check(lo + i, v)
    return out


class IntSequence:
    """A non-negative integer sequence indexed from 1 (no monotonicity)."""

    def __init__(self, fn: EvalFn, batch: Optional[BatchFn] = None, kind_tag: str = ""):
        self._fn = fn
        self._batch = batch
        self.kind_tag = kind_tag

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequences are indexed from 1")
        return _check(n, self._fn(n))

    def values(self, lo: int, hi: int) -> np.ndarray:
        if hi < lo:
            return np.zeros(0, dtype=np.uint64)
        if self._batch is not None:
            return _as_u64(lo, self._batch(lo, hi))
        return _as_u64(lo, [self._fn(n) for n in range(lo, hi + 1)])

    def prefix(self, k: int) -> List[int]:
        return [int(v) for v in self.values(1, k)]

    @classmethod
    def from_list(cls, head: Sequence[int], tail: int = 0, kind_tag: str = "") -> "IntSequence":
        """``head`` followed by the constant ``tail``."""
        head = list(head)
        return cls(lambda n: head[n - 1] if n <= len(head) else tail, kind_tag=kind_tag)


class SizeSequence:
    """An immutable sequence ``n -> value`` for ``n >= 1``.

    ``eval_fn`` must be pure.  ``batch(lo, hi)`` optionally produces a run of
    values at once.  A prefix cache guarded by a lock makes repeated scans
    cheap without changing any answer.
    """

    def __init__(self, eval_fn: Optional[EvalFn] = None, *, batch: Optional[BatchFn] = None,
                 symbolic: Optional[QuasiPolynomial] = None,
                 envelope: Optional[EnvelopeCertificate] = None,
                 kind_tag: str = "", monotone: bool = True):
        if eval_fn is None and batch is None:
            raise ValueError("need eval_fn or batch")
        self._fn = eval_fn
        self._batch = batch
        self.symbolic = symbolic
        self.envelope = envelope
        self.kind_tag = kind_tag
        self.monotone = monotone
        self._cache = array("Q")
        self._lock = threading.Lock()

    # evaluation -------------------------------------------------------

    def eval(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequences are indexed from 1")
        cache = self._cache
        if n <= len(cache):
            return cache[n - 1]
        if self.symbolic is not None and n >= max(self.symbolic.threshold, 1):
            return _check(n, self.symbolic.raw(n))
        if self._fn is not None:
            return _check(n, self._fn(n))
        return int(self.values(n, n)[0])

    __call__ = eval

    def _raw_batch(self, lo: int, hi: int) -> np.ndarray:
        if self._batch is not None:
            return _as_u64(lo, self._batch(lo, hi))
        return _as_u64(lo, [self._fn(n) for n in range(lo, hi + 1)])

    def values(self, lo: int, hi: int) -> np.ndarray:
        """Values on ``lo..hi`` inclusive as a uint64 array."""
        if lo < 1:
            raise ValueError("sequences are indexed from 1")
        if hi < lo:
            return np.zeros(0, dtype=np.uint64)
        if hi > len(self._cache) and hi <= CACHE_LIMIT:
            self._extend(hi)
        cached = len(self._cache)
        if hi <= cached:
            return np.frombuffer(self._cache, dtype=np.uint64, count=hi)[lo - 1:hi].copy()
        return self._raw_batch(lo, hi)

    def _extend(self, hi: int) -> None:
        with self._lock:
            have = len(self._cache)
            if hi <= have:
                return
            target = min(max(hi, 2 * have), CACHE_LIMIT)
            vals = self._raw_batch(have + 1, target)
            self._cache.frombytes(vals.astype(np.uint64).tobytes())

    def prefix(self, k: int) -> List[int]:
        if k < 1:
            raise ValueError("prefix length must be positive")
        return [int(v) for v in self.values(1, k)]

    # arithmetic sugar -------------------------------------------------

    @staticmethod
    def _coerce(other) -> "SizeSequence":
        if isinstance(other, SizeSequence):
            return other
        if isinstance(other, int) and other >= 0:
            return constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        other = self._coerce(other)
        return NotImplemented if other is NotImplemented else sub(self, other)

    def __repr__(self):
        head = ", ".join(str(v) for v in self.prefix(6))
        return f"SizeSequence({self.kind_tag or '?'}: {head}, …)"

    def to_json(self, length: int = 20) -> dict:
        out = {"kind_tag": self.kind_tag, "prefix": self.prefix(length)}
        if self.symbolic is not None:
            out["symbolic"] = self.symbolic.to_json()
        if self.envelope is not None:
            out["envelope"] = self.envelope.to_json()
        return out


# constructors ---------------------------------------------------------


def constant(k: int) -> SizeSequence:
    """The constant sequence ``(k, k, ...)`` standing for a finite size."""
    k = _check(1, k)
    return SizeSequence(lambda n: k, batch=lambda lo, hi: np.full(hi - lo + 1, k, dtype=np.uint64),
                        symbolic=QuasiPolynomial.constant(k), kind_tag=f"const({k})")


def _alpha_batch(lo, hi):
    return np.arange(lo, hi + 1, dtype=np.uint64)


alpha = SizeSequence(lambda n: n, batch=_alpha_batch,
                     symbolic=QuasiPolynomial.polynomial((0, 1)), kind_tag="alpha")


def bolzano_tail(k: int) -> SizeSequence:
    """``(0, ..., 0, 1, 2, 3, ...)`` with ``k`` leading zeros: ``n -> max(n - k, 0)``."""
    if k < 0:
        raise ValueError("shift must be non-negative")
    return SizeSequence(lambda n: max(n - k, 0),
                        batch=lambda lo, hi: np.maximum(np.arange(lo, hi + 1, dtype=np.int64) - k, 0),
                        symbolic=QuasiPolynomial.polynomial((-k, 1), threshold=max(k, 1)),
                        kind_tag=f"tail({k})")


def from_characteristic(chi: IntSequence, kind_tag: str = "") -> SizeSequence:
    """Partial sums ``chi(1) + ... + chi(n)``."""
    state = {"upto": 0, "total": 0}
    lock = threading.Lock()

    def batch(lo: int, hi: int) -> np.ndarray:
        # prefix sums need everything from 1; cache the running total
        with lock:
            start = 1
            base = 0
            if state["upto"] == lo - 1:
                start, base = lo, state["total"]
            out = []
            for s in range(start, hi + 1, _CHUNK):
                e = min(hi, s + _CHUNK - 1)
                c = chi.values(s, e).astype(object)
                run = np.cumsum(c) + base
                base = int(run[-1]) if len(run) else base
                if base > U64_MAX:
                    over = int(np.argmax(run > U64_MAX))
                    raise SequenceOverflowError(s + over, "partial sum")
                out.append(run)
            state["upto"], state["total"] = hi, base
        full = np.concatenate(out).astype(np.uint64) if out else np.zeros(0, dtype=np.uint64)
        return full[lo - start:]

    return SizeSequence(batch=batch, kind_tag=kind_tag or f"sigma({chi.kind_tag})")


def difference(a: SizeSequence) -> IntSequence:
    """Forward difference: ``a(1), a(2) - a(1), ...``."""

    def batch(lo, hi):
        v = a.values(max(lo - 1, 1), hi).astype(object)
        if lo == 1:
            v = np.concatenate([[0], v])
        return np.diff(v)

    return IntSequence(lambda n: a(n) - (a(n - 1) if n > 1 else 0), batch=batch,
                       kind_tag=f"delta({a.kind_tag})")


# arithmetic -----------------------------------------------------------


def _zip_batch(a: SizeSequence, b: SizeSequence, name: str):
    what = f"{name} of {a.kind_tag or '?'} and {b.kind_tag or '?'}"

    def batch(lo, hi):
        x = a.values(lo, hi)
        y = b.values(lo, hi)
        if name == "add":
            z = x + y
            bad = z < x
        else:
            xo, yo = x.astype(object), y.astype(object)
            zo = xo * yo
            bad = zo > U64_MAX
            if bad.any():
                i = int(np.argmax(bad))
                raise SequenceOverflowError(lo + i, what)
            return zo.astype(np.uint64)
        if bad.any():
            i = int(np.argmax(bad))
            raise SequenceOverflowError(lo + i, what)
        return z

    return batch


def add(a: SizeSequence, b: SizeSequence) -> SizeSequence:
    symbolic = None
    if a.symbolic is not None and b.symbolic is not None:
        symbolic = qp_add(a.symbolic, b.symbolic)
    return SizeSequence(lambda n: _check(n, a(n) + b(n)), batch=_zip_batch(a, b, "add"),
                        symbolic=symbolic, kind_tag=f"({a.kind_tag} + {b.kind_tag})",
                        monotone=a.monotone and b.monotone)


def mul(a: SizeSequence, b: SizeSequence) -> SizeSequence:
    symbolic = None
    if a.symbolic is not None and b.symbolic is not None:
        symbolic = qp_mul(a.symbolic, b.symbolic)
    envelope = None
    if a.envelope is not None and b.envelope is not None:
        envelope = a.envelope * b.envelope
    return SizeSequence(lambda n: _check(n, a(n) * b(n)), batch=_zip_batch(a, b, "mul"),
                        symbolic=symbolic, envelope=envelope,
                        kind_tag=f"({a.kind_tag} · {b.kind_tag})",
                        monotone=a.monotone and b.monotone)


def sub(a: SizeSequence, b: SizeSequence, budget: int = 10_000) -> SizeSequence:
    """``a - b``, defined once ``b <=_F a`` has been established.

    Below the witness the representative is clamped at zero.
    """
    verdict = compare(b, a, budget)
    if verdict.relation not in (Relation.LESS, Relation.LESS_EQ, Relation.EQUAL):
        raise UndefinedDifferenceError(
            f"cannot subtract {b.kind_tag} from {a.kind_tag}: verdict {verdict.relation}")
    m = verdict.witness_m

    def one(n):
        d = a(n) - b(n)
        if n > m and d < 0:
            raise UndefinedDifferenceError(f"difference negative at n={n} beyond witness {m}")
        return max(d, 0)

    def batch(lo, hi):
        x = a.values(lo, hi).astype(object)
        y = b.values(lo, hi).astype(object)
        d = x - y
        return np.maximum(d, 0)

    symbolic = None
    if a.symbolic is not None and b.symbolic is not None:
        symbolic = qp_sub(a.symbolic, b.symbolic)
    return SizeSequence(one, batch=batch, symbolic=symbolic,
                        kind_tag=f"({a.kind_tag} − {b.kind_tag})", monotone=False)


def prefix(a: SizeSequence, k: int) -> List[int]:
    return a.prefix(k)


# comparison -----------------------------------------------------------


def _refine(a: SizeSequence, b: SizeSequence, rel: Relation, m: int) -> int:
    """Lower a witness while the pointwise relation still holds at ``m``."""
    op = rel.pointwise
    steps = 0
    while m >= 1 and steps < REFINE_CAP:
        lo = max(1, m - _CHUNK + 1, m - (REFINE_CAP - steps) + 1)
        x = a.values(lo, m)
        y = b.values(lo, m)
        ok = op(x, y)
        if not ok.all():
            fails = np.flatnonzero(~ok)
            return lo + int(fails[-1])
        steps += m - lo + 1
        m = lo - 1
    return m


def _qp_envelope(q: QuasiPolynomial) -> Optional[EnvelopeCertificate]:
    """Envelope ``[lam_min/2 n^d, 2 lam_max n^d]`` implied by a normal form."""
    from fractions import Fraction

    d = q.degree
    if d < 0:
        return None
    leads = []
    polys = []
    for r in range(q.period):
        power = q.class_in_n(r)
        if len(power) != d + 1 or power[-1] <= 0:
            return None
        leads.append(power[-1])
        polys.append(power)
    if d == 0:
        lo_c, hi_c = min(leads), max(leads)
        return EnvelopeCertificate(EnvelopeTerm(lo_c, 0), EnvelopeTerm(hi_c, 0),
                                   max(q.threshold, 1), "normal form (constant)")
    lo_c = min(leads) / 2
    hi_c = 2 * max(leads)
    threshold = max(q.threshold, 1)
    for power in polys:
        below = list(power)
        below[-1] -= lo_c
        above = [-c for c in power]
        above[-1] += hi_c
        for poly in (below, above):
            bound = _cauchy_bound(poly)
            # the class polynomial in n is positive past bound; scan down
            n = bound + 1
            while n >= threshold and sum(c * n ** i for i, c in enumerate(poly)) >= 0:
                n -= 1
            threshold = max(threshold, n + 1)
    return EnvelopeCertificate(EnvelopeTerm(lo_c, d), EnvelopeTerm(hi_c, d), threshold,
                               "leading terms of the normal form")


def envelope_of(a: SizeSequence) -> Optional[EnvelopeCertificate]:
    if a.envelope is not None:
        return a.envelope
    if a.symbolic is not None:
        return _qp_envelope(a.symbolic)
    return None


def _bounded_value(a: SizeSequence) -> Optional[tuple]:
    """``(c, t)`` when ``a`` is the constant ``c`` for all ``n >= t``."""
    q = a.symbolic
    if q is None:
        return None
    q = q.normalized()
    if q.period == 1 and q.degree <= 0:
        c = q.classes[0][0] if q.classes[0] else 0
        return c, max(q.threshold, 1)
    return None


def _stable_suffix(signs: np.ndarray) -> tuple:
    last = int(signs[-1])
    diff = np.flatnonzero(signs != last)
    start = int(diff[-1]) + 2 if len(diff) else 1
    return last, start


def compare(a: SizeSequence, b: SizeSequence, budget: int = 10_000, *,
            difference: Optional[SizeSequence] = None) -> ComparisonVerdict:
    """Eventual comparison of ``a`` and ``b``.

    ``difference``, when given, must be the non-decreasing sequence ``b - a``
    (for instance the size of ``B \\ A`` when ``A`` is a part of ``B``).
    """
    if budget < 1:
        raise ValueError("budget must be positive")
    if a is b:
        return ComparisonVerdict(Relation.EQUAL, witness_m=0, method="identity",
                                 observation="identical sequences")

    # 1. normal forms decide everything exactly
    if a.symbolic is not None and b.symbolic is not None:
        v = qp_compare(a.symbolic, b.symbolic)
        if v.relation is Relation.INCOMPARABLE:
            return v
        return v.with_witness(_refine(a, b, v.relation, v.witness_m))

    # 2. certified envelopes
    ea, eb = envelope_of(a), envelope_of(b)
    if ea is not None and eb is not None:
        for upper, lower, rel, cert in ((ea.upper, eb.lower, Relation.LESS, (ea, eb)),
                                        (eb.upper, ea.lower, Relation.GREATER, (eb, ea))):
            try:
                m = env_compare(upper, lower, (ea.threshold, eb.threshold))
            except CertificateError:
                m = None
            if m is None:
                continue
            small, big = cert
            text = (f"envelope {small.upper} < {big.lower} beyond the crossover; "
                    f"{small} and {big}")
            certificate = {
                "text": text,
                "upper": small.to_json(),
                "lower": big.to_json(),
                "crossover_m": m,
            }
            return ComparisonVerdict(rel, witness_m=_refine(a, b, rel, m), method="envelope",
                                     certificate=certificate)

    # 3. scan, then look for a reason the observed sign cannot flip
    try:
        x = a.values(1, budget).astype(object)
        y = b.values(1, budget).astype(object)
        checked = budget
    except ResourceLimitError as exc:
        return ComparisonVerdict(Relation.UNKNOWN, checked_to=0, method="scan",
                                 observation=f"scan stopped: {exc}")
    signs = np.sign(x - y).astype(np.int64)
    last, start = _stable_suffix(signs)

    if difference is not None:
        d = difference.values(1, budget)
        hit = np.flatnonzero(d >= 1)
        if len(hit):
            s = int(hit[0]) + 1
            m = _refine(a, b, Relation.LESS, s - 1)
            return ComparisonVerdict(Relation.LESS, witness_m=m, method="part-whole",
                                     observation=f"a proper part: the complement has an element "
                                                 f"with label {s}, so a < b for n ≥ {s}")

    for seq, other, rel in ((a, b, Relation.LESS), (b, a, Relation.GREATER)):
        bounded = _bounded_value(seq)
        if bounded is None or not other.monotone:
            continue
        c, t = bounded
        vals = x if seq is b else y
        above = np.flatnonzero(vals[t - 1:] > c) if t <= budget else []
        if len(above):
            s = int(above[0]) + t
            m = _refine(a, b, rel, s - 1)
            return ComparisonVerdict(rel, witness_m=m, method="bounded",
                                     observation=f"{seq.kind_tag} is constant {c} for n ≥ {t} "
                                                 f"while the other side is non-decreasing and "
                                                 f"exceeds it from n={s}")

    names = {-1: "a < b", 0: "a = b", 1: "a > b"}
    return ComparisonVerdict(Relation.UNKNOWN, checked_to=checked, method="scan",
                             observation=f"{names[last]} on [{start}, {checked}]")
