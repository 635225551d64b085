"""Prime and totient tables.

One process-wide table grows on demand (doubling) under a lock and is
otherwise read-only.  Readers always see a fully built table because the
arrays are swapped in atomically.
"""

from __future__ import annotations

import math
import threading
from typing import Tuple

import numpy as np

from .errors import ResourceLimitError

PRIME_LIMIT = 10**8
PHI_LIMIT = 2 * 10**7


def _sieve(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return flags


def _phi_table(limit: int, primes: np.ndarray) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in primes:
        p = int(p)
        if p > limit:
            break
        phi[p::p] -= phi[p::p] // p
    return phi


class _Tables:
    def __init__(self):
        self._lock = threading.Lock()
        self._flags = np.zeros(2, dtype=bool)
        self._pi = np.zeros(2, dtype=np.int64)
        self._primes = np.zeros(0, dtype=np.int64)
        self._phi = np.array([0, 1], dtype=np.int64)
        self._big_phi = np.array([0, 1], dtype=np.int64)

    def primes_upto(self, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if n >= len(self._flags):
            if n > PRIME_LIMIT:
                raise ResourceLimitError(f"prime sieve limit {PRIME_LIMIT} exceeded (asked {n})")
            with self._lock:
                if n >= len(self._flags):
                    size = min(max(n, 2 * (len(self._flags) - 1), 1 << 16), PRIME_LIMIT)
                    flags = _sieve(size)
                    pi = np.cumsum(flags, dtype=np.int64)
                    primes = np.flatnonzero(flags).astype(np.int64)
                    self._flags, self._pi, self._primes = flags, pi, primes
        return self._flags, self._pi, self._primes

    def phi_upto(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        if n >= len(self._phi):
            if n > PHI_LIMIT:
                raise ResourceLimitError(f"totient table limit {PHI_LIMIT} exceeded (asked {n})")
            size = min(max(n, 2 * (len(self._phi) - 1), 1 << 16), PHI_LIMIT)
            _, _, primes = self.primes_upto(size)
            with self._lock:
                if n >= len(self._phi):
                    phi = _phi_table(size, primes)
                    big = np.cumsum(phi, dtype=np.int64)
                    self._phi, self._big_phi = phi, big
        return self._phi, self._big_phi


_TABLES = _Tables()

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _miller_rabin(n: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        if a % n == 0:
            continue
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    """Exact primality; deterministic Miller-Rabin beyond the sieve."""
    if n < 2:
        return False
    if n < len(_TABLES._flags) or n <= 1 << 20:
        flags, _, _ = _TABLES.primes_upto(max(n, 2))
        return bool(flags[n])
    if n >= 3317044064679887385961981:
        raise ResourceLimitError("primality beyond the deterministic Miller-Rabin range")
    return _miller_rabin(n)


def prime_pi(n: int) -> int:
    """Number of primes ``<= n``."""
    if n < 2:
        return 0
    _, pi, _ = _TABLES.primes_upto(n)
    return int(pi[n])


def prime_pi_values(lo: int, hi: int) -> np.ndarray:
    """``[prime_pi(lo), ..., prime_pi(hi)]`` as int64."""
    _, pi, _ = _TABLES.primes_upto(max(hi, 2))
    return pi[lo:hi + 1].copy()


def prime_mask(lo: int, hi: int) -> np.ndarray:
    flags, _, _ = _TABLES.primes_upto(max(hi, 2))
    return flags[lo:hi + 1].copy()


def factorize(n: int):
    """Prime factorization as a list of ``(p, e)`` by trial division."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out = []
    root = math.isqrt(n)
    _, _, primes = _TABLES.primes_upto(max(root, 2))
    for p in primes:
        p = int(p)
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def totient(n: int) -> int:
    """Euler's phi from the factorization of ``n``."""
    if n < 1:
        raise ValueError("totient needs a positive integer")
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def totient_values(lo: int, hi: int) -> np.ndarray:
    phi, _ = _TABLES.phi_upto(max(hi, 1))
    return phi[lo:hi + 1].copy()


def totient_sum(n: int) -> int:
    """``phi(1) + ... + phi(n)``."""
    if n < 1:
        return 0
    _, big = _TABLES.phi_upto(n)
    return int(big[n])


def totient_sum_values(lo: int, hi: int) -> np.ndarray:
    _, big = _TABLES.phi_upto(max(hi, 1))
    return big[lo:hi + 1].copy()


def iroot(n: int, k: int) -> int:
    """Largest ``r`` with ``r**k <= n``."""
    if n < 0:
        raise ValueError("iroot needs a non-negative integer")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    r = int(round(n ** (1.0 / k)))
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def iroot_values(lo: int, hi: int, k: int) -> np.ndarray:
    """``[iroot(n, k) for n in lo..hi]`` computed in bulk."""
    ns = np.arange(lo, hi + 1, dtype=np.int64)
    if k == 1:
        return ns
    r = np.floor(np.power(ns.astype(np.float64), 1.0 / k)).astype(np.int64)
    # fix float rounding in both directions
    for _ in range(2):
        too_big = r ** k > ns
        r[too_big] -= 1
        too_small = (r + 1) ** k <= ns
        r[too_small] += 1
    return r
