"""Primes and quadratic characters over F_p and F_{p^2}.

The batched paths (``character_table``, ``characters``) are what the point
counters use; the scalar functions are the reference definitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Above this size a per-prime byte table stops paying for itself.
TABLE_LIMIT = 1 << 20


@dataclass(frozen=True)
class PrimeList:
    bound: int
    primes: tuple[int, ...]

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)

    def __getitem__(self, i):
        return self.primes[i]


@dataclass(frozen=True)
class QuadExtElement:
    """``u + v*w`` in F_{p^2}, where ``w**2 == nonresidue(p)``."""

    u: int
    v: int
    p: int

    def __post_init__(self):
        if not (0 <= self.u < self.p and 0 <= self.v < self.p):
            raise ValueError(f"coordinates must be reduced mod {self.p}: ({self.u}, {self.v})")

    def __mul__(self, other: QuadExtElement) -> QuadExtElement:
        p, c = self.p, nonresidue(self.p)
        return QuadExtElement(
            (self.u * other.u + c * self.v * other.v) % p,
            (self.u * other.v + self.v * other.u) % p,
            p,
        )

    def __pow__(self, n: int) -> QuadExtElement:
        result = QuadExtElement(1 % self.p, 0, self.p)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def norm(self) -> int:
        return (self.u * self.u - nonresidue(self.p) * self.v * self.v) % self.p


def primes_up_to(bound: int) -> PrimeList:
    """Sieve of Eratosthenes; ``bound < 2`` gives an empty list."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    if bound < 2:
        return PrimeList(bound, ())
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, int(bound**0.5) + 1):
        if sieve[q]:
            sieve[q * q :: q] = False
    return PrimeList(bound, tuple(int(q) for q in np.flatnonzero(sieve)))


def _check_odd_prime(p: int) -> None:
    if p == 2:
        raise ValueError("p = 2 is excluded from quadratic-character computations")
    if p < 3 or p % 2 == 0:
        raise ValueError(f"expected an odd prime, got {p}")


def quadratic_character(a: int, p: int) -> int:
    """Legendre symbol (a/p) via Euler's criterion."""
    _check_odd_prime(p)
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@lru_cache(maxsize=None)
def nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    _check_odd_prime(p)
    c = 2
    while quadratic_character(c, p) != -1:
        c += 1
    return c


def quadratic_character_ext(x: QuadExtElement, p: int) -> int:
    """Quadratic character of F_{p^2}, computed through the norm to F_p."""
    _check_odd_prime(p)
    if x.p != p:
        raise ValueError(f"element lives over F_{x.p}^2, not F_{p}^2")
    n = x.norm()
    return 0 if n == 0 else quadratic_character(n, p)


def character_table(p: int) -> np.ndarray:
    """int8 array ``t`` with ``t[a] == quadratic_character(a, p)`` for 0 <= a < p."""
    _check_odd_prime(p)
    table = np.full(p, -1, dtype=np.int8)
    x = np.arange(p, dtype=np.int64)
    table[(x * x) % p] = 1
    table[0] = 0
    return table


def _powmod(a: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            result = (result * base) % p
        base = (base * base) % p
        e >>= 1
    return result


def characters(values: np.ndarray, p: int, table: np.ndarray | None = None) -> np.ndarray:
    """Vectorized quadratic character of reduced residues ``0 <= values < p``.

    Uses a lookup table for ``p <= TABLE_LIMIT`` and Euler's criterion above it.
    """
    _check_odd_prime(p)
    if p <= TABLE_LIMIT:
        if table is None:
            table = character_table(p)
        return table[values]
    if p >= 1 << 31:
        raise ValueError("primes must stay below 2**31 for int64 exponentiation")
    r = _powmod(np.asarray(values, dtype=np.int64), (p - 1) // 2, p)
    return np.where(r == p - 1, -1, r).astype(np.int8)
