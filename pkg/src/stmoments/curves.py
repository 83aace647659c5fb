"""Point counts of y^2 = f(x) over F_p and F_{p^2}, and their normalization.

Counts are exact integers; the normalized values follow the convention
a1 = (p + 1 - N1)/sqrt(p), s2 = (p^2 + 1 - N2)/p, a2 = (a1^2 - s2)/2.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .primes import (
    TABLE_LIMIT,
    PrimeList,
    character_table,
    characters,
    nonresidue,
    primes_up_to,
)

# Rows of the F_{p^2} grid processed per block, in elements.
_BLOCK_ELEMENTS = 1 << 22
# Slack for float round-off in the Weil-bound checks.
_WEIL_SLACK = 1e-9


class BadPrimeError(ValueError):
    """The prime divides the leading coefficient or the discriminant (or is 2)."""


class WeilBoundError(ArithmeticError):
    """Normalized Frobenius data outside the Weil bounds: a counting bug."""


def _bareiss_det(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f: Sequence[int], g: Sequence[int]) -> int:
    """Resultant of two integer polynomials given low-degree-first."""
    m, n = len(f) - 1, len(g) - 1
    fh, gh = list(reversed(f)), list(reversed(g))
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + fh + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + gh + [0] * (size - n - 1 - i))
    return _bareiss_det(rows)


def discriminant(f: Sequence[int]) -> int:
    d = len(f) - 1
    df = [j * f[j] for j in range(1, d + 1)]
    res = resultant(f, df)
    q, r = divmod(res, f[-1])
    assert r == 0
    return q if (d * (d - 1) // 2) % 2 == 0 else -q


@dataclass(frozen=True)
class Curve:
    genus: int
    f_coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.f_coeffs)
        object.__setattr__(self, "f_coeffs", coeffs)
        allowed = {1: (3, 4), 2: (5, 6)}
        if self.genus not in allowed:
            raise ValueError(f"genus must be 1 or 2, got {self.genus}")
        if len(coeffs) - 1 not in allowed[self.genus] or coeffs[-1] == 0:
            raise ValueError(
                f"genus {self.genus} needs deg f in {allowed[self.genus]} with nonzero leading coefficient"
            )
        if self.discriminant == 0:
            raise ValueError("f is not squarefree (discriminant 0)")

    @property
    def degree(self) -> int:
        return len(self.f_coeffs) - 1

    @property
    def leading(self) -> int:
        return self.f_coeffs[-1]

    @cached_property
    def discriminant(self) -> int:
        return discriminant(self.f_coeffs)

    @classmethod
    def from_dict(cls, data: dict) -> Curve:
        return cls(int(data["genus"]), tuple(data["f"]))

    @classmethod
    def from_json(cls, text: str) -> Curve:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {"genus": self.genus, "f": list(self.f_coeffs)}

    def key(self) -> str:
        return f"g{self.genus}_" + "_".join(str(c) for c in self.f_coeffs)


@dataclass(frozen=True)
class PrimeLocalData:
    p: int
    N1: int
    N2: int
    a1: float
    a2: float
    s2: float


def is_good_prime(curve: Curve, p: int) -> bool:
    return p != 2 and curve.leading % p != 0 and curve.discriminant % p != 0


def good_primes(curve: Curve, bound: int) -> PrimeList:
    disc, lead = curve.discriminant, curve.leading
    if bound < 2:
        return PrimeList(bound, ())
    ps = tuple(p for p in primes_up_to(bound) if p != 2 and lead % p and disc % p)
    return PrimeList(bound, ps)


def _require_good(curve: Curve, p: int) -> None:
    if not is_good_prime(curve, p):
        raise BadPrimeError(f"{p} is not a good odd prime for {curve.to_dict()}")


def _horner(coeffs: Sequence[int], x: np.ndarray, p: int) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = (acc * x + c % p) % p
    return acc


def _points_at_infinity(curve: Curve, chi_lead: int) -> int:
    return 1 if curve.degree % 2 else 1 + chi_lead


def count_points(curve: Curve, p: int) -> int:
    """Projective point count N1 over F_p."""
    _require_good(curve, p)
    x = np.arange(p, dtype=np.int64)
    chi = characters(_horner(curve.f_coeffs, x, p), p)
    affine = p + int(chi.sum(dtype=np.int64))
    lead = int(characters(np.array([curve.leading % p]), p)[0])
    return affine + _points_at_infinity(curve, lead)


def _hasse_values(coeffs: Sequence[int], p: int) -> np.ndarray:
    """Row k holds the k-th Hasse derivative of f evaluated at every a in F_p."""
    d = len(coeffs) - 1
    a = np.arange(p, dtype=np.int64)
    out = np.empty((d + 1, p), dtype=np.int64)
    for k in range(d + 1):
        out[k] = _horner([math.comb(j, k) * coeffs[j] for j in range(k, d + 1)], a, p)
    return out


def _fmod(x: np.ndarray, p: int) -> np.ndarray:
    # exact for integer-valued floats below 2**53
    return x - np.floor(x / p) * p


def count_points_ext(curve: Curve, p: int) -> int:
    """Projective point count N2 over F_{p^2} by direct enumeration.

    Writes x = a + b*w with w^2 = c and expands
    f(a + b*w) = sum_k D_k f(a) * (b*w)^k, so the two coordinates of f(x)
    over the whole grid are small matrix products. Only b in [0, (p-1)/2]
    is visited: x and its Frobenius conjugate a - b*w have the same
    character value because f has rational coefficients.
    """
    _require_good(curve, p)
    if p > TABLE_LIMIT:
        raise ValueError(f"direct F_p^2 enumeration is limited to p <= {TABLE_LIMIT}")
    c = nonresidue(p)
    table = character_table(p)
    d = curve.degree
    hasse = _hasse_values(curve.f_coeffs, p).astype(np.float64)

    half = (p - 1) // 2
    b = np.arange(half + 1, dtype=np.int64)
    bpow = np.empty((d + 1, half + 1), dtype=np.int64)
    bpow[0] = 1
    for k in range(1, d + 1):
        bpow[k] = (bpow[k - 1] * b) % p
    for k in range(d + 1):
        bpow[k] = (bpow[k] * pow(c, k // 2, p)) % p
    even, odd = bpow[0::2].astype(np.float64), bpow[1::2].astype(np.float64)

    rows = max(1, _BLOCK_ELEMENTS // (half + 1))
    total = 0
    for start in range(0, p, rows):
        h = hasse[:, start : start + rows]
        u = _fmod(h[0::2].T @ even, p)
        v = _fmod(h[1::2].T @ odd, p)
        chi = table[_fmod(u * u - c * (v * v), p).astype(np.intp)]
        total += int(chi[:, 0].sum(dtype=np.int64)) + 2 * int(chi[:, 1:].sum(dtype=np.int64))

    # the leading coefficient is a nonzero square in F_{p^2}
    return p * p + total + _points_at_infinity(curve, 1)


def newton_N2(p: int, N1: int) -> int:
    """N2 of a genus-1 curve from N1: t2 = t1^2 - 2p."""
    t1 = p + 1 - N1
    return p * p + 1 - (t1 * t1 - 2 * p)


def normalize(p: int, N1: int, N2: int, genus: int) -> tuple[float, float, float]:
    t1 = p + 1 - N1
    t2 = p * p + 1 - N2
    a1 = t1 / math.sqrt(p)
    s2 = t2 / p
    a2 = (a1 * a1 - s2) / 2
    g = genus
    if (
        abs(a1) > 2 * g + _WEIL_SLACK
        or abs(s2) > 2 * g + _WEIL_SLACK
        or abs(a2) > g * (2 * g - 1) + _WEIL_SLACK
    ):
        raise WeilBoundError(f"p={p}, N1={N1}, N2={N2}: (a1, a2, s2) = ({a1}, {a2}, {s2})")
    return a1, a2, s2


def local_data(curve: Curve, p: int) -> PrimeLocalData:
    N1 = count_points(curve, p)
    N2 = newton_N2(p, N1) if curve.genus == 1 else count_points_ext(curve, p)
    return PrimeLocalData(p, N1, N2, *normalize(p, N1, N2, curve.genus))


def compute_local_data(curve: Curve, primes: Iterable[int], threads: int = 1) -> list[PrimeLocalData]:
    """Local data for each prime, returned in ascending-prime order."""
    ps = sorted(primes)
    if threads <= 1:
        return [local_data(curve, p) for p in ps]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: local_data(curve, p), ps))
