"""Endomorphism-algebra bookkeeping by Albert type.

An isotypic piece A ~ B^r with B simple of dimension g0 has
End(A) (x) R equal to M_r(R^e), M_r(M_2(R)^e), M_r(H^e) or M_r(M_d(C)^e)
for types I-IV. Everything here is exact integer arithmetic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

TYPES = ("I", "II", "III", "IV")


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class AlbertRecord:
    albert_type: str
    e: int
    r: int
    g0: int
    d: int = 1

    def __post_init__(self):
        t = self.albert_type
        if t not in TYPES:
            raise ConstraintError(f"unknown Albert type {t!r}")
        if min(self.e, self.r, self.d, self.g0) < 1:
            raise ConstraintError(f"parameters must be positive: {self}")
        if t != "IV" and self.d != 1:
            raise ConstraintError("d is only meaningful for type IV")
        if t == "I" and self.e > self.g0:
            raise ConstraintError(f"type I needs e <= g0, got e={self.e}, g0={self.g0}")
        if t in ("II", "III") and 2 * self.e > self.g0:
            raise ConstraintError(f"type {t} needs 2e <= g0, got e={self.e}, g0={self.g0}")
        if t == "IV" and self.d * self.d * self.e > self.g0:
            raise ConstraintError(f"type IV needs d^2 e <= g0, got d={self.d}, e={self.e}, g0={self.g0}")

    @property
    def dim(self) -> int:
        """Contribution r*g0 to dim A."""
        return self.r * self.g0

    @classmethod
    def from_dict(cls, data: dict) -> AlbertRecord:
        return cls(str(data["type"]), int(data["e"]), int(data["r"]), int(data["g0"]), int(data.get("d", 1)))

    def to_dict(self) -> dict:
        out = {"type": self.albert_type, "e": self.e, "r": self.r, "g0": self.g0}
        if self.albert_type == "IV":
            out["d"] = self.d
        return out


@dataclass(frozen=True)
class WedderburnDecomposition:
    """End(A) (x) R = prod M_t(R) x prod M_n(H) x prod M_p(C); sizes kept sorted."""

    t_list: tuple[int, ...] = ()
    n_list: tuple[int, ...] = ()
    p_list: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("t_list", "n_list", "p_list"):
            values = tuple(sorted(int(v) for v in getattr(self, name)))
            if any(v < 1 for v in values):
                raise ConstraintError(f"{name} entries must be >= 1")
            object.__setattr__(self, name, values)
        if not (self.t_list or self.n_list or self.p_list):
            raise ConstraintError("empty decomposition: dim A must be >= 1")

    @property
    def dim_end(self) -> int:
        return sum(t * t for t in self.t_list) + 4 * sum(n * n for n in self.n_list) + 2 * sum(p * p for p in self.p_list)

    @classmethod
    def from_dict(cls, data: dict) -> WedderburnDecomposition:
        return cls(tuple(data.get("t", ())), tuple(data.get("n", ())), tuple(data.get("p", ())))

    def to_dict(self) -> dict:
        return {"t": list(self.t_list), "n": list(self.n_list), "p": list(self.p_list)}


@dataclass(frozen=True)
class AlgebraDims:
    dim_end: int
    dim_rosati: int
    invariant: int

    def __add__(self, other: AlgebraDims) -> AlgebraDims:
        return AlgebraDims(
            self.dim_end + other.dim_end,
            self.dim_rosati + other.dim_rosati,
            self.invariant + other.invariant,
        )


def dims_from_record(rec: AlbertRecord) -> AlgebraDims:
    """(dim End (x) R, dim of the Rosati-fixed part, 2*sum n - sum t) for one isotypic piece."""
    e, r, d = rec.e, rec.r, rec.d
    if rec.albert_type == "I":
        dims = AlgebraDims(e * r * r, e * r * (r + 1) // 2, -e * r)
    elif rec.albert_type == "II":
        dims = AlgebraDims(4 * e * r * r, e * (r + 2 * r * r), -2 * e * r)
    elif rec.albert_type == "III":
        dims = AlgebraDims(4 * e * r * r, e * (-r + 2 * r * r), 2 * e * r)
    else:
        dims = AlgebraDims(2 * e * r * r * d * d, e * r * r * d * d, 0)
    assert dims.dim_end - 2 * dims.dim_rosati == dims.invariant
    return dims


def dims_from_records(recs) -> AlgebraDims:
    total = AlgebraDims(0, 0, 0)
    for rec in recs:
        total = total + dims_from_record(rec)
    return total


def wedderburn_from_records(recs) -> WedderburnDecomposition:
    t, n, p = [], [], []
    for rec in recs:
        if rec.albert_type == "I":
            t += [rec.r] * rec.e
        elif rec.albert_type == "II":
            # M_r(M_2(R)) = M_{2r}(R)
            t += [2 * rec.r] * rec.e
        elif rec.albert_type == "III":
            n += [rec.r] * rec.e
        else:
            p += [rec.r * rec.d] * rec.e
    return WedderburnDecomposition(tuple(t), tuple(n), tuple(p))


def invariant(dec: WedderburnDecomposition) -> int:
    return 2 * sum(dec.n_list) - sum(dec.t_list)


def check_rank_relation(rk_end: int, rk_ns: int, dec: WedderburnDecomposition, g: int) -> tuple[bool, bool]:
    """(rk_end - 2 rk_ns == 2*sum n - sum t, 2 rk_ns - g <= rk_end <= 2 rk_ns + g)."""
    identity_ok = rk_end - 2 * rk_ns == invariant(dec)
    inequality_ok = 2 * rk_ns - g <= rk_end <= 2 * rk_ns + g
    return identity_ok, inequality_ok


@lru_cache(maxsize=None)
def valid_records(max_dim: int) -> tuple[AlbertRecord, ...]:
    """Every record satisfying the type constraints with r*g0 <= max_dim."""
    out = []
    for g0 in range(1, max_dim + 1):
        for r in range(1, max_dim // g0 + 1):
            for e in range(1, g0 + 1):
                out.append(AlbertRecord("I", e, r, g0))
                if 2 * e <= g0:
                    out.append(AlbertRecord("II", e, r, g0))
                    out.append(AlbertRecord("III", e, r, g0))
                d = 1
                while d * d * e <= g0:
                    out.append(AlbertRecord("IV", e, r, g0, d))
                    d += 1
    return tuple(out)


def random_valid_records(g: int, seed: int | random.Random) -> list[AlbertRecord]:
    """Random list of records whose dimensions r*g0 add up to g."""
    if g < 1:
        raise ValueError("g must be >= 1")
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    out = []
    remaining = g
    while remaining:
        rec = rng.choice(valid_records(remaining))
        out.append(rec)
        remaining -= rec.dim
    return out

