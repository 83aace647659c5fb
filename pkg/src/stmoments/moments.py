"""Moment estimates from per-prime data and the rank predictions they imply."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

# Distance from an integer beyond which rounding is called ambiguous.
AMBIGUOUS_DISTANCE = 0.45


class InsufficientDataError(ValueError):
    pass


class ExactSum:
    """Running float sum kept as non-overlapping partials (Shewchuk).

    The represented value is the exact real sum of everything added, so
    merging is commutative and associative and ``value`` is correctly rounded.
    """

    __slots__ = ("partials",)

    def __init__(self, partials: Iterable[float] = ()):
        self.partials: list[float] = []
        for x in partials:
            self.add(x)

    def add(self, x: float) -> None:
        partials = self.partials
        i = 0
        for y in partials:
            if abs(x) < abs(y):
                x, y = y, x
            hi = x + y
            lo = y - (hi - x)
            if lo:
                partials[i] = lo
                i += 1
            x = hi
        partials[i:] = [x]

    def add_many(self, xs) -> None:
        for x in np.asarray(xs, dtype=np.float64).ravel().tolist():
            self.add(x)

    def merge(self, other: ExactSum) -> ExactSum:
        out = ExactSum(self.partials)
        for x in other.partials:
            out.add(x)
        return out

    @property
    def value(self) -> float:
        return math.fsum(self.partials)

    def __eq__(self, other):
        return isinstance(other, ExactSum) and self.value == other.value

    def __repr__(self):
        return f"ExactSum({self.value!r})"


_FIELDS = ("a1_2", "a2", "s2", "a1_4", "a2_2", "s2_2")


@dataclass
class MomentAccumulator:
    n: int = 0
    sums: dict[str, ExactSum] = field(default_factory=lambda: {k: ExactSum() for k in _FIELDS})

    def total(self, name: str) -> float:
        return self.sums[name].value

    def merge(self, other: MomentAccumulator) -> MomentAccumulator:
        return MomentAccumulator(self.n + other.n, {k: self.sums[k].merge(other.sums[k]) for k in _FIELDS})

    def __eq__(self, other):
        return (
            isinstance(other, MomentAccumulator)
            and self.n == other.n
            and all(self.total(k) == other.total(k) for k in _FIELDS)
        )


def _terms(a1, a2, s2):
    a1_2 = np.square(a1)
    return {
        "a1_2": a1_2,
        "a2": a2,
        "s2": s2,
        "a1_4": np.square(a1_2),
        "a2_2": np.square(a2),
        "s2_2": np.square(s2),
    }


def accumulate(acc: MomentAccumulator, sample) -> MomentAccumulator:
    """Return ``acc`` extended by one sample (anything with a1, a2, s2)."""
    out = acc.merge(MomentAccumulator())
    for k, v in _terms(sample.a1, sample.a2, sample.s2).items():
        out.sums[k].add(float(v))
    out.n += 1
    return out


def accumulate_arrays(acc: MomentAccumulator, a1, a2, s2) -> MomentAccumulator:
    """Vector form of ``accumulate`` for synthetic streams."""
    a1, a2, s2 = (np.asarray(x, dtype=np.float64) for x in (a1, a2, s2))
    out = acc.merge(MomentAccumulator())
    for k, v in _terms(a1, a2, s2).items():
        out.sums[k].add_many(v)
    out.n += a1.size
    return out


def accumulate_all(samples: Iterable) -> MomentAccumulator:
    acc = MomentAccumulator()
    for s in samples:
        acc = accumulate(acc, s)
    return acc


@dataclass(frozen=True)
class MomentEstimate:
    m2a1: float
    m1a2: float
    m1s2: float
    se2a1: float
    se1a2: float
    se1s2: float
    n: int


def _stderr(sum_x: float, sum_xx: float, n: int) -> float:
    var = (sum_xx - sum_x * sum_x / n) / (n - 1)
    return math.sqrt(max(var, 0.0) / n)


def estimate(acc: MomentAccumulator) -> MomentEstimate:
    n = acc.n
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, have {n}")
    m2a1 = acc.total("a1_2") / n
    m1a2 = acc.total("a2") / n
    return MomentEstimate(
        m2a1=m2a1,
        m1a2=m1a2,
        m1s2=m2a1 - 2 * m1a2,
        se2a1=_stderr(acc.total("a1_2"), acc.total("a1_4"), n),
        se1a2=_stderr(acc.total("a2"), acc.total("a2_2"), n),
        se1s2=_stderr(acc.total("s2"), acc.total("s2_2"), n),
        n=n,
    )


def nearest_int(x: float) -> int:
    return math.floor(x + 0.5)


def _confidence(x: float, se: float) -> float | None:
    dist = abs(x - nearest_int(x))
    if se > 0:
        return dist / se
    return 0.0 if dist == 0 else None


@dataclass(frozen=True)
class RankReport:
    rk_end: int
    rk_ns: int
    albert_invariant: int
    genus: int
    lemma_consistent: bool
    inequality_ok: bool
    fs_bound_ok: bool
    s2_rounded: int
    s2_agrees: bool
    confidence: dict
    ambiguous: tuple[str, ...]

    @property
    def flags(self) -> dict[str, bool]:
        return {
            "lemma_consistent": self.lemma_consistent,
            "inequality_ok": self.inequality_ok,
            "fs_bound_ok": self.fs_bound_ok,
        }

    @property
    def ok(self) -> bool:
        return all(self.flags.values())


def rank_checks(rk_end: int, rk_ns: int, invariant: int, g: int) -> dict[str, bool]:
    """The three consistency flags, from integers alone."""
    return {
        "lemma_consistent": rk_end - 2 * rk_ns == invariant,
        "inequality_ok": 2 * rk_ns - g <= rk_end <= 2 * rk_ns + g,
        "fs_bound_ok": abs(invariant) <= g,
    }


def rank_report(est: MomentEstimate, g: int) -> RankReport:
    rk_end = nearest_int(est.m2a1)
    rk_ns = nearest_int(est.m1a2)
    invariant = rk_end - 2 * rk_ns
    s2_rounded = nearest_int(est.m1s2)
    moments = {"m2a1": est.m2a1, "m1a2": est.m1a2, "m1s2": est.m1s2}
    errors = {"m2a1": est.se2a1, "m1a2": est.se1a2, "m1s2": est.se1s2}
    flags = rank_checks(rk_end, rk_ns, invariant, g)
    return RankReport(
        rk_end=rk_end,
        rk_ns=rk_ns,
        albert_invariant=invariant,
        genus=g,
        s2_rounded=s2_rounded,
        s2_agrees=s2_rounded == invariant,
        confidence={k: _confidence(moments[k], errors[k]) for k in moments},
        ambiguous=tuple(k for k, x in moments.items() if abs(x - nearest_int(x)) >= AMBIGUOUS_DISTANCE),
        **flags,
    )


def report_dict(est: MomentEstimate, rep: RankReport) -> dict:
    return {
        "n": est.n,
        "moments": {"m2a1": est.m2a1, "m1a2": est.m1a2, "m1s2": est.m1s2},
        "stderr": {"m2a1": est.se2a1, "m1a2": est.se1a2, "m1s2": est.se1s2},
        "rk_end": rep.rk_end,
        "rk_ns": rep.rk_ns,
        "albert_invariant": rep.albert_invariant,
        "flags": rep.flags,
        "confidence": rep.confidence,
        "diagnostics": {
            "m1s2_rounded": rep.s2_rounded,
            "m1s2_rounding_agrees": rep.s2_agrees,
            "ambiguous": list(rep.ambiguous),
        },
    }
