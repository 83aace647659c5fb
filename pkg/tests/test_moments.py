import math
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stmoments.curves import Curve, local_data
from stmoments.haar import BUILTIN_SPECS, sample_char_values
from stmoments.moments import (
    ExactSum,
    InsufficientDataError,
    MomentAccumulator,
    MomentEstimate,
    accumulate,
    accumulate_all,
    accumulate_arrays,
    estimate,
    rank_checks,
    rank_report,
    report_dict,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)
sample = st.builds(SimpleNamespace, a1=finite, a2=finite, s2=finite)


def point(a1, a2, s2=None):
    return SimpleNamespace(a1=a1, a2=a2, s2=a1 * a1 - 2 * a2 if s2 is None else s2)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300)))
def test_exact_sum_is_exact(xs):
    s = ExactSum()
    for x in xs:
        s.add(x)
    assert s.value == float(sum((Fraction(x) for x in xs), Fraction(0)))


@given(st.lists(finite), st.lists(finite))
def test_exact_sum_merge_commutes(xs, ys):
    a, b = ExactSum(xs), ExactSum(ys)
    assert a.merge(b).value == b.merge(a).value == ExactSum(xs + ys).value


def test_accumulate_examples():
    acc = accumulate(MomentAccumulator(), point(0.0, 1.0))
    assert acc.n == 1
    assert (acc.total("a1_2"), acc.total("a2"), acc.total("s2")) == (0.0, 1.0, -2.0)


def test_accumulate_p5_sample():
    acc = accumulate(MomentAccumulator(), local_data(Curve(1, (1, 1, 0, 1)), 5))
    assert acc.total("a1_2") == pytest.approx(1.8, abs=1e-14)
    assert acc.total("a2") == pytest.approx(1.0, abs=1e-14)
    assert acc.total("s2") == pytest.approx(-0.2, abs=1e-14)


def test_accumulate_does_not_mutate():
    acc = MomentAccumulator()
    accumulate(acc, point(1.0, 1.0))
    assert acc.n == 0 and acc.total("a2") == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(sample, max_size=20), st.lists(sample, max_size=20))
def test_merge_commutative(xs, ys):
    a, b = accumulate_all(xs), accumulate_all(ys)
    assert a.merge(b) == b.merge(a)


@settings(max_examples=30, deadline=None)
@given(st.lists(sample, max_size=15), st.lists(sample, max_size=15), st.lists(sample, max_size=15))
def test_merge_associative(xs, ys, zs):
    a, b, c = (accumulate_all(v) for v in (xs, ys, zs))
    assert a.merge(b).merge(c) == a.merge(b.merge(c))


def test_partition_merge_matches_sequential():
    rng = np.random.default_rng(5)
    a1 = rng.uniform(-2, 2, 3000)
    a2 = rng.uniform(-1, 3, 3000)
    s2 = a1 * a1 - 2 * a2
    whole = estimate(accumulate_arrays(MomentAccumulator(), a1, a2, s2))
    cuts = sorted(rng.choice(np.arange(1, 3000), 7, replace=False))
    merged = MomentAccumulator()
    for lo, hi in zip([0] + cuts, cuts + [3000]):
        merged = merged.merge(accumulate_arrays(MomentAccumulator(), a1[lo:hi], a2[lo:hi], s2[lo:hi]))
    parts = estimate(merged)
    for k in ("m2a1", "m1a2", "m1s2", "se2a1", "se1a2", "se1s2"):
        assert abs(getattr(parts, k) - getattr(whole, k)) <= 1e-10


def test_array_and_scalar_accumulation_agree():
    rng = np.random.default_rng(1)
    a1, a2 = rng.normal(size=50), rng.normal(size=50)
    s2 = a1 * a1 - 2 * a2
    by_array = accumulate_arrays(MomentAccumulator(), a1, a2, s2)
    by_point = accumulate_all(point(x, y, z) for x, y, z in zip(a1, a2, s2))
    assert by_array == by_point


def test_sum_identity():
    rng = np.random.default_rng(2)
    a1, a2 = rng.normal(size=1000), rng.normal(size=1000)
    acc = accumulate_arrays(MomentAccumulator(), a1, a2, a1 * a1 - 2 * a2)
    assert acc.total("s2") == pytest.approx(acc.total("a1_2") - 2 * acc.total("a2"), abs=1e-10)


def test_estimate_needs_two_samples():
    with pytest.raises(InsufficientDataError):
        estimate(accumulate(MomentAccumulator(), point(0.0, 1.0)))


def test_estimate_two_samples():
    est = estimate(accumulate_all([point(0.0, 1.0), point(2.0, 1.0)]))
    assert (est.m2a1, est.m1a2, est.m1s2) == (2.0, 1.0, 0.0)


def test_constant_a2_stream():
    est = estimate(accumulate_all(point(x, 1.0) for x in np.linspace(-2, 2, 101)))
    assert est.m1a2 == 1.0 and est.se1a2 == 0.0


@given(st.lists(sample, min_size=2, max_size=30))
def test_identity_is_exact(xs):
    est = estimate(accumulate_all(xs))
    assert est.m1s2 == est.m2a1 - 2 * est.m1a2
    assert min(est.se2a1, est.se1a2, est.se1s2) >= 0


def test_stderr_matches_numpy():
    rng = np.random.default_rng(3)
    a1, a2 = rng.normal(size=500), rng.normal(size=500)
    s2 = rng.normal(size=500)
    est = estimate(accumulate_arrays(MomentAccumulator(), a1, a2, s2))
    for se, x in [(est.se2a1, a1 * a1), (est.se1a2, a2), (est.se1s2, s2)]:
        assert se == pytest.approx(x.std(ddof=1) / math.sqrt(x.size), rel=1e-9)


def _est(m2a1, m1a2, se=0.01):
    return MomentEstimate(m2a1, m1a2, m2a1 - 2 * m1a2, se, se, se, 1000)


def test_rank_report_su2_like():
    rep = rank_report(_est(1.03, 0.98), 1)
    assert (rep.rk_end, rep.rk_ns, rep.albert_invariant) == (1, 1, -1)
    assert rep.ok and rep.s2_agrees


def test_rank_report_cm_elliptic():
    rep = rank_report(_est(2.0, 1.0), 1)
    assert (rep.rk_end, rep.rk_ns, rep.albert_invariant) == (2, 1, 0)
    assert rep.ok


def test_rank_report_inequality_boundary():
    # 3 = 2*1 + 1 sits on the upper edge of the band, so it is allowed
    rep = rank_report(_est(3.0, 1.0), 1)
    assert rep.inequality_ok and rep.lemma_consistent


def test_rank_report_inequality_violation():
    rep = rank_report(_est(4.0, 1.0), 1)
    assert not rep.inequality_ok
    assert not rep.fs_bound_ok


def test_rank_report_flags_half_integers():
    rep = rank_report(_est(1.47, 1.0), 1)
    assert "m2a1" in rep.ambiguous
    assert rank_report(_est(1.2, 1.0), 1).ambiguous == ()


def test_confidence_in_stderr_units():
    rep = rank_report(_est(1.03, 0.98, se=0.01), 1)
    assert rep.confidence["m2a1"] == pytest.approx(3.0)
    assert rep.confidence["m1a2"] == pytest.approx(2.0)


@given(st.integers(0, 12), st.integers(0, 6), st.integers(-4, 4), st.integers(1, 4))
def test_rank_checks_from_integers(rk_end, rk_ns, inv, g):
    flags = rank_checks(rk_end, rk_ns, inv, g)
    assert flags["lemma_consistent"] == (rk_end - 2 * rk_ns == inv)
    assert flags["inequality_ok"] == (abs(rk_end - 2 * rk_ns) <= g)
    assert flags["fs_bound_ok"] == (abs(inv) <= g)


def test_report_dict_shape():
    est = _est(1.0, 1.0)
    out = report_dict(est, rank_report(est, 1))
    assert set(out) >= {"n", "moments", "stderr", "rk_end", "rk_ns", "albert_invariant", "flags", "confidence"}
    assert set(out["flags"]) == {"lemma_consistent", "inequality_ok", "fs_bound_ok"}


@pytest.mark.parametrize("n", [10**3, 10**4])
def test_su2_stream_converges(n):
    a1, a2, s2 = sample_char_values(BUILTIN_SPECS["SU2"], n, seed=11)
    est = estimate(accumulate_arrays(MomentAccumulator(), a1, a2, s2))
    assert abs(est.m2a1 - 1) <= 3 * est.se2a1
    assert abs(est.m1s2 + 1) <= 3 * est.se1s2
