"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the summary block at the end
lists every criterion.
"""

import contextlib
import io
import itertools
import json
import math
import time

import pytest

from stmoments.albert import AlbertRecord, dims_from_record, invariant, random_valid_records, wedderburn_from_records
from stmoments.cache import CACHE_DIR_ENV
from stmoments.cli import main
from stmoments.curves import Curve, compute_local_data, count_points, count_points_ext, good_primes, newton_N2
from stmoments.haar import BUILTIN_SPECS, exact_moments, fs_indicator_with_error, sample_char_values
from stmoments.moments import MomentAccumulator, accumulate_arrays, estimate, rank_report, report_dict

TARGET = (1, 1, -1)
NON_CM = Curve(1, (1, 1, 0, 1))
CM = Curve(1, (1, 0, 0, 1))
GENUS2 = Curve(2, (1, -1, 0, 0, 0, 1))
G1_BOUND = 1 << 16


def cli_json(argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def curve_args(curve):
    return ["--genus", str(curve.genus), "--f=" + ",".join(map(str, curve.f_coeffs))]


@pytest.fixture(scope="module", autouse=True)
def no_cache():
    # every run below counts from scratch
    mp = pytest.MonkeyPatch()
    mp.delenv(CACHE_DIR_ENV, raising=False)
    yield
    mp.undo()


@pytest.fixture(scope="module")
def genus1_runs():
    runs = {}
    for name, curve in (("non_cm", NON_CM), ("cm", CM)):
        t0 = time.perf_counter()
        code, text = cli_json(["estimate", *curve_args(curve), "--max-prime", str(G1_BOUND), "--threads", "1"])
        runs[name] = dict(code=code, text=text, out=json.loads(text), seconds=time.perf_counter() - t0)
    return runs


def synthetic_report(n, threads=1, seed=2024):
    a1, a2, s2 = sample_char_values(BUILTIN_SPECS["SU2"], n, seed=seed, threads=threads)
    est = estimate(accumulate_arrays(MomentAccumulator(), a1, a2, s2))
    return est, json.dumps(report_dict(est, rank_report(est, 1)), indent=2)


def test_criterion_1_table_rows(verdict):
    t0 = time.perf_counter()
    rows = {
        "I": lambda e, r, d: (e * r * r, e * r * (r + 1) // 2, -e * r),
        "II": lambda e, r, d: (4 * e * r * r, e * (r + 2 * r * r), -2 * e * r),
        "III": lambda e, r, d: (4 * e * r * r, e * (2 * r * r - r), 2 * e * r),
        "IV": lambda e, r, d: (2 * e * r * r * d * d, e * r * r * d * d, 0),
    }
    g0 = {"I": lambda e, d: e, "II": lambda e, d: 2 * e, "III": lambda e, d: 2 * e, "IV": lambda e, d: d * d * e}
    bad = 0
    for t, formula in rows.items():
        for e, r, d in itertools.product(range(1, 21), range(1, 21), range(1, 21) if t == "IV" else (1,)):
            rec = AlbertRecord(t, e, r, g0[t](e, d), d)
            dims = dims_from_record(rec)
            dec = wedderburn_from_records([rec])
            want = formula(e, r, d)
            ok = (
                (dims.dim_end, dims.dim_rosati, dims.invariant) == want
                and dims.dim_end - 2 * dims.dim_rosati == invariant(dec)
                and dec.dim_end == dims.dim_end
            )
            bad += not ok
    dt = time.perf_counter() - t0
    verdict(1, bad == 0 and dt < 1.0, f"{bad} mismatches on the e,r,d <= 20 grid in {dt:.2f}s")


def test_criterion_2_inequality(verdict):
    t0 = time.perf_counter()
    violations = 0
    for g in range(1, 7):
        for seed in range(10**4):
            violations += abs(invariant(wedderburn_from_records(random_valid_records(g, seed)))) > g
    dt = time.perf_counter() - t0
    verdict(2, violations == 0 and dt < 5.0, f"{violations} violations over 6x10^4 draws in {dt:.2f}s")


@pytest.fixture(scope="module")
def haar_results():
    t0 = time.perf_counter()
    out = {}
    for name, spec in BUILTIN_SPECS.items():
        q = exact_moments(spec, "quadrature", budget=10**4)
        mc = exact_moments(spec, "montecarlo", budget=10**6, seed=0)
        fs = fs_indicator_with_error(spec)
        out[name] = (spec, q, mc, fs)
    return out, time.perf_counter() - t0


def test_criterion_3_haar(verdict, haar_results):
    results, dt = haar_results
    expected = {"U1": (2, 1, 0), "SU2": (1, 1, -1), "N(U1)": (1, 1, -1), "SU2xSU2": (2, 2, -2), "USp4": (1, 1, -1)}
    problems = []
    for name, (spec, q, mc, _) in results.items():
        vals = (q.m2a1, q.m1a2, q.m1s2)
        r = q.rounded()
        if max(abs(v - round(v)) for v in vals) > 0.05:
            problems.append(f"{name} not near integers")
        if r[2] != r[0] - 2 * r[1]:
            problems.append(f"{name} identity")
        if name in expected and r != expected[name]:
            problems.append(f"{name} gave {r}")
        for k in ("m2a1", "m1a2", "m1s2"):
            if abs(getattr(q, k) - getattr(mc, k)) > 3 * mc.stderr[k] + q.err:
                problems.append(f"{name} {k} quadrature vs Monte Carlo")
    ok = not problems and dt < 120
    verdict(3, ok, f"{len(results)} specs in {dt:.1f}s" + (f": {problems}" if problems else ""))


def test_criterion_4_fs_bound(verdict, haar_results):
    results, _ = haar_results
    worst = max(abs(v) - (spec.g + err) for spec, _, _, (v, err) in results.values())
    verdict(4, worst <= 0, f"max(|fs| - (g + err)) = {worst:.3f}")


def test_criterion_5_genus1(verdict, genus1_runs):
    details, ok = [], True
    n_u1 = exact_moments(BUILTIN_SPECS["N(U1)"])
    for name, run in genus1_runs.items():
        out = run["out"]
        m = out["moments"]
        vals = (m["m2a1"], m["m1a2"], m["m1s2"])
        close = max(abs(v - t) for v, t in zip(vals, TARGET)) <= 0.1
        report = (out["rk_end"], out["rk_ns"], out["albert_invariant"]) == TARGET
        flags = all(out["flags"].values()) and run["code"] == 0
        ok &= close and report and flags and run["seconds"] < 60
        details.append(f"{name} {tuple(round(v, 3) for v in vals)} in {run['seconds']:.1f}s")
    cm = genus1_runs["cm"]["out"]["moments"]
    ok &= max(abs(cm[k] - getattr(n_u1, k)) for k in ("m2a1", "m1a2", "m1s2")) <= 0.1
    verdict(5, ok, "; ".join(details))


def test_criterion_6_genus1_oracle(verdict):
    worst = 0.0
    for curve in (NON_CM, CM):
        for rec in compute_local_data(curve, list(good_primes(curve, G1_BOUND))):
            worst = max(worst, abs(rec.a2 - 1))
    newton_bad = sum(
        count_points_ext(c, p) != newton_N2(p, count_points(c, p)) for c in (NON_CM, CM) for p in good_primes(c, 200)
    )
    verdict(6, worst <= 1e-12 and newton_bad == 0, f"max |a2 - 1| = {worst:.1e}, {newton_bad} Newton mismatches")


def test_criterion_7_genus2(verdict):
    t0 = time.perf_counter()
    code, text = cli_json(["estimate", *curve_args(GENUS2), "--max-prime", "3000", "--threads", "8"])
    dt = time.perf_counter() - t0
    out = json.loads(text)
    m = out["moments"]
    vals = (m["m2a1"], m["m1a2"], m["m1s2"])
    close = max(abs(v - t) for v, t in zip(vals, TARGET)) <= 0.3
    report = (out["rk_end"], out["rk_ns"], out["albert_invariant"]) == TARGET
    ok = close and report and all(out["flags"].values()) and code == 0 and dt < 600
    verdict(7, ok, f"{tuple(round(v, 3) for v in vals)} over {out['n']} primes in {dt:.1f}s")


def test_criterion_8_synthetic(verdict):
    t0 = time.perf_counter()
    ests = {n: synthetic_report(n)[0] for n in (10**3, 10**4, 10**5)}
    big = ests[10**5]
    within = all(
        abs(v - t) <= 3 * se
        for v, t, se in zip((big.m2a1, big.m1a2, big.m1s2), TARGET, (big.se2a1, big.se1a2, big.se1s2))
    )
    ratios = []
    for lo, hi in ((10**3, 10**4), (10**4, 10**5)):
        for k in ("se2a1", "se1s2"):
            ratios.append(getattr(ests[lo], k) / getattr(ests[hi], k))
    # a2 is identically 1 on SU(2), so its standard error is exactly zero at every n
    a2_flat = all(e.se1a2 == 0 for e in ests.values())
    rate = all(abs(r / math.sqrt(10) - 1) <= 0.2 for r in ratios)
    dt = time.perf_counter() - t0
    verdict(8, within and rate and a2_flat and dt < 30, f"se ratios {[round(r, 3) for r in ratios]} (sqrt 10 = 3.162) in {dt:.1f}s")


def test_criterion_9_determinism(verdict, genus1_runs):
    diffs = []
    for name, curve in (("non_cm", NON_CM), ("cm", CM)):
        for t in (4, 8):
            _, text = cli_json(["estimate", *curve_args(curve), "--max-prime", str(G1_BOUND), "--threads", str(t)])
            if text != genus1_runs[name]["text"]:
                diffs.append(f"{name}@{t}")
    ref = synthetic_report(10**5, threads=1)[1]
    for t in (4, 8):
        if synthetic_report(10**5, threads=t)[1] != ref:
            diffs.append(f"synthetic@{t}")
    verdict(9, not diffs, "byte-identical at threads 1/4/8" if not diffs else f"differs: {diffs}")
