"""Genus-2 estimate for y^2 = f(x), counting over F_p and F_{p^2}.

Counts are cached so later runs with a larger bound only do the new primes.

    python3 scripts/genus2_run.py --f=1,-1,0,0,0,1 --max-prime 3000
"""

import argparse
import time
from dataclasses import dataclass
from pathlib import Path

from stmoments.cache import load_cache, save_cache
from stmoments.curves import Curve, compute_local_data, good_primes
from stmoments.moments import accumulate_all, estimate, rank_report


@dataclass
class Config:
    f: str = "1,-1,0,0,0,1"
    max_prime: int = 3000
    threads: int = 1
    cache: Path | None = None


def main(cfg: Config):
    curve = Curve(2, tuple(int(c) for c in cfg.f.split(",")))
    primes = list(good_primes(curve, cfg.max_prime))
    cached = load_cache(cfg.cache, curve) if cfg.cache else {}
    todo = [p for p in primes if p not in cached]
    t0 = time.perf_counter()
    fresh = {r.p: r for r in compute_local_data(curve, todo, cfg.threads)}
    dt = time.perf_counter() - t0
    data = {**cached, **fresh}
    if cfg.cache and fresh:
        save_cache(cfg.cache, curve, data.values())
    print(f"{curve.key()}: {len(primes)} good primes, {len(todo)} counted in {dt:.1f}s")

    rows = [data[p] for p in primes]
    for bound in sorted({b for b in (250, 500, 1000, 2000, cfg.max_prime) if b <= cfg.max_prime}):
        est = estimate(accumulate_all(r for r in rows if r.p <= bound))
        rep = rank_report(est, 2)
        print(
            f"p <= {bound:>5}: M2[a1]={est.m2a1:.3f}  M1[a2]={est.m1a2:.3f}  M1[s2]={est.m1s2:.3f}"
            f"  report=({rep.rk_end}, {rep.rk_ns}, {rep.albert_invariant})  flags={rep.flags}"
        )


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--f", default=Config.f)
    ap.add_argument("--max-prime", type=int, default=Config.max_prime)
    ap.add_argument("--threads", type=int, default=Config.threads)
    ap.add_argument("--cache", type=Path)
    main(Config(**vars(ap.parse_args())))
