"""Moment estimates for two elliptic curves as the prime bound grows.

    python3 scripts/genus1_convergence.py --max-exp 16
"""

import argparse
from dataclasses import dataclass

from stmoments.curves import Curve, compute_local_data, good_primes
from stmoments.haar import BUILTIN_SPECS, exact_moments
from stmoments.moments import accumulate_all, estimate, rank_report


@dataclass
class Config:
    min_exp: int = 8
    max_exp: int = 16
    threads: int = 1


CURVES = {
    "y^2 = x^3 + x + 1": (Curve(1, (1, 1, 0, 1)), "SU2"),
    "y^2 = x^3 + 1": (Curve(1, (1, 0, 0, 1)), "N(U1)"),
}


def main(cfg: Config):
    for label, (curve, group) in CURVES.items():
        target = exact_moments(BUILTIN_SPECS[group])
        print(f"{label}  (group model {group}: {target.rounded()})")
        print(f"{'bound':>8} {'n':>6} {'M2[a1]':>9} {'M1[a2]':>9} {'M1[s2]':>9} {'se':>8}  report")
        data = compute_local_data(curve, list(good_primes(curve, 1 << cfg.max_exp)), cfg.threads)
        for k in range(cfg.min_exp, cfg.max_exp + 1):
            est = estimate(accumulate_all(r for r in data if r.p <= 1 << k))
            rep = rank_report(est, 1)
            print(
                f"{1 << k:>8} {est.n:>6} {est.m2a1:>9.4f} {est.m1a2:>9.4f} {est.m1s2:>9.4f} {est.se2a1:>8.4f}"
                f"  ({rep.rk_end}, {rep.rk_ns}, {rep.albert_invariant}) ok={rep.ok}"
            )
        print()


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--min-exp", type=int, default=Config.min_exp)
    ap.add_argument("--max-exp", type=int, default=Config.max_exp)
    ap.add_argument("--threads", type=int, default=Config.threads)
    main(Config(**vars(ap.parse_args())))
