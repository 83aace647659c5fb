"""Moments of every built-in group model, quadrature next to Monte Carlo."""

import argparse
from dataclasses import dataclass

from stmoments.haar import BUILTIN_SPECS, exact_moments, fs_indicator_with_error


@dataclass
class Config:
    mc_budget: int = 10**6
    quad_budget: int = 10**4
    seed: int = 0


def main(cfg: Config):
    print(f"{'group':<14} {'quadrature':>26} {'q err':>8} {'monte carlo':>26} {'mc err':>7} {'FS':>7}")
    for name, spec in BUILTIN_SPECS.items():
        q = exact_moments(spec, "quadrature", cfg.quad_budget)
        mc = exact_moments(spec, "montecarlo", cfg.mc_budget, seed=cfg.seed)
        fs, _ = fs_indicator_with_error(spec, seed=cfg.seed)
        qs = " ".join(f"{v:8.4f}" for v in (q.m2a1, q.m1a2, q.m1s2))
        ms = " ".join(f"{v:8.4f}" for v in (mc.m2a1, mc.m1a2, mc.m1s2))
        print(f"{name:<14} {qs:>26} {q.err:>8.1e} {ms:>26} {mc.err:>7.4f} {fs:>7.3f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--mc-budget", type=int, default=Config.mc_budget)
    ap.add_argument("--quad-budget", type=int, default=Config.quad_budget)
    ap.add_argument("--seed", type=int, default=Config.seed)
    main(Config(**vars(ap.parse_args())))
