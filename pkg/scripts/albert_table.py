"""Dimension table by Albert type for small parameters, plus a random sweep of the invariant bound."""

import argparse
from collections import Counter
from dataclasses import dataclass

from stmoments.albert import AlbertRecord, dims_from_record, invariant, random_valid_records, wedderburn_from_records


@dataclass
class Config:
    max_param: int = 3
    draws: int = 10**4
    max_genus: int = 6


def main(cfg: Config):
    print(f"{'type':<4} {'e':>2} {'r':>2} {'d':>2} {'dim End':>8} {'dim Ros':>8} {'inv':>5}")
    for t in ("I", "II", "III", "IV"):
        for e in range(1, cfg.max_param + 1):
            for r in range(1, cfg.max_param + 1):
                d = 2 if t == "IV" else 1
                g0 = {"I": e, "II": 2 * e, "III": 2 * e, "IV": d * d * e}[t]
                dims = dims_from_record(AlbertRecord(t, e, r, g0, d))
                print(f"{t:<4} {e:>2} {r:>2} {d:>2} {dims.dim_end:>8} {dims.dim_rosati:>8} {dims.invariant:>5}")

    print("\ninvariant histogram over random decompositions")
    for g in range(1, cfg.max_genus + 1):
        hist = Counter(invariant(wedderburn_from_records(random_valid_records(g, s))) for s in range(cfg.draws))
        worst = max(abs(k) for k in hist)
        print(f"g={g}: |inv| <= {worst} (bound {g})  {dict(sorted(hist.items()))}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-param", type=int, default=Config.max_param)
    ap.add_argument("--draws", type=int, default=Config.draws)
    ap.add_argument("--max-genus", type=int, default=Config.max_genus)
    main(Config(**vars(ap.parse_args())))
