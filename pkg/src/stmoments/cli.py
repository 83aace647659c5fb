"""Command-line front end: ``stmoments {estimate,haar,albert,check}``.

Exit codes: 0 when every consistency flag holds, 2 when one fails,
1 on errors (bad input, insufficient data, counting failures).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import albert as alb
from . import haar
from .cache import default_cache_path, load_cache, save_cache
from .curves import Curve, compute_local_data, good_primes
from .moments import InsufficientDataError, accumulate_all, estimate, rank_report, report_dict

log = logging.getLogger("stmoments")

EXIT_OK, EXIT_ERROR, EXIT_MISMATCH = 0, 1, 2
DEFAULT_MAX_PRIME = 4096


@dataclass
class JobConfig:
    subcommand: str
    curve: Curve | None = None
    max_prime: int = DEFAULT_MAX_PRIME
    group_spec: haar.STGroupSpec | None = None
    albert_records: list = field(default_factory=list)
    threads: int = 1
    seed: int = 0
    output_format: str = "json"
    cache_path: Path | None = None
    mc_budget: int = haar.DEFAULT_MC_BUDGET
    quad_budget: int = haar.DEFAULT_QUAD_BUDGET
    method: str = "both"

    def validate(self) -> None:
        need = {
            "estimate": ("curve",),
            "haar": ("group_spec",),
            "albert": ("albert_records",),
            "check": ("curve", "group_spec", "albert_records"),
        }[self.subcommand]
        for name in need:
            if not getattr(self, name):
                raise ValueError(f"{self.subcommand} needs --{name.replace('_', '-')}")
        if self.subcommand in ("estimate", "check") and self.max_prime < 3:
            raise InsufficientDataError(f"--max-prime {self.max_prime} leaves no odd primes")


# ---------------------------------------------------------------------------
# pipelines


def collect_local_data(cfg: JobConfig):
    """Local data for every good prime, consulting and refreshing the cache."""
    curve = cfg.curve
    primes = list(good_primes(curve, cfg.max_prime))
    path = cfg.cache_path or default_cache_path(curve)
    cached = load_cache(path, curve) if path else {}
    missing = [p for p in primes if p not in cached]
    if missing:
        log.info("counting points at %d primes (%d cached)", len(missing), len(primes) - len(missing))
    fresh = compute_local_data(curve, missing, cfg.threads)
    merged = dict(cached)
    merged.update((r.p, r) for r in fresh)
    if path and fresh:
        save_cache(path, curve, merged.values())
    data = [merged[p] for p in primes]
    return data, {"primes": len(primes), "counted": len(fresh), "cached": len(primes) - len(fresh)}


def run_estimate(cfg: JobConfig) -> tuple[dict, int]:
    data, stats = collect_local_data(cfg)
    est = estimate(accumulate_all(data))
    rep = rank_report(est, cfg.curve.genus)
    out = {"curve": cfg.curve.to_dict(), "max_prime": cfg.max_prime}
    out.update(report_dict(est, rep))
    out["stats"] = stats
    return out, EXIT_OK if rep.ok else EXIT_MISMATCH


def _agreement(q: haar.MomentTriple, mc: haar.MomentTriple) -> dict:
    diffs, ok = {}, True
    for k in ("m2a1", "m1a2", "m1s2"):
        d = abs(getattr(q, k) - getattr(mc, k))
        tol = 3 * mc.stderr[k] + q.err
        diffs[k] = {"diff": d, "tolerance": tol}
        ok = ok and d <= tol
    return {"ok": ok, "moments": diffs}


def run_haar(cfg: JobConfig) -> tuple[dict, int]:
    spec = cfg.group_spec
    out: dict = {"spec": spec.to_dict()}
    ok = True
    q = mc = None
    if cfg.method in ("both", "quadrature"):
        q = haar.exact_moments(spec, "quadrature", cfg.quad_budget)
        out["quadrature"] = q.to_dict()
        ok = ok and q.certified
    if cfg.method in ("both", "montecarlo"):
        mc = haar.exact_moments(spec, "montecarlo", cfg.mc_budget, seed=cfg.seed, threads=cfg.threads)
        out["montecarlo"] = mc.to_dict()
        ok = ok and mc.certified
    if q and mc:
        out["agreement"] = _agreement(q, mc)
        ok = ok and out["agreement"]["ok"]
    best = q or mc
    m = list(best.rounded())
    out["moments"] = {"m2a1": m[0], "m1a2": m[1], "m1s2": m[2]}
    out["identity_ok"] = m[2] == m[0] - 2 * m[1]
    out["fs_bound_ok"] = abs(best.m1s2) <= spec.g + best.err
    ok = ok and out["identity_ok"] and out["fs_bound_ok"]
    return out, EXIT_OK if ok else EXIT_MISMATCH


def albert_summary(records) -> dict:
    dims = alb.dims_from_records(records)
    dec = alb.wedderburn_from_records(records)
    g = sum(r.dim for r in records)
    inv = alb.invariant(dec)
    identity_ok, inequality_ok = alb.check_rank_relation(dims.dim_end, dims.dim_rosati, dec, g)
    return {
        "records": [r.to_dict() for r in records],
        "per_record": [vars(alb.dims_from_record(r)) for r in records],
        "g": g,
        "dim_end": dims.dim_end,
        "dim_rosati": dims.dim_rosati,
        "invariant": inv,
        "decomposition": dec.to_dict(),
        "flags": {"identity_ok": identity_ok, "inequality_ok": inequality_ok, "fs_bound_ok": abs(inv) <= g},
    }


def run_albert(cfg: JobConfig) -> tuple[dict, int]:
    out = albert_summary(cfg.albert_records)
    return out, EXIT_OK if all(out["flags"].values()) else EXIT_MISMATCH


def run_check(cfg: JobConfig) -> tuple[dict, int]:
    est_out, _ = run_estimate(cfg)
    group = haar.exact_moments(cfg.group_spec, "quadrature", cfg.quad_budget)
    alg = albert_summary(cfg.albert_records)
    est_triple = [est_out["rk_end"], est_out["rk_ns"], est_out["albert_invariant"]]
    group_triple = list(group.rounded())
    g = cfg.curve.genus
    checks = {
        "dimensions_match": cfg.group_spec.g == g and alg["g"] == g,
        "moments_match_group": est_triple == group_triple,
        "group_s2_matches_albert": group_triple[2] == alg["invariant"],
        "ranks_match_albert": est_triple[0] == alg["dim_end"] and est_triple[1] == alg["dim_rosati"],
        "estimate_flags": all(est_out["flags"].values()),
        "albert_flags": all(alg["flags"].values()),
    }
    out = {
        "estimate": est_out,
        "group": {"spec": cfg.group_spec.to_dict(), **group.to_dict()},
        "albert": alg,
        "checks": checks,
    }
    return out, EXIT_OK if all(checks.values()) else EXIT_MISMATCH


RUNNERS = {"estimate": run_estimate, "haar": run_haar, "albert": run_albert, "check": run_check}


# ---------------------------------------------------------------------------
# argument handling


def _load_json_arg(text: str):
    """Inline JSON, or ``@path`` / an existing file path holding JSON."""
    if text.startswith("@"):
        return json.loads(Path(text[1:]).read_text())
    if text.lstrip().startswith(("{", "[")):
        return json.loads(text)
    path = Path(text)
    if path.exists():
        return json.loads(path.read_text())
    raise ValueError(f"not JSON and not a readable file: {text!r}")


def _parse_curve(args) -> Curve | None:
    if args.curve:
        try:
            return Curve.from_dict(_load_json_arg(args.curve))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"unreadable curve {args.curve!r}: {exc}") from None
    if args.f is None:
        return None
    if args.genus is None:
        raise ValueError("--f needs --genus")
    coeffs = tuple(int(c) for c in args.f.split(","))
    return Curve(args.genus, coeffs)


def _parse_spec(text: str | None) -> haar.STGroupSpec | None:
    if text is None:
        return None
    if text in haar.BUILTIN_SPECS:
        return haar.BUILTIN_SPECS[text]
    return haar.STGroupSpec.from_dict(_load_json_arg(text))


def _parse_records(items) -> list:
    records = []
    for item in items or ():
        data = _load_json_arg(item)
        for d in data if isinstance(data, list) else [data]:
            records.append(alb.AlbertRecord.from_dict(d))
    return records


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output_format", choices=("json", "text"), default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    curve = argparse.ArgumentParser(add_help=False)
    curve.add_argument("--genus", type=int, choices=(1, 2))
    curve.add_argument("--f", help="coefficients of f, lowest degree first, e.g. 1,1,0,1 (use --f=-1,... for a leading minus)")
    curve.add_argument("--curve", help='curve JSON ({"genus": 2, "f": [...]}) or a file holding it')
    curve.add_argument("--max-prime", type=int, default=DEFAULT_MAX_PRIME)
    curve.add_argument("--cache", type=Path, help="per-prime CSV cache (default: $STMOMENTS_CACHE_DIR/<curve>.csv)")

    group = argparse.ArgumentParser(add_help=False)
    group.add_argument("--spec", help="group spec JSON, a file holding it, or a built-in name")
    group.add_argument("--budget", type=int, default=haar.DEFAULT_MC_BUDGET, help="Monte Carlo samples")
    group.add_argument("--quad-budget", type=int, default=haar.DEFAULT_QUAD_BUDGET, help="quadrature nodes per component")

    records = argparse.ArgumentParser(add_help=False)
    records.add_argument(
        "--record", action="append", dest="records", help='Albert record JSON such as {"type":"III","e":1,"r":1,"g0":2}; repeatable, or a JSON list'
    )

    parser = argparse.ArgumentParser(prog="stmoments", description="Sato-Tate moments, rank predictions and Albert-type checks.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("estimate", parents=[common, curve], help="moments and rank report from point counts")
    h = sub.add_parser("haar", parents=[common, group], help="exact moments of a group model")
    h.add_argument("--method", choices=("both", "quadrature", "montecarlo"), default="both")
    sub.add_parser("albert", parents=[common, records], help="algebra dimensions and invariant of Albert records")
    sub.add_parser("check", parents=[common, curve, group, records], help="cross-check curve, group and algebra")
    return parser


def config_from_args(args) -> JobConfig:
    cfg = JobConfig(
        subcommand=args.subcommand,
        threads=args.threads,
        seed=args.seed,
        output_format=args.output_format,
    )
    if hasattr(args, "max_prime"):
        cfg.curve = _parse_curve(args)
        cfg.max_prime = args.max_prime
        cfg.cache_path = args.cache
    if hasattr(args, "spec"):
        cfg.group_spec = _parse_spec(args.spec)
        cfg.mc_budget = args.budget
        cfg.quad_budget = args.quad_budget
    if hasattr(args, "method"):
        cfg.method = args.method
    if hasattr(args, "records"):
        cfg.albert_records = _parse_records(args.records)
    cfg.validate()
    return cfg


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(out: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(out, indent=2)
    rows = list(_flatten(out))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {json.dumps(v)}" for k, v in rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        out, code = RUNNERS[cfg.subcommand](cfg)
    except (ValueError, OSError, ArithmeticError, json.JSONDecodeError) as exc:
        # CacheSchemaError, ConstraintError, SpecError, BadPrimeError and
        # InsufficientDataError are ValueErrors; WeilBoundError is arithmetic
        kind = type(exc).__name__
        print(json.dumps({"error": kind, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    print(render(out, cfg.output_format))
    return code


if __name__ == "__main__":
    sys.exit(main())
