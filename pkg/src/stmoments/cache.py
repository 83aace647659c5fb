"""Per-prime CSV cache of point counts.

Layout::

    # stmoments-cache v1 g2_1_-1_0_0_0_1
    p,N1,N2,a1,a2,s2
    3,...

The first line keys the file to one curve; rows are ascending in p.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path
from typing import Iterable

from .curves import Curve, PrimeLocalData, normalize

SCHEMA_VERSION = "v1"
HEADER = ["p", "N1", "N2", "a1", "a2", "s2"]
CACHE_DIR_ENV = "STMOMENTS_CACHE_DIR"


class CacheSchemaError(ValueError):
    pass


def _key_line(curve: Curve) -> str:
    return f"# stmoments-cache {SCHEMA_VERSION} {curve.key()}"


def default_cache_path(curve: Curve) -> Path | None:
    root = os.environ.get(CACHE_DIR_ENV)
    if not root:
        return None
    return Path(root) / f"{curve.key()}.csv"


def load_cache(path: str | os.PathLike, curve: Curve) -> dict[int, PrimeLocalData]:
    path = Path(path)
    if not path.exists():
        return {}
    with path.open(newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != _key_line(curve):
            raise CacheSchemaError(f"{path}: expected header {_key_line(curve)!r}, found {first!r}")
        reader = csv.reader(fh)
        if next(reader, None) != HEADER:
            raise CacheSchemaError(f"{path}: column header must be {','.join(HEADER)}")
        out = {}
        for row in reader:
            if len(row) != len(HEADER):
                raise CacheSchemaError(f"{path}: malformed row {row}")
            p, N1, N2 = (int(v) for v in row[:3])
            # values are recomputed so cached and fresh rows are bit-identical
            rec = PrimeLocalData(p, N1, N2, *normalize(p, N1, N2, curve.genus))
            if [repr(rec.a1), repr(rec.a2), repr(rec.s2)] != row[3:]:
                raise CacheSchemaError(f"{path}: stored values disagree with counts at p={p}")
            out[p] = rec
    return out


def save_cache(path: str | os.PathLike, curve: Curve, rows: Iterable[PrimeLocalData]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="") as fh:
        fh.write(_key_line(curve) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for r in sorted(rows, key=lambda r: r.p):
            writer.writerow([r.p, r.N1, r.N2, repr(r.a1), repr(r.a2), repr(r.s2)])
    os.replace(tmp, path)
