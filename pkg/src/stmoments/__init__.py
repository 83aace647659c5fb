"""Sato-Tate moments of abelian varieties: point counts, group models, Albert-type algebra."""

from .albert import AlbertRecord, WedderburnDecomposition, dims_from_record, invariant, wedderburn_from_records
from .curves import Curve, PrimeLocalData, count_points, count_points_ext, good_primes, normalize
from .haar import BUILTIN_SPECS, STGroupSpec, exact_moments, fs_indicator
from .moments import MomentAccumulator, accumulate, estimate, rank_report
from .primes import primes_up_to, quadratic_character, quadratic_character_ext

__version__ = "0.1.0"

__all__ = [
    "AlbertRecord",
    "WedderburnDecomposition",
    "dims_from_record",
    "invariant",
    "wedderburn_from_records",
    "Curve",
    "PrimeLocalData",
    "count_points",
    "count_points_ext",
    "good_primes",
    "normalize",
    "BUILTIN_SPECS",
    "STGroupSpec",
    "exact_moments",
    "fs_indicator",
    "MomentAccumulator",
    "accumulate",
    "estimate",
    "rank_report",
    "primes_up_to",
    "quadratic_character",
    "quadratic_character_ext",
]
