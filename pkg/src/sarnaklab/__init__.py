"""Finite-N numerical experiments around Liouville and Moebius correlations."""
from __future__ import annotations

__version__ = "0.1.0"

from .averages import AverageKind, WeightSpec, average, log_average_by_partial_summation, weighted_average
from .complexity import block_complexity, special_words, superlinear_trend
from .correlations import (CylinderPattern, PrimeDilationSpec, ShiftPattern, correspondence_check,
                           cylinder_distribution, gowers_norm, multi_corr, prime_dilated_corr,
                           tao_check)
from .sieve import LiouvilleTable, MobiusTable, SieveConfig, TableCache, build_liouville, build_mobius

__all__ = [
    "AverageKind", "WeightSpec", "average", "log_average_by_partial_summation", "weighted_average",
    "block_complexity", "special_words", "superlinear_trend", "CylinderPattern", "PrimeDilationSpec",
    "ShiftPattern", "correspondence_check", "cylinder_distribution", "gowers_norm", "multi_corr",
    "prime_dilated_corr", "tao_check", "LiouvilleTable", "MobiusTable", "SieveConfig", "TableCache",
    "build_liouville", "build_mobius", "__version__",
]
