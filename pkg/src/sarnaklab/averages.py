"""Cesaro and logarithmic averages of bounded sequences.

``E_{n<=N} a(n) = (1/N) sum a(n)`` and ``E^log_{n<=N} a(n) = (1/log N) sum a(n)/n``.
Note that the logarithmic normalisation is ``log N`` and not the harmonic
number, so the log-average of the constant sequence 1 is ``H_N / log N``.

A sequence is given either as an array holding a(1), a(2), ... or as a
vectorised callable mapping an ``int64`` array of indices to values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from . import _kernels as K
from ._accum import CHUNK, chunk_bounds, map_ordered, merge
from .errors import DomainError, OutOfRangeError

SequenceLike = Union[np.ndarray, Sequence[complex], Callable[[np.ndarray], np.ndarray]]


class AverageKind(enum.Enum):
    CESARO = "cesaro"
    LOGARITHMIC = "log"

    @classmethod
    def parse(cls, s: "str | AverageKind") -> "AverageKind":
        if isinstance(s, AverageKind):
            return s
        key = s.strip().lower()
        aliases = {"cesaro": cls.CESARO, "c": cls.CESARO, "log": cls.LOGARITHMIC,
                   "logarithmic": cls.LOGARITHMIC}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown averaging kind {s!r}") from None

    @property
    def logw(self) -> bool:
        return self is AverageKind.LOGARITHMIC


def normaliser(kind: AverageKind, N: int) -> float:
    if kind is AverageKind.LOGARITHMIC:
        if N < 2:
            raise DomainError("logarithmic average needs N >= 2")
        return math.log(N)
    if N < 1:
        raise DomainError("average needs N >= 1")
    return float(N)


def to_fixed(x: float | Fraction) -> int:
    """Nearest point of Z / 2^64 to ``x`` mod 1, as an integer in [0, 2^64)."""
    f = Fraction(x) % 1
    return round(f * (1 << 64)) % (1 << 64)


def convergents(x: float | Fraction, count: int = 12) -> list[Fraction]:
    """Continued-fraction convergents of the exact value of ``x``."""
    f = Fraction(x)
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    for _ in range(count):
        a = math.floor(f)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
        if f == a:
            break
        f = 1 / (f - a)
    return out


@dataclass(frozen=True)
class WeightSpec:
    """Phase weight e(P(n)), P(n) = sum_k coefficients[k] n^k mod 1.

    ``kind`` is ``"unit"`` (weight 1), ``"linear"`` (P(n) = alpha n) or
    ``"polynomial"``.  Coefficients are reduced to [0, 1); the phase is then
    evaluated exactly on the 2^-64 grid, so the only approximation is the
    double representing each coefficient.
    """

    kind: str = "unit"
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("unit", "linear", "polynomial"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.kind != "unit" and not self.coefficients:
            raise DomainError("phase weights need at least one coefficient")
        object.__setattr__(self, "coefficients", tuple(float(c) % 1.0 for c in self.coefficients))

    @classmethod
    def unit(cls) -> "WeightSpec":
        return cls("unit")

    @classmethod
    def linear(cls, alpha: float) -> "WeightSpec":
        return cls("linear", (alpha,))

    @classmethod
    def polynomial(cls, coefficients: Sequence[float]) -> "WeightSpec":
        return cls("polynomial", tuple(coefficients))

    @property
    def alpha(self) -> float:
        if self.kind != "linear":
            raise DomainError("only linear weights have a single rotation number")
        return self.coefficients[0]

    def fixed_coefficients(self) -> np.ndarray:
        """Coefficients of n^0, n^1, ... on Z / 2^64."""
        if self.kind == "unit":
            return np.zeros(1, dtype=np.uint64)
        cs = (0.0,) + self.coefficients if self.kind == "linear" else self.coefficients
        return np.array([to_fixed(c) for c in cs], dtype=np.uint64)

    def convergents(self, count: int = 12) -> list[Fraction]:
        return convergents(self.alpha, count)


@dataclass(frozen=True)
class AvgResult:
    value: complex
    N: int
    kind: AverageKind
    term_count: int

    def __abs__(self) -> float:
        return abs(self.value)


def _chunk_values(seq: SequenceLike, lo: int, hi: int) -> np.ndarray:
    if callable(seq):
        v = np.asarray(seq(np.arange(lo, hi, dtype=np.int64)))
        if v.shape == ():
            v = np.full(hi - lo, v)
    else:
        v = np.asarray(seq[lo - 1 : hi - 1])
    if v.shape != (hi - lo,):
        raise OutOfRangeError(f"sequence does not cover indices [{lo}, {hi})")
    return v


def _sum_parts(v: np.ndarray, n0: int, logw: bool) -> tuple[float, float, float, float]:
    if np.iscomplexobj(v):
        sr, cr = K.real_sum_chunk(np.ascontiguousarray(v.real, dtype=np.float64), n0, logw)
        si, ci = K.real_sum_chunk(np.ascontiguousarray(v.imag, dtype=np.float64), n0, logw)
        return sr, cr, si, ci
    sr, cr = K.real_sum_chunk(np.ascontiguousarray(v, dtype=np.float64), n0, logw)
    return sr, cr, 0.0, 0.0


def combine(parts: Sequence[tuple[float, float, float, float]]) -> complex:
    re = merge([(p[0], p[1]) for p in parts])
    im = merge([(p[2], p[3]) for p in parts])
    return complex(re, im)


def average(seq: SequenceLike, N: int, kind: AverageKind | str = AverageKind.CESARO,
            workers: int = 1) -> AvgResult:
    kind = AverageKind.parse(kind)
    norm = normaliser(kind, N)

    def job(lo, hi):
        return _sum_parts(_chunk_values(seq, lo, hi), lo, kind.logw)

    parts = map_ordered(job, chunk_bounds(1, N + 1), workers)
    return AvgResult(combine(parts) / norm, N, kind, N)


def log_average_by_partial_summation(seq: SequenceLike, N: int) -> AvgResult:
    """Logarithmic average computed from running Cesaro sums.

    Uses sum_{n<=N} a(n)/n = S(N)/N + sum_{n<N} S(n) / (n(n+1)).  The running
    sum makes this inherently sequential.
    """
    normaliser(AverageKind.LOGARITHMIC, N)
    re_state = (0.0, 0.0, 0.0, 0.0)
    im_state = (0.0, 0.0, 0.0, 0.0)
    for lo, hi in chunk_bounds(1, N + 1):
        v = _chunk_values(seq, lo, hi)
        re_state = K.abel_chunk(np.ascontiguousarray(v.real, dtype=np.float64), lo, N, *re_state)
        if np.iscomplexobj(v):
            im_state = K.abel_chunk(np.ascontiguousarray(v.imag, dtype=np.float64), lo, N, *im_state)

    def finish(state):
        Ss, Sc, Ts, Tc = state
        return merge([(Ts, Tc), ((Ss + Sc) / N, 0.0)])

    value = complex(finish(re_state), finish(im_state)) / math.log(N)
    return AvgResult(value, N, AverageKind.LOGARITHMIC, N)


def check_shift_range(table, shifts: Sequence[int], N: int) -> None:
    if not shifts:
        if N > table.upper_bound:
            raise OutOfRangeError(f"N = {N} exceeds table bound {table.upper_bound}")
        return
    reach = max(max(abs(1 + h), abs(N + h)) for h in shifts)
    if reach > table.upper_bound:
        raise OutOfRangeError(
            f"shifted index reaches {reach}, beyond table bound {table.upper_bound}")


def weighted_average(table, weight: WeightSpec, pattern, N: int,
                     kind: AverageKind | str = AverageKind.CESARO, workers: int = 1) -> AvgResult:
    """Average of e(P(n)) * prod_j a(n + h_j) over n <= N.

    ``pattern`` is a ``ShiftPattern``, a sequence of shifts, or ``None`` for
    the empty product.
    """
    kind = AverageKind.parse(kind)
    norm = normaliser(kind, N)
    shifts = tuple(getattr(pattern, "shifts", pattern) or ())
    check_shift_range(table, shifts, N)
    vals = table.values
    sh = np.array(shifts, dtype=np.int64)
    coeffs = weight.fixed_coefficients()
    use_phase = weight.kind != "unit"
    jobs = [(vals, sh, coeffs, use_phase, kind.logw, lo, hi) for lo, hi in chunk_bounds(1, N + 1)]
    parts = map_ordered(K.weighted_product_chunk, jobs, workers)
    return AvgResult(combine(parts) / norm, N, kind, N)


__all__ = [
    "AverageKind", "WeightSpec", "AvgResult", "average", "log_average_by_partial_summation",
    "weighted_average", "normaliser", "to_fixed", "convergents", "CHUNK",
]
