"""Multi-point correlations of sign tables and their finite-N identities.

All correlations average prod_j a(n + h_j) over n in [1, N], reading shifted
indices through the signed extension of the table, so denominators never
depend on the shifts.
"""
from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from ._accum import chunk_bounds, map_ordered, merge
from .averages import AverageKind, check_shift_range, normaliser
from .errors import DomainError, OutOfRangeError
from .sieve import small_primes

MAX_SHIFTS = 16


@dataclass(frozen=True)
class ShiftPattern:
    shifts: tuple[int, ...]

    def __post_init__(self):
        sh = tuple(int(h) for h in self.shifts)
        if not 1 <= len(sh) <= MAX_SHIFTS:
            raise DomainError(f"a shift pattern needs 1..{MAX_SHIFTS} shifts, got {len(sh)}")
        object.__setattr__(self, "shifts", sh)

    @classmethod
    def parse(cls, text: str) -> "ShiftPattern":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t != ""))

    @classmethod
    def of(cls, pattern: "ShiftPattern | Iterable[int]") -> "ShiftPattern":
        return pattern if isinstance(pattern, ShiftPattern) else cls(tuple(pattern))

    @property
    def length(self) -> int:
        return len(self.shifts)

    @property
    def reach(self) -> int:
        return max(abs(h) for h in self.shifts)

    def dilated(self, p: int) -> "ShiftPattern":
        return ShiftPattern(tuple(p * h for h in self.shifts))

    def __str__(self) -> str:
        return ",".join(map(str, self.shifts))


@dataclass(frozen=True)
class PrimeDilationSpec:
    """Truncated average over primes.

    ``uniform`` weighs every prime p <= P0 by 1/pi(P0).  ``dyadic`` keeps the
    block P0/2 <= p < P0 with weights proportional to 1/p.
    """

    prime_cutoff: int
    weighting: str = "uniform"

    def __post_init__(self):
        if self.prime_cutoff < 2:
            raise DomainError("prime cutoff must be at least 2")
        if self.weighting not in ("uniform", "dyadic"):
            raise DomainError(f"unknown prime weighting {self.weighting!r}")
        if not self.weights():
            raise DomainError(f"no primes carry weight for cutoff {self.prime_cutoff}")

    @cached_property
    def prime_list(self) -> tuple[int, ...]:
        return tuple(int(p) for p in small_primes(self.prime_cutoff))

    def weights(self) -> dict[int, Fraction]:
        """Exact normalised weight of each prime that takes part."""
        if self.weighting == "uniform":
            w = Fraction(1, len(self.prime_list))
            return {p: w for p in self.prime_list}
        block = [p for p in self.prime_list if 2 * p >= self.prime_cutoff and p < self.prime_cutoff]
        total = sum(Fraction(1, p) for p in block)
        return {p: Fraction(1, p) / total for p in block}

    def prime_hash(self) -> str:
        return hashlib.sha256(",".join(map(str, self.prime_list)).encode()).hexdigest()


@dataclass(frozen=True)
class CorrValue:
    value: float
    N: int
    pattern: ShiftPattern
    kind: AverageKind
    dilation: PrimeDilationSpec | None = None


def _product_sum(vals: np.ndarray, shifts: Sequence[int], N: int, logw: bool) -> float:
    sh = np.array(shifts, dtype=np.int64)
    parts = [K.product_chunk(vals, sh, logw, lo, hi) for lo, hi in chunk_bounds(1, N + 1)]
    return merge(parts)


def _raw_corr(table, shifts: Sequence[int], N: int, kind: AverageKind, workers: int = 1) -> float:
    vals = table.values
    sh = np.array(shifts, dtype=np.int64)
    jobs = [(vals, sh, kind.logw, lo, hi) for lo, hi in chunk_bounds(1, N + 1)]
    return merge(map_ordered(K.product_chunk, jobs, workers)) / normaliser(kind, N)


def multi_corr(table, pattern, N: int, kind: AverageKind | str = AverageKind.LOGARITHMIC,
               workers: int = 1) -> CorrValue:
    """Finite-N average of prod_j a(n + h_j) over 1 <= n <= N."""
    pattern = ShiftPattern.of(pattern)
    kind = AverageKind.parse(kind)
    normaliser(kind, N)
    check_shift_range(table, pattern.shifts, N)
    return CorrValue(_raw_corr(table, pattern.shifts, N, kind, workers), N, pattern, kind)


def _exact_weighted_mean(values: dict[int, float], weights: dict[int, Fraction]) -> float:
    # exact rational accumulation: equal per-prime values average to themselves
    return float(sum(Fraction(values[p]) * w for p, w in weights.items()))


def prime_dilated_corr(table, pattern, N: int, kind: AverageKind | str, dil: PrimeDilationSpec,
                       workers: int = 1) -> CorrValue:
    """Weighted mean over primes p of the correlation with shifts p * h_j."""
    pattern = ShiftPattern.of(pattern)
    kind = AverageKind.parse(kind)
    normaliser(kind, N)
    weights = dil.weights()
    primes = sorted(weights)
    check_shift_range(table, [primes[-1] * h for h in pattern.shifts], N)
    vals = table.values
    norm = normaliser(kind, N)

    def one(p):
        return _product_sum(vals, [p * h for h in pattern.shifts], N, kind.logw) / norm

    per_prime = dict(zip(primes, map_ordered(one, [(p,) for p in primes], workers)))
    return CorrValue(_exact_weighted_mean(per_prime, weights), N, pattern, kind, dil)


@dataclass(frozen=True)
class TaoCheck:
    direct: float
    dilated: float
    sign: int
    residual: float
    N: int
    pattern: ShiftPattern
    dilation: PrimeDilationSpec


def tao_check(table, pattern, N: int, dil: PrimeDilationSpec, workers: int = 1) -> TaoCheck:
    """Both sides of the prime-dilation identity at finite N, log-averaged."""
    pattern = ShiftPattern.of(pattern)
    kind = AverageKind.LOGARITHMIC
    direct = multi_corr(table, pattern, N, kind, workers).value
    dilated = prime_dilated_corr(table, pattern, N, kind, dil, workers).value
    sign = -1 if pattern.length % 2 else 1
    return TaoCheck(direct, dilated, sign, abs(direct - sign * dilated), N, pattern, dil)


def tao_residual(table, pattern, N: int, dil: PrimeDilationSpec, workers: int = 1) -> float:
    return tao_check(table, pattern, N, dil, workers).residual


# -- cylinder frequencies ---------------------------------------------------

_LETTER_DIGIT = {-1: 0, 0: 1, 1: 2}


@dataclass(frozen=True)
class CylinderPattern:
    """Word eps_{-m} ... eps_m over {-1, 0, +1}."""

    half_width: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.half_width < 0:
            raise DomainError("half width must be nonnegative")
        letters = tuple(int(e) for e in self.letters)
        if len(letters) != 2 * self.half_width + 1:
            raise DomainError(f"word length must be {2 * self.half_width + 1}, got {len(letters)}")
        if any(e not in _LETTER_DIGIT for e in letters):
            raise DomainError("letters must lie in {-1, 0, 1}")
        object.__setattr__(self, "letters", letters)

    def letter(self, j: int) -> int:
        return self.letters[j + self.half_width]

    @property
    def code(self) -> int:
        c = 0
        for e in self.letters:
            c = 3 * c + _LETTER_DIGIT[e]
        return c

    @classmethod
    def from_code(cls, m: int, code: int) -> "CylinderPattern":
        digits = []
        for _ in range(2 * m + 1):
            code, d = divmod(code, 3)
            digits.append(d - 1)
        return cls(m, tuple(reversed(digits)))

    @classmethod
    def all(cls, m: int) -> list["CylinderPattern"]:
        return [cls(m, w) for w in itertools.product((-1, 0, 1), repeat=2 * m + 1)]


@dataclass(frozen=True)
class CylinderDistribution:
    """Normalised frequencies of all windows a(n-m..n+m), n <= N.

    ``frequencies`` sum to 1; ``mass`` is the average of the constant 1
    under ``kind`` (1 for Cesaro, H_N / log N for log averages), so
    ``mass * frequencies`` are the raw averages of the indicators.
    """

    half_width: int
    N: int
    kind: AverageKind
    frequencies: np.ndarray
    mass: float

    def __getitem__(self, cyl: CylinderPattern) -> float:
        if cyl.half_width != self.half_width:
            raise DomainError("cylinder half width does not match the distribution")
        return float(self.frequencies[cyl.code])


def _merge_arrays(parts: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    s = np.zeros_like(parts[0][0])
    c = np.zeros_like(s)
    for ps, pc in parts:
        for x in (ps, pc):
            t = s + x
            big = np.abs(s) >= np.abs(x)
            c += np.where(big, (s - t) + x, (x - t) + s)
            s = t
    return s + c


def cylinder_distribution(table, m: int, N: int, kind: AverageKind | str = AverageKind.LOGARITHMIC,
                          workers: int = 1) -> CylinderDistribution:
    kind = AverageKind.parse(kind)
    norm = normaliser(kind, N)
    if m < 0:
        raise DomainError("half width must be nonnegative")
    if m > 6:
        raise DomainError("half width above 6 gives more than 3^13 cylinders")
    if N + m > table.upper_bound:
        raise OutOfRangeError(f"N + m = {N + m} exceeds table bound {table.upper_bound}")
    bins = 3 ** (2 * m + 1)
    vals = table.values

    def job(lo, hi):
        s = np.zeros(bins)
        c = np.zeros(bins)
        K.window_codes_chunk(vals, m, lo, hi, s, c, kind.logw)
        return s, c

    raw = _merge_arrays(map_ordered(job, chunk_bounds(1, N + 1), workers))
    total = math.fsum(raw)
    return CylinderDistribution(m, N, kind, raw / total, total / norm)


def cylinder_frequency(table, cyl: CylinderPattern, N: int,
                       kind: AverageKind | str = AverageKind.LOGARITHMIC, workers: int = 1) -> float:
    """Density of n <= N with a(n + j) = eps_j for all |j| <= m."""
    return cylinder_distribution(table, cyl.half_width, N, kind, workers)[cyl]


def reconstruct_corr(dist: CylinderDistribution, pattern) -> float:
    """Correlation rebuilt as mass * sum over cylinders of freq * prod_j eps_{h_j}."""
    pattern = ShiftPattern.of(pattern)
    m = dist.half_width
    if pattern.reach > m:
        raise DomainError(f"shifts reach {pattern.reach}, beyond cylinder half width {m}")
    words = np.array(list(itertools.product((-1, 0, 1), repeat=2 * m + 1)), dtype=np.int64)
    sign = np.ones(len(words), dtype=np.int64)
    for h in pattern.shifts:
        sign *= words[:, h + m]
    nz = sign != 0
    return dist.mass * math.fsum(dist.frequencies[nz] * sign[nz])


def correspondence_check(table, pattern, N: int, kind: AverageKind | str = AverageKind.LOGARITHMIC,
                         m: int | None = None, workers: int = 1) -> float:
    """|cylinder reconstruction - direct correlation|."""
    pattern = ShiftPattern.of(pattern)
    m = pattern.reach if m is None else m
    if m < pattern.reach:
        raise DomainError(f"half width {m} is smaller than the shift reach {pattern.reach}")
    dist = cylinder_distribution(table, m, N, kind, workers)
    direct = multi_corr(table, pattern, N, kind, workers).value
    return abs(reconstruct_corr(dist, pattern) - direct)


# -- Gowers norms -----------------------------------------------------------

def _u2_fourth(f: np.ndarray) -> np.ndarray:
    """||f||_{U^2}^4 = sum_xi |f^(xi)|^4 along the last axis."""
    fh = np.fft.fft(f, axis=-1) / f.shape[-1]
    return np.sum(np.abs(fh) ** 4, axis=-1)


def _power_sum(f: np.ndarray, k: int, block: int = 256) -> float:
    """sum over h in (Z/N)^(k-2) of ||Delta_h f||_{U^2}^4, exactly."""
    N = f.shape[0]
    if k == 2:
        return float(_u2_fourth(f))
    total = 0.0
    idx = np.arange(N)
    for h0 in range(0, N, block):
        hs = np.arange(h0, min(h0 + block, N))
        d = f[(idx[None, :] + hs[:, None]) % N] * np.conj(f)[None, :]
        if k == 3:
            total += math.fsum(_u2_fourth(d))
        else:
            total += math.fsum(_power_sum(row, k - 1) for row in d)
    return total


def gowers_norm(segment: Sequence[complex] | np.ndarray, k: int, samples: int | None = None,
                seed: int = 0) -> float:
    """Gowers U^k norm of ``segment`` viewed as a function on Z/NZ.

    Uses ||f||_{U^k}^{2^k} = E_h ||Delta_h f||_{U^{k-1}}^{2^{k-1}} down to U^2,
    which is evaluated exactly through the Fourier identity.  With
    ``samples`` set (and always for k = 4 when N > 1000), the outer
    difference tuples are drawn at random from a seeded generator.
    """
    f = np.asarray(segment, dtype=np.complex128)
    N = f.shape[0]
    if k < 1:
        raise DomainError("Gowers norms are defined for k >= 1")
    if k > 4:
        raise DomainError("k above 4 is not supported")
    if N < 2:
        raise DomainError("segment needs at least 2 points")
    if k == 1:
        return abs(f.mean())
    if k == 4 and samples is None and N > 1000:
        samples = 4096
    if samples is None or k == 2:
        val = _power_sum(f, k) / N ** (k - 2)
    else:
        rng = np.random.default_rng(seed)
        hs = rng.integers(0, N, size=(samples, k - 2))
        idx = np.arange(N)
        acc = []
        for h in hs:
            g = f
            for step in h:
                g = g[(idx + step) % N] * np.conj(g)
            acc.append(float(_u2_fourth(g)))
        val = math.fsum(acc) / samples
    return max(val, 0.0) ** (1.0 / 2 ** k)


def gowers_norm_direct(segment, k: int) -> float:
    """Brute-force cube average over (x, h_1..h_k); O(N^(k+1)), for checking."""
    f = np.asarray(segment, dtype=np.complex128)
    N = f.shape[0]
    if k < 1:
        raise DomainError("Gowers norms are defined for k >= 1")
    total = 0j
    x = np.arange(N)
    for hs in itertools.product(range(N), repeat=k):
        prod = np.ones(N, dtype=np.complex128)
        for omega in itertools.product((0, 1), repeat=k):
            shift = sum(w * h for w, h in zip(omega, hs))
            v = f[(x + shift) % N]
            prod *= np.conj(v) if sum(omega) % 2 else v
        total += prod.sum()
    val = (total / N ** (k + 1)).real
    return max(val, 0.0) ** (1.0 / 2 ** k)
