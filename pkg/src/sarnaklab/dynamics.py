"""Torus rotations, character products and the block skew sequence.

Rotation numbers and start points are placed on the fixed-point torus
Z / 2^64 (see ``averages.to_fixed``).  Every character phase is then an exact
``uint64`` computation, so two averages whose summands agree mathematically
agree bit for bit, and the geometric closed forms below evaluate the same
exact phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit

from . import _kernels as K
from ._accum import chunk_bounds, merge, nadd
from .averages import AverageKind, average, normaliser, to_fixed
from .errors import DomainError, OutOfRangeError
from .sieve import small_primes

M64 = 1 << 64

PRESETS = {
    "golden": (math.sqrt(5.0) - 1.0) / 2.0,
    "sqrt2m1": math.sqrt(2.0) - 1.0,
}


def parse_alpha(text: str | float) -> float:
    if isinstance(text, str) and text.strip().lower() in PRESETS:
        return PRESETS[text.strip().lower()]
    return float(text)


@dataclass(frozen=True)
class RotationSystem:
    alpha: float
    start: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha) % 1.0)
        object.__setattr__(self, "start", float(self.start) % 1.0)

    @property
    def alpha_fixed(self) -> int:
        return to_fixed(self.alpha)

    @property
    def start_fixed(self) -> int:
        return to_fixed(self.start)


@dataclass(frozen=True)
class CharacterProduct:
    """prod_j f_j(x + n j alpha) with f_j(t) = e(c_j t), given as (j, c_j) pairs."""

    terms: tuple[tuple[int, int], ...]

    def __post_init__(self):
        terms = tuple((int(j), int(c)) for j, c in self.terms)
        if not terms:
            raise DomainError("a character product needs at least one term")
        if len({j for j, _ in terms}) != len(terms):
            raise DomainError("positions must be distinct")
        object.__setattr__(self, "terms", terms)

    @property
    def weight(self) -> int:
        """sum_j j c_j, the frequency of the n-dependence."""
        return sum(j * c for j, c in self.terms)

    @property
    def frequency_sum(self) -> int:
        return sum(c for _, c in self.terms)

    def _arrays(self) -> tuple[np.ndarray, np.ndarray]:
        pos = np.array([j % M64 for j, _ in self.terms], dtype=np.uint64)
        freq = np.array([c % M64 for _, c in self.terms], dtype=np.uint64)
        return pos, freq


@njit(inline="always")
def _char_phase(B, A, pos, freq, m):
    u = np.uint64(0)
    for t in range(pos.shape[0]):
        u += freq[t] * (B + m * pos[t] * A)
    return u


@njit(nogil=True, cache=True)
def _progression_sum(B, A, pos, freq, step, offset, lo, hi):
    """sum over n in [lo, hi) of prod_j e(c_j (start + (step n + offset) j alpha))."""
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    for n in range(lo, hi):
        m = step * np.uint64(n) + offset
        re, im = K.unit_phase(_char_phase(B, A, pos, freq, m))
        sr, cr = nadd(sr, cr, re)
        si, ci = nadd(si, ci, im)
    return sr, cr, si, ci


@njit(nogil=True, cache=True)
def _list_sum(B, A, pos, freq, ms):
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    for i in range(ms.shape[0]):
        re, im = K.unit_phase(_char_phase(B, A, pos, freq, ms[i]))
        sr, cr = nadd(sr, cr, re)
        si, ci = nadd(si, ci, im)
    return sr, cr, si, ci


def _merge_complex(parts) -> complex:
    return complex(merge([(p[0], p[1]) for p in parts]), merge([(p[2], p[3]) for p in parts]))


def _progression_average(sys: RotationSystem, prod: CharacterProduct, step: int, offset: int,
                         N: int) -> complex:
    pos, freq = prod._arrays()
    B, A = np.uint64(sys.start_fixed), np.uint64(sys.alpha_fixed)
    st, off = np.uint64(step % M64), np.uint64(offset % M64)
    parts = [_progression_sum(B, A, pos, freq, st, off, lo, hi) for lo, hi in chunk_bounds(1, N + 1)]
    return _merge_complex(parts) / N


def ap_average(sys: RotationSystem, prod: CharacterProduct, r: int, N: int) -> complex:
    """(1/N) sum_{n<=N} prod_j e(c_j (start + r n j alpha)), summed term by term."""
    if r < 1:
        raise DomainError("dilation must be a positive integer")
    if N < 1:
        raise DomainError("N must be positive")
    return _progression_average(sys, prod, r, 0, N)


def _e_fixed(u: int, scale_bits: int = 64) -> complex:
    t = 2.0 * math.pi * (u / (1 << scale_bits))
    return complex(math.cos(t), math.sin(t))


@dataclass(frozen=True)
class GeometricForm:
    value: complex
    bound: float  # 1 / (N |sin(pi theta)|), or 1 when the phase is constant
    constant: bool


def geometric_average(prefix: int, theta: int, N: int, first: int = 1) -> GeometricForm:
    """Closed form of (1/N) sum_{n=first}^{first+N-1} e(prefix + n theta), phases on Z / 2^64."""
    theta %= M64
    if theta == 0:
        return GeometricForm(_e_fixed(prefix % M64), 1.0, True)
    # sum = e(prefix + first theta) e((N-1) theta / 2) sin(pi N theta) / sin(pi theta),
    # half phases taken exactly on Z / 2^65 with theta in [0, 1)
    lead = (2 * ((prefix + first * theta) % M64) + (N - 1) * theta) % (2 * M64)
    num = math.sin(math.pi * ((N * theta) % (2 * M64)) / M64)
    den = math.sin(math.pi * theta / M64)
    value = _e_fixed(lead, 65) * (num / (N * den))
    return GeometricForm(value, 1.0 / (N * abs(den)), False)


def ap_average_closed_form(sys: RotationSystem, prod: CharacterProduct, r: int, N: int) -> GeometricForm:
    prefix = (prod.frequency_sum * sys.start_fixed) % M64
    theta = (r * prod.weight * sys.alpha_fixed) % M64
    return geometric_average(prefix, theta, N)


@dataclass(frozen=True)
class PrimeAPResult:
    prime_side: complex
    residue_side: complex
    difference: float
    prime_cutoff: int
    d: int
    N: int


def residue_classes(d: int) -> list[int]:
    """k in {1, ..., d} with gcd(k, d) = 1 (for d = 1 this is {1})."""
    return [k for k in range(1, d + 1) if math.gcd(k, d) == 1]


def prime_ap_average(sys: RotationSystem, prod: CharacterProduct, P0: int, d: int = 1,
                     N: int = 10**6) -> PrimeAPResult:
    """Prime-step average against its residue-class form.

    The prime side averages prod_j e(c_j (start + p j alpha)) over p <= P0; the
    residue side averages the progressions (n d + k), n <= N, over reduced
    residues k mod d.
    """
    if P0 < 2:
        raise DomainError("prime cutoff must be at least 2")
    if d < 1:
        raise DomainError("d must be positive")
    pos, freq = prod._arrays()
    B, A = np.uint64(sys.start_fixed), np.uint64(sys.alpha_fixed)
    primes = small_primes(P0).astype(np.uint64)
    prime_side = _merge_complex([_list_sum(B, A, pos, freq, primes)]) / len(primes)
    ks = residue_classes(d)
    residue_side = sum(_progression_average(sys, prod, d, k, N) for k in ks) / len(ks)
    return PrimeAPResult(prime_side, residue_side, abs(prime_side - residue_side), P0, d, N)


# -- skew sequence ----------------------------------------------------------

@dataclass(frozen=True)
class SkewSequenceSpec:
    """y0(n) = e(n alpha_k) on the block k^2 <= n < (k+1)^2; y0(n) = 1 for n <= 0.

    The default schedule is alpha_k = k beta mod 1; ``schedule`` overrides it
    with any map k -> alpha_k (not checked for equidistribution).
    """

    beta: float
    length: int
    schedule: Callable[[int], float] | None = None

    def __post_init__(self):
        if self.length < 1:
            raise DomainError("length must be positive")

    def alpha_fixed(self, ks: np.ndarray) -> np.ndarray:
        if self.schedule is None:
            return ks.astype(np.uint64) * np.uint64(to_fixed(self.beta))
        uniq = np.unique(ks)
        table = {int(k): to_fixed(self.schedule(int(k))) for k in uniq}
        return np.array([table[int(k)] for k in ks], dtype=np.uint64)


def _block_index(n: np.ndarray) -> np.ndarray:
    k = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    k -= (k * k > n).astype(np.int64)
    k += ((k + 1) * (k + 1) <= n).astype(np.int64)
    return k


def skew_values(spec: SkewSequenceSpec, n: np.ndarray) -> np.ndarray:
    n = np.asarray(n, dtype=np.int64)
    out = np.ones(n.shape, dtype=np.complex128)
    pos = n >= 1
    if pos.any():
        npos = n[pos]
        u = npos.astype(np.uint64) * spec.alpha_fixed(_block_index(npos))
        t = 2.0 * np.pi * (u.astype(np.float64) * 2.0 ** -64)
        out[pos] = np.cos(t) + 1j * np.sin(t)
    return out


def skew_sequence(spec: SkewSequenceSpec) -> np.ndarray:
    """y0(1), ..., y0(N)."""
    return skew_values(spec, np.arange(1, spec.length + 1))


@dataclass(frozen=True)
class ProbeResult:
    value: complex
    N: int
    kind: AverageKind
    label: str = "exploratory: no theoretical prediction"


def skew_liouville_probe(spec: SkewSequenceSpec, table, N: int,
                         kind: AverageKind | str = AverageKind.LOGARITHMIC) -> ProbeResult:
    """Average of y0(n) a(n), n <= N, for a sign table a."""
    kind = AverageKind.parse(kind)
    if N > spec.length or N > table.upper_bound:
        raise OutOfRangeError("N exceeds the sequence length or the table bound")
    vals = table.values
    res = average(lambda n: skew_values(spec, n) * vals[n], N, kind)
    return ProbeResult(res.value, N, kind)


# -- stationarity -----------------------------------------------------------

@dataclass(frozen=True)
class IndexedSequence:
    """Finite real sequence with ``values[i] = a(first_index + i)``."""

    values: np.ndarray
    first_index: int = 1

    @property
    def last_index(self) -> int:
        return self.first_index + len(self.values) - 1


@njit(nogil=True, cache=True)
def _float_product_sum(vals, first, shifts, logw, lo, hi):
    s = 0.0
    c = 0.0
    for n in range(lo, hi):
        p = 1.0
        for j in range(shifts.shape[0]):
            p *= vals[n + shifts[j] - first]
        if logw:
            p = p / n
        s, c = nadd(s, c, p)
    return s, c


@dataclass(frozen=True)
class StationarityResidual:
    r: int
    m: int
    N: int
    residual: float
    plain: float
    dilated: float
    kind: AverageKind


def _window_average(seq, shifts: Sequence[int], N: int, kind: AverageKind) -> float:
    sh = np.array(shifts, dtype=np.int64)
    bounds = chunk_bounds(1, N + 1)
    if isinstance(seq, IndexedSequence):
        lo_need = 1 + min(shifts)
        hi_need = N + max(shifts)
        if lo_need < seq.first_index or hi_need > seq.last_index:
            raise OutOfRangeError(
                f"windows need indices [{lo_need}, {hi_need}], sequence covers "
                f"[{seq.first_index}, {seq.last_index}]")
        vals = np.ascontiguousarray(seq.values, dtype=np.float64)
        parts = [_float_product_sum(vals, seq.first_index, sh, kind.logw, lo, hi) for lo, hi in bounds]
    else:
        reach = max(max(abs(1 + h), abs(N + h)) for h in shifts)
        if reach > seq.upper_bound:
            raise OutOfRangeError(f"windows reach {reach}, beyond table bound {seq.upper_bound}")
        parts = [K.product_chunk(seq.values, sh, kind.logw, lo, hi) for lo, hi in bounds]
    return merge(parts) / normaliser(kind, N)


def stationarity_residual(seq, r: int, m: int, N: int,
                          kind: AverageKind | str = AverageKind.LOGARITHMIC,
                          d: int | None = None) -> StationarityResidual:
    """|avg_n prod_{|j|<=m} a(n+j) - avg_n prod_{|j|<=m} a(n+rj)|.

    ``seq`` is a sign table (read through the signed extension) or an
    ``IndexedSequence``.  With ``d`` given, r must be 1 mod d.
    """
    kind = AverageKind.parse(kind)
    if r < 1:
        raise DomainError("dilation must be a positive integer")
    if m < 0:
        raise DomainError("half width must be nonnegative")
    if d is not None and r % d != 1 % d:
        raise DomainError(f"r = {r} is not 1 mod {d}")
    plain = _window_average(seq, list(range(-m, m + 1)), N, kind)
    dilated = plain if r == 1 else _window_average(seq, [r * j for j in range(-m, m + 1)], N, kind)
    return StationarityResidual(r, m, N, abs(plain - dilated), plain, dilated, kind)
