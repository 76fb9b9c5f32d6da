"""Block complexity and special words of +-1 sequences.

A word of length n <= 64 starting at position i is packed into a ``uint64``
key whose bit t is 1 iff a(i + t) = -1.  Keys are exact encodings, so
distinct keys are distinct words and no collision check is ever needed.
Lengths up to ``BITMAP_MAX`` are tracked in dense occurrence bitmaps; longer
ones in sorted key arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._accum import map_ordered
from .errors import CapacityError, DomainError
from .sieve import LiouvilleTable

MAX_WORD = 64
BITMAP_MAX = 24


@njit(nogil=True, cache=True)
def _mark_bitmaps(b, start, stop, nmax, seen, offsets):
    """Mark every word of length 1..nmax starting in [start, stop)."""
    L = b.shape[0]
    key = np.uint64(0)
    for t in range(nmax):
        if start + t < L:
            key |= np.uint64(b[start + t]) << np.uint64(t)
    top = np.uint64(nmax - 1)
    for i in range(start, stop):
        room = L - i
        for n in range(1, nmax + 1):
            if n > room:
                break
            mask = (np.uint64(1) << np.uint64(n)) - np.uint64(1)
            seen[offsets[n] + np.int64(key & mask)] = 1
        key >>= np.uint64(1)
        if i + nmax < L:
            key |= np.uint64(b[i + nmax]) << top


@njit(nogil=True, cache=True)
def _keys_of_length(b, n):
    L = b.shape[0]
    out = np.empty(L - n + 1, dtype=np.uint64)
    key = np.uint64(0)
    for t in range(n):
        key |= np.uint64(b[t]) << np.uint64(t)
    out[0] = key
    top = np.uint64(n - 1)
    for i in range(1, L - n + 1):
        key >>= np.uint64(1)
        key |= np.uint64(b[i + n - 1]) << top
        out[i] = key
    return out


def _to_bits(source, N: int | None) -> np.ndarray:
    if isinstance(source, LiouvilleTable):
        N = source.upper_bound if N is None else N
        if N > source.upper_bound:
            raise DomainError(f"N = {N} exceeds table bound {source.upper_bound}")
        vals = source.values[1 : N + 1]
    else:
        vals = np.asarray(source)
        if N is not None:
            vals = vals[:N]
    if vals.size and not np.all(np.abs(vals) == 1):
        raise DomainError("block complexity is defined here for +-1 sequences only")
    return (vals < 0).astype(np.uint8)


class WordSets:
    """Occurrence sets of all words of length 1..n_max in a bit sequence."""

    def __init__(self, bits: np.ndarray, n_max: int, workers: int = 1):
        if n_max > MAX_WORD:
            raise CapacityError(f"words are packed into 64 bits; n_max = {n_max} is too long")
        if n_max < 1 or bits.shape[0] < n_max:
            raise DomainError("need 1 <= n_max <= N")
        self.n_max = n_max
        self.length = bits.shape[0]
        small = min(n_max, BITMAP_MAX)
        offsets = np.zeros(small + 1, dtype=np.int64)
        for n in range(2, small + 1):
            offsets[n] = offsets[n - 1] + (1 << (n - 1))
        size = int(offsets[small] + (1 << small))
        L = bits.shape[0]
        step = -(-L // max(workers, 1))

        def job(lo, hi):
            seen = np.zeros(size, dtype=np.uint8)
            _mark_bitmaps(bits, lo, hi, small, seen, offsets)
            return seen

        maps = map_ordered(job, [(lo, min(lo + step, L)) for lo in range(0, L, step)], workers)
        seen = maps[0]
        for other in maps[1:]:
            seen |= other
        self._bitmaps = {n: seen[offsets[n] : offsets[n] + (1 << n)].astype(bool)
                         for n in range(1, small + 1)}
        self._keys = {n: np.unique(_keys_of_length(bits, n)) for n in range(small + 1, n_max + 1)}

    def count(self, n: int) -> int:
        if n in self._bitmaps:
            return int(np.count_nonzero(self._bitmaps[n]))
        return int(self._keys[n].size)

    def words(self, n: int) -> np.ndarray:
        """Sorted keys of the words of length n that occur."""
        if n in self._bitmaps:
            return np.flatnonzero(self._bitmaps[n]).astype(np.uint64)
        return self._keys[n]

    def special(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Keys of right- and left-special words of length n (needs n + 1 <= n_max)."""
        if n + 1 > self.n_max:
            raise DomainError("special words of length n need words of length n + 1")
        ext = self.words(n + 1)
        mask = np.uint64((1 << n) - 1)
        low = ext & mask  # drop last letter
        high = ext >> np.uint64(1)  # drop first letter
        u_r, c_r = np.unique(low, return_counts=True)
        u_l, c_l = np.unique(high, return_counts=True)
        return u_r[c_r == 2], u_l[c_l == 2]


def word_string(key: int, n: int) -> str:
    return "".join("-" if (int(key) >> t) & 1 else "+" for t in range(n))


@dataclass
class BlockComplexityReport:
    scan_bound: int
    max_word_length: int
    counts: dict[int, int]
    ratios: dict[int, float] = field(init=False)

    def __post_init__(self):
        self.ratios = {n: c / n for n, c in self.counts.items()}


@dataclass
class SpecialWordReport:
    word_length: int
    right_special_count: int
    left_special_count: int
    witnesses: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class TrendReport:
    ratios: list[tuple[int, float]]
    nondecreasing: bool
    strictly_increasing: bool


def block_complexity(source, n_max: int, N: int | None = None, workers: int = 1) -> BlockComplexityReport:
    """Count the distinct words a(i+1)...a(i+n), 0 <= i <= N - n, for n <= n_max."""
    if n_max > MAX_WORD:
        raise CapacityError(f"n_max = {n_max} exceeds the {MAX_WORD}-letter cap")
    bits = _to_bits(source, N)
    ws = WordSets(bits, n_max, workers)
    return BlockComplexityReport(len(bits), n_max, {n: ws.count(n) for n in range(1, n_max + 1)})


def superlinear_trend(report: BlockComplexityReport) -> TrendReport:
    """P(n)/n over the computed range, with monotonicity flags.

    This is evidence about the growth of P(n)/n on a finite range, nothing more.
    """
    if not report.counts:
        raise DomainError("empty complexity report")
    rows = sorted(report.ratios.items())
    r = [v for _, v in rows]
    return TrendReport(
        rows,
        all(b >= a for a, b in zip(r, r[1:])),
        all(b > a for a, b in zip(r, r[1:])),
    )


def special_words(source, n: int, N: int | None = None, witness_count: int = 0,
                  workers: int = 1) -> SpecialWordReport:
    """Right- and left-special words of length n.

    u is right special when u+ and u- both occur, left special when +u and
    -u both occur.
    """
    if n + 1 > MAX_WORD:
        raise CapacityError("special words need n + 1 <= 64")
    if n < 1:
        raise DomainError("word length must be positive")
    bits = _to_bits(source, N)
    ws = WordSets(bits, n + 1, workers)
    right, left = ws.special(n)
    wit = {}
    if witness_count:
        wit = {"right": [word_string(k, n) for k in right[:witness_count]],
               "left": [word_string(k, n) for k in left[:witness_count]]}
    return SpecialWordReport(n, int(right.size), int(left.size), wit)
