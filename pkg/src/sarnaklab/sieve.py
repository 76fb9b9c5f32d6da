"""Segmented sieving of the Liouville and Moebius functions.

Tables are built segment by segment: each segment tracks, for every integer
in it, the parity of the prime factors found so far and the product of the
prime powers removed.  Once all primes up to the square root have been
processed, a cofactor different from 1 is a single prime above the square
root.  Memory is O(segment_length + sqrt(N)) on top of the output.

Completed tables store their values bit-packed (1 bit per value for the
Liouville function, 2 bits for the Moebius function) and expose a dense
``int8`` view, indexed by ``n`` with ``values[0] == 0``, for the scanning
kernels elsewhere in the package.
"""
from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal, Union

import numpy as np
from numba import njit

from ._accum import map_ordered
from .errors import (
    CapacityError,
    DomainError,
    HeaderError,
    OutOfRangeError,
    TableFormatError,
    TruncatedError,
    VersionError,
)

MAGIC = b"SRNKSIEV"
FORMAT_VERSION = 1
KIND_CODES = {"lambda": 0, "mobius": 1}
_HEADER = struct.Struct("<8sIBQ")

# 2-bit Moebius codes
_MU_CODE = {0: 0, 1: 1, -1: 2}

Kind = Literal["lambda", "mobius"]


@dataclass(frozen=True)
class SieveConfig:
    segment_length: int = 1 << 16
    worker_count: int = 1
    memory_limit: int = 4 << 30  # bytes

    def __post_init__(self):
        if self.segment_length < 2:
            raise DomainError("segment_length must be at least 2")
        if self.worker_count < 1:
            raise DomainError("worker_count must be at least 1")


def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` in increasing order (plain Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


@njit(nogil=True, cache=True)
def _sieve_segment(lo, hi, primes, want_mobius, out):
    size = hi - lo
    acc = np.ones(size, dtype=np.int64)
    parity = np.zeros(size, dtype=np.uint8)
    squarefree = np.ones(size, dtype=np.uint8)
    top = hi - 1
    for p in primes:
        if p * p > top:
            break
        q = p
        level = 1
        while q <= top:
            first = ((lo + q - 1) // q) * q
            for i in range(first - lo, size, q):
                acc[i] *= p
                parity[i] ^= 1
                if level == 2:
                    squarefree[i] = 0
            if q > top // p:
                break
            q *= p
            level += 1
    for i in range(size):
        if acc[i] != lo + i:
            parity[i] ^= 1
        v = 1 - 2 * np.int8(parity[i])
        if want_mobius and squarefree[i] == 0:
            v = 0
        out[lo + i] = v


def _sieve_dense(N: int, cfg: SieveConfig, want_mobius: bool) -> np.ndarray:
    if N < 1:
        raise CapacityError("table size N must be positive")
    need = (N + 1) + (N + 3) // 4 + 24 * cfg.segment_length * cfg.worker_count
    if need > cfg.memory_limit:
        raise CapacityError(f"building N={N} needs ~{need} bytes, limit is {cfg.memory_limit}")
    out = np.zeros(N + 1, dtype=np.int8)
    primes = small_primes(math.isqrt(N))
    jobs = [
        (lo, min(lo + cfg.segment_length, N + 1), primes, want_mobius, out)
        for lo in range(1, N + 1, cfg.segment_length)
    ]
    map_ordered(_sieve_segment, jobs, cfg.worker_count)
    return out


class _Table:
    kind: Kind

    def __init__(self, upper_bound: int, payload: np.ndarray):
        self.upper_bound = int(upper_bound)
        payload = np.ascontiguousarray(payload, dtype=np.uint8)
        payload.setflags(write=False)
        self.payload = payload

    @cached_property
    def values(self) -> np.ndarray:
        """Dense read-only view: ``values[n]`` for ``0 <= n <= upper_bound``."""
        v = np.zeros(self.upper_bound + 1, dtype=np.int8)
        v[1:] = self._decode()
        v.setflags(write=False)
        return v

    def __getitem__(self, n: int) -> int:
        return value_at(self, n)

    def __len__(self) -> int:
        return self.upper_bound

    def __repr__(self) -> str:
        return f"{type(self).__name__}(upper_bound={self.upper_bound})"


class LiouvilleTable(_Table):
    """lambda(n) for 1 <= n <= N; bit ``n-1`` of the payload is 1 iff lambda(n) = -1."""

    kind = "lambda"

    @property
    def bits(self) -> np.ndarray:
        return self.payload

    @classmethod
    def from_values(cls, vals: np.ndarray) -> "LiouvilleTable":
        """Pack a(1), ..., a(N) (no leading a(0))."""
        vals = np.asarray(vals)
        return cls(len(vals), np.packbits(vals < 0, bitorder="little"))

    def _decode(self) -> np.ndarray:
        b = np.unpackbits(self.payload, count=self.upper_bound, bitorder="little")
        return (1 - 2 * b.astype(np.int8)).astype(np.int8)


class MobiusTable(_Table):
    """mu(n) for 1 <= n <= N in 2-bit codes (00 = 0, 01 = +1, 10 = -1), four per byte."""

    kind = "mobius"

    @property
    def codes(self) -> np.ndarray:
        return self.payload

    @classmethod
    def from_values(cls, vals: np.ndarray) -> "MobiusTable":
        """Pack a(1), ..., a(N) (no leading a(0))."""
        vals = np.asarray(vals, dtype=np.int8)
        n = len(vals)
        codes = np.zeros(-(-n // 4) * 4, dtype=np.uint8)
        codes[:n][vals == 1] = 1
        codes[:n][vals == -1] = 2
        c = codes.reshape(-1, 4)
        packed = c[:, 0] | (c[:, 1] << 2) | (c[:, 2] << 4) | (c[:, 3] << 6)
        return cls(n, packed.astype(np.uint8))

    def _decode(self) -> np.ndarray:
        p = self.payload
        c = np.stack([(p >> s) & 3 for s in (0, 2, 4, 6)], axis=1).reshape(-1)[: self.upper_bound]
        out = np.zeros(self.upper_bound, dtype=np.int8)
        out[c == 1] = 1
        out[c == 2] = -1
        return out


Table = Union[LiouvilleTable, MobiusTable]


def build_liouville(N: int, cfg: SieveConfig | None = None) -> LiouvilleTable:
    """Sieve lambda(n) = (-1)^Omega(n) for 1 <= n <= N."""
    dense = _sieve_dense(N, cfg or SieveConfig(), want_mobius=False)
    return LiouvilleTable.from_values(dense[1:])


def build_mobius(N: int, cfg: SieveConfig | None = None) -> MobiusTable:
    """Sieve mu(n) for 1 <= n <= N."""
    dense = _sieve_dense(N, cfg or SieveConfig(), want_mobius=True)
    return MobiusTable.from_values(dense[1:])


def build_table(kind: Kind, N: int, cfg: SieveConfig | None = None) -> Table:
    if kind == "lambda":
        return build_liouville(N, cfg)
    if kind == "mobius":
        return build_mobius(N, cfg)
    raise DomainError(f"unknown table kind {kind!r}")


def value_at(table: Table, n: int) -> int:
    """Signed-argument lookup: a(-n) = a(n) and a(0) = 0."""
    m = abs(int(n))
    if m > table.upper_bound:
        raise OutOfRangeError(f"|n| = {m} exceeds table bound {table.upper_bound}")
    return int(table.values[m])


def save_table(table: Table, path: str | os.PathLike) -> None:
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, KIND_CODES[table.kind], table.upper_bound)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(table.payload.tobytes())
    os.replace(tmp, path)


def _payload_size(kind_code: int, N: int) -> int:
    return -(-N // 8) if kind_code == 0 else -(-N // 4)


def load_table(path: str | os.PathLike) -> Table:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        if not MAGIC.startswith(raw[:8]):
            raise HeaderError("bad magic bytes")
        raise TruncatedError(f"file holds {len(raw)} bytes, header needs {_HEADER.size}")
    magic, version, kind_code, N = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise HeaderError("bad magic bytes")
    if version != FORMAT_VERSION:
        raise VersionError(f"format version {version}, expected {FORMAT_VERSION}")
    if kind_code not in (0, 1):
        raise HeaderError(f"unknown kind tag {kind_code}")
    if N < 1:
        raise HeaderError("table size must be positive")
    body = raw[_HEADER.size :]
    want = _payload_size(kind_code, N)
    if len(body) < want:
        raise TruncatedError(f"payload holds {len(body)} bytes, expected {want}")
    if len(body) > want:
        raise TableFormatError(f"{len(body) - want} trailing bytes after payload")
    payload = np.frombuffer(body, dtype=np.uint8).copy()
    cls = LiouvilleTable if kind_code == 0 else MobiusTable
    return cls(N, payload)


def default_cache_dir() -> Path:
    return Path(os.environ.get("SARNAK_CACHE_DIR", "cache"))


@dataclass
class TableCache:
    """On-disk table cache keyed by ``(kind, N)``.

    A cached table with a larger bound is not reused for a smaller request;
    keys are exact so cached results stay tied to the N they were built for.
    """

    directory: Path = field(default_factory=default_cache_dir)
    config: SieveConfig = field(default_factory=SieveConfig)

    def path_for(self, kind: Kind, N: int) -> Path:
        return Path(self.directory) / f"{kind}_{N}.sieve"

    def get(self, kind: Kind, N: int, build: bool = True) -> Table:
        path = self.path_for(kind, N)
        if path.exists():
            return load_table(path)
        if not build:
            raise FileNotFoundError(f"no cached {kind} table for N={N} at {path}")
        table = build_table(kind, N, self.config)
        Path(self.directory).mkdir(parents=True, exist_ok=True)
        save_table(table, path)
        return table
