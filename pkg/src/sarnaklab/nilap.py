"""Exact Hall-Petresco sequences in unipotent integer matrix groups.

The group is U_d, upper unitriangular d x d integer matrices.  Its lower
central series is G_0 = G_1 = U_d and, for m >= 2, G_m = matrices whose
superdiagonal bands 1..m-1 vanish; G_d is trivial.  Entries are Python
integers, so nothing overflows.

Matrix indices are 0-based throughout: ``elementary(3, 0, 1)`` is I + e_{01},
the first Heisenberg generator.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, InvalidCoefficientError

MAX_DIM = 8


def binom_signed(n: int, m: int) -> int:
    """C(n, m) = n(n-1)...(n-m+1) / m! for any integer n."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    if m > 64:
        raise DomainError("m above 64 is not supported")
    num = 1
    for i in range(m):
        num *= n - i
    return num // math.factorial(m)


class UnipotentMatrix:
    __slots__ = ("rows", "_hash")

    def __init__(self, rows: Iterable[Iterable[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        d = len(rows)
        if not 2 <= d <= MAX_DIM or any(len(r) != d for r in rows):
            raise DomainError(f"need a square matrix of size 2..{MAX_DIM}")
        for i, r in enumerate(rows):
            if r[i] != 1 or any(r[j] for j in range(i)):
                raise DomainError("matrix is not upper unitriangular")
        self.rows = rows
        self._hash = None

    @property
    def d(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, d: int) -> "UnipotentMatrix":
        return cls([[int(i == j) for j in range(d)] for i in range(d)])

    @classmethod
    def elementary(cls, d: int, i: int, j: int, c: int = 1) -> "UnipotentMatrix":
        if not 0 <= i < j < d:
            raise DomainError("elementary matrices need 0 <= i < j < d")
        rows = [[int(a == b) for b in range(d)] for a in range(d)]
        rows[i][j] = c
        return cls(rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, UnipotentMatrix) and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self) -> str:
        return f"UnipotentMatrix({[list(r) for r in self.rows]})"

    def __mul__(self, other: "UnipotentMatrix") -> "UnipotentMatrix":
        if not isinstance(other, UnipotentMatrix):
            return NotImplemented
        d = self.d
        if other.d != d:
            raise DomainError("dimension mismatch")
        a, b = self.rows, other.rows
        out = [[0] * d for _ in range(d)]
        for i in range(d):
            ai = a[i]
            oi = out[i]
            oi[i] = 1
            for j in range(i + 1, d):
                oi[j] = sum(ai[k] * b[k][j] for k in range(i, j + 1))
        return _trusted(out)

    def inverse(self) -> "UnipotentMatrix":
        # back-substitution for A X = I; the inverse of a unipotent integer matrix is integral
        d = self.d
        a = self.rows
        x = [[int(i == j) for j in range(d)] for i in range(d)]
        for j in range(d):
            for i in range(j - 1, -1, -1):
                x[i][j] = -sum(a[i][k] * x[k][j] for k in range(i + 1, j + 1))
        return _trusted(x)

    def __pow__(self, k: int) -> "UnipotentMatrix":
        k = int(k)
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        result = UnipotentMatrix.identity(self.d)
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def is_identity(self) -> bool:
        return all(self.rows[i][j] == 0 for i in range(self.d) for j in range(i + 1, self.d))

    def band(self, b: int) -> tuple[int, ...]:
        return tuple(self.rows[i][i + b] for i in range(self.d - b))

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str | int]]) -> "UnipotentMatrix":
        return cls([[int(x) for x in r] for r in data])


def _trusted(rows: list[list[int]]) -> UnipotentMatrix:
    m = UnipotentMatrix.__new__(UnipotentMatrix)
    m.rows = tuple(tuple(r) for r in rows)
    m._hash = None
    return m


def power_by_series(g: UnipotentMatrix, k: int) -> UnipotentMatrix:
    """(I + X)^k = sum_{i<d} C(k, i) X^i, valid for every integer k."""
    d = g.d
    X = [[g.rows[i][j] - int(i == j) for j in range(d)] for i in range(d)]
    acc = [[int(i == j) for j in range(d)] for i in range(d)]
    Xi = [[int(i == j) for j in range(d)] for i in range(d)]
    for i in range(1, d):
        Xi = [[sum(Xi[r][t] * X[t][c] for t in range(d)) for c in range(d)] for r in range(d)]
        c = binom_signed(k, i)
        for r in range(d):
            for s in range(d):
                acc[r][s] += c * Xi[r][s]
    return UnipotentMatrix(acc)


def lcs_membership(g: UnipotentMatrix, m: int) -> bool:
    """Whether g lies in G_m, i.e. superdiagonal bands 1..m-1 vanish."""
    if m < 0:
        raise DomainError("m must be nonnegative")
    return all(not any(g.band(b)) for b in range(1, min(m, g.d)))


@dataclass(frozen=True)
class GroupSequence:
    """Finite window j_min <= j <= j_max of a Z-indexed sequence in U_d."""

    start: int
    values: tuple[UnipotentMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise DomainError("empty window")
        if len({v.d for v in self.values}) != 1:
            raise DomainError("all values must share one dimension")

    @property
    def window(self) -> tuple[int, int]:
        return self.start, self.start + len(self.values) - 1

    @property
    def d(self) -> int:
        return self.values[0].d

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int) -> UnipotentMatrix:
        lo, hi = self.window
        if not lo <= j <= hi:
            raise IndexError(f"index {j} outside window [{lo}, {hi}]")
        return self.values[j - lo]

    def indices(self) -> range:
        lo, hi = self.window
        return range(lo, hi + 1)

    def inverse(self) -> "GroupSequence":
        return GroupSequence(self.start, tuple(v.inverse() for v in self.values))

    def perturbed(self, j: int, g: UnipotentMatrix) -> "GroupSequence":
        """Copy with the value at j multiplied on the left by g."""
        vals = list(self.values)
        vals[j - self.start] = g * vals[j - self.start]
        return GroupSequence(self.start, tuple(vals))

    def to_json(self) -> dict:
        return {"start": self.start, "values": [v.to_json() for v in self.values]}


@dataclass(frozen=True)
class HPSequence:
    """g_j = a_0 a_1^C(j-o,1) ... a_s^C(j-o,s) on a window, with origin o (usually 0)."""

    coefficients: tuple[UnipotentMatrix, ...]
    sequence: GroupSequence
    origin: int = 0

    @property
    def step_count(self) -> int:
        return len(self.coefficients) - 1

    @property
    def window(self) -> tuple[int, int]:
        return self.sequence.window

    def __getitem__(self, j: int) -> UnipotentMatrix:
        return self.sequence[j]


def hp_value(coeffs: Sequence[UnipotentMatrix], j: int, origin: int = 0) -> UnipotentMatrix:
    g = coeffs[0]
    for m in range(1, len(coeffs)):
        e = binom_signed(j - origin, m)
        if e:
            g = g * coeffs[m] ** e
    return g


def hp_generate(coeffs: Sequence[UnipotentMatrix], window: tuple[int, int],
                origin: int = 0) -> HPSequence:
    coeffs = tuple(coeffs)
    if not coeffs:
        raise DomainError("need at least the coefficient a_0")
    if len({a.d for a in coeffs}) != 1:
        raise DomainError("coefficients must share one dimension")
    for m, a in enumerate(coeffs):
        if not lcs_membership(a, m):
            raise InvalidCoefficientError(f"coefficient a_{m} is not in G_{m}")
    lo, hi = window
    if hi < lo:
        raise DomainError("empty window")
    vals = tuple(hp_value(coeffs, j, origin) for j in range(lo, hi + 1))
    return HPSequence(coeffs, GroupSequence(lo, vals), origin)


def _as_seq(seq: GroupSequence | HPSequence) -> GroupSequence:
    return seq.sequence if isinstance(seq, HPSequence) else seq


def derivative(seq: GroupSequence | HPSequence) -> GroupSequence:
    """(d g)_j = g_{j+1} g_j^{-1}; the window loses its top index."""
    seq = _as_seq(seq)
    if len(seq) < 2:
        raise DomainError("derivative needs a window of length >= 2")
    v = seq.values
    return GroupSequence(seq.start, tuple(v[i + 1] * v[i].inverse() for i in range(len(v) - 1)))


def shift(seq: GroupSequence | HPSequence) -> GroupSequence:
    """(sigma g)_j = g_{j+1}, so the window moves down by one."""
    seq = _as_seq(seq)
    if len(seq) < 2:
        raise DomainError("shift needs a window of length >= 2")
    return GroupSequence(seq.start - 1, seq.values)


def leibman_check(seq: GroupSequence | HPSequence, s: int) -> bool:
    """d^m g lies in G_m for m = 1..s and d^(s+1) g is the identity."""
    seq = _as_seq(seq)
    if s < 0:
        raise DomainError("s must be nonnegative")
    if len(seq) < s + 2:
        raise DomainError(f"need a window of length >= {s + 2} for {s + 1} derivatives")
    cur = seq
    for m in range(1, s + 2):
        cur = derivative(cur)
        if m <= s:
            if not all(lcs_membership(v, m) for v in cur.values):
                return False
        elif not all(v.is_identity() for v in cur.values):
            return False
    return True


def hp_pointwise_product(x: GroupSequence | HPSequence, y: GroupSequence | HPSequence) -> GroupSequence:
    x, y = _as_seq(x), _as_seq(y)
    if x.d != y.d:
        raise DomainError("dimension mismatch")
    lo = max(x.window[0], y.window[0])
    hi = min(x.window[1], y.window[1])
    if hi < lo:
        raise DomainError("windows do not overlap")
    return GroupSequence(lo, tuple(x[j] * y[j] for j in range(lo, hi + 1)))


def reconstruct_coefficients(seq: GroupSequence | HPSequence, s: int,
                             origin: int | None = None) -> tuple[UnipotentMatrix, ...]:
    """Peel a_0..a_s off g_o..g_{o+s}: a_m = (a_0 a_1^C(m,1) ... a_{m-1}^C(m,m-1))^-1 g_{o+m}."""
    seq = _as_seq(seq)
    lo, hi = seq.window
    if origin is None:
        origin = 0 if lo <= 0 <= hi - s else lo
    if not (lo <= origin and origin + s <= hi):
        raise DomainError("window does not contain origin..origin+s")
    coeffs: list[UnipotentMatrix] = [seq[origin]]
    for m in range(1, s + 1):
        prefix = hp_value(coeffs, origin + m, origin)
        coeffs.append(prefix.inverse() * seq[origin + m])
    return tuple(coeffs)


def reconstruction_residual(seq: GroupSequence | HPSequence, s: int) -> int:
    """Number of window indices where the rebuilt HP sequence disagrees with ``seq``."""
    seq = _as_seq(seq)
    lo = seq.window[0]
    origin = 0 if lo <= 0 <= seq.window[1] - s else lo
    coeffs = reconstruct_coefficients(seq, s, origin)
    rebuilt = hp_generate(coeffs, seq.window, origin)
    return sum(a != b for a, b in zip(rebuilt.sequence.values, seq.values))


def random_lcs_element(d: int, m: int, rng: random.Random, bound: int = 5) -> UnipotentMatrix:
    """Random element of G_m with entries in [-bound, bound]."""
    rows = [[int(i == j) for j in range(d)] for i in range(d)]
    for b in range(max(m, 1), d):
        for i in range(d - b):
            rows[i][i + b] = rng.randint(-bound, bound)
    return UnipotentMatrix(rows)


def random_hp_coefficients(d: int, rng: random.Random, bound: int = 5,
                           s: int | None = None) -> tuple[UnipotentMatrix, ...]:
    s = d - 1 if s is None else s
    return tuple(random_lcs_element(d, m, rng, bound) for m in range(s + 1))


def dump_sequence(seq: GroupSequence | HPSequence) -> str:
    return json.dumps(_as_seq(seq).to_json(), separators=(",", ":"))
