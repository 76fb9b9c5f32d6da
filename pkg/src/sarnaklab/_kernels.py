"""Numba scan kernels over dense ``int8`` tables.

Tables are read through the signed extension a(-n) = a(n), a(0) = 0, so a
kernel only ever needs ``vals[abs(k)]``.  Phases live on the fixed-point
torus Z / 2^64: a phase ``u`` stands for ``u / 2^64`` mod 1 and all phase
arithmetic wraps exactly in ``uint64``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from ._accum import nadd

TWO_PI = 2.0 * math.pi
INV_2_64 = 2.0 ** -64


@njit(inline="always")
def unit_phase(u):
    t = TWO_PI * (np.float64(u) * INV_2_64)
    return math.cos(t), math.sin(t)


@njit(inline="always")
def poly_phase(coeffs, n):
    """sum_k coeffs[k] * n^k on Z / 2^64 (n >= 0)."""
    nu = np.uint64(n)
    acc = np.uint64(0)
    pw = np.uint64(1)
    for k in range(coeffs.shape[0]):
        acc += coeffs[k] * pw
        pw *= nu
    return acc


@njit(nogil=True, cache=True)
def real_sum_chunk(x, n0, logw):
    """Compensated sum of x[i] * w(n0 + i) with w = 1 or 1/n."""
    s = 0.0
    c = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        if logw:
            v = v / (n0 + i)
        s, c = nadd(s, c, v)
    return s, c


@njit(nogil=True, cache=True)
def abel_chunk(x, n0, N, Ss, Sc, Ts, Tc):
    """Advance the Abel summation state over one chunk.

    S tracks the running Cesaro partial sum S(n); T accumulates
    S(n) / (n (n+1)) for n < N.
    """
    for i in range(x.shape[0]):
        n = n0 + i
        Ss, Sc = nadd(Ss, Sc, x[i])
        if n < N:
            Ts, Tc = nadd(Ts, Tc, (Ss + Sc) / (n * (n + 1.0)))
    return Ss, Sc, Ts, Tc


@njit(nogil=True, cache=True)
def product_chunk(vals, shifts, logw, lo, hi):
    """Compensated sum over n in [lo, hi) of w(n) * prod_j a(n + shifts[j])."""
    s = 0.0
    c = 0.0
    L = shifts.shape[0]
    for n in range(lo, hi):
        p = 1
        for j in range(L):
            p *= vals[abs(n + shifts[j])]
            if p == 0:
                break
        if p != 0:
            v = np.float64(p)
            if logw:
                v = v / n
            s, c = nadd(s, c, v)
    return s, c


@njit(nogil=True, cache=True)
def weighted_product_chunk(vals, shifts, coeffs, use_phase, logw, lo, hi):
    """Complex analogue of ``product_chunk`` with phase weight e(P(n))."""
    sr = 0.0
    cr = 0.0
    si = 0.0
    ci = 0.0
    L = shifts.shape[0]
    for n in range(lo, hi):
        p = 1
        for j in range(L):
            p *= vals[abs(n + shifts[j])]
            if p == 0:
                break
        if p == 0:
            continue
        w = np.float64(p)
        if logw:
            w = w / n
        if use_phase:
            re, im = unit_phase(poly_phase(coeffs, n))
            sr, cr = nadd(sr, cr, w * re)
            si, ci = nadd(si, ci, w * im)
        else:
            sr, cr = nadd(sr, cr, w)
    return sr, cr, si, ci


@njit(nogil=True, cache=True)
def window_codes_chunk(vals, m, lo, hi, counts_s, counts_c, logw):
    """Accumulate the weight of each base-3 window code of a(n-m..n+m).

    Letter -1 -> digit 0, 0 -> 1, +1 -> 2, most significant digit at j = -m.
    """
    for n in range(lo, hi):
        code = 0
        for j in range(-m, m + 1):
            code = code * 3 + (vals[abs(n + j)] + 1)
        v = 1.0
        if logw:
            v = 1.0 / n
        counts_s[code], counts_c[code] = nadd(counts_s[code], counts_c[code], v)
