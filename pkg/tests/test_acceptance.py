"""Acceptance criteria, one test each.

Every test prints a single ``PASS`` or ``FAIL`` line with the measured
quantities before asserting.  Run with ``pytest tests/test_acceptance.py -v``.
"""
from __future__ import annotations

import itertools
import math
import os
import random
import time

import numpy as np
import pytest

from oracles import direct_log_average, trial_division_tables
from sarnaklab.averages import (WeightSpec, average, log_average_by_partial_summation,
                                weighted_average)
from sarnaklab.cli import run
from sarnaklab.complexity import block_complexity
from sarnaklab.correlations import PrimeDilationSpec, correspondence_check, tao_check
from sarnaklab.dynamics import (PRESETS, CharacterProduct, RotationSystem, ap_average,
                                ap_average_closed_form)
from sarnaklab.nilap import (binom_signed, derivative, hp_generate, hp_pointwise_product,
                             leibman_check, random_hp_coefficients, reconstruct_coefficients)
from sarnaklab.sieve import SieveConfig, build_liouville, build_mobius


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {title}  {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_01_sieve_exactness(verdict):
    lam_o, mu_o = trial_division_tables(10**6)
    lam, mu = build_liouville(10**6), build_mobius(10**6)
    bad = int(np.sum(lam.values[1:] != lam_o[1:]) + np.sum(mu.values[1:] != mu_o[1:]))
    workers = os.cpu_count() or 1
    t0 = time.perf_counter()
    build_liouville(10**8, SieveConfig(worker_count=workers))
    build_mobius(10**8, SieveConfig(worker_count=workers))
    elapsed = time.perf_counter() - t0
    verdict(1, "sieve exactness", bad == 0 and elapsed < 60,
            f"mismatches={bad} build(lambda+mu, 1e8)={elapsed:.1f}s on {workers} core(s)")


def test_criterion_02_complete_multiplicativity(verdict, lam_big):
    v = lam_big.values
    rng = np.random.default_rng(0)
    m = rng.integers(1, 10**4 + 1, 10**5)
    n = np.array([rng.integers(1, 10**8 // int(a) + 1) for a in m])
    pair_bad = int(np.sum(v[m * n] != v[m] * v[n]))
    half = np.arange(1, 5 * 10**7 + 1)
    dbl_bad = int(np.sum(v[2 * half] != -v[half]))
    verdict(2, "complete multiplicativity", pair_bad == 0 and dbl_bad == 0,
            f"pair mismatches={pair_bad} doubling mismatches={dbl_bad}")


def test_criterion_03_partial_summation(verdict, lam_small):
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        a = rng.choice([-1.0, 1.0], 10**5)
        oracle = direct_log_average(a, 10**5)
        direct = average(a, 10**5, "log").value
        abel = log_average_by_partial_summation(a, 10**5).value
        worst = max(worst, abs(abel - oracle) / abs(oracle), abs(direct - oracle) / abs(oracle))
    v = lam_small.values[1 : 10**6 + 1].astype(float)
    oracle = direct_log_average(v, 10**6)
    abel = log_average_by_partial_summation(v, 10**6).value
    lam_err = abs(abel - oracle) / abs(oracle)
    verdict(3, "partial summation", worst < 1e-10 and lam_err < 1e-10,
            f"max rel err random={worst:.2e} lambda(1e6)={lam_err:.2e}")


def test_criterion_04_two_point_decay(verdict, lam_big):
    Ns = [10**5, 10**6, 10**7, 10**8]
    vals = [abs(weighted_average(lam_big, WeightSpec.unit(), (0, 1), N, "log").value) for N in Ns]
    steps = [b - a for a, b in zip(vals, vals[1:])]
    decreasing = sum(steps) / len(steps) < 0
    shown = " ".join(f"N=1e{int(math.log10(N))}:{x:.5f}" for N, x in zip(Ns, vals))
    verdict(4, "two-point log decay", decreasing and vals[-1] < 0.01,
            f"{shown} mean step={sum(steps) / len(steps):+.2e} (need < 0.01 at 1e8)")


def test_criterion_05_prime_dilation_residual(verdict, lam_mid):
    small = tao_check(lam_mid, (0, 1), 10**5, PrimeDilationSpec(100)).residual
    large = tao_check(lam_mid, (0, 1), 10**7, PrimeDilationSpec(1000)).residual
    exact = tao_check(lam_mid, (0, 0), 10**5, PrimeDilationSpec(100)).residual
    verdict(5, "prime-dilation residual", large < small and exact == 0.0,
            f"(1e7,1e3)={large:.5f} (1e5,1e2)={small:.5f} pattern(0,0)={exact!r}")


def test_criterion_06_correspondence(verdict, lam_small, mu_small):
    patterns = [p for k in range(1, 5)
                for p in itertools.combinations_with_replacement((-1, 0, 1), k)]
    worst = max(correspondence_check(t, p, 10**5, kind, m=1)
                for t in (lam_small, mu_small) for kind in ("log", "cesaro") for p in patterns)
    verdict(6, "cylinder reconstruction", worst < 1e-10,
            f"{len(patterns)} patterns x 2 tables x 2 averages, max |diff|={worst:.2e}")


def test_criterion_07_block_complexity(verdict, lam_big):
    t0 = time.perf_counter()
    c = block_complexity(lam_big, 16, 10**8).counts
    elapsed = time.perf_counter() - t0
    lower = all(c[n] >= n + 5 for n in range(3, 17))
    shape = all(c[n] <= c[n + 1] <= 2 * c[n] for n in range(1, 16))
    direct_ok = True
    for N in (10**3, 10**4, 10**5):
        rep = block_complexity(lam_big, 12, N).counts
        seq = lam_big.values[1 : N + 1]
        for n in range(1, 13):
            win = np.lib.stride_tricks.sliding_window_view(seq, n)
            direct_ok &= rep[n] == len({w.tobytes() for w in win})
    verdict(7, "block complexity", lower and shape and direct_ok and elapsed < 300,
            f"P(3..16)={[c[n] for n in range(3, 17)]} direct ok={direct_ok} time={elapsed:.1f}s")


def test_criterion_08_hall_petresco(verdict):
    rng = random.Random(0)
    seqs_ok = top_ok = recon_ok = True
    for i in range(500):
        d = 3 + i % 3
        s = d - 1
        coeffs = random_hp_coefficients(d, rng)
        seq = hp_generate(coeffs, (-3, 2 * d + 1))
        seqs_ok &= leibman_check(seq, s)
        top = seq.sequence
        for _ in range(s + 1):
            top = derivative(top)
        top_ok &= all(g.is_identity() for g in top.values)
        rebuilt = reconstruct_coefficients(seq, s)
        recon_ok &= hp_generate(rebuilt, seq.window).sequence == seq.sequence
    prod_ok = True
    for i in range(100):
        d = 3 + i % 3
        x = hp_generate(random_hp_coefficients(d, rng), (-3, 2 * d + 1))
        y = hp_generate(random_hp_coefficients(d, rng), (-3, 2 * d + 1))
        p = hp_pointwise_product(x, y)
        prod_ok &= leibman_check(p, d - 1)
        recon_ok &= hp_generate(reconstruct_coefficients(p, d - 1), p.window).sequence == p
    pascal = all(binom_signed(n, m) == binom_signed(n - 1, m) + binom_signed(n - 1, m - 1)
                 for n in range(-50, 51) for m in range(1, 21))
    ok = seqs_ok and prod_ok and top_ok and pascal and recon_ok
    verdict(8, "Hall-Petresco suite", ok,
            f"sequences={seqs_ok} products={prod_ok} top derivative={top_ok} "
            f"pascal={pascal} reconstruction={recon_ok}")


def test_criterion_09_dilation_invariance(verdict):
    sys = RotationSystem(PRESETS["golden"], 0.0)
    N = 10**6
    exact = True
    for terms in (((1, 2), (2, -1)), ((1, 1), (2, 1), (3, -1)), ((2, 3), (3, -2))):
        prod = CharacterProduct(terms)
        base = ap_average(sys, prod, 1, N)
        exact &= all(ap_average(sys, prod, r, N) == base for r in (2, 3, 5, 7))
    prod = CharacterProduct(((1, 1), (2, -1)))
    vals = {r: ap_average(sys, prod, r, N) for r in (1, 2, 3, 5, 7)}
    closed = max(abs(vals[r] - ap_average_closed_form(sys, prod, r, N).value) for r in vals)
    small = max(abs(v) for v in vals.values())
    spread = max(abs(vals[r] - vals[1]) for r in vals)
    ok = exact and small < 1e-3 and spread < 2e-3 and closed < 1e-10
    verdict(9, "dilation invariance", ok,
            f"zero-weight exact={exact} max|avg|={small:.2e} max diff={spread:.2e} "
            f"closed-form err={closed:.1e}")


CLI_RUNS = [
    ["sieve", "--table", "mobius", "--N", "1e5"],
    ["corr", "--N", "1e5,2e5", "--shifts", "0,1,2", "--avg", "cesaro"],
    ["corr", "--table", "mobius", "--N", "1e5", "--alpha", "golden"],
    ["tao-check", "--N", "1e5", "--prime-cutoff", "100,1000", "--prime-weighting", "dyadic-1/p"],
    ["cylinder", "--N", "1e5", "--half-width", "2"],
    ["complexity", "--N", "1e5", "--nmax", "20"],
    ["gowers", "--N", "3000", "--k", "2,3,4"],
    ["nilap", "--dim", "5"],
    ["dynamics", "--mode", "ap", "--N", "1e5"],
    ["dynamics", "--mode", "prime", "--N", "1e5", "--prime-cutoff", "1000", "--d", "6"],
    ["dynamics", "--mode", "skew", "--N", "1e5"],
    ["dynamics", "--mode", "stationarity", "--N", "1e5", "--m", "2"],
]


def test_criterion_10_determinism(verdict, cache_env):
    failures = []
    for workers in ("1", "2"):
        for i, argv in enumerate(CLI_RUNS):
            outs = []
            for rep in ("a", "b"):
                out = cache_env / rep / workers / str(i)
                code = run(argv + ["--seed", "7", "--workers", workers, "--no-store",
                                   "--out", str(out)])
                files = sorted(p for p in out.iterdir() if p.name != "manifest.json")
                outs.append((code, [(p.name, p.read_bytes()) for p in files]))
            if outs[0] != outs[1] or outs[0][0] != 0:
                failures.append(" ".join(argv))
        reports = []
        for rep in ("a", "b"):
            out = cache_env / f"report-{rep}-{workers}"
            run(["report", str(cache_env / rep / workers), "--out", str(out)])
            reports.append([(out / n).read_bytes() for n in ("report.txt", "report.json")])
        if reports[0] != reports[1]:
            failures.append(f"report (workers={workers})")
    verdict(10, "determinism", not failures,
            f"{len(CLI_RUNS) + 1} subcommand runs x 2 worker counts, differing: {failures or 'none'}")
