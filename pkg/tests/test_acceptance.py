"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Run with pytest (lines appear in the "acceptance criteria" summary section) or
directly as a script.
"""
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from conftest import ACCEPTANCE_LINES
from smoothprime.integration import IntegrationSpec, integrate_1d
from smoothprime.kernels import Bell, Kernel, bump_eval, kernel_eval
from smoothprime.oracle import is_prime
from smoothprime.primality import SmoothParams, p_reduced_1d, p_smoothed_1d, p_smoothed_integral, p_summed_triple
from smoothprime.resonance import MomentConstants, detect_composite, moment_estimate, p_reordered, resonance_map

P0 = SmoothParams()
Q64 = IntegrationSpec("simpson", 64)
README = Path(__file__).resolve().parents[1] / "README.md"

# reference table: summed triple and reduced 1D columns
TABLE_TRIPLE = {2: 1.0, 3: 1.0, 4: 0.919, 5: 1.0, 6: 0.913, 7: 1.0, 8: 0.936, 9: 0.975, 10: 0.947,
                11: 1.0, 12: 0.917, 13: 1.0}
TABLE_REDUCED = {2: 1.0, 3: 1.0, 4: 0.863, 5: 1.0, 6: 0.867, 7: 1.0, 8: 0.907, 9: 0.966, 10: 0.926,
                 11: 1.0, 12: 0.891, 13: 1.0}

# best tuple from a grid search over kernel family, delta, eps and p (see ledger)
BEST_TUPLE = SmoothParams(delta=0.01, kernel=Kernel("sine", 0.1, 4))
# documented detection configuration
DETECT = SmoothParams(delta=0.01, bell=Bell(sigma=0.01))


def report(num: int, ok: bool, detail: str):
    ACCEPTANCE_LINES[num] = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}"
    assert ok, detail


def test_criterion_01_triple_table():
    t0 = time.perf_counter()
    worst = 0.0
    for n, ref in TABLE_TRIPLE.items():
        tol = 0.005 if is_prime(n) else 0.02
        worst = max(worst, abs(p_summed_triple(n, P0, Q64).value - ref) / tol)
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1.0 and elapsed < 300,
           f"summed-triple q=64 worst error {worst:.3f} of tolerance, {elapsed:.1f} s")


def test_criterion_02_reduced_column():
    worst, order_ok = 0.0, True
    for n, ref in TABLE_REDUCED.items():
        red = p_reduced_1d(n, P0, Q64).value
        worst = max(worst, abs(red - ref))
        if not is_prime(n):
            order_ok &= red <= p_summed_triple(n, P0, Q64).value + 0.005
    report(2, worst <= 0.02 and order_ok,
           f"reduced-1d max error {worst:.4f} (tol 0.02), reduced <= triple + 0.005: {order_ok}")


def test_criterion_03_separation():
    parts, ok = [], True
    for name, fn in (("summed-triple", p_summed_triple), ("reduced-1d", p_reduced_1d)):
        vals = {n: fn(n, P0).value for n in range(2, 31)}
        lo = min(v for n, v in vals.items() if is_prime(n))
        hi_n = max((n for n in vals if not is_prime(n)), key=vals.get)
        margin = lo - vals[hi_n]
        ok &= margin >= 0.02
        parts.append(f"{name} margin {margin:.4f} (worst composite {hi_n})")
    report(3, ok, ", ".join(parts) + "; required >= 0.02")


def test_criterion_04_constructive_tuple():
    errs = {m: abs(p_summed_triple(m, BEST_TUPLE, IntegrationSpec("simpson", 32)).value - float(is_prime(m)))
            for m in range(2, 14)}
    worst = max(errs, key=errs.get)
    report(4, errs[worst] < 0.15,
           f"best tuple sine delta=0.01 eps=0.1 p=4 max error {errs[worst]:.4f} at m={worst}; required < 0.15")


def test_criterion_05_sharpening():
    drops = [1 - p_summed_triple(7, replace(P0, kernel=Kernel(epsilon=e)), Q64).value for e in (1e-4, 1e-5, 1e-6)]
    p6 = p_summed_triple(6, replace(P0, kernel=Kernel(p=6)), Q64).value
    p10 = p_summed_triple(6, replace(P0, kernel=Kernel(p=10)), Q64).value
    ok = drops[0] > drops[1] > drops[2] and p10 <= p6 + 1e-4
    report(5, ok, "1-P(7) at eps 1e-4,1e-5,1e-6: " + ", ".join(f"{d:.3g}" for d in drops)
           + f"; P(6) p=6 {p6:.5f}, p=10 {p10:.5f}")


def test_criterion_06_reordering():
    worst = max(abs(p_reordered(n).value - p_smoothed_1d(n).value) for n in (4.0, 6.0, 7.0, 9.0, 15.0))
    report(6, worst <= 1e-3, f"max |reordered - smoothed-1d| {worst:.2e} (tol 1e-3)")


def test_criterion_07_comb_limit():
    d1 = {n: abs(p_smoothed_1d(float(n)).value - p_reduced_1d(n).value) for n in range(4, 14)}
    d3 = {n: abs(p_smoothed_integral(float(n)).value - p_summed_triple(n).value) for n in range(4, 14)}
    w1, w3 = max(d1, key=d1.get), max(d3, key=d3.get)
    report(7, d1[w1] <= 0.01 and d3[w3] <= 0.01,
           f"sigma=0.05 max gap smoothed-1d/reduced {d1[w1]:.4f} at n={w1}, "
           f"smoothed-integral/summed-triple {d3[w3]:.4f} at n={w3}; tol 0.01")


def test_criterion_08_resonance_detection():
    t0 = time.perf_counter()
    wrong, hints = [], []
    for n in range(4, 61):
        hit = detect_composite(resonance_map(n, DETECT), 0.02)
        if (hit is None) != is_prime(n):
            wrong.append(n)
        if hit is not None and not is_prime(n):
            hints.append(n % hit.divisor_hint == 0)
    elapsed = time.perf_counter() - t0
    rate = float(np.mean(hints))
    report(8, not wrong and rate >= 0.9 and elapsed < 600,
           f"misclassified {wrong or 'none'}, divisor hints {sum(hints)}/{len(hints)}, {elapsed:.1f} s")


def test_criterion_09_moment_arithmetic():
    est = moment_estimate(15, 3, replace(P0, delta=0.1), MomentConstants(phi_ratio=0.92, k2=9.87), psi_mode="peak")
    documented = README.exists() and "0.9496" in README.read_text()
    report(9, abs(est - 0.994954) <= 1e-6 and documented,
           f"moment_estimate {est:.10f} (target 0.994954 +- 1e-6); printed 0.9496 documented: {documented}")


def test_criterion_10_integration_backends():
    # sin^2(pi s) on [0, 0.3]; a full period is integrated exactly and shows no order
    f = lambda t: 0.3 * np.sin(0.3 * np.pi * t) ** 2
    exact = 0.15 - math.sin(0.6 * math.pi) / (4 * math.pi)
    errs = [abs(integrate_1d(f, IntegrationSpec("simpson", q)).value - exact) for q in (8, 16, 32, 64)]
    order = min(math.log2(a / b) for a, b in zip(errs, errs[1:]))

    kern, bump = P0.kernel, P0.bump
    g = lambda t: kernel_eval(kern, (5 + P0.delta * bump_eval(bump, t)) / (2 + P0.delta * bump_eval(bump, t)))
    ref = integrate_1d(g, IntegrationSpec("simpson", 1024)).value
    mc_spec = IntegrationSpec("monte-carlo", samples=100_000, seed=2024)
    runs = [integrate_1d(g, mc_spec, workers=w) for w in (1, 2, 4, 8)]
    mc = runs[0]
    within = abs(mc.value - ref) <= 3 * mc.error_estimate
    identical = all(r == mc for r in runs)
    report(10, order >= 3.9 and within and identical,
           f"Simpson order {order:.3f}; MC-Simpson {abs(mc.value - ref):.2e} vs 3 se {3 * mc.error_estimate:.2e}; "
           f"bit-identical across 1,2,4,8 workers: {identical}")


def test_criterion_11_smoothness():
    steps = [1e-2 / 2**i for i in range(4)]
    d = [(p_smoothed_1d(7.5 + h).value - p_smoothed_1d(7.5 - h).value) / (2 * h) for h in steps]
    diffs = [abs(a - b) for a, b in zip(d, d[1:])]
    orders = [math.log2(a / b) for a, b in zip(diffs, diffs[1:])]
    report(11, all(1.8 <= o <= 2.2 for o in orders),
           "observed central-difference orders " + ", ".join(f"{o:.4f}" for o in orders))


if __name__ == "__main__":
    import pytest

    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
