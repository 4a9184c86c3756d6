"""Acceptance criteria 1-10, one PASS/FAIL line per criterion."""

import math
import subprocess
import sys
import time

import pytest

from hardymorrey import batteries as bat
from hardymorrey.calderon import frac_integral_at
from hardymorrey.generators import indicator
from hardymorrey.grid import Grid


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def stable(a, b, tol):
    return abs(b / a - 1) <= tol


def test_criterion_01_maximal_oracle(report):
    t0 = time.perf_counter()
    gap1 = bat.maximal_oracle_gap(Grid(1, 0, 9))
    gap2 = bat.maximal_oracle_gap(Grid(2, 0, 5))
    speed = bat.maximal_speedup(12)
    elapsed = time.perf_counter() - t0
    ok = gap1 <= 1e-12 and gap2 <= 1e-12 and speed["speedup"] >= 10 and elapsed < 30
    report(1, ok, f"gap 1D {gap1:.1e}, gap 2D {gap2:.1e}, speedup {speed['speedup']:.0f}x, {elapsed:.1f}s")


def test_criterion_02_sandwich(report):
    t0 = time.perf_counter()
    worst = {}
    for n in (1, 2):
        c = bat.sandwich_constants(bat.sandwich_pairs(20, n=n, K=6 if n == 1 else 4))
        worst[n] = c
    elapsed = time.perf_counter() - t0
    ok = all(
        c["dyadic_min"] >= 1 - 1e-12 and c["dyadic_max"] <= 1 + 1e-12 and c["windows_min"] >= 1 - 1e-12 and c["windows_max"] <= 2**n + 1e-12
        for n, c in worst.items()
    )
    ok &= elapsed < 10
    detail = ", ".join(f"{n}D dyadic C {c['dyadic_max']:.12g} windows C {c['windows_max']:.4g}" for n, c in worst.items())
    report(2, ok, f"{detail}, {elapsed:.1f}s")


def test_criterion_03_cz_roundtrip(report):
    t0 = time.perf_counter()
    err = moment = size = 0.0
    support = True
    for n, K in ((1, 8), (2, 4)):
        for f in bat.cz_battery(n, K, count=50):
            for d in (0, 1):
                r = bat.check_roundtrip(f, d)
                err = max(err, r["relative_error"])
                moment = max(moment, r["worst_moment"])
                size = max(size, r["worst_size"])
                support &= r["support_ok"]
    elapsed = time.perf_counter() - t0
    ok = err <= 1e-8 and moment <= 1e-10 and size <= 1 + 1e-12 and support and elapsed < 120
    report(3, ok, f"rel err {err:.1e}, moment defect {moment:.1e}, size {size:.12g}, {elapsed:.1f}s")


def test_criterion_04_synthesis(report):
    t0 = time.perf_counter()
    lo, hi = bat.synthesis_constants(8, count=100), bat.synthesis_constants(10, count=100)
    elapsed = time.perf_counter() - t0
    ok = stable(lo["thm1"], hi["thm1"], 0.2) and stable(lo["thm2"], hi["thm2"], 0.2) and elapsed < 120
    report(4, ok, f"thm1 {lo['thm1']:.4g}->{hi['thm1']:.4g}, thm2 {lo['thm2']:.4g}->{hi['thm2']:.4g} (K 8->10), {elapsed:.1f}s")


def test_criterion_05_coefficient(report):
    rows = []
    ok = True
    for n, K in ((1, 8), (2, 4)):
        for v in (0.5, 1.0):
            a = bat.coefficient_constant(n, K, v).value
            b = bat.coefficient_constant(n, K + 2, v).value
            ok &= math.isfinite(a) and math.isfinite(b) and stable(a, b, 0.2)
            rows.append(f"{n}D v={v:g} {a:.4g}->{b:.4g}")
    report(5, ok, ", ".join(rows))


def test_criterion_06_hardy(report):
    t0 = time.perf_counter()
    rows = bat.hardy_power_battery(trials=64)
    elapsed = time.perf_counter() - t0
    err = max(r["B_rel_error"] for r in rows)
    worst = max(r["worst_ratio"] / r["B"] for r in rows)
    sharp = min(r["sharpness"] for r in rows)
    ok = err <= 1e-4 and worst <= 1 + 1e-3 and sharp >= 0.9 and elapsed < 10
    report(6, ok, f"B rel err {err:.1e}, worst/B {worst:.4f}, sharpness {sharp:.4f}, {elapsed:.1f}s")


def test_criterion_07_fefferman_stein(report):
    lo, hi = bat.fefferman_stein_constants(8, count=30), bat.fefferman_stein_constants(10, count=30)
    drift = max(abs(hi[k] / lo[k] - 1) for k in lo)
    ok = all(math.isfinite(v) for v in (*lo.values(), *hi.values())) and drift <= 0.10
    report(7, ok, f"max drift K 8->10 {drift:.2%} over {len(lo)} (p, q) pairs")


def test_criterion_08_fractional(report):
    t0 = time.perf_counter()
    g = Grid(1, 2, 8, origin=-2.0)
    point = frac_integral_at(indicator(g, -1.0, 2.0), 0.5, 0.0)
    a6, a7 = bat.adams_constant(6), bat.adams_constant(7)
    o6, o7 = bat.olsen_constant(6), bat.olsen_constant(7)
    elapsed = time.perf_counter() - t0
    ok = abs(point - 4) <= 1e-3 and all(map(math.isfinite, (a6, a7, o6, o7)))
    ok &= stable(a6, a7, 0.15) and stable(o6, o7, 0.15) and elapsed < 60
    report(8, ok, f"I(0) {point:.6f}, adams {a6:.4g}->{a7:.4g}, olsen {o6:.4g}->{o7:.4g}, {elapsed:.1f}s")


def test_criterion_09_littlewood_paley(report):
    lo, hi = bat.lp_bracket(8), bat.lp_bracket(10)
    ok = lo["partition_low"] > 0 and hi["partition_low"] > 0
    ok &= stable(lo["ratio_low"], hi["ratio_low"], 0.15) and stable(lo["ratio_high"], hi["ratio_high"], 0.15)
    report(
        9,
        ok,
        f"c {hi['partition_low']:.4f}, bracket [{lo['ratio_low']:.3f}, {lo['ratio_high']:.3f}] -> [{hi['ratio_low']:.3f}, {hi['ratio_high']:.3f}]",
    )


def test_criterion_10_determinism(report):
    t0 = time.perf_counter()
    outputs = []
    codes = []
    for _ in range(2):
        done = subprocess.run([sys.executable, "-m", "hardymorrey", "suite", "--seed", "0"], capture_output=True)
        codes.append(done.returncode)
        outputs.append(done.stdout.decode())
    elapsed = time.perf_counter() - t0
    ok = outputs[0] == outputs[1] and codes == [0, 0] and elapsed < 300 and outputs[0].count("\n") > 10
    report(10, ok, f"{outputs[0].count(chr(10))} report lines identical: {outputs[0] == outputs[1]}, exit {codes}, {elapsed:.1f}s for two runs")
