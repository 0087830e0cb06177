"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from ckpt_planner import cli
from ckpt_planner.model import (CheckpointParams, Platform, Workload, energy_curve, evaluate,
                                period_domain, t_final_curve)
from ckpt_planner.optimizer import (compare_strategies, numeric_argmin_energy,
                                    optimal_period_energy, optimal_period_time,
                                    quadratic_coefficients, reference_periods)
from ckpt_planner.scenarios import preset, weak_scaling_table
from ckpt_planner.simulator import SimConfig, validate_against_model

from conftest import random_scenario


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
        assert ok, detail
    return emit


def test_criterion_1_time_optimum(verdict):
    start = time.perf_counter()
    sc = preset("S1_rho5.5")
    period = optimal_period_time(sc.ckpt, sc.platform).period
    dom = period_domain(sc.ckpt, sc.platform)
    grid = np.arange(dom.lower, dom.upper, 0.01)
    grid = grid[grid > dom.a]
    best = grid[int(np.argmin(t_final_curve(grid, sc.work, sc.ckpt, sc.platform)))]
    elapsed = time.perf_counter() - start
    ok = abs(period - 53.2917) <= 0.001 and abs(period - best) <= 0.01 and elapsed < 1
    verdict(1, "time-optimal period", ok,
            f"T={period:.4f}, grid argmin={best:.2f}, {elapsed:.3f}s")


def test_criterion_2_energy_root_vs_golden(verdict):
    start = time.perf_counter()
    details, ok = [], True
    for sc in (preset("S1_rho5.5"), preset("S2_rho7"), preset("WEAK", n_nodes=1_000_000)):
        coeffs = quadratic_coefficients(sc.ckpt, sc.platform, sc.power, sc.work)
        dom = period_domain(sc.ckpt, sc.platform)
        root = max(r for r in coeffs.roots() if r in dom)
        golden = numeric_argmin_energy(sc.ckpt, sc.platform, sc.power, sc.work).period
        gap = abs(root - golden) / golden
        ok &= gap <= 0.005 and coeffs.residual < 1e-6
        details.append(f"{sc.name}: gap {gap:.1e}, residual {coeffs.residual:.1e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 1
    verdict(2, "quadratic root agrees with golden section", ok,
            "; ".join(details) + f"; {elapsed:.3f}s")


def test_criterion_3_tradeoff(verdict):
    sc = preset("S1_rho5.5")
    cmp = compare_strategies(sc.ckpt, sc.platform, sc.power, Workload(1.0))
    ok = (1.15 <= cmp.energy_ratio <= 1.30 and 1.05 <= cmp.time_ratio <= 1.15
          # regression baselines
          and abs(cmp.energy_ratio - 1.224951) < 1e-6 and abs(cmp.time_ratio - 1.103274) < 1e-6)
    verdict(3, "energy/time trade-off at mu=300", ok,
            f"energy_ratio={cmp.energy_ratio:.6f}, time_ratio={cmp.time_ratio:.6f}")


def test_criterion_4_weak_scaling(verdict):
    n_values = sorted({int(round(10 ** (5 + k / 4))) for k in range(13)} | {50_000_000})
    rows = weak_scaling_table(n_values)
    at = next(r for r in rows if r.axis_value == 50_000_000)
    valid = [r for r in rows if r.valid]
    peak = max(valid, key=lambda r: r.energy_ratio)
    ok = (at.t_opt_time == 1.0 and at.t_opt_energy == 1.0
          and {"clamped_time", "clamped_energy"} <= set(at.flags)
          and abs(at.time_ratio - 1) <= 0.02 and abs(at.energy_ratio - 1) <= 0.02
          and 1e6 <= peak.axis_value <= 1e7 and 1.20 <= peak.energy_ratio <= 1.40)
    verdict(4, "weak-scaling convergence and peak", ok,
            f"N=5e7 ratios {at.time_ratio:.4f}/{at.energy_ratio:.4f}, "
            f"peak {peak.energy_ratio:.4f} at N={peak.axis_value:.3g}")


def test_criterion_5_monte_carlo(verdict):
    start = time.perf_counter()
    sc = preset("S1_rho5.5")
    gaps, ok = [], True
    for mu, t_base, tol in ((300.0, 10_000.0, 0.05), (3000.0, 30_000.0, 0.02)):
        platform = Platform.from_mtbf(mu)
        period = optimal_period_time(sc.ckpt, platform).period
        rep = validate_against_model(SimConfig(Workload(t_base), sc.ckpt, platform, sc.power,
                                               period, 10_000, 20240601), tol)
        ok &= rep.passed
        gaps.append(f"mu={mu:g}: " + ", ".join(f"{r.quantity} {100 * r.rel_gap:.2f}%"
                                                for r in rep.rows))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    verdict(5, "Monte Carlo agrees with the model", ok, "; ".join(gaps) + f"; {elapsed:.1f}s")


def test_criterion_6_blocking_decomposition(verdict):
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(1000):
        ckpt, platform, power = random_scenario(rng)
        ckpt = CheckpointParams(ckpt.c, ckpt.r, ckpt.d, 0.0)
        dom = period_domain(ckpt, platform)
        period = dom.lower + rng.uniform(0.01, 0.99) * (dom.upper - dom.lower)
        tb, eb = evaluate(period, Workload(rng.uniform(1, 1e4)), ckpt, platform, power)
        worst = max(worst, abs(eb.t_cal + eb.t_io + eb.t_down - tb.t_final) / tb.t_final)
    verdict(6, "omega=0 decomposition identity", worst <= 1e-9, f"max rel error {worst:.1e}")


def test_criterion_7_power_scaling(verdict):
    worst_t = worst_e = worst_energy = 0.0
    scenarios = [preset("S1_rho5.5"), preset("S2_rho7"), preset("WEAK")]
    for sc in scenarios:
        t0 = optimal_period_time(sc.ckpt, sc.platform).period
        e0 = optimal_period_energy(sc.ckpt, sc.platform, sc.power, sc.work).period
        base = float(energy_curve(e0, sc.work, sc.ckpt, sc.platform, sc.power))
        for c in (0.1, 3, 100):
            scaled = sc.power.scaled(c)
            e1 = optimal_period_energy(sc.ckpt, sc.platform, scaled, sc.work).period
            energy = float(energy_curve(e0, sc.work, sc.ckpt, sc.platform, scaled))
            worst_t = max(worst_t, abs(optimal_period_time(sc.ckpt, sc.platform).period - t0) / t0)
            worst_e = max(worst_e, abs(e1 - e0) / e0)
            worst_energy = max(worst_energy, abs(energy - c * base) / (c * base))
    ok = worst_t <= 1e-9 and worst_e <= 1e-9 and worst_energy <= 1e-12
    verdict(7, "optima invariant under power scaling", ok,
            f"period drift {max(worst_t, worst_e):.1e}, energy scaling error {worst_energy:.1e}")


def test_criterion_8_daly_convergence(verdict):
    ckpt = CheckpointParams(10.0, 0.0, 0.0, 0.0)
    gaps = []
    for mu in (1e3, 1e4, 1e5, 1e6):
        platform = Platform.from_mtbf(mu)
        ours = optimal_period_time(ckpt, platform).period
        daly = reference_periods(ckpt, platform)[1]
        gaps.append(abs(ours - daly) / daly)
    ok = gaps[-1] <= 0.005 and all(b < a for a, b in zip(gaps, gaps[1:]))
    verdict(8, "convergence to Daly's period", ok, ", ".join(f"{g:.2e}" for g in gaps))


def test_criterion_9_determinism(verdict, tmp_path, capsys):
    runs = {
        "validate": ["validate", "--set", "run.preset=S1_rho5.5", "--trials", "2000",
                     "--seed", "424242"],
        "reproduce": ["reproduce", "fig1"],
    }
    same = {}
    for name, argv in runs.items():
        outputs = []
        for i in range(2):
            target = tmp_path / f"{name}{i}.csv"
            code = cli.main(argv + ["--out", str(target)])
            capsys.readouterr()
            outputs.append((code, target.read_bytes()))
        same[name] = outputs[0] == outputs[1] and outputs[0][0] == 0
    verdict(9, "byte-identical CSV on rerun", all(same.values()),
            ", ".join(f"{k}: {'identical' if v else 'differs'}" for k, v in same.items()))
