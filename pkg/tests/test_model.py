import math

import numpy as np
import pytest
from hypothesis import given, settings

from ckpt_planner.model import (MINUTES_PER_YEAR, CheckpointParams, DomainError,
                                EnergyBreakdown, InfeasibleScenarioError, ModelInvalidError,
                                Platform, PowerProfile, Workload, derived_constants,
                                energy_breakdown, evaluate, expected_total_time, period_domain,
                                platform_mtbf, power_ratio_rho, t_final_curve, total_energy)

from conftest import S1_CKPT, S1_PLATFORM, S1_POWER, scenarios

INF = Platform.from_mtbf(math.inf)


def test_types_reject_invalid_values():
    with pytest.raises(ValueError):
        CheckpointParams(0, 1, 1, 0.5)
    with pytest.raises(ValueError):
        CheckpointParams(1, 1, 1, 1.5)
    with pytest.raises(ValueError):
        PowerProfile(0, 1, 1, 0)
    with pytest.raises(ValueError):
        Platform(0, 100)
    with pytest.raises(ValueError):
        Workload(0)


def test_derived_constants_s1():
    k = derived_constants(S1_CKPT, S1_PLATFORM)
    assert k.a == 5
    assert k.b == pytest.approx(284 / 300, rel=1e-15)


def test_derived_constants_failure_free():
    k = derived_constants(S1_CKPT, INF)
    assert (k.a, k.b) == (5, 1)


def test_derived_constants_mtbf_too_small():
    with pytest.raises(ModelInvalidError, match="MTBF too small"):
        derived_constants(CheckpointParams(1, 1, 0.1, 0.5), Platform.from_mtbf(1.2))


def test_period_domain():
    dom = period_domain(S1_CKPT, S1_PLATFORM)
    assert dom.lower == 10
    assert dom.upper == pytest.approx(568)
    assert 53.29 in dom and 9.99 not in dom and 568 not in dom
    # b > 0 but 2 mu b < C
    with pytest.raises(InfeasibleScenarioError):
        period_domain(CheckpointParams(10, 0, 0, 0), Platform.from_mtbf(4.9))


def test_t_final_s1_against_hand_formula():
    period = 53.2917
    # independent spreadsheet-style evaluation with a=5, b=284/300
    expected = period / ((period - 5) * (0.9466666666666667 - period / 600))
    tb = expected_total_time(period, Workload(1), S1_CKPT, S1_PLATFORM)
    assert tb.t_final == pytest.approx(expected, rel=1e-12)
    assert tb.t_final == pytest.approx(1.2864, abs=5e-5)


def test_t_final_failure_free_cases():
    assert expected_total_time(37.0, Workload(90), CheckpointParams(10, 0, 0, 1), INF).t_final == 90
    tb = expected_total_time(100.0, Workload(90), CheckpointParams(10, 0, 0, 0), INF)
    assert tb.t_final == pytest.approx(100) and tb.t_fails == 0


def test_period_outside_domain():
    with pytest.raises(DomainError):
        expected_total_time(5.0, Workload(1), S1_CKPT, S1_PLATFORM)
    with pytest.raises(DomainError):
        expected_total_time(600.0, Workload(1), S1_CKPT, S1_PLATFORM)


def test_energy_breakdown_s1_terms():
    period = 53.2917
    tb = expected_total_time(period, Workload(1), S1_CKPT, S1_PLATFORM)
    eb = energy_breakdown(period, Workload(1), S1_CKPT, S1_PLATFORM, tb.t_final)
    assert eb.t_cal == pytest.approx(1.1337, abs=1e-4)
    assert eb.t_io == pytest.approx(0.2540, abs=1e-4)
    assert eb.t_down == pytest.approx(0.00429, abs=1e-5)
    n_fail = tb.t_final / 300
    assert eb.t_io - n_fail * (10 + 100 / (2 * period)) == pytest.approx(10 / 48.2917, rel=1e-12)


def test_energy_breakdown_failure_free():
    w, ck = Workload(90), CheckpointParams(10, 0, 0, 0)
    eb = energy_breakdown(100.0, w, ck, INF, 100.0)
    assert (eb.t_cal, eb.t_io, eb.t_down) == (90, 10, 0)


def test_total_energy_examples():
    eb = EnergyBreakdown(1.1337, 0.2540, 0.00429)
    assert total_energy(eb, 1.2864, S1_POWER) == pytest.approx(11.337 + 25.40 + 12.864)
    assert total_energy(EnergyBreakdown(3, 4, 5), 5, PowerProfile(1, 0, 0, 0)) == 5
    assert total_energy(eb, 1.2864, S1_POWER.scaled(2)) == pytest.approx(
        2 * total_energy(eb, 1.2864, S1_POWER), rel=1e-15)


def test_rho_examples():
    assert power_ratio_rho(S1_POWER) == 5.5
    assert power_ratio_rho(PowerProfile(5, 10, 100, 0)) == 7
    assert power_ratio_rho(PowerProfile(3, 7, 7, 0)) == 1


def test_platform_mtbf_examples():
    mu_ind = 125 * MINUTES_PER_YEAR
    assert mu_ind == 65_700_000
    assert platform_mtbf(219_150, mu_ind) == pytest.approx(300, rel=1e-3)
    assert platform_mtbf(2_191_500, mu_ind) == pytest.approx(30, rel=1e-3)
    assert platform_mtbf(1, mu_ind) == mu_ind
    assert platform_mtbf(10, math.inf) == math.inf


def _grid(ckpt, platform, n):
    dom = period_domain(ckpt, platform)
    lo = max(dom.lower, dom.a)
    g = np.linspace(lo, dom.upper, n + 1)[:-1]
    return g[g > dom.a]


@settings(max_examples=200, deadline=None)
@given(scenarios())
def test_additivity(sc):
    ckpt, platform, _ = sc
    for period in _grid(ckpt, platform, 7):
        tb = expected_total_time(float(period), Workload(3.0), ckpt, platform)
        assert tb.t_ff + tb.t_fails == pytest.approx(tb.t_final, rel=1e-12)
        assert tb.t_final >= 3.0


@settings(max_examples=200, deadline=None)
@given(scenarios(omega=0.0))
def test_blocking_decomposition(sc):
    ckpt, platform, _ = sc
    for period in _grid(ckpt, platform, 7):
        tb = expected_total_time(float(period), Workload(1.0), ckpt, platform)
        eb = energy_breakdown(float(period), Workload(1.0), ckpt, platform, tb.t_final)
        assert eb.t_cal + eb.t_io + eb.t_down == pytest.approx(tb.t_final, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(scenarios())
def test_overlap_strictness(sc):
    ckpt, platform, _ = sc
    if ckpt.omega == 0:
        return
    for period in _grid(ckpt, platform, 5):
        tb = expected_total_time(float(period), Workload(1.0), ckpt, platform)
        eb = energy_breakdown(float(period), Workload(1.0), ckpt, platform, tb.t_final)
        assert eb.t_cal + eb.t_io + eb.t_down > tb.t_final


@settings(max_examples=50, deadline=None)
@given(scenarios())
def test_t_final_is_unimodal(sc):
    ckpt, platform, _ = sc
    if ckpt.omega == 1:
        return
    values = t_final_curve(_grid(ckpt, platform, 10_000), Workload(1), ckpt, platform)
    signs = np.sign(np.diff(values))
    signs = signs[signs != 0]
    assert np.count_nonzero(signs[1:] != signs[:-1]) <= 1


def test_failure_free_limit():
    w, period = Workload(2.0), 40.0
    limit = 2.0 * period / (period - 5)
    gaps = [abs(expected_total_time(period, w, S1_CKPT, Platform.from_mtbf(mu)).t_final - limit)
            for mu in (1e3, 1e5, 1e7, 1e9)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-6
    assert expected_total_time(period, w, CheckpointParams(10, 10, 1, 1), INF).t_final == 2.0


@settings(max_examples=100, deadline=None)
@given(scenarios())
def test_energy_linear_in_powers(sc):
    ckpt, platform, power = sc
    period = float(_grid(ckpt, platform, 3)[1])
    tb, eb = evaluate(period, Workload(1), ckpt, platform, power)
    expected = (tb.t_final * power.p_static + eb.t_cal * power.p_cal
                + eb.t_io * power.p_io + eb.t_down * power.p_down)
    assert eb.e_final == pytest.approx(expected, rel=1e-12)
    assert all(v >= 0 for v in (eb.t_cal, eb.t_io, eb.t_down))
