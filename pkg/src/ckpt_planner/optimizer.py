"""Time- and energy-optimal checkpoint periods.

The energy optimum is found as a root of the quadratic ``K(T) * dE/dT`` and is
always cross-checked against a golden-section search over the period domain;
the search result wins whenever the two disagree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (CheckpointParams, ModelError, Platform, PowerProfile, Workload,
                    derived_constants, energy_curve, period_domain, t_final_curve)

GOLDEN_TOL = 1e-4
PRESCAN_POINTS = 1000
ROOT_AGREEMENT = 0.005
QUADRATIC_RESIDUAL = 1e-6
# fractions of the period domain used to sample K * dE/dT
FIT_FRACTIONS = (0.15, 0.45, 0.75)
CHECK_FRACTION = 0.6

INV_PHI = (math.sqrt(5) - 1) / 2


class UndefinedOptimumError(ModelError):
    """No finite optimal period exists (e.g. failure-free platform)."""


class NotQuadraticError(ModelError):
    """The sampled scaled derivative is not reproduced by the fitted quadratic."""


@dataclass(frozen=True)
class QuadraticCoefficients:
    q2: float
    q1: float
    q0: float
    residual: float = 0.0

    def __call__(self, period):
        return (self.q2 * period + self.q1) * period + self.q0

    def roots(self) -> list[float]:
        """Real roots in ascending order."""
        q2, q1, q0 = self.q2, self.q1, self.q0
        if q2 == 0:
            return [] if q1 == 0 else [-q0 / q1]
        disc = q1 * q1 - 4 * q2 * q0
        if disc < 0:
            return []
        # cancellation-free form
        s = -0.5 * (q1 + math.copysign(math.sqrt(disc), q1))
        if s == 0:
            return [0.0, 0.0]
        return sorted([s / q2, q0 / s])


@dataclass(frozen=True)
class OptimalPeriod:
    period: float
    clamped: bool
    objective_value: float
    fallback: bool = False
    unimodal: bool = True
    unconstrained: float | None = None

    @property
    def flags(self) -> list[str]:
        out = []
        if self.clamped:
            out.append("clamped")
        if self.fallback:
            out.append("fallback")
        if not self.unimodal:
            out.append("not_unimodal")
        return out


@dataclass(frozen=True)
class StrategyComparison:
    time_opt: OptimalPeriod
    energy_opt: OptimalPeriod
    t_algo_t: float
    t_algo_e: float
    e_algo_t: float
    e_algo_e: float

    @property
    def time_ratio(self) -> float:
        return self.t_algo_e / self.t_algo_t

    @property
    def energy_ratio(self) -> float:
        return self.e_algo_t / self.e_algo_e


def _finite_mtbf(platform: Platform, what: str) -> float:
    mu = platform.mtbf
    if math.isinf(mu):
        raise UndefinedOptimumError(f"undefined: no finite {what} for infinite MTBF")
    return mu


def optimal_period_time(ckpt: CheckpointParams, platform: Platform,
                        work: Workload | None = None) -> OptimalPeriod:
    work = work or Workload()
    if math.isinf(platform.mtbf):
        if ckpt.omega == 1:
            raise UndefinedOptimumError(
                "undefined: every period T >= C is optimal (omega=1, infinite MTBF)")
        raise UndefinedOptimumError("undefined: time keeps decreasing with T for infinite MTBF")
    dom = period_domain(ckpt, platform)
    mu = platform.mtbf
    slack = mu - (ckpt.d + ckpt.r + ckpt.omega * ckpt.c)
    unconstrained = math.sqrt(2 * (1 - ckpt.omega) * ckpt.c * slack)
    clamped = unconstrained < dom.lower
    period = dom.lower if clamped else unconstrained
    value = float(t_final_curve(period, work, ckpt, platform))
    return OptimalPeriod(period, clamped, value, unconstrained=unconstrained)


def scaled_energy_slope(period, ckpt: CheckpointParams, platform: Platform,
                        power: PowerProfile, work: Workload | None = None):
    """``K(T) * dE/dT`` with dE/dT from a 5-point central difference."""
    work = work or Workload()
    k = derived_constants(ckpt, platform)
    mu = platform.mtbf
    period = np.asarray(period, dtype=float)
    h = np.maximum(1e-4, 1e-6 * period)

    def energy(t):
        return energy_curve(t, work, ckpt, platform, power)

    slope = (-energy(period + 2 * h) + 8 * energy(period + h)
             - 8 * energy(period - h) + energy(period - 2 * h)) / (12 * h)
    scale = (period - k.a) ** 2 * (k.b - period / (2 * mu)) ** 2 / (power.p_static * work.t_base)
    return scale * slope


def _fit_span(ckpt, platform):
    dom = period_domain(ckpt, platform)
    lo = max(dom.lower, dom.a)
    return lo, dom.upper


def quadratic_coefficients(ckpt: CheckpointParams, platform: Platform, power: PowerProfile,
                           work: Workload | None = None) -> QuadraticCoefficients:
    """Fit ``q2 T^2 + q1 T + q0`` through three samples of the scaled derivative.

    A fourth sample must match the fit to ``QUADRATIC_RESIDUAL`` relative,
    otherwise :class:`NotQuadraticError` is raised.
    """
    _finite_mtbf(platform, "energy-optimal period")
    lo, hi = _fit_span(ckpt, platform)
    xs = np.array([lo + f * (hi - lo) for f in FIT_FRACTIONS])
    ys = scaled_energy_slope(xs, ckpt, platform, power, work)
    q2, q1, q0 = np.linalg.solve(np.vander(xs, 3), ys)
    fit = QuadraticCoefficients(float(q2), float(q1), float(q0))

    x4 = lo + CHECK_FRACTION * (hi - lo)
    y4 = float(scaled_energy_slope(x4, ckpt, platform, power, work))
    scale = max(abs(y4), float(np.max(np.abs(ys))))
    residual = abs(y4 - fit(x4)) / scale if scale > 0 else 0.0
    if residual > QUADRATIC_RESIDUAL:
        raise NotQuadraticError(f"not quadratic: fourth-point residual {residual:.3g}")
    return QuadraticCoefficients(fit.q2, fit.q1, fit.q0, residual)


def symbolic_coefficients(ckpt: CheckpointParams, platform: Platform, power: PowerProfile,
                          alpha_free: bool = False) -> QuadraticCoefficients:
    """Closed-form coefficients of ``K(T) * dE/dT``.

    ``alpha_free=True`` gives the common shortcut form, whose
    ``T^2`` and ``T`` coefficients lack a factor ``alpha`` on the ``a`` and ``b``
    terms and are therefore exact only when ``alpha == 1``. The default form is
    exact for all inputs and agrees with :func:`quadratic_coefficients`.
    """
    mu = _finite_mtbf(platform, "energy-optimal period")
    k = derived_constants(ckpt, platform)
    a, b = k.a, k.b
    al, be, ga = power.alpha, power.beta, power.gamma
    c, w = ckpt.c, ckpt.omega
    s = al * w * c + be * ckpt.r + ga * ckpt.d
    cross = (al * (1 - w) - be) * c ** 2
    f = 1.0 if alpha_free else al
    q2 = s / (2 * mu ** 2) + f * b / (2 * mu) + (f * a - be * c) / (4 * mu ** 2) + 1 / (2 * mu)
    q1 = (be * c - f * a) * b / mu - 2 * cross / (4 * mu ** 2)
    q0 = (-a * b * (s + mu) / mu - be * c * b ** 2
          + (b / (2 * mu) + a / (4 * mu ** 2)) * cross)
    return QuadraticCoefficients(q2, q1, q0)


def golden_section(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Minimise a unimodal ``f`` on ``[lo, hi]`` to absolute tolerance ``tol``."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2


def _count_local_minima(xs, ys, tol):
    interior = (ys[1:-1] < ys[:-2]) & (ys[1:-1] <= ys[2:])
    idx = list(np.flatnonzero(interior) + 1)
    if ys[0] < ys[1]:
        idx.insert(0, 0)
    if ys[-1] < ys[-2]:
        idx.append(len(ys) - 1)
    # plateaus of neighbouring grid points count once
    distinct = []
    for i in idx:
        if not distinct or xs[i] - xs[distinct[-1]] > tol:
            distinct.append(i)
    return len(distinct)


def numeric_argmin_energy(ckpt: CheckpointParams, platform: Platform, power: PowerProfile,
                          work: Workload | None = None) -> OptimalPeriod:
    work = work or Workload()
    if math.isinf(platform.mtbf):
        raise UndefinedOptimumError(
            "no interior optimum: failure-free energy decreases towards the domain upper end")
    dom = period_domain(ckpt, platform)

    def energy(t):
        return float(energy_curve(t, work, ckpt, platform, power))

    grid = np.linspace(dom.lower, dom.upper, PRESCAN_POINTS + 1)[:-1]
    if grid[0] <= dom.a:
        grid = np.linspace(dom.lower, dom.upper, PRESCAN_POINTS + 2)[1:-1]
    values = energy_curve(grid, work, ckpt, platform, power)
    i = int(np.argmin(values))
    unimodal = _count_local_minima(grid, values, GOLDEN_TOL) <= 1

    lo = grid[i - 1] if i > 0 else grid[0]
    hi = grid[i + 1] if i + 1 < len(grid) else dom.upper - 1e-9 * (dom.upper - dom.lower)
    period = float(golden_section(energy, lo, hi))
    if i == 0 and dom.lower > dom.a and energy(dom.lower) <= energy(period):
        return OptimalPeriod(dom.lower, True, energy(dom.lower), unimodal=unimodal)
    return OptimalPeriod(period, False, energy(period), unimodal=unimodal)


def _same_polynomial(p, q, lo, hi, rel=QUADRATIC_RESIDUAL) -> bool:
    xs = np.linspace(lo, hi, 9)
    scale = float(np.max(np.abs(p(xs))))
    return bool(np.all(np.abs(p(xs) - q(xs)) <= rel * scale))


def optimal_period_energy(ckpt: CheckpointParams, platform: Platform, power: PowerProfile,
                          work: Workload | None = None) -> OptimalPeriod:
    """Energy-optimal period from the quadratic root, validated by the numeric search."""
    work = work or Workload()
    dom = period_domain(ckpt, platform)
    numeric = numeric_argmin_energy(ckpt, platform, power, work)
    fallback = OptimalPeriod(numeric.period, numeric.clamped, numeric.objective_value,
                             fallback=True, unimodal=numeric.unimodal)

    def energy(t):
        return float(energy_curve(t, work, ckpt, platform, power))

    try:
        fitted = quadratic_coefficients(ckpt, platform, power, work)
    except NotQuadraticError:
        return fallback
    # closed form is free of finite-difference noise; use it once the fit confirms it
    closed = symbolic_coefficients(ckpt, platform, power)
    coeffs = closed if _same_polynomial(fitted, closed, *_fit_span(ckpt, platform)) else fitted
    if coeffs.q2 <= 0:
        return fallback

    roots = [r for r in coeffs.roots() if r > 0]
    candidates = [r for r in roots if r in dom]
    # energy already increasing at the lower bound: C itself is a local minimum
    if dom.lower > dom.a and coeffs(dom.lower) >= 0:
        candidates.append(dom.lower)
    if not candidates:
        return fallback
    period = min(candidates, key=energy)
    result = OptimalPeriod(period, period == dom.lower and period not in roots, energy(period),
                           unconstrained=max(roots) if roots else None)

    if abs(result.period - numeric.period) > ROOT_AGREEMENT * numeric.period:
        return fallback
    return result


def reference_periods(ckpt: CheckpointParams, platform: Platform) -> tuple[float, float]:
    """Young's and Daly's classical periods."""
    mu = _finite_mtbf(platform, "reference period")
    derived_constants(ckpt, platform)
    young = math.sqrt(2 * ckpt.c * mu) + ckpt.c
    daly = math.sqrt(2 * ckpt.c * (mu + ckpt.d + ckpt.r)) + ckpt.c
    return young, daly


def compare_strategies(ckpt: CheckpointParams, platform: Platform, power: PowerProfile,
                       work: Workload | None = None) -> StrategyComparison:
    work = work or Workload()
    t_opt = optimal_period_time(ckpt, platform, work)
    e_opt = optimal_period_energy(ckpt, platform, power, work)

    def at(period):
        t = float(t_final_curve(period, work, ckpt, platform))
        e = float(energy_curve(period, work, ckpt, platform, power))
        return t, e

    t_t, e_t = at(t_opt.period)
    t_e, e_e = at(e_opt.period)
    return StrategyComparison(t_opt, e_opt, t_t, t_e, e_t, e_e)
