"""Analytical time and energy model for periodic non-blocking coordinated checkpointing.

All durations are in minutes, all powers in milliwatts and all energies in
milliwatt-minutes. An infinite MTBF (``math.inf``) denotes a failure-free platform.

The closed forms are written so that the period argument may be a scalar or a
numpy array; the dataclass-returning wrappers validate the period domain first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

MINUTES_PER_YEAR = 365 * 24 * 60


class ModelError(ValueError):
    """Base class for errors raised by the analytical model."""


class ModelInvalidError(ModelError):
    """The platform MTBF is too small for the first-order model (b <= 0)."""


class DomainError(ModelError):
    """A checkpoint period lies outside the admissible period domain."""


class InfeasibleScenarioError(ModelError):
    """The period domain is empty."""


@dataclass(frozen=True)
class CheckpointParams:
    c: float
    r: float
    d: float
    omega: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"checkpoint cost c must be > 0, got {self.c}")
        if not self.r >= 0:
            raise ValueError(f"recovery r must be >= 0, got {self.r}")
        if not self.d >= 0:
            raise ValueError(f"downtime d must be >= 0, got {self.d}")
        if not 0 <= self.omega <= 1:
            raise ValueError(f"omega must be in [0, 1], got {self.omega}")


@dataclass(frozen=True)
class PowerProfile:
    p_static: float
    p_cal: float
    p_io: float
    p_down: float = 0.0

    def __post_init__(self):
        if not (self.p_static > 0 and math.isfinite(self.p_static)):
            raise ValueError(f"p_static must be finite and > 0, got {self.p_static}")
        for name in ("p_cal", "p_io", "p_down"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @property
    def alpha(self) -> float:
        return self.p_cal / self.p_static

    @property
    def beta(self) -> float:
        return self.p_io / self.p_static

    @property
    def gamma(self) -> float:
        return self.p_down / self.p_static

    @property
    def rho(self) -> float:
        return power_ratio_rho(self)

    def scaled(self, factor: float) -> PowerProfile:
        return PowerProfile(self.p_static * factor, self.p_cal * factor,
                            self.p_io * factor, self.p_down * factor)


@dataclass(frozen=True)
class Platform:
    """``n_nodes`` identical resources of individual MTBF ``mtbf_ind``.

    Use :meth:`from_mtbf` to describe a platform by its aggregate MTBF only.
    """
    n_nodes: int
    mtbf_ind: float

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 1:
            raise ValueError(f"n_nodes must be a positive integer, got {self.n_nodes}")
        if not self.mtbf_ind > 0:
            raise ValueError(f"mtbf_ind must be > 0, got {self.mtbf_ind}")

    @classmethod
    def from_mtbf(cls, mtbf: float) -> Platform:
        return cls(n_nodes=1, mtbf_ind=mtbf)

    @property
    def mtbf(self) -> float:
        return platform_mtbf(self.n_nodes, self.mtbf_ind)

    def with_nodes(self, n_nodes: int) -> Platform:
        return replace(self, n_nodes=n_nodes)


@dataclass(frozen=True)
class Workload:
    t_base: float = 1.0

    def __post_init__(self):
        if not self.t_base > 0:
            raise ValueError(f"t_base must be > 0, got {self.t_base}")


@dataclass(frozen=True)
class ModelConstants:
    a: float
    b: float


@dataclass(frozen=True)
class PeriodDomain:
    """Admissible periods: ``lower <= T < upper`` and ``T > a``."""
    lower: float
    upper: float
    a: float = 0.0

    def __contains__(self, period) -> bool:
        return self.lower <= period < self.upper and period > self.a


@dataclass(frozen=True)
class TimeBreakdown:
    period: float
    t_ff: float
    t_fails: float
    t_final: float


@dataclass(frozen=True)
class EnergyBreakdown:
    t_cal: float
    t_io: float
    t_down: float
    e_final: float | None = None


def platform_mtbf(n_nodes: int, mtbf_ind: float) -> float:
    if n_nodes < 1:
        raise ValueError(f"n_nodes must be >= 1, got {n_nodes}")
    if not mtbf_ind > 0:
        raise ValueError(f"mtbf_ind must be > 0, got {mtbf_ind}")
    return mtbf_ind / n_nodes


def derived_constants(ckpt: CheckpointParams, platform: Platform) -> ModelConstants:
    mu = platform.mtbf
    a = (1 - ckpt.omega) * ckpt.c
    if math.isinf(mu):
        return ModelConstants(a, 1.0)
    b = 1 - (ckpt.d + ckpt.r + ckpt.omega * ckpt.c) / mu
    if b <= 0:
        raise ModelInvalidError(
            f"model invalid: MTBF too small (mu={mu:g} <= D+R+omega*C="
            f"{ckpt.d + ckpt.r + ckpt.omega * ckpt.c:g})")
    return ModelConstants(a, b)


def period_domain(ckpt: CheckpointParams, platform: Platform) -> PeriodDomain:
    k = derived_constants(ckpt, platform)
    mu = platform.mtbf
    upper = math.inf if math.isinf(mu) else 2 * mu * k.b
    if not ckpt.c < upper:
        raise InfeasibleScenarioError(
            f"empty period domain: C={ckpt.c:g} >= 2*mu*b={upper:g}")
    return PeriodDomain(ckpt.c, upper, k.a)


def _check_period(period, ckpt, platform) -> PeriodDomain:
    dom = period_domain(ckpt, platform)
    periods = np.atleast_1d(period)
    ok = (periods >= dom.lower) & (periods < dom.upper) & (periods > dom.a)
    if not np.all(ok):
        bad = periods[~ok][0]
        raise DomainError(
            f"period {bad:g} outside domain [{dom.lower:g}, {dom.upper:g}) with T > {dom.a:g}")
    return dom


def t_final_curve(period, work: Workload, ckpt: CheckpointParams, platform: Platform):
    """Expected makespan for scalar or array periods, without domain checks."""
    k = derived_constants(ckpt, platform)
    mu = platform.mtbf
    period = np.asarray(period, dtype=float)
    fail_term = 0.0 if math.isinf(mu) else period / (2 * mu)
    return work.t_base * period / ((period - k.a) * (k.b - fail_term))


def _phase_times(period, work, ckpt, platform, t_final):
    mu = platform.mtbf
    c, omega = ckpt.c, ckpt.omega
    period = np.asarray(period, dtype=float)
    n_fail = 0.0 if math.isinf(mu) else t_final / mu
    reexec = omega * c + (period ** 2 - c ** 2) / (2 * period) + omega * c ** 2 / (2 * period)
    t_cal = work.t_base + n_fail * reexec
    t_io = work.t_base * c / (period - (1 - omega) * c) + n_fail * (ckpt.r + c ** 2 / (2 * period))
    t_down = n_fail * ckpt.d
    return t_cal, t_io, t_down


def energy_curve(period, work: Workload, ckpt: CheckpointParams, platform: Platform,
                 power: PowerProfile):
    """Expected energy for scalar or array periods, without domain checks."""
    t_final = t_final_curve(period, work, ckpt, platform)
    t_cal, t_io, t_down = _phase_times(period, work, ckpt, platform, t_final)
    return (t_cal * power.p_cal + t_io * power.p_io + t_down * power.p_down
            + t_final * power.p_static)


def expected_total_time(period: float, work: Workload, ckpt: CheckpointParams,
                        platform: Platform) -> TimeBreakdown:
    _check_period(period, ckpt, platform)
    t_ff = work.t_base * period / (period - (1 - ckpt.omega) * ckpt.c)
    if math.isinf(platform.mtbf):
        return TimeBreakdown(period, t_ff, 0.0, t_ff)
    t_final = float(t_final_curve(period, work, ckpt, platform))
    return TimeBreakdown(period, t_ff, t_final - t_ff, t_final)


def energy_breakdown(period: float, work: Workload, ckpt: CheckpointParams,
                     platform: Platform, t_final: float) -> EnergyBreakdown:
    """Phase durations (compute, I/O, down) at ``period``; ``e_final`` left unset."""
    _check_period(period, ckpt, platform)
    t_cal, t_io, t_down = _phase_times(period, work, ckpt, platform, t_final)
    return EnergyBreakdown(float(t_cal), float(t_io), float(t_down))


def total_energy(breakdown: EnergyBreakdown, t_final: float, power: PowerProfile) -> float:
    return (breakdown.t_cal * power.p_cal + breakdown.t_io * power.p_io
            + breakdown.t_down * power.p_down + t_final * power.p_static)


def power_ratio_rho(power: PowerProfile) -> float:
    return (power.p_static + power.p_io) / (power.p_static + power.p_cal)


def evaluate(period: float, work: Workload, ckpt: CheckpointParams, platform: Platform,
             power: PowerProfile) -> tuple[TimeBreakdown, EnergyBreakdown]:
    """Time breakdown plus energy breakdown with ``e_final`` filled in."""
    tb = expected_total_time(period, work, ckpt, platform)
    eb = energy_breakdown(period, work, ckpt, platform, tb.t_final)
    return tb, replace(eb, e_final=total_energy(eb, tb.t_final, power))
