"""Monte Carlo execution of the periodic checkpoint protocol under exponential failures.

Each period is ``T - C`` minutes of computation followed by a checkpoint of
``C`` minutes during which work progresses at rate ``omega``. A checkpoint
saves the state captured when it started, so the ``omega * C`` work done while
it is being written is only committed by the next checkpoint. A failure
(platform-wide exponential clock, mean ``mu``) rolls back to the last committed
state after a downtime ``D`` and a recovery ``R``; a failure during either of
those restarts the downtime.

Random numbers: numpy ``PCG64`` bit generators, one per trial, seeded with
``SeedSequence(entropy=seed, spawn_key=(trial_index,))``. Trial outcomes are
therefore independent of the order in which trials are executed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (CheckpointParams, DomainError, ModelError, Platform, PowerProfile,
                    Workload, evaluate)

RNG_NAME = f"numpy {np.__version__} PCG64 / SeedSequence(seed, spawn_key=(trial,))"
_BLOCK = 256


@dataclass(frozen=True)
class SimConfig:
    work: Workload
    ckpt: CheckpointParams
    platform: Platform
    power: PowerProfile
    period: float
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.period < self.ckpt.c or self.period <= (1 - self.ckpt.omega) * self.ckpt.c:
            raise DomainError(f"period {self.period:g} must be >= C and > (1-omega)C")


@dataclass(frozen=True)
class SimOutcome:
    total_time: float
    time_compute: float
    time_checkpoint: float
    time_down: float
    time_recovery: float
    energy: float
    failures: int


@dataclass(frozen=True)
class BatchStats:
    trials: int
    mean_time: float
    ci95_time: float
    mean_energy: float
    ci95_energy: float
    mean_failures: float
    ci95_failures: float


@dataclass(frozen=True)
class ValidationRow:
    quantity: str
    analytical: float
    empirical: float
    rel_gap: float
    ci95: float
    within_tol: bool


@dataclass(frozen=True)
class ValidationReport:
    rows: list[ValidationRow]
    stats: BatchStats
    tolerance: float
    model_valid: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.model_valid and all(r.within_tol for r in self.rows)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial,))))


class _Exponential:
    """Buffered exponential draws with mean ``mu``."""

    def __init__(self, rng, mu):
        self.rng, self.mu = rng, mu
        self.buf, self.i = None, _BLOCK

    def __call__(self) -> float:
        if math.isinf(self.mu):
            return math.inf
        if self.i == _BLOCK:
            self.buf = self.rng.standard_exponential(_BLOCK) * self.mu
            self.i = 0
        x = self.buf[self.i]
        self.i += 1
        return float(x)


def _time_to_achieve(work, period, c, omega):
    """Earliest time, from a period start, at which ``work`` units are done."""
    if work <= 0:
        return 0.0
    per_period = period - (1 - omega) * c
    compute = period - c
    k = max(math.ceil(work / per_period), 1)
    rem = work - (k - 1) * per_period
    if rem <= compute:
        return (k - 1) * period + rem
    return (k - 1) * period + compute + (rem - compute) / omega


def _split_phases(elapsed, period, c):
    """Compute and checkpoint wall time within ``elapsed`` minutes of periods."""
    m = int(elapsed // period)
    u = min(max(elapsed - m * period, 0.0), period)
    compute = period - c
    return m * compute + min(u, compute), m * c + max(u - compute, 0.0)


def run_trial(config: SimConfig, rng: np.random.Generator, trace: list | None = None) -> SimOutcome:
    """Simulate one execution; ``trace`` (if given) receives the committed work after each rollback."""
    ckpt, period = config.ckpt, config.period
    c, omega, d, r = ckpt.c, ckpt.omega, ckpt.d, ckpt.r
    per_period = period - (1 - omega) * c
    draw = _Exponential(rng, config.platform.mtbf)

    committed = 0.0
    t_comp = t_ckpt = t_down = t_rec = 0.0
    failures = 0
    while True:
        t_done = _time_to_achieve(config.work.t_base - committed, period, c, omega)
        strike = draw()
        if strike >= t_done:
            dc, dk = _split_phases(t_done, period, c)
            t_comp += dc
            t_ckpt += dk
            break
        dc, dk = _split_phases(strike, period, c)
        t_comp += dc
        t_ckpt += dk
        done_ckpts = int(strike // period)
        if done_ckpts >= 1:
            committed += done_ckpts * per_period - omega * c
        if trace is not None:
            trace.append(committed)
        failures += 1
        while True:
            x = draw()
            if x < d:
                t_down += x
                failures += 1
                continue
            t_down += d
            y = draw()
            if y < r:
                t_rec += y
                failures += 1
                continue
            t_rec += r
            break

    p = config.power
    energy = (t_comp * (p.p_static + p.p_cal)
              + t_ckpt * (p.p_static + omega * p.p_cal + p.p_io)
              + t_down * (p.p_static + p.p_down)
              + t_rec * (p.p_static + p.p_io))
    total = t_comp + t_ckpt + t_down + t_rec
    return SimOutcome(total, t_comp, t_ckpt, t_down, t_rec, energy, failures)


def run_trials(config: SimConfig, indices) -> list[SimOutcome]:
    return [run_trial(config, trial_rng(config.seed, i)) for i in indices]


def _mean_ci(values):
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(1.96 * arr.std(ddof=1) / math.sqrt(arr.size))


def summarize(outcomes: list[SimOutcome]) -> BatchStats:
    mt, ct = _mean_ci([o.total_time for o in outcomes])
    me, ce = _mean_ci([o.energy for o in outcomes])
    mf, cf = _mean_ci([o.failures for o in outcomes])
    return BatchStats(len(outcomes), mt, ct, me, ce, mf, cf)


def run_batch(config: SimConfig) -> BatchStats:
    return summarize(run_trials(config, range(config.trials)))


def validate_against_model(config: SimConfig, tolerance: float = 0.05) -> ValidationReport:
    stats = run_batch(config)
    notes = []
    try:
        tb, eb = evaluate(config.period, config.work, config.ckpt, config.platform, config.power)
        analytical = {"time": tb.t_final, "energy": eb.e_final}
        valid = True
    except ModelError as exc:
        notes.append(f"analytical model unavailable: {exc}")
        analytical = {"time": math.nan, "energy": math.nan}
        valid = False

    empirical = {"time": (stats.mean_time, stats.ci95_time),
                 "energy": (stats.mean_energy, stats.ci95_energy)}
    rows = []
    for name in ("time", "energy"):
        emp, ci = empirical[name]
        ana = analytical[name]
        gap = abs(emp - ana) / ana if valid and ana != 0 else (0.0 if emp == ana else math.nan)
        rows.append(ValidationRow(name, ana, emp, gap, ci, bool(gap <= tolerance)))
    return ValidationReport(rows, stats, tolerance, valid, notes)
