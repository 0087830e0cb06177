"""Preset Exascale scenarios and one-dimensional parameter sweeps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .model import (MINUTES_PER_YEAR, CheckpointParams, ModelError, Platform, PowerProfile,
                    Workload, energy_curve, period_domain, t_final_curve)
from .optimizer import compare_strategies

# individual processor MTBF: 45,208 processors with about one fault per day
JAGUAR_MTBF_IND = 125 * MINUTES_PER_YEAR
# weak-scaling platform: 120 min at one million nodes
WEAK_MTBF_IND = 120.0 * 1_000_000
WEAK_NODES = 1_000_000

AXES = ("rho", "n_nodes", "mu", "period", "omega")
# rho sweeps keep p_static and p_cal and solve for p_io
RHO_MODE = "fixed_static_cal"


@dataclass(frozen=True)
class Scenario:
    name: str
    work: Workload
    ckpt: CheckpointParams
    platform: Platform
    power: PowerProfile


@dataclass(frozen=True)
class SweepSpec:
    base: Scenario
    axis: str
    values: tuple
    rho_mode: str = RHO_MODE

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        if not self.values:
            raise ValueError("sweep values must be non-empty")
        steps = [b - a for a, b in zip(self.values, self.values[1:])]
        if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
            raise ValueError("sweep values must be strictly monotone")
        if self.rho_mode != RHO_MODE:
            raise ValueError(f"unsupported rho_mode {self.rho_mode!r}")


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    t_opt_time: float = math.nan
    t_opt_energy: float = math.nan
    time_ratio: float = math.nan
    energy_ratio: float = math.nan
    flags: tuple = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return "invalid" not in self.flags


def _s_power(p_static):
    return PowerProfile(p_static=p_static, p_cal=10.0, p_io=100.0, p_down=0.0)


PRESETS = {
    "S1_rho5.5": dict(ckpt=CheckpointParams(10.0, 10.0, 1.0, 0.5), power=_s_power(10.0),
                      mtbf_ind=JAGUAR_MTBF_IND, mtbf=300.0),
    "S2_rho7": dict(ckpt=CheckpointParams(10.0, 10.0, 1.0, 0.5), power=_s_power(5.0),
                    mtbf_ind=JAGUAR_MTBF_IND, mtbf=300.0),
    "WEAK": dict(ckpt=CheckpointParams(1.0, 1.0, 0.1, 0.5), power=_s_power(10.0),
                 mtbf_ind=WEAK_MTBF_IND, n_nodes=WEAK_NODES),
    "WEAK_rho7": dict(ckpt=CheckpointParams(1.0, 1.0, 0.1, 0.5), power=_s_power(5.0),
                      mtbf_ind=WEAK_MTBF_IND, n_nodes=WEAK_NODES),
}


def preset(name: str, n_nodes: int | None = None) -> Scenario:
    """Return a preset scenario.

    S1/S2 default to an aggregate platform MTBF of exactly 300 minutes; pass
    ``n_nodes`` to derive it from the 125-year processor MTBF instead
    (219,150 nodes give about 300 minutes). WEAK presets default to 10^6 nodes.
    """
    try:
        spec = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None
    if n_nodes is not None:
        platform = Platform(int(n_nodes), spec["mtbf_ind"])
    elif "n_nodes" in spec:
        platform = Platform(spec["n_nodes"], spec["mtbf_ind"])
    else:
        platform = Platform.from_mtbf(spec["mtbf"])
    return Scenario(name, Workload(1.0), spec["ckpt"], platform, spec["power"])


def with_rho(power: PowerProfile, rho: float) -> PowerProfile:
    p_io = rho * (power.p_static + power.p_cal) - power.p_static
    return replace(power, p_io=p_io)


def apply_axis(base: Scenario, axis: str, value) -> Scenario:
    if axis == "rho":
        return replace(base, power=with_rho(base.power, value))
    if axis == "n_nodes":
        return replace(base, platform=base.platform.with_nodes(int(value)))
    if axis == "mu":
        return replace(base, platform=Platform.from_mtbf(value))
    if axis == "omega":
        return replace(base, ckpt=replace(base.ckpt, omega=value))
    if axis == "period":
        return base
    raise ValueError(f"unknown sweep axis {axis!r}")


def _row(spec: SweepSpec, value) -> SweepRow:
    try:
        sc = apply_axis(spec.base, spec.axis, value)
        cmp = compare_strategies(sc.ckpt, sc.platform, sc.power, sc.work)
    except (ModelError, ValueError):
        return SweepRow(value, flags=("invalid",))

    flags = []
    if cmp.time_opt.clamped:
        flags.append("clamped_time")
    if cmp.energy_opt.clamped:
        flags.append("clamped_energy")
    if cmp.energy_opt.fallback:
        flags.append("fallback")
    if not cmp.energy_opt.unimodal:
        flags.append("not_unimodal")

    if spec.axis != "period":
        return SweepRow(value, cmp.time_opt.period, cmp.energy_opt.period,
                        cmp.time_ratio, cmp.energy_ratio, tuple(flags))
    # period axis: cost of running at `value` relative to each optimum
    if value not in period_domain(sc.ckpt, sc.platform):
        return SweepRow(value, cmp.time_opt.period, cmp.energy_opt.period,
                        flags=tuple(flags) + ("invalid",))
    t = float(t_final_curve(value, sc.work, sc.ckpt, sc.platform))
    e = float(energy_curve(value, sc.work, sc.ckpt, sc.platform, sc.power))
    return SweepRow(value, cmp.time_opt.period, cmp.energy_opt.period,
                    t / cmp.t_algo_t, e / cmp.e_algo_e, tuple(flags))


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """One row per axis value, in the order given; failures become flagged rows."""
    return [_row(spec, v) for v in spec.values]


def weak_scaling_table(n_values, preset_name: str = "WEAK") -> list[SweepRow]:
    values = tuple(int(n) for n in n_values)
    if any(n < 1 for n in values) or list(values) != sorted(values):
        raise ValueError("n_values must be positive and sorted")
    return run_sweep(SweepSpec(preset(preset_name), "n_nodes", values))
