"""``ckpt-planner`` command-line interface."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import (ConfigError, RunConfig, ValidationError, parse_config, parse_duration,
                     scenario_metadata)
from .model import ModelError, evaluate, power_ratio_rho
from .optimizer import compare_strategies, reference_periods
from .report import OPTIMIZE_HEADER, SWEEP_HEADER, VALIDATE_HEADER, render_csv, render_table
from .scenarios import RHO_MODE, SweepSpec, preset, run_sweep
from .simulator import RNG_NAME, SimConfig, validate_against_model

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_MODEL_INVALID = 4
EXIT_TOLERANCE = 5
EXIT_IO = 6

DEFAULT_TRIALS = 10_000
DEFAULT_SEED = 20240601
DEFAULT_TOLERANCE_PCT = 5.0
# long enough that the last partial period is negligible against the mean
VALIDATE_T_BASE = 10_000.0

FIGURES = {
    # rho axis for a few platform MTBFs (C=R=10, D=1, omega=1/2)
    "fig1": dict(axis="rho", values=tuple(1.0 + 0.5 * i for i in range(19)),
                 series=[("S1_rho5.5", mu) for mu in (30.0, 60.0, 120.0, 300.0)]),
    # (mu, rho) grid
    "fig2": dict(axis="rho", values=tuple(float(r) for r in range(1, 11)),
                 series=[("S1_rho5.5", float(mu)) for mu in range(30, 301, 30)]),
    # weak scaling, rho = 5.5 and rho = 7
    "fig3": dict(axis="n_nodes",
                 values=tuple(sorted({int(round(10 ** (5 + k / 4))) for k in range(13)}
                                     | {50_000_000})),
                 series=[("WEAK", None), ("WEAK_rho7", None)]),
}


def _metadata(command: str, cfg: RunConfig, extra: dict | None = None) -> dict:
    meta = {"command": command, "units": "minutes; mW; mW*min"}
    if cfg.preset:
        meta["run.preset"] = cfg.preset
    meta.update(scenario_metadata(cfg.scenario))
    meta.update(extra or {})
    return meta


def cmd_optimize(cfg: RunConfig):
    sc = cfg.scenario
    cmp = compare_strategies(sc.ckpt, sc.platform, sc.power, sc.work)
    young, daly = reference_periods(sc.ckpt, sc.platform)
    rows = [
        ("t_opt_time", cmp.time_opt.period, cmp.t_algo_t, cmp.time_opt.flags),
        ("t_opt_energy", cmp.energy_opt.period, cmp.e_algo_e, cmp.energy_opt.flags),
        ("young_period", young, None, []),
        ("daly_period", daly, None, []),
    ]
    for tag, opt in (("algo_t", cmp.time_opt), ("algo_e", cmp.energy_opt)):
        tb, eb = evaluate(opt.period, sc.work, sc.ckpt, sc.platform, sc.power)
        for name in ("t_ff", "t_fails", "t_final"):
            rows.append((f"{tag}.{name}", opt.period, getattr(tb, name), []))
        for name in ("t_cal", "t_io", "t_down", "e_final"):
            rows.append((f"{tag}.{name}", opt.period, getattr(eb, name), []))
    rows.append(("time_ratio", None, cmp.time_ratio, []))
    rows.append(("energy_ratio", None, cmp.energy_ratio, []))
    rows.append(("rho", None, power_ratio_rho(sc.power), []))
    return OPTIMIZE_HEADER, rows, _metadata("optimize", cfg)


def _resolve_period(spec: str, sc) -> float:
    if spec == "time":
        return compare_strategies(sc.ckpt, sc.platform, sc.power, sc.work).time_opt.period
    if spec == "energy":
        return compare_strategies(sc.ckpt, sc.platform, sc.power, sc.work).energy_opt.period
    return parse_duration(spec, "run.period")


def cmd_validate(cfg: RunConfig):
    sc = cfg.scenario
    if "workload.t_base" not in cfg.explicit:
        sc = replace(sc, work=replace(sc.work, t_base=VALIDATE_T_BASE))
        cfg = replace(cfg, scenario=sc)
    period_spec = cfg.option("period", "time")
    period = _resolve_period(period_spec, sc)
    trials = cfg.option("trials", DEFAULT_TRIALS)
    seed = cfg.option("seed", DEFAULT_SEED)
    tol_pct = cfg.option("tolerance", DEFAULT_TOLERANCE_PCT)
    report = validate_against_model(
        SimConfig(sc.work, sc.ckpt, sc.platform, sc.power, period, trials, seed), tol_pct / 100)
    rows = [(r.quantity, r.analytical, r.empirical, r.rel_gap, r.ci95, r.within_tol)
            for r in report.rows]
    meta = _metadata("validate", cfg, {
        "run.period": period_spec, "period_min": repr(period), "run.trials": trials,
        "run.seed": seed, "run.tolerance": repr(float(tol_pct)), "rng": RNG_NAME,
        "mean_failures": format(report.stats.mean_failures, ".6g"),
    })
    for note in report.notes:
        meta.setdefault("note", note)
    return VALIDATE_HEADER, rows, meta, report.passed


def _parse_values(axis: str, text: str) -> tuple:
    items = [v.strip() for v in text.split(",") if v.strip()]
    if axis in ("mu", "period"):
        return tuple(parse_duration(v, "run.values") for v in items)
    try:
        nums = tuple(float(v) for v in items)
    except ValueError:
        raise ValidationError("run.values", f"cannot parse {text!r}") from None
    if axis == "n_nodes":
        return tuple(int(v) for v in nums)
    return nums


def _sweep_rows(axis, rows, series=None):
    out = []
    for r in rows:
        row = [axis, r.axis_value, r.t_opt_time, r.t_opt_energy, r.time_ratio,
               r.energy_ratio, list(r.flags)]
        if series is not None:
            row.append(series)
        out.append(row)
    return out


def cmd_sweep(cfg: RunConfig):
    axis = cfg.option("axis")
    if axis is None:
        raise ValidationError("run.axis", "missing (one of rho, n_nodes, mu, period, omega)")
    values_text = cfg.option("values")
    if values_text is None:
        raise ValidationError("run.values", "missing (comma-separated list)")
    try:
        spec = SweepSpec(cfg.scenario, axis, _parse_values(axis, values_text))
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("run.axis" if "axis" in str(exc) else "run.values", str(exc)) from None
    rows = _sweep_rows(axis, run_sweep(spec))
    meta = _metadata("sweep", cfg, {"run.axis": axis, "run.values": values_text,
                                    "rho_mode": RHO_MODE})
    return SWEEP_HEADER, rows, meta


def reproduce_rows(figure: str):
    fig = FIGURES[figure]
    rows = []
    for name, mu in fig["series"]:
        sc = preset(name)
        label = name
        if mu is not None:
            sc = replace(sc, platform=replace(sc.platform, n_nodes=1, mtbf_ind=mu))
            label = f"{name}@mu={mu:g}"
        spec = SweepSpec(sc, fig["axis"], fig["values"])
        rows.extend(_sweep_rows(fig["axis"], run_sweep(spec), series=label))
    return rows


def cmd_reproduce(cfg: RunConfig, figure: str):
    if figure not in FIGURES:
        raise ValidationError("run.figure", f"unknown figure {figure!r}; expected fig1, fig2 or fig3")
    rows = reproduce_rows(figure)
    meta = {"command": "reproduce", "units": "minutes; mW; mW*min", "run.figure": figure,
            "rho_mode": RHO_MODE, "presets": ",".join(dict.fromkeys(s for s, _ in FIGURES[figure]["series"]))}
    return SWEEP_HEADER + ["series"], rows, meta


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (INI sections)")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override one configuration key")
    common.add_argument("--out", help="write CSV to this path")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--tolerance", type=float, metavar="PCT")
    common.add_argument("--format", choices=("table", "csv"), default="table",
                        help="stdout format when --out is not given")

    parser = argparse.ArgumentParser(
        prog="ckpt-planner",
        description="Time- and energy-optimal checkpoint periods under failures.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("optimize", parents=[common], help="both optimal periods and breakdowns")
    sub.add_parser("validate", parents=[common], help="Monte Carlo check of the model")
    sub.add_parser("sweep", parents=[common], help="one-dimensional parameter sweep")
    rep = sub.add_parser("reproduce", parents=[common], help="preset figure sweeps")
    rep.add_argument("figure", choices=sorted(FIGURES))
    return parser


def _overrides(args) -> list[str]:
    items = list(args.overrides)
    if args.seed is not None:
        items.append(f"run.seed={args.seed}")
    if args.trials is not None:
        items.append(f"run.trials={args.trials}")
    if args.tolerance is not None:
        items.append(f"run.tolerance={args.tolerance}")
    return items


def _load(args) -> RunConfig | None:
    items = _overrides(args)
    if args.command == "reproduce" and args.config is None and not args.overrides:
        return None
    return parse_config(args.config, items)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    passed = True
    try:
        cfg = _load(args)
        if args.command == "reproduce":
            header, rows, meta = cmd_reproduce(cfg, args.figure)
        elif args.command == "optimize":
            header, rows, meta = cmd_optimize(cfg)
        elif args.command == "validate":
            header, rows, meta, passed = cmd_validate(cfg)
        else:
            header, rows, meta = cmd_sweep(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL_INVALID

    text = render_csv(header, rows, meta)
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
        sys.stdout.write(render_table(header, rows))
    elif args.format == "csv":
        sys.stdout.write(text)
    else:
        sys.stdout.write(render_table(header, rows))
    if not passed:
        print("validation outside tolerance", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
