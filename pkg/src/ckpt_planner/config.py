"""Run configuration: INI-style files with ``--set section.key=value`` overrides.

Durations accept ``min``, ``h``, ``d`` and ``y`` suffixes and powers accept
``mW``, ``W`` and ``MW``; everything is normalised to minutes and milliwatts.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .model import MINUTES_PER_YEAR, CheckpointParams, Platform, PowerProfile, Workload
from .scenarios import PRESETS, Scenario

DURATION_UNITS = {"min": 1.0, "m": 1.0, "h": 60.0, "d": 24 * 60.0, "y": float(MINUTES_PER_YEAR)}
POWER_UNITS = {"mw": 1.0, "w": 1e3, "megaw": 1e9}

SECTIONS = {
    "platform": {"n_nodes", "mtbf_ind", "mtbf"},
    "checkpoint": {"c", "r", "d", "omega"},
    "power": {"p_static", "p_cal", "p_io", "p_down"},
    "workload": {"t_base"},
    "run": {"preset", "trials", "seed", "tolerance", "period", "axis", "values", "figure"},
}
DURATION_KEYS = {"platform.mtbf_ind", "platform.mtbf", "checkpoint.c", "checkpoint.r",
                 "checkpoint.d", "workload.t_base"}
POWER_KEYS = {"power.p_static", "power.p_cal", "power.p_io", "power.p_down"}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([A-Za-z]*)\s*$")


class ConfigError(ValueError):
    """Malformed configuration text."""


class ValidationError(ValueError):
    """A configuration value violates a model constraint; names the offending key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    preset: str | None = None
    options: dict = field(default_factory=dict)
    explicit: frozenset = frozenset()

    def option(self, name, default=None):
        return self.options.get(name, default)


def parse_duration(text: str, key: str = "duration") -> float:
    m = _NUMBER.match(str(text))
    if not m:
        raise ValidationError(key, f"cannot parse duration {text!r}")
    unit = m.group(2) or "min"
    if unit not in DURATION_UNITS:
        raise ValidationError(key, f"unknown duration unit {unit!r} (use min, h, d, y)")
    return float(m.group(1)) * DURATION_UNITS[unit]


def parse_power(text: str, key: str = "power") -> float:
    m = _NUMBER.match(str(text))
    if not m:
        raise ValidationError(key, f"cannot parse power {text!r}")
    unit = m.group(2) or "mW"
    # MW and mW differ only by case
    norm = "megaw" if unit == "MW" else unit.lower()
    if norm not in POWER_UNITS:
        raise ValidationError(key, f"unknown power unit {unit!r} (use mW, W, MW)")
    return float(m.group(1)) * POWER_UNITS[norm]


def _read_text(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: parse error at line {exc.lineno}: missing section header") from None
    except configparser.ParsingError as exc:
        errors = getattr(exc, "errors", None)
        lineno = errors[0][0] if errors else "?"
        raise ConfigError(f"{source}: parse error at line {lineno}") from None
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", "?")
        raise ConfigError(f"{source}: parse error at line {lineno}: {exc.message}") from None
    raw = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ValidationError(section, f"unknown section (expected one of {sorted(SECTIONS)})")
        for key, value in parser.items(section):
            if key not in SECTIONS[section]:
                raise ValidationError(f"{section}.{key}", "unknown key")
            raw[f"{section}.{key}"] = value
    return raw


def _parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form section.key=value")
    key, value = item.split("=", 1)
    key = key.strip()
    section, _, name = key.partition(".")
    if section not in SECTIONS or name not in SECTIONS[section]:
        raise ValidationError(key, "unknown key")
    return key, value.strip()


def _number(raw, key):
    if key in DURATION_KEYS:
        return parse_duration(raw[key], key)
    if key in POWER_KEYS:
        return parse_power(raw[key], key)
    try:
        return float(raw[key])
    except ValueError:
        raise ValidationError(key, f"expected a number, got {raw[key]!r}") from None


def _preset_values(name: str) -> dict:
    spec = PRESETS[name]
    vals = {
        "checkpoint.c": spec["ckpt"].c, "checkpoint.r": spec["ckpt"].r,
        "checkpoint.d": spec["ckpt"].d, "checkpoint.omega": spec["ckpt"].omega,
        "power.p_static": spec["power"].p_static, "power.p_cal": spec["power"].p_cal,
        "power.p_io": spec["power"].p_io, "power.p_down": spec["power"].p_down,
        "workload.t_base": 1.0, "platform.mtbf_ind": spec["mtbf_ind"],
    }
    if "n_nodes" in spec:
        vals["platform.n_nodes"] = float(spec["n_nodes"])
    else:
        vals["platform.mtbf"] = spec["mtbf"]
    return vals


def _build_platform(vals: dict, explicit: set) -> Platform:
    n = vals.get("platform.n_nodes")
    if n is not None and (n != int(n) or n < 1):
        raise ValidationError("platform.n_nodes", f"must be a positive integer, got {n:g}")
    n = None if n is None else int(n)
    for key in ("platform.mtbf", "platform.mtbf_ind"):
        if key in vals and not vals[key] > 0:
            raise ValidationError(key, f"must be > 0, got {vals[key]:g}")
    mtbf_wins = "platform.mtbf" in explicit and "platform.mtbf_ind" not in explicit
    if n is not None and "platform.mtbf_ind" in vals and not mtbf_wins:
        return Platform(n, vals["platform.mtbf_ind"])
    if "platform.mtbf" in vals:
        if n is not None:
            return Platform(n, vals["platform.mtbf"] * n)
        return Platform.from_mtbf(vals["platform.mtbf"])
    if "platform.mtbf_ind" in vals:
        return Platform(n or 1, vals["platform.mtbf_ind"])
    raise ValidationError("platform.mtbf", "missing (give platform.mtbf or platform.mtbf_ind)")


def _build_scenario(name, vals, explicit) -> Scenario:
    required = ["checkpoint.c", "checkpoint.r", "checkpoint.d", "checkpoint.omega",
                "power.p_static", "power.p_cal", "power.p_io"]
    for key in required:
        if key not in vals:
            raise ValidationError(key, "missing (no preset given)")
    checks = [
        ("checkpoint.c", lambda v: v > 0, "must be > 0"),
        ("checkpoint.r", lambda v: v >= 0, "must be >= 0"),
        ("checkpoint.d", lambda v: v >= 0, "must be >= 0"),
        ("checkpoint.omega", lambda v: 0 <= v <= 1, "must lie in [0, 1]"),
        ("power.p_static", lambda v: 0 < v < math.inf, "must be finite and > 0"),
        ("power.p_cal", lambda v: 0 <= v < math.inf, "must be finite and >= 0"),
        ("power.p_io", lambda v: 0 <= v < math.inf, "must be finite and >= 0"),
        ("power.p_down", lambda v: 0 <= v < math.inf, "must be finite and >= 0"),
        ("workload.t_base", lambda v: v > 0, "must be > 0"),
    ]
    for key, ok, msg in checks:
        if key in vals and not ok(vals[key]):
            raise ValidationError(key, f"{msg}, got {vals[key]:g}")
    ckpt = CheckpointParams(vals["checkpoint.c"], vals["checkpoint.r"],
                            vals["checkpoint.d"], vals["checkpoint.omega"])
    power = PowerProfile(vals["power.p_static"], vals["power.p_cal"], vals["power.p_io"],
                         vals.get("power.p_down", 0.0))
    work = Workload(vals.get("workload.t_base", 1.0))
    return Scenario(name or "custom", work, ckpt, _build_platform(vals, explicit), power)


def _run_options(raw: dict) -> dict:
    opts = {}
    for key, value in raw.items():
        if not key.startswith("run.") or key == "run.preset":
            continue
        name = key[4:]
        if name in ("trials", "seed"):
            try:
                opts[name] = int(value)
            except ValueError:
                raise ValidationError(key, f"expected an integer, got {value!r}") from None
            if name == "trials" and opts[name] < 1:
                raise ValidationError(key, "must be >= 1")
            if name == "seed" and not 0 <= opts[name] < 2 ** 64:
                raise ValidationError(key, "must be an unsigned 64-bit integer")
        elif name == "tolerance":
            try:
                opts[name] = float(value)
            except ValueError:
                raise ValidationError(key, f"expected a number, got {value!r}") from None
            if not opts[name] > 0:
                raise ValidationError(key, "must be > 0")
        else:
            opts[name] = value
    return opts


def parse_config(path: str | Path | None = None, overrides=(), text: str | None = None) -> RunConfig:
    """Parse a config file (or ``text``) and apply ``section.key=value`` overrides."""
    raw = {}
    if path is not None:
        path = Path(path)
        try:
            content = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
        raw.update(_read_text(content, str(path)))
    if text is not None:
        raw.update(_read_text(text, "<text>"))
    for item in overrides:
        key, value = _parse_override(item)
        raw[key] = value

    name = raw.get("run.preset")
    if name is not None and name not in PRESETS:
        raise ValidationError("run.preset", f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    vals = _preset_values(name) if name else {}
    explicit = {k for k in raw if not k.startswith("run.")}
    for key in explicit:
        vals[key] = _number(raw, key)
    scenario = _build_scenario(name, vals, explicit)
    return RunConfig(scenario, name, _run_options(raw), frozenset(explicit))


def scenario_metadata(scenario: Scenario) -> dict:
    """Canonical, exactly round-trippable parameter listing (minutes, mW)."""
    return {
        "platform.n_nodes": str(scenario.platform.n_nodes),
        "platform.mtbf_ind": repr(float(scenario.platform.mtbf_ind)),
        "checkpoint.c": repr(float(scenario.ckpt.c)),
        "checkpoint.r": repr(float(scenario.ckpt.r)),
        "checkpoint.d": repr(float(scenario.ckpt.d)),
        "checkpoint.omega": repr(float(scenario.ckpt.omega)),
        "power.p_static": repr(float(scenario.power.p_static)),
        "power.p_cal": repr(float(scenario.power.p_cal)),
        "power.p_io": repr(float(scenario.power.p_io)),
        "power.p_down": repr(float(scenario.power.p_down)),
        "workload.t_base": repr(float(scenario.work.t_base)),
    }


def config_from_metadata(csv_text: str) -> str:
    """Rebuild config-file text from the ``# section.key = value`` lines of an output file."""
    sections: dict[str, list[str]] = {}
    for line in csv_text.splitlines():
        if not line.startswith("# "):
            continue
        key, sep, value = line[2:].partition(" = ")
        section, dot, name = key.partition(".")
        if sep and dot and section in SECTIONS and name in SECTIONS[section]:
            sections.setdefault(section, []).append(f"{name} = {value}")
    return "\n".join(f"[{s}]\n" + "\n".join(lines) + "\n" for s, lines in sections.items())
