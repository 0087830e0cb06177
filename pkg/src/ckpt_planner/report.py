"""CSV and plain-text rendering of command results."""
from __future__ import annotations

import csv
import io
import math

from . import __version__

OPTIMIZE_HEADER = ["metric", "period_min", "value", "flag"]
SWEEP_HEADER = ["axis", "axis_value", "t_opt_time_min", "t_opt_energy_min",
                "time_ratio", "energy_ratio", "flags"]
VALIDATE_HEADER = ["quantity", "analytical", "empirical", "rel_gap", "ci95", "within_tol"]


def fmt(value) -> str:
    """Six significant digits; booleans as true/false; blanks for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        if isinstance(value, float) and math.isnan(value):
            return "nan"
        return format(value, ".6g")
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def render_csv(header, rows, metadata: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# version = {__version__}\n")
    for key, value in metadata.items():
        buf.write(f"# {key} = {value}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def render_table(header, rows) -> str:
    cells = [list(header)] + [[fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
