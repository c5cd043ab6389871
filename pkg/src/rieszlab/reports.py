"""Report serialization: one JSON document plus one delimited table per run.

The JSON carries everything (parameters, verdicts, oracle provenance, the
table, plot series); the CSV carries only the table, so two runs with the
same configuration and seed produce byte-identical CSVs.  The JSON differs
across runs in its timestamp field alone.  All files are written atomically
(temp file in the target directory, then rename), UTF-8 with LF endings,
decimal points throughout.
"""

from __future__ import annotations

import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FORMAT = "rieszlab-report-v1"

# every numeric claim in a report names the kind of oracle backing it
PROVENANCE = ("closed-form", "quadrature", "monte-carlo", "identity")


class ReportError(ValueError):
    pass


def fmt(value) -> str:
    """Stable field rendering: 17 significant digits for floats."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def csv_text(columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    cols = list(columns)
    lines = [",".join(cols)]
    for row in rows:
        cells = [fmt(v) for v in row]
        if len(cells) != len(cols):
            raise ReportError(f"row width {len(cells)} differs from header width {len(cols)}")
        for c in cells:
            if "," in c or "\n" in c or '"' in c:
                raise ReportError(f"field {c!r} needs quoting; report fields stay delimiter-free")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence]) -> Path:
    return atomic_write_text(path, csv_text(columns, rows))


def report_payload(
    experiment: str,
    params: dict,
    passed: bool,
    verdicts: dict,
    oracles: Sequence[dict],
    columns: Sequence[str],
    rows: Sequence[Sequence],
    plot_series: Sequence[dict] = (),
) -> dict:
    for o in oracles:
        if o.get("provenance") not in PROVENANCE:
            raise ReportError(f"oracle {o.get('name')!r} has provenance {o.get('provenance')!r}, expected one of {PROVENANCE}")
    for s in plot_series:
        if set(s) < {"series", "x", "y"} or len(s["x"]) != len(s["y"]):
            raise ReportError("plot series need series/x/y with matching lengths")
    return {
        "format": FORMAT,
        "experiment": experiment,
        "params": dict(params),
        "passed": bool(passed),
        "verdicts": verdicts,
        "oracles": list(oracles),
        "columns": list(columns),
        "rows": [list(r) for r in rows],
        "plot_series": [dict(s) for s in plot_series],
    }


def write_json(path, payload: dict) -> Path:
    stamped = {"format": payload["format"], "experiment": payload["experiment"],
               "generated_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")}
    stamped.update({k: v for k, v in payload.items() if k not in ("format", "experiment")})
    return atomic_write_text(path, json.dumps(stamped, indent=2, ensure_ascii=False, default=_json_default) + "\n")


def load_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ReportError(f"cannot parse report {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ReportError(f"{path} is not a {FORMAT} document")
    return data


def plot_rows(report: dict) -> tuple:
    """Long-format (series, x, y) rows from a report's plot series."""
    columns = ("series", "x", "y")
    rows = []
    for s in report.get("plot_series", []):
        try:
            name, xs, ys = s["series"], s["x"], s["y"]
        except (TypeError, KeyError) as exc:
            raise ReportError(f"malformed plot series entry: {s!r}") from exc
        if len(xs) != len(ys):
            raise ReportError(f"series {name!r} has {len(xs)} x values and {len(ys)} y values")
        rows.extend((name, x, y) for x, y in zip(xs, ys))
    return columns, rows
