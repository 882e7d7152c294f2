"""CSV/JSON emission with a versioned schema line.

Every file carries a `generated` timestamp (a comment line in CSV, a key in
JSON); data_section() strips it so reruns can be compared byte for byte.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from pathlib import Path

SCHEMA = "pinlab-schema v1"
SCHEMA_LINE = f"# {SCHEMA}"
GENERATED_PREFIX = "# generated "


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)  # 'inf', '-inf', 'nan'
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if hasattr(v, "item") and not isinstance(v, (str, bytes)):
        return _json_safe(v.item())
    return v


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_table(directory, stem: str, columns, rows, fmt: str = "csv", comments=()) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = [[_json_safe(c) if fmt == "json" else c for c in r] for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(SCHEMA_LINE + "\n")
        buf.write(GENERATED_PREFIX + _now() + "\n")
        for c in comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(c) for c in r])
        path = directory / f"{stem}.csv"
        path.write_text(buf.getvalue())
    elif fmt == "json":
        doc = {"schema": SCHEMA, "generated": _now(), "comments": list(comments),
               "columns": list(columns), "rows": rows}
        path = directory / f"{stem}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def write_summary(directory, stem: str, data: dict) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    doc = {"schema": SCHEMA, "generated": _now(), **_json_safe(data)}
    path = directory / f"{stem}.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    return path


def data_section(path) -> str:
    """File content with the timestamp removed."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        doc = json.loads(text)
        doc.pop("generated", None)
        return json.dumps(doc, sort_keys=True)
    return "".join(l for l in text.splitlines(keepends=True) if not l.startswith(GENERATED_PREFIX))
