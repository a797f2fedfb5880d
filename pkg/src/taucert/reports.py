"""Deterministic report emission: aligned tables and line-delimited records.

Records are one JSON object per line with a versioned schema tag, sorted
keys, and compact separators, so identical runs are byte-identical and CI
can diff them.  Non-finite floats are encoded as the strings "inf", "-inf",
"nan" to stay inside strict JSON.
"""

from __future__ import annotations

import json
import math

import numpy as np

SCHEMA = "taucert.v1"

__all__ = ["SCHEMA", "sanitize", "record_line", "render_records", "render_table"]


def sanitize(obj):
    """Recursively convert a payload into strict-JSON-safe primitives."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        val = float(obj)
        if math.isnan(val):
            return "nan"
        if val == math.inf:
            return "inf"
        if val == -math.inf:
            return "-inf"
        return val
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def record_line(record: str, payload: dict) -> str:
    body = {"schema": SCHEMA, "record": record}
    body.update(sanitize(payload))
    return json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)


def render_records(records) -> str:
    """records: iterable of (record_name, payload dict) -> one line each."""
    return "".join(record_line(name, payload) + "\n" for name, payload in records)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if value != value:
            return "nan"
        if value in (math.inf, -math.inf):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value)


def render_table(title: str, header, rows) -> str:
    """Fixed-width text table; header is a list of column names."""
    cells = [[_cell(v) for v in row] for row in rows]
    widths = [len(h) for h in header]
    for row in cells:
        for j, text in enumerate(row):
            widths[j] = max(widths[j], len(text))
    lines = [title]
    lines.append("  ".join(h.ljust(widths[j]) for j, h in enumerate(header)).rstrip())
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(t.ljust(widths[j]) for j, t in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"
