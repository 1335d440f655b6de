"""
Plain-text data files.

Every file starts with one ``#`` line holding a JSON metadata object (sorted
keys), followed by a tab-separated header row and the data rows.  Floats are
written with ``%.17g`` so they round-trip exactly and do not depend on the
locale.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import TimeSeries

__all__ = ["format_value", "write_table", "read_table", "write_timeseries", "to_jsonable"]


def format_value(value) -> str:
    """Locale-independent text for one cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON types."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_table(path, columns: Sequence[str], rows, meta: Mapping | None = None) -> Path:
    """Write ``rows`` (an iterable of sequences) under ``columns``."""
    path = Path(path)
    lines = ["# " + json.dumps(to_jsonable(meta or {}), sort_keys=True),
             "\t".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
        lines.append("\t".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_timeseries(path, series: TimeSeries, meta: Mapping | None = None,
                     channels: Sequence[str] | None = None) -> Path:
    names = list(series.channels) if channels is None else list(channels)
    data = [series.times] + [series.channels[k] for k in names]
    rows = list(zip(*data))
    merged = dict(series.meta)
    merged.update(meta or {})
    return write_table(path, ["t"] + names, rows, merged)


def read_table(path):
    """Inverse of :func:`write_table`: returns ``(meta, columns)`` with float arrays
    where every cell parses as a number and string lists otherwise."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    meta = json.loads(text[0][2:]) if text and text[0].startswith("# ") else {}
    body = text[1:] if meta or (text and text[0].startswith("#")) else text
    header = body[0].split("\t")
    cells = [line.split("\t") for line in body[1:] if line]
    columns = {}
    for k, name in enumerate(header):
        col = [c[k] for c in cells]
        try:
            columns[name] = np.array([float(v) for v in col])
        except ValueError:
            columns[name] = col
    return meta, columns
