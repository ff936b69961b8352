"""Number rendering shared by the JSON and CSV writers."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SIG_DIGITS = 9


def number(v):
    """Round to 9 significant digits; non-finite values become strings."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if v is None:
        return None
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    r = float(f"{v:.{SIG_DIGITS}g}")
    return r + 0.0


def clean(obj):
    """Recursively apply `number` to every numeric leaf."""
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, (float, int, np.floating, np.integer, np.bool_)) or obj is None:
        return number(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, ensure_ascii=False) + "\n"


def cell(v) -> str:
    v = number(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cell(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()
