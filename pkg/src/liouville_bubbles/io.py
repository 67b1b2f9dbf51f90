"""Field dumps (CSV) and deterministic JSON records."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def write_field_csv(path, grid, values, name="value"):
    """Write columns i, j, x, y, value with 17 significant digits."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "x", "y", name])
        for i, j, x, y, v in zip(grid.i, grid.j, grid.x, grid.y, values):
            w.writerow([int(i), int(j), f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"])


def read_field_csv(path, grid):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    out = np.zeros(grid.size)
    out[grid.index[data[:, 0].astype(int), data[:, 1].astype(int)]] = data[:, 4]
    return out


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))
