"""Deterministic writers: CSV at 17 significant digits with LF endings, JSON
with sorted keys.  Non-finite numbers never reach a file as NaN."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

MONITOR_HEADER = ("t", "sup_ut", "sup_grad", "energy", "dissipation_residual", "mean_u",
                  "aux_w_max")
EIGEN_HEADER = ("delta", "lambda_estimate", "residual", "sup_grad", "sup_delta_u")


class NonFiniteOutputError(ValueError):
    pass


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        raise NonFiniteOutputError("refusing to write NaN")
    return "%.17g" % x


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_monitors(path, monitors) -> Path:
    return write_csv(path, MONITOR_HEADER, monitors.rows())


def write_eigen(path, eig) -> Path:
    return write_csv(path, EIGEN_HEADER, eig.rows())


def sanitize(obj):
    """JSON-safe copy: numpy scalars to Python, +-inf to strings, NaN to null."""
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
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(sanitize(obj), sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", newline="\n") as fh:
        fh.write(text + "\n")
    return path
