"""Report assembly, sanitizing and serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from datetime import datetime, timezone

import numpy as np

from .problems import validate_schema


def report_timestamp(seed: int | None = None) -> str:
    """``SOURCE_DATE_EPOCH`` when set, the epoch when a seed is given, else now."""
    env = os.environ.get("SOURCE_DATE_EPOCH")
    if env is not None:
        t = datetime.fromtimestamp(int(env), tz=timezone.utc)
    elif seed is not None:
        t = datetime.fromtimestamp(0, tz=timezone.utc)
    else:
        t = datetime.now(tz=timezone.utc).replace(microsecond=0)
    return t.isoformat().replace("+00:00", "Z")


def sanitize(obj, warnings: list, path: str = ""):
    """Plain JSON types; non-finite floats become ``null`` with a warning."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v, warnings, f"{path}/{k}") for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v, warnings, f"{path}/{i}") for i, v in enumerate(obj)]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist(), warnings, path)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            warnings.append(f"non-finite value at {path or '/'} replaced by null")
            return None
        return v
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def make_report(command: str, problem: str, payload: dict, warnings: list, seed: int | None = None) -> dict:
    warnings = list(warnings)
    clean = sanitize(payload, warnings)
    report = {
        "command": command,
        "problem": problem,
        "timestamp": report_timestamp(seed),
        "payload": clean,
        "warnings": warnings,
    }
    validate_schema(report, "report.json")
    return report


def to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def zero_points_csv(points, labels) -> str:
    """Header row, one point per row, stratum label in the last column."""
    P = np.asarray(points, dtype=float)
    k = P.shape[1] if P.ndim == 2 else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(k)] + ["stratum"])
    for p, lab in zip(P.reshape(-1, k) if k else [[]] * len(labels), labels):
        w.writerow([repr(float(v)) for v in p] + [lab])
    return buf.getvalue()
