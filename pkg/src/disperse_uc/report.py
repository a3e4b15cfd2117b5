"""Experiment reports: construction, JSON and CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from typing import Any

import numpy as np

from .experiments import RUNNERS, ExperimentConfig

ARTIFACT_VERSION = "0.1.0"


def to_native(obj: Any) -> Any:
    """Convert numpy scalars and containers to plain JSON-compatible values."""
    if isinstance(obj, dict):
        return {str(k): to_native(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_native(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_native(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def run_experiment(cfg: ExperimentConfig) -> tuple[dict, list[dict]]:
    """Run one configuration; returns the report and its (x, y) series."""
    start = time.perf_counter()
    out = RUNNERS[cfg.experiment](cfg)
    wall = time.perf_counter() - start
    report = {
        "config": cfg.to_dict(),
        "results": out.results,
        "primary": out.primary,
        "pass": bool(out.passed),
        "tolerance": out.tolerance,
        "wall_time": wall,
        "artifact_version": ARTIFACT_VERSION,
    }
    return to_native(report), to_native(out.series)


def dumps(report: dict) -> str:
    return json.dumps(to_native(report), sort_keys=True, indent=2, ensure_ascii=False)


def write_json(report: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(report))
        fh.write("\n")


def csv_text(rows: list[dict], columns: list[str] | None = None) -> str:
    """Delimited text with a header row, even when ``rows`` is empty."""
    if columns is None:
        columns = list(rows[0]) if rows else ["x", "y"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _cell(r.get(k)) for k in columns})
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else v


def write_csv(rows: list[dict], path: str, columns: list[str] | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows, columns))


def summarize(values: list[float]) -> dict:
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return {"min": None, "max": None, "ratio": None, "count": 0}
    lo, hi = min(vals), max(vals)
    ratio = hi / lo if lo > 0 else None
    return {"min": lo, "max": hi, "ratio": ratio, "count": len(vals)}
