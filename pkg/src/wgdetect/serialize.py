"""CSV and JSON output for reports and sweeps."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import IO, Any

from .model import DetectionReport, ScatterSolution
from .sweep import SweepResult

CSV_HEADER = ("param1", "param2", "eta", "p_t", "p_r", "p_q", "p_a", "p_b", "conversion", "status")
REPORT_FIELDS = ("eta", "p_t", "p_r", "p_q", "p_a", "p_b", "conversion")


def fmt(x: float) -> str:
    return format(x, ".17g")


def _row(coord, report: DetectionReport | None, status: str) -> list[str]:
    params = [fmt(c) for c in coord] + [""] * (2 - len(coord))
    if report is None:
        return params + [""] * len(REPORT_FIELDS) + [status]
    return params + [fmt(getattr(report, f)) for f in REPORT_FIELDS] + [status]


def write_csv(result: SweepResult, stream: IO[str]) -> None:
    """Row-major grid, comma-delimited, LF line endings."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for coord, cell, status in zip(result.coords, result.cells, result.status):
        w.writerow(_row(coord, cell, status))


def report_csv(report: DetectionReport, stream: IO[str]) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerow(_row((), report, "ok"))


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def solution_to_json(sol: ScatterSolution) -> dict[str, list[float]]:
    return {k: [v.real, v.imag] for k, v in zip(sol.labels(), sol.as_tuple())}


def report_to_json(report: DetectionReport) -> dict[str, Any]:
    out = {f: getattr(report, f) for f in REPORT_FIELDS}
    out["shares"] = report.shares()
    out["conversion_share"] = report.conversion_share
    out["amplitudes"] = solution_to_json(report.solution)
    return out


def sweep_to_json(result: SweepResult, manifest: dict) -> dict[str, Any]:
    cells = []
    for coord, cell, status in zip(result.coords, result.cells, result.status):
        entry = {"coords": list(coord), "status": status}
        if cell is not None:
            entry.update(report_to_json(cell))
        cells.append(entry)
    return {"manifest": manifest, "axes": [a.to_dict() for a in result.axes], "cells": cells}


def _clean(obj):
    # JSON has no inf/nan; keep the file strictly valid.
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dump_json(obj: Any, stream: IO[str]) -> None:
    json.dump(_clean(obj), stream, indent=2)
    stream.write("\n")


def write_json(obj: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_json(obj, fh)
