"""Per-iteration history records and their CSV/JSON serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("k", "residual_norm", "reg_value", "error_to_pinv",
               "error_to_rmin", "error_to_exact_limit")

FLAG_FIRED = "fired"
FLAG_BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass
class StopInfo:
    """Echo of the stopping rule, the index it fired at (None if it never
    fired), and the run flag."""

    rule: dict
    fired_index: int | None
    flag: str


@dataclass
class ExperimentRecord:
    """History of one run: rows of (k, residual, reg value, errors to the
    three reference solutions), stop metadata, and the config echo."""

    rows: np.ndarray  # (n_rows, 6) float64, NaN for absent error columns
    stop: StopInfo
    config: dict
    delta: float | None = None

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float64).reshape(-1, 6)
        ks = self.rows[:, 0]
        if ks.size and np.any(np.diff(ks) <= 0):
            raise ValueError("record rows must be strictly increasing in k")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, CSV_COLUMNS.index(name)]

    def final_row(self) -> np.ndarray:
        return self.rows[-1]


def _fmt(value: float) -> str:
    # 17 significant digits: enough for exact float64 round-trips
    return f"{value:.17g}"


def _rows_to_lists(rows: np.ndarray) -> list:
    out = []
    for row in rows:
        out.append([int(row[0])] + [float(v) for v in row[1:]])
    return out


def emit(record: ExperimentRecord, fmt: str, path) -> Path:
    """Write one record to ``path`` as CSV or JSON (UTF-8, LF endings).

    CSV has exactly the columns in ``CSV_COLUMNS``; JSON mirrors them and
    adds the stop metadata and config echo. An empty record gives a
    header-only CSV.
    """
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for row in record.rows:
            lines.append(",".join([str(int(row[0]))]
                                  + [_fmt(v) for v in row[1:]]))
        text = "\n".join(lines) + "\n"
        path.write_text(text, encoding="utf-8", newline="\n")
    elif fmt == "json":
        payload = {
            "columns": list(CSV_COLUMNS),
            "rows": _rows_to_lists(record.rows),
            "stop": {"rule": record.stop.rule,
                     "fired_index": record.stop.fired_index,
                     "flag": record.stop.flag},
            "config": record.config,
            "delta": record.delta,
        }
        path.write_text(json.dumps(payload, indent=1) + "\n",
                        encoding="utf-8", newline="\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def load_record(path) -> ExperimentRecord:
    """Read back a record emitted by :func:`emit` (either format)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        payload = json.loads(text)
        rows = np.array(payload["rows"], dtype=np.float64).reshape(-1, 6)
        stop = StopInfo(rule=payload["stop"]["rule"],
                        fired_index=payload["stop"]["fired_index"],
                        flag=payload["stop"]["flag"])
        return ExperimentRecord(rows=rows, stop=stop,
                                config=payload["config"],
                                delta=payload.get("delta"))
    lines = [ln for ln in text.split("\n") if ln]
    if lines[0] != ",".join(CSV_COLUMNS):
        raise ValueError(f"{path}: unexpected CSV header {lines[0]!r}")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]],
                    dtype=np.float64).reshape(-1, 6)
    stop = StopInfo(rule={}, fired_index=None, flag="unknown")
    return ExperimentRecord(rows=rows, stop=stop, config={})
