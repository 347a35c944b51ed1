import json

import numpy as np
import pytest

from suplandweber.records import (CSV_COLUMNS, ExperimentRecord, StopInfo,
                                  emit, load_record)


def _make_record(n_rows):
    rng = np.random.default_rng(61)
    rows = np.empty((n_rows, 6))
    rows[:, 0] = np.arange(n_rows)
    rows[:, 1:] = rng.standard_normal((n_rows, 5))
    rows[:, 4] = np.nan  # error_to_rmin absent
    stop = StopInfo(rule={"kind": "max-iter", "cap": 100}, fired_index=None,
                    flag="budget-exhausted")
    return ExperimentRecord(rows=rows, stop=stop,
                            config={"lambda": 0.1234567890123456789,
                                    "max_iter": 100},
                            delta=0.01)


def test_rows_must_increase():
    rows = np.zeros((2, 6))
    with pytest.raises(ValueError):
        ExperimentRecord(rows=rows,
                         stop=StopInfo(rule={}, fired_index=None, flag="x"),
                         config={})


def test_empty_record_gives_header_only_csv(tmp_path):
    record = _make_record(0)
    path = emit(record, "csv", tmp_path / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_single_row_csv(tmp_path):
    record = _make_record(1)
    path = emit(record, "csv", tmp_path / "one.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0] == ",".join(CSV_COLUMNS)


def test_csv_round_trip_bit_exact(tmp_path):
    record = _make_record(7)
    path = emit(record, "csv", tmp_path / "r.csv")
    loaded = load_record(path)
    assert np.array_equal(loaded.rows, record.rows, equal_nan=True)


def test_json_round_trip_bit_exact(tmp_path):
    record = _make_record(5)
    path = emit(record, "json", tmp_path / "r.json")
    loaded = load_record(path)
    assert np.array_equal(loaded.rows, record.rows, equal_nan=True)
    assert loaded.stop.flag == record.stop.flag
    assert loaded.stop.rule == record.stop.rule
    assert loaded.config == record.config
    assert loaded.delta == record.delta


def test_emitted_files_use_lf_and_utf8(tmp_path):
    record = _make_record(3)
    for fmt in ("csv", "json"):
        path = emit(record, fmt, tmp_path / f"r.{fmt}")
        raw = path.read_bytes()
        assert b"\r" not in raw
        raw.decode("utf-8")


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit(_make_record(1), "xml", tmp_path / "r.xml")


def test_column_access():
    record = _make_record(4)
    assert np.array_equal(record.column("k"), np.arange(4))
    assert record.final_row()[0] == 3
