"""Deterministic JSON/CSV writers.

Floats keep full precision (``repr`` round-trips), keys are sorted, and no
timestamps or host details are written, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


class CsvSink:
    """Row-at-a-time CSV writer usable as an event sink."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self._fh = open(self.path, "w", encoding="utf-8", newline="")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(columns)
        self.rows = 0

    def write(self, row) -> None:
        self._writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        self.rows += 1

    def __call__(self, event) -> None:
        self.write(event.row())

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_csv(path, columns, rows) -> Path:
    with CsvSink(path, columns) as sink:
        for row in rows:
            sink.write(row)
    return Path(path)
