"""Point pattern files: CSV point lists with a JSON window sidecar.

The CSV has a header ``x`` (interval patterns) or ``x,y`` (planar
patterns), one point per row.  The sidecar declares the window::

    {"window": {"x_min": 0.0, "x_max": 1.0, "y_min": 0.0, "y_max": 1.0}}
    {"window": {"lo": 0.0, "hi": 1.0}}

Ingestion validates that points parse, lie inside the window, and are
pairwise distinct; failures carry the offending row number.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataError, DuplicatePointError, OutOfWindowError
from .geometry import Interval1, PointPattern, Window2

_WINDOW2_KEYS = {"x_min", "x_max", "y_min", "y_max"}
_INTERVAL_KEYS = {"lo", "hi"}


def read_window(path: str | Path) -> Window2 | Interval1:
    """Parse a window sidecar JSON into a Window2 or Interval1."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read window file {path}: {exc}") from exc
    win = doc.get("window") if isinstance(doc, dict) else None
    if not isinstance(win, dict):
        raise DataError(f"window file {path} must contain a 'window' object")
    keys = set(win)
    try:
        if keys == _WINDOW2_KEYS:
            return Window2(**{k: float(win[k]) for k in _WINDOW2_KEYS})
        if keys == _INTERVAL_KEYS:
            return Interval1(lo=float(win["lo"]), hi=float(win["hi"]))
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad window values in {path}: {exc}") from exc
    raise DataError(
        f"window keys must be exactly {sorted(_WINDOW2_KEYS)} or {sorted(_INTERVAL_KEYS)}, "
        f"got {sorted(keys)}"
    )


def write_window(window: Window2 | Interval1, path: str | Path) -> None:
    if isinstance(window, Window2):
        doc = {"window": {"x_min": window.x_min, "x_max": window.x_max,
                          "y_min": window.y_min, "y_max": window.y_max}}
    else:
        doc = {"window": {"lo": window.lo, "hi": window.hi}}
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def ingest_pattern(csv_path: str | Path, window_path: str | Path | None = None) -> PointPattern:
    """Load and validate a point pattern from CSV plus its window sidecar.

    ``window_path`` defaults to the CSV path with a ``.json`` suffix.
    """
    csv_path = Path(csv_path)
    if window_path is None:
        window_path = csv_path.with_suffix(".json")
    window = read_window(window_path)

    try:
        with open(csv_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read pattern file {csv_path}: {exc}") from exc

    expected = ["x", "y"] if isinstance(window, Window2) else ["x"]
    if header is None or [c.strip() for c in header] != expected:
        raise DataError(
            f"pattern header must be {','.join(expected)!r} for this window, got {header!r}"
        )

    points = []
    for i, row in enumerate(rows, start=2):  # row 1 is the header
        if len(row) != len(expected):
            raise DataError(f"row {i}: expected {len(expected)} fields, got {len(row)}")
        try:
            points.append([float(v) for v in row])
        except ValueError as exc:
            raise DataError(f"row {i}: {exc}") from exc

    arr = np.asarray(points, dtype=float)
    if isinstance(window, Interval1):
        arr = arr.reshape(-1)

    inside = window.contains(arr) if len(arr) else np.ones(0, bool)
    if not bool(np.all(inside)):
        row = int(np.flatnonzero(~inside)[0]) + 2
        raise OutOfWindowError(f"row {row}: point lies outside the declared window")
    seen: set[tuple[float, ...]] = set()
    for i, p in enumerate(arr):
        key = tuple(p) if arr.ndim == 2 else (float(p),)
        if key in seen:
            raise DuplicatePointError(
                f"row {i + 2}: duplicate point; patterns must have pairwise-distinct points"
            )
        seen.add(key)
    return PointPattern(arr, window)


def write_pattern(pattern: PointPattern, csv_path: str | Path,
                  window_path: str | Path | None = None) -> None:
    """Write a pattern as CSV plus window sidecar (full float precision)."""
    csv_path = Path(csv_path)
    if window_path is None:
        window_path = csv_path.with_suffix(".json")
    write_window(pattern.window, window_path)
    lines = ["x,y" if pattern.dim == 2 else "x"]
    for p in pattern.points:
        if pattern.dim == 2:
            lines.append(f"{float(p[0])!r},{float(p[1])!r}")
        else:
            lines.append(f"{float(p)!r}")
    csv_path.write_text("\n".join(lines) + "\n")
