"""Plain-text round-trip formats for color fields and observation fields.

Color field: first line `h w K`, then h lines of w integers in [0, K).
Observations: first line `h w`, then h lines of w floats written with
shortest round-trip formatting.  Parse errors name the offending line.
"""

from __future__ import annotations

import numpy as np


class FieldFormatError(ValueError):
    """Malformed field or observation file."""


def write_field(path, field: np.ndarray, K: int) -> None:
    field = np.asarray(field)
    if field.ndim != 2:
        raise ValueError("field must be 2-d")
    if field.size and (field.min() < 0 or field.max() >= K):
        raise ValueError("field colors out of range")
    h, w = field.shape
    with open(path, "w") as fh:
        fh.write(f"{h} {w} {K}\n")
        for row in field:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def read_field(path) -> tuple[np.ndarray, int]:
    with open(path) as fh:
        lines = fh.read().splitlines()
    h, w, K = _parse_header(lines, path, 3)
    if K < 2:
        raise FieldFormatError(f"{path}, line 1: need at least two colors, got {K}")
    rows = _parse_rows(lines, path, h, w, int)
    field = np.array(rows, dtype=np.int64)
    bad = np.argwhere((field < 0) | (field >= K))
    if len(bad):
        r, c = bad[0]
        raise FieldFormatError(
            f"{path}, line {r + 2}: color {field[r, c]} out of range [0, {K})"
        )
    return field, K


def write_observations(path, y: np.ndarray) -> None:
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("observations must be 2-d")
    h, w = y.shape
    with open(path, "w") as fh:
        fh.write(f"{h} {w}\n")
        for row in y:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_observations(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().splitlines()
    h, w = _parse_header(lines, path, 2)
    return np.array(_parse_rows(lines, path, h, w, float))


def _parse_header(lines, path, count):
    if not lines:
        raise FieldFormatError(f"{path}, line 1: missing header")
    parts = lines[0].split()
    if len(parts) != count:
        raise FieldFormatError(
            f"{path}, line 1: expected {count} header entries, got {len(parts)}"
        )
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise FieldFormatError(f"{path}, line 1: non-integer header {lines[0]!r}")
    if values[0] < 1 or values[1] < 1:
        raise FieldFormatError(f"{path}, line 1: dimensions must be positive")
    return values


def _parse_rows(lines, path, h, w, convert):
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != h:
        raise FieldFormatError(
            f"{path}: expected {h} data rows, got {len(body)}"
        )
    rows = []
    for r, line in enumerate(body):
        parts = line.split()
        if len(parts) != w:
            raise FieldFormatError(
                f"{path}, line {r + 2}: expected {w} entries, got {len(parts)}"
            )
        try:
            rows.append([convert(p) for p in parts])
        except ValueError:
            raise FieldFormatError(f"{path}, line {r + 2}: could not parse {line!r}")
    return rows
