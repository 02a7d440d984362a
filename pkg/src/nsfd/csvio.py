"""Flat CSV output: ``#``-prefixed metadata lines, one header row, data rows."""

from __future__ import annotations

import contextlib
import csv
import io
import math
import sys
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path

import numpy as np

from .exceptions import UsageError

# 17 significant digits round-trips every double.
STATE_FMT = "{:.16e}"
# Tables: 15 significant digits.
TABLE_FMT = "{:.14e}"


def format_value(value, fmt: str = TABLE_FMT) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return fmt.format(v)
    return str(value)


@contextlib.contextmanager
def _open_out(out):
    if out is None or out == "-":
        yield sys.stdout
    elif isinstance(out, io.TextIOBase):
        yield out
    else:
        path = Path(out)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="") as fh:
                yield fh
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from exc


def write_csv(out, header: Sequence[str], rows: Iterable[Sequence], metadata: Mapping | None = None,
              fmt: str = TABLE_FMT) -> None:
    with _open_out(out) as fh:
        for key, value in (metadata or {}).items():
            fh.write(f"# {key}: {format_value(value, fmt)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v, fmt) for v in row])


def read_csv(path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Parse a file written by :func:`write_csv` into (metadata, header, rows)."""
    metadata: dict[str, str] = {}
    lines = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(":")
                metadata[key.strip()] = value.strip()
            else:
                lines.append(line)
    reader = list(csv.reader(lines))
    if not reader:
        raise UsageError(f"{path}: no header row")
    return metadata, reader[0], reader[1:]


def read_numeric_csv(path) -> tuple[dict[str, str], list[str], np.ndarray]:
    metadata, header, rows = read_csv(path)
    data = np.array([[float(v) for v in row] for row in rows], dtype=float).reshape(len(rows), len(header))
    return metadata, header, data
