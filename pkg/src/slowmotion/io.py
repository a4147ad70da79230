"""CSV output: UTF-8, LF line endings, 17 significant digits."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import Field


def fmt(x: object) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x + 0.0, ".17g")  # no negative zero
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_field(path: str | Path, u: Field, extra: dict[str, np.ndarray] | None = None) -> Path:
    cols = ["x", "u"] + list(extra or {})
    data = [u.grid.nodes, u.values] + [np.asarray(v) for v in (extra or {}).values()]
    return write_csv(path, cols, zip(*data))


def time_tag(t: float) -> str:
    """Filename-safe time label, e.g. ``12.5`` -> ``12.5``, ``3.0`` -> ``3``."""
    return format(float(t), ".10g")
