"""Artifact formats: metadata JSON, time-series CSV and binary snapshots.

Snapshot layout (little endian)::

    bytes 0-7    b"FDBOUSS1"
    bytes 8-23   uint32 dim, n1, n2 (0 in 1D), nfields
    bytes 24-31  float64 t
    then nfields arrays of float64 in row-major order
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"FDBOUSS1"
_HEADER = struct.Struct("<8s4Id")
assert _HEADER.size == 32


@dataclass(frozen=True)
class Snapshot:
    t: float
    fields: np.ndarray  # (nfields, *shape)

    @property
    def dim(self) -> int:
        return self.fields.ndim - 1


def write_snapshot(path: str | Path, t: float, fields) -> None:
    arr = np.ascontiguousarray(np.stack([np.asarray(f, dtype=float) for f in fields]), dtype="<f8")
    shape = arr.shape[1:]
    if len(shape) not in (1, 2):
        raise ValueError("snapshots hold 1D or 2D fields")
    n1 = shape[0]
    n2 = shape[1] if len(shape) == 2 else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, len(shape), n1, n2, arr.shape[0], float(t)))
        fh.write(arr.tobytes(order="C"))


def read_snapshot(path: str | Path) -> Snapshot:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, dim, n1, n2, nf, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    shape = (nf, n1) if dim == 1 else (nf, n1, n2)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != math.prod(shape):
        raise ValueError(f"{path}: expected {math.prod(shape)} values, found {body.size}")
    return Snapshot(t, body.reshape(shape).astype(float))


def fmt(x) -> str:
    """Round-trip-exact decimal for binary64."""
    return format(float(x), ".17g")


class SeriesWriter:
    """CSV with a header row; every float written with 17 significant digits."""

    def __init__(self, path: str | Path, columns: list[str]):
        self.columns = list(columns)
        self._fh = open(path, "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.columns)

    def write(self, row: dict) -> None:
        self._w.writerow([fmt(row[c]) for c in self.columns])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_series(path: str | Path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = list(zip(*body)) if body else [()] * len(header)
    return {h: np.array([float(v) for v in c]) for h, c in zip(header, cols)}


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, default=_json_default) + "\n"


def write_json(path: str | Path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path: str | Path):
    return json.loads(Path(path).read_text())
