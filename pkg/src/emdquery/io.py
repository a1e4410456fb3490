"""Point-set files: plain CSV and the ``EMDQ1`` binary layout.

Binary layout (little-endian): the 5 magic bytes ``EMDQ1``, ``n`` and ``d``
as uint32, ``n*d`` float64 coordinates row-major, then ``n`` float64 weights.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from emdquery.geometry import WeightedPointSet

MAGIC = b"EMDQ1"
_HEADER = struct.Struct("<II")


class FormatError(ValueError):
    pass


def write_binary(path, s: WeightedPointSet) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(s.n, s.dim))
        fh.write(np.ascontiguousarray(s.points, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(s.weights, dtype="<f8").tobytes())


def read_binary(path) -> WeightedPointSet:
    raw = Path(path).read_bytes()
    if raw[:5] != MAGIC:
        raise FormatError(f"{path}: bad magic")
    if len(raw) < 5 + _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    n, d = _HEADER.unpack_from(raw, 5)
    off = 5 + _HEADER.size
    need = off + 8 * (n * d + n)
    if len(raw) != need:
        raise FormatError(f"{path}: expected {need} bytes for n={n}, d={d}, found {len(raw)}")
    pts = np.frombuffer(raw, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    w = np.frombuffer(raw, dtype="<f8", count=n, offset=off + 8 * n * d)
    try:
        return WeightedPointSet(pts, w)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_csv(path, s: WeightedPointSet, weighted: bool = False) -> None:
    data = np.column_stack((s.weights, s.points)) if weighted else s.points
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


def read_csv(path, weighted: bool = False) -> WeightedPointSet:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#", dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.size == 0:
        raise FormatError(f"{path}: no rows")
    try:
        if weighted:
            if data.shape[1] < 2:
                raise FormatError(f"{path}: weighted rows need a weight and at least one coordinate")
            return WeightedPointSet(data[:, 1:], data[:, 0])
        return WeightedPointSet(data, np.ones(data.shape[0]))
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def read_points(path, weighted: bool = False) -> WeightedPointSet:
    """Read either format; binary files are recognized by their magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(5)
    if head == MAGIC:
        return read_binary(path)
    return read_csv(path, weighted)


def write_points(path, s: WeightedPointSet, fmt: str | None = None, weighted: bool = False) -> None:
    if fmt is None:
        fmt = "csv" if str(path).lower().endswith(".csv") else "bin"
    if fmt == "bin":
        write_binary(path, s)
    elif fmt == "csv":
        write_csv(path, s, weighted)
    else:
        raise ValueError(f"unknown format {fmt!r}")
