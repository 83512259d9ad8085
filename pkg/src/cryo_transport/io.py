"""Persistence: binary image stacks and CSV tables.

Image stack layout (little-endian): magic ``b"TCIM"``, version ``u32``,
count ``u32``, side ``u32``, extent ``f64``, then ``count * side**2``
``float64`` pixels, row-major.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch
from .imaging import ImageGraph, ProjectionImage

MAGIC = b"TCIM"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")
GRAPH_COLUMNS = ("i", "j", "distance", "rot_re", "rot_im")


def fmt(x: float) -> str:
    """17 significant digits: enough to round-trip any double.

    Negative zero prints as ``0.0``; integral values keep a ``.0`` so they
    read back as floats.
    """
    s = "%.17g" % (float(x) + 0.0)
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def write_stack(path, images) -> None:
    images = list(images)
    if not images:
        raise ValueError("empty image stack")
    side, extent = images[0].side, images[0].extent
    for im in images:
        if im.side != side or im.extent != extent:
            raise ShapeMismatch("all images in a stack must share side and extent")
    pixels = np.stack([im.pixels for im in images]).astype("<f8", copy=False)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(images), side, float(extent)))
        fh.write(pixels.tobytes(order="C"))


def read_stack(path) -> list:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated image stack header")
    magic, version, count, side, extent = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported stack version {version}")
    expected = _HEADER.size + 8 * count * side * side
    if len(data) != expected:
        raise ValueError(f"stack size {len(data)} bytes, expected {expected}")
    px = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(count, side, side)
    return [ProjectionImage(px[k].astype(float), extent) for k in range(count)]


def write_graph_csv(path, graph: ImageGraph) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(GRAPH_COLUMNS)
        for (i, j), d, g in zip(graph.edges, graph.distances, graph.rotations):
            w.writerow([int(i), int(j), fmt(d), fmt(g.real), fmt(g.imag)])


def read_graph_csv(path, n: int, epsilon: float = float("nan")) -> ImageGraph:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    edges = np.array([[int(r["i"]), int(r["j"])] for r in rows], dtype=np.int64).reshape(-1, 2)
    dist = np.array([float(r["distance"]) for r in rows])
    rot = np.array([complex(float(r["rot_re"]), float(r["rot_im"])) for r in rows])
    return ImageGraph(n=n, epsilon=epsilon, edges=edges, distances=dist, rotations=rot)


def write_rows_csv(path_or_file, header, rows) -> None:
    """Plain CSV; floats go through :func:`fmt`."""
    def cell(v):
        return fmt(v) if isinstance(v, (float, np.floating)) else v

    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([cell(v) for v in r])

    if hasattr(path_or_file, "write"):
        emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            emit(fh)
