"""Binary raster files and the directory layouts built on them.

Raster file: little-endian header ``"FNLR"``, version (u32), dim (u32),
extents (2 x u32), origin (2 x f64), spacing (f64), followed by the row-major
payload: one u8 per cell for masks, one f64 per cell for real rasters.
Unused second-axis entries of 1D grids are written as extent 1, origin 0.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .geometry import Grid, GridSet, Raster

MAGIC = b"FNLR"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIddd")
HEADER_SIZE = _HEADER.size


def _header(grid: Grid) -> bytes:
    ext = list(grid.extents) + [1] * (2 - grid.dim)
    org = list(grid.origin) + [0.0] * (2 - grid.dim)
    return _HEADER.pack(MAGIC, VERSION, grid.dim, ext[0], ext[1], org[0], org[1], grid.spacing)


def write_raster(path, obj) -> Path:
    """Write a :class:`GridSet` (u8 payload) or :class:`Raster` (f64 payload)."""
    path = Path(path)
    if isinstance(obj, GridSet):
        payload = obj.mask.astype("<u1").tobytes(order="C")
    elif isinstance(obj, Raster):
        payload = obj.values.astype("<f8").tobytes(order="C")
    else:
        raise TypeError(f"cannot write {type(obj).__name__}")
    path.write_bytes(_header(obj.grid) + payload)
    return path


def read_raster(path):
    """Read a raster file; returns a :class:`GridSet` or a :class:`Raster`."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise ValueError(f"{path}: file too short for a raster header")
    magic, version, dim, e0, e1, o0, o1, h = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    extents = (e0, e1)[:dim]
    grid = Grid(dim=dim, origin=(o0, o1)[:dim], spacing=h, extents=extents)
    body = data[HEADER_SIZE:]
    n = grid.size
    if len(body) == n:
        mask = np.frombuffer(body, dtype="<u1").reshape(extents).astype(bool)
        return GridSet(grid, mask)
    if len(body) == 8 * n:
        vals = np.frombuffer(body, dtype="<f8").reshape(extents).astype(float)
        return Raster(grid, vals)
    raise ValueError(f"{path}: payload of {len(body)} bytes fits neither a mask nor a raster of {n} cells")


def write_index(directory, index: dict, name: str = "index.json") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    p = directory / name
    p.write_text(json.dumps(index, indent=2, sort_keys=True))
    return p


def read_index(directory, name: str = "index.json") -> dict:
    return json.loads((Path(directory) / name).read_text())
