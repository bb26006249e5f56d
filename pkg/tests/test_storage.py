import json

import numpy as np
import pytest

from funnelkit.geometry import Grid, Raster, ball
from funnelkit.storage import HEADER_SIZE, MAGIC, read_index, read_raster, write_index, write_raster


def test_mask_roundtrip(tmp_path):
    g = Grid.box((-1, -2), (1, 2), 32)
    A = ball(g, (0.1, 0.3), 0.5)
    p = write_raster(tmp_path / "a.fnlr", A)
    data = p.read_bytes()
    assert data[:4] == MAGIC and len(data) == HEADER_SIZE + g.size
    assert read_raster(p) == A


def test_raster_roundtrip_1d(tmp_path):
    g = Grid.box((0,), (1,), 17)
    R = Raster(g, np.linspace(-1, 1, 17))
    back = read_raster(write_raster(tmp_path / "r.fnlr", R))
    assert back.grid == g and np.array_equal(back.values, R.values)


def test_bad_files(tmp_path):
    (tmp_path / "x").write_bytes(b"abc")
    with pytest.raises(ValueError):
        read_raster(tmp_path / "x")
    g = Grid.box((0,), (1,), 8)
    p = write_raster(tmp_path / "y", Raster(g, np.zeros(8)))
    p.write_bytes(p.read_bytes()[:-3])
    with pytest.raises(ValueError):
        read_raster(p)
    p.write_bytes(b"XXXX" + p.read_bytes()[4:])
    with pytest.raises(ValueError):
        read_raster(p)


def test_index_roundtrip(tmp_path):
    write_index(tmp_path, {"times": [0.0, 0.5]})
    assert read_index(tmp_path) == {"times": [0.0, 0.5]}
    assert json.loads((tmp_path / "index.json").read_text())["times"][1] == 0.5
