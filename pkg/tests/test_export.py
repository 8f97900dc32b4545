import numpy as np
import pytest

from clebsch.export import read_vtk_scalars, write_csv, write_vtk
from clebsch.grid import Grid


def test_csv_round_trip(tmp_path):
    g = Grid((16, 6), (1.0, 2.0))
    u = np.random.default_rng(0).standard_normal(g.shape) / 3
    p = write_csv(tmp_path / "u.csv", g, u, "u")
    assert p.read_text().splitlines()[0] == "x,y,u"
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert data.shape == (u.size, 3)
    assert np.array_equal(data[:, 2].reshape(g.shape), u)
    assert np.array_equal(data[:, 0].reshape(g.shape), g.mesh[0])


def test_csv_shape_mismatch(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "u.csv", Grid((16, 6)), np.zeros((6, 16)))


def test_vtk_round_trip_and_layout(tmp_path):
    g = Grid((16, 4, 6), (1.0, 0.5, 2.0))
    rng = np.random.default_rng(1)
    p, q = rng.standard_normal((2,) + g.shape)
    v = tuple(rng.standard_normal(g.shape) for _ in range(3))
    path = write_vtk(tmp_path / "f.vtk", g, {"p": p, "q": q, "v": v})
    text = path.read_text().splitlines()
    assert text[4] == "DIMENSIONS 16 4 6" and text[7] == f"POINT_DATA {p.size}"
    back = read_vtk_scalars(path)
    assert np.array_equal(back["p"], p) and np.array_equal(back["q"], q)
    # x varies fastest: the first two scalar entries are nodes (0,0,0) and (1,0,0)
    i = text.index("SCALARS p double 1") + 2
    assert float(text[i]) == p[0, 0, 0] and float(text[i + 1]) == p[1, 0, 0]
    j = text.index("VECTORS v double") + 1
    assert [float(t) for t in text[j + 1].split()] == [v[0][1, 0, 0], v[1][1, 0, 0], v[2][1, 0, 0]]


def test_vtk_requires_3d(tmp_path):
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "f.vtk", Grid((16, 4)), {})
