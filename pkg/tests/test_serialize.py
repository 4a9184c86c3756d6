import numpy as np
import pytest

from hardymorrey.atomic import cz_decompose
from hardymorrey.generators import random_step
from hardymorrey.grid import Grid
from hardymorrey.serialize import (
    FormatError,
    read_decomposition,
    read_grid_function,
    write_decomposition,
    write_grid_function,
)

from conftest import random_function


@pytest.mark.parametrize("name", ["f.txt", "f.csv"])
@pytest.mark.parametrize("grid", [Grid(1, 0, 6), Grid(2, 1, 3, "periodic", origin=-1.5)])
def test_grid_function_bit_exact(tmp_path, name, grid):
    f = random_function(grid, 9)
    f = f.with_values(f.values * np.geomspace(1e-300, 1e300, f.values.size).reshape(grid.shape))
    write_grid_function(f, tmp_path / name)
    g = read_grid_function(tmp_path / name)
    assert g.grid == f.grid
    assert np.array_equal(g.values, f.values)


def test_grid_function_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("")
    with pytest.raises(FormatError, match="empty"):
        read_grid_function(p)
    f = random_function(Grid(1, 0, 3), 1)
    write_grid_function(f, p)
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-1]) + "\n")
    with pytest.raises(FormatError, match="expected 8 values"):
        read_grid_function(p)
    p.write_text("# hardymorrey grid function v1\nn=1 K=3\n1\n")
    with pytest.raises(FormatError, match="lacks 'L'"):
        read_grid_function(p)


@pytest.mark.parametrize("grid", [Grid(1, 0, 7), Grid(2, 0, 4)])
def test_decomposition_bit_exact(tmp_path, grid):
    f = random_step(grid, seed=3)
    D = cz_decompose(f, 1.0, d=1)
    sidecar = write_decomposition(D, tmp_path / "d.json")
    assert sidecar.exists()
    E = read_decomposition(tmp_path / "d.json")
    assert E.grid == D.grid and (E.j_min, E.j_max, E.d, E.C0, E.maximal) == (D.j_min, D.j_max, D.d, D.C0, D.maximal)
    assert E.lambdas == D.lambdas and E.labels == D.labels
    for a, b in zip(D.atoms, E.atoms):
        assert a.cube == b.cube and np.array_equal(a.patch, b.patch)
    assert np.array_equal(E.residual.values, D.residual.values)
    write_decomposition(E, tmp_path / "e.json")
    assert (tmp_path / "d.json").read_text().replace("d.json.npz", "") == (tmp_path / "e.json").read_text().replace("e.json.npz", "")


def test_decomposition_schema_error(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"schema": "other"}')
    with pytest.raises(FormatError, match="unknown decomposition schema"):
        read_decomposition(p)
