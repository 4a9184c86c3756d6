import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardymorrey.grid import (
    Cube,
    DyadicCube,
    Grid,
    GridError,
    GridFunction,
    PrefixSum,
    cube_average,
    dyadic_block_sums,
    enumerate_cubes,
)

from conftest import random_function


def test_constant_average():
    g = Grid(1, 0, 4)
    assert cube_average(GridFunction.constant(g, 3.0), DyadicCube(0, (0,))) == 3.0


def test_half_mass_average():
    g = Grid(1, 4, 0)
    f = GridFunction(g, (g.axis_centers() < 1).astype(float))
    assert cube_average(f, DyadicCube(-1, (0,))) == 0.5


def test_prefix_average_matches_direct_loop():
    g = Grid(1, 0, 8)
    f = random_function(g, 42)
    direct = sum(abs(v) for v in f.values[:4]) / 4
    assert cube_average(f, Cube((0,), 4)) == pytest.approx(direct, rel=1e-12)


def test_cube_finer_than_grid():
    with pytest.raises(GridError, match="cube finer than grid"):
        DyadicCube(5, (0,)).to_cube(Grid(1, 0, 4))


def test_empty_intersection_is_zero():
    f = GridFunction.constant(Grid(1, 0, 3), 1.0)
    assert cube_average(f, Cube((20,), 4)) == 0.0


@pytest.mark.parametrize(
    "grid, mode, count",
    [(Grid(1, 0, 2), "dyadic", 7), (Grid(1, 0, 2), "windows", 10), (Grid(2, 0, 1), "dyadic", 5)],
)
def test_enumeration_counts(grid, mode, count):
    assert len(enumerate_cubes(grid, mode)) == count


def test_prefix_sums_match_brute_force_everywhere():
    for grid in (Grid(1, 0, 6), Grid(2, 0, 3)):
        f = random_function(grid, 3)
        a = np.abs(f.values)
        for Q in enumerate_cubes(grid, "windows"):
            assert cube_average(f, Q) == pytest.approx(a[Q.slices()].mean(), rel=1e-12, abs=1e-15)


def test_periodic_wraps():
    g = Grid(1, 0, 3, "periodic")
    v = np.zeros(8)
    v[0] = 8.0
    f = GridFunction(g, v)
    assert cube_average(f, Cube((7,), 2)) == 4.0


def test_compensated_sums_are_order_independent():
    # a huge value next to tiny ones: plain cumsum would lose the tiny window
    v = np.array([1e16, 1.0, 1.0, 1.0, -1e16, 1.0, 1.0, 1.0])
    P = PrefixSum(v)
    assert P.query((5,), 3) == 3.0
    assert P.query((1,), 3) == 3.0


@given(st.integers(0, 5), st.data())
def test_parent_child_consistency(level, data):
    n = data.draw(st.sampled_from([1, 2]))
    corner = tuple(data.draw(st.integers(0, 2**level - 1)) for _ in range(n))
    Q = DyadicCube(level, corner)
    for i, c in enumerate(Q.children()):
        assert c.parent() == Q
        assert Q.contains(c)
        assert c.side * 2 == Q.side
    assert np.allclose(Q.center, (np.asarray(corner) + 0.5) * Q.side)
    assert Q.volume == Q.side**n


@given(st.integers(0, 10_000))
def test_average_monotone_under_domination(seed):
    g = Grid(1, 0, 5)
    f = random_function(g, seed)
    big = f.with_values(np.abs(f.values) + np.random.default_rng(seed + 1).random(g.shape))
    for Q in enumerate_cubes(g, "dyadic"):
        assert cube_average(f, Q) <= cube_average(big, Q) + 1e-15


def test_dilation_is_concentric():
    Q = Cube((4, 4), 2)
    D = Q.dilate(3)
    assert D.size == 6
    g = Grid(2, 0, 4)
    assert np.allclose(D.center(g), Q.center(g))
    with pytest.raises(GridError):
        Cube((0,), 1).dilate(2)


def test_block_sums_and_upsample():
    g = Grid(2, 0, 3)
    f = random_function(g, 9)
    sums = dyadic_block_sums(f.values, g, 1)
    assert sums.shape == (2, 2)
    assert sums[1, 0] == pytest.approx(f.values[4:, :4].sum())
    up = f.upsample(2)
    assert up.grid.K == 5
    assert up.integral() == pytest.approx(f.integral())


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(3, 0, 1)
    with pytest.raises(GridError):
        Grid(1, 0, 1, "reflect")
    with pytest.raises(GridError):
        GridFunction(Grid(1, 0, 2), np.zeros(3))


def test_cell_of_and_from_cube():
    g = Grid(1, 0, 3, origin=-0.5)
    assert g.cell_of(-0.5) == (0,)
    assert g.cell_of(0.49) == (7,)
    Q = DyadicCube(2, (3,))
    assert DyadicCube.from_cube(Q.to_cube(g), g) == Q
    for level, m in itertools.product(range(4), range(2)):
        if m < 2**level:
            q = DyadicCube(level, (m,))
            assert DyadicCube.from_cube(q.to_cube(g), g) == q
