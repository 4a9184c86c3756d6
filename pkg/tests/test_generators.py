import numpy as np
import pytest

from hardymorrey.generators import (
    GENERATORS,
    GeneratorError,
    fourier_mode,
    gaussian_sample,
    generate_function,
    indicator,
    random_step,
    spike,
    staircase,
)
from hardymorrey.grid import Grid


@pytest.mark.parametrize("name", GENERATORS)
def test_deterministic(name):
    g = Grid(2, 0, 4)
    a = generate_function(name, g, seed=5)
    b = generate_function(name, g, seed=5)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == g.shape


def test_seed_changes_random_step():
    g = Grid(1, 0, 6)
    assert not np.array_equal(random_step(g, seed=1).values, random_step(g, seed=2).values)


def test_random_step_blocks():
    g = Grid(1, 0, 6)
    v = random_step(g, seed=3, piece=8, positive=True).values
    assert np.all(v >= 0)
    assert np.all(v.reshape(8, 8) == v.reshape(8, 8)[:, :1])
    with pytest.raises(GeneratorError):
        random_step(g, piece=5)
    sparse = random_step(g, seed=3, piece=1, density=0.3).values
    assert 0 < np.count_nonzero(sparse) < g.cells


def test_fourier_mode_single_frequency():
    g = Grid(1, 0, 7)
    F = np.abs(np.fft.fft(fourier_mode(g, 3).values))
    live = np.nonzero(F > 1e-9 * F.max())[0].tolist()
    assert live == [8, g.cells - 8]
    with pytest.raises(GeneratorError):
        fourier_mode(g, 7)


def test_simple_shapes():
    g = Grid(1, 0, 4)
    assert indicator(g, 0.25, 0.5).values.sum() == 8
    assert spike(g, 3.0).values.sum() == 3.0 and spike(g).values[8] == 8.0
    assert staircase(g, 4).values.tolist() == sorted(staircase(g, 4).values.tolist())
    with pytest.raises(GeneratorError):
        staircase(g, 3)
    assert gaussian_sample(g, 0.1).values.max() <= 1


def test_unknown_generator():
    with pytest.raises(GeneratorError, match="unknown generator 'nope'"):
        generate_function("nope", Grid(1, 0, 3))
