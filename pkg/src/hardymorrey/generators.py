"""Deterministic test functions on grids."""

from __future__ import annotations

import math

import numpy as np

from .grid import Grid, GridFunction

GENERATORS = ("indicator", "spike", "staircase", "random-step", "gaussian-sample", "fourier-mode")


class GeneratorError(ValueError):
    pass


def _box(grid: Grid, lo, side) -> np.ndarray:
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (grid.n,))
    mask = np.ones(grid.shape, dtype=bool)
    for x, a in zip(grid.coords(), lo):
        mask &= (x >= a) & (x < a + side)
    return mask


def indicator(grid: Grid, lo=0.0, side: float = 1.0, height: float = 1.0) -> GridFunction:
    """``height * chi_Q`` for ``Q = lo + [0, side)**n`` (cells whose centres lie in Q)."""
    return GridFunction(grid, height * _box(grid, lo, side).astype(float))


def spike(grid: Grid, height: float = 8.0, cell=None) -> GridFunction:
    """``height`` on one finest cell (default: the cell just past the box centre)."""
    v = np.zeros(grid.shape)
    idx = (grid.cells // 2,) * grid.n if cell is None else tuple(np.broadcast_to(cell, (grid.n,)))
    v[tuple(int(i) for i in idx)] = height
    return GridFunction(grid, v)


def staircase(grid: Grid, steps: int = 4) -> GridFunction:
    """Values ``1, ..., steps`` on equal slabs along the first axis."""
    if steps < 1 or grid.cells % steps:
        raise GeneratorError("steps must divide the number of cells per axis")
    idx = np.arange(grid.cells) // (grid.cells // steps) + 1.0
    shape = [1] * grid.n
    shape[0] = grid.cells
    return GridFunction(grid, np.broadcast_to(idx.reshape(shape), grid.shape).copy())


def random_step(grid: Grid, seed: int = 0, piece: int | None = None, positive: bool = False, density: float = 1.0) -> GridFunction:
    """Normal values constant on blocks of ``piece`` cells per axis.

    ``density < 1`` zeroes a random fraction of the blocks.
    """
    piece = max(1, grid.cells // 16) if piece is None else int(piece)
    if piece < 1 or grid.cells % piece:
        raise GeneratorError("piece must divide the number of cells per axis")
    rng = np.random.default_rng(seed)
    coarse = rng.standard_normal((grid.cells // piece,) * grid.n)
    if positive:
        coarse = np.abs(coarse)
    if density < 1:
        coarse *= rng.random(coarse.shape) < density
    v = coarse
    for ax in range(grid.n):
        v = np.repeat(v, piece, axis=ax)
    return GridFunction(grid, v)


def gaussian_sample(grid: Grid, sigma: float = 0.1, center=None) -> GridFunction:
    """``exp(-|x - c|**2 / (2 sigma**2))`` at cell centres."""
    c = grid.origin + grid.extent / 2 if center is None else center
    c = np.broadcast_to(np.asarray(c, dtype=float), (grid.n,))
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords(), c))
    return GridFunction(grid, np.exp(-r2 / (2 * sigma**2)))


def fourier_mode(grid: Grid, j0: int = 2, axis: int = 0) -> GridFunction:
    """``cos(2 pi 2**j0 x / extent)`` along one axis: a single discrete frequency pair."""
    if not 0 <= j0 < grid.L + grid.K:
        raise GeneratorError("need 2**j0 below the Nyquist index")
    x = grid.coords()[axis] - grid.origin
    return GridFunction(grid, np.cos(2 * math.pi * 2**j0 * x / grid.extent))


def generate_function(name: str, grid: Grid, seed: int = 0, **params) -> GridFunction:
    if name == "indicator":
        return indicator(grid, **params)
    if name == "spike":
        return spike(grid, **params)
    if name == "staircase":
        return staircase(grid, **params)
    if name == "random-step":
        return random_step(grid, seed=seed, **params)
    if name == "gaussian-sample":
        return gaussian_sample(grid, **params)
    if name == "fourier-mode":
        return fourier_mode(grid, **params)
    raise GeneratorError(f"unknown generator {name!r}")
