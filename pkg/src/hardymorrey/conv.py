"""Discrete convolutions on grid functions (zero-extension or periodic)."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from .grid import Grid, GridFunction

TAIL_MASS = 1e-12


def _crop(kernel: np.ndarray, keep: int) -> np.ndarray:
    """Keep offsets ``|d| <= keep`` of a centred kernel."""
    R = (kernel.shape[0] - 1) // 2
    if R <= keep:
        return kernel
    sl = slice(R - keep, R + keep + 1)
    return kernel[(sl,) * kernel.ndim]


def _fold(kernel: np.ndarray, cells: int) -> np.ndarray:
    """Wrap a centred kernel onto a periodic box of ``cells`` per axis."""
    R = (kernel.shape[0] - 1) // 2
    out = np.zeros((cells,) * kernel.ndim)
    offsets = np.arange(-R, R + 1) % cells
    if kernel.ndim == 1:
        np.add.at(out, offsets, kernel)
    else:
        ii, jj = np.meshgrid(offsets, offsets, indexing="ij")
        np.add.at(out, (ii, jj), kernel)
    return out


def convolve(values: np.ndarray, kernel: np.ndarray, grid: Grid, axis: int | None = None) -> np.ndarray:
    """``sum_d kernel[d] values[i - d]`` for a centred odd-length ``kernel``.

    ``axis`` applies a 1D kernel along one axis; otherwise the kernel has
    the grid's dimension.  Kernel entries are weights (already multiplied
    by the cell volume).
    """
    N = grid.cells
    if grid.periodic:
        folded = _fold(kernel, N)
        if axis is not None:
            spec = np.fft.rfft(values, axis=axis) * np.fft.rfft(folded).reshape(
                [N // 2 + 1 if i == axis else 1 for i in range(values.ndim)]
            )
            return np.fft.irfft(spec, n=N, axis=axis)
        axes = tuple(range(values.ndim))
        return np.fft.irfftn(np.fft.rfftn(values) * np.fft.rfftn(folded), s=values.shape, axes=axes)
    kernel = _crop(kernel, N - 1)
    R = (kernel.shape[0] - 1) // 2
    if axis is not None:
        shape = [1] * values.ndim
        shape[axis] = kernel.shape[0]
        full = fftconvolve(values, kernel.reshape(shape), mode="full", axes=axis)
        sl = [slice(None)] * values.ndim
        sl[axis] = slice(R, R + N)
        return full[tuple(sl)]
    full = fftconvolve(values, kernel, mode="full")
    return full[(slice(R, R + N),) * values.ndim]


def gaussian_weights(grid: Grid, t: float, mass: float = 1.0) -> np.ndarray:
    """1D heat-kernel weights at scale ``t`` renormalised to ``mass``.

    Sampled ``exp(-x**2 / 4t)`` at integer cell offsets, truncated where the
    Gaussian tail mass is below ``TAIL_MASS``.
    """
    h = grid.h
    R = int(math.ceil(math.sqrt(4 * t * math.log(1 / TAIL_MASS) + 4 * t * 4) / h)) + 1
    d = np.arange(-R, R + 1) * h
    w = np.exp(-(d**2) / (4 * t))
    return w * (mass / w.sum())


def heat_semigroup(f: GridFunction, t: float) -> GridFunction:
    """Discrete ``e^{t Laplacian} f``; constants are exact fixed points in periodic mode."""
    w = gaussian_weights(f.grid, t)
    vals = f.values
    for ax in range(f.grid.n):
        vals = convolve(vals, w, f.grid, axis=ax)
    return f.with_values(vals)
