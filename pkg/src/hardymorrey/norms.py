"""Generalized Morrey norms and their weak, vector-valued, L log L and
Hardy-Morrey variants on grid functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .conv import heat_semigroup
from .grid import Cube, Grid, GridError, GridFunction, PrefixSum, cube_average
from .shapes import ShapeFunction

MODES = ("dyadic", "windows")


class NormError(ValueError):
    pass


@dataclass(frozen=True)
class NormReport:
    value: float
    witness: Cube | None
    mode: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "witness": None if self.witness is None else self.witness.to_dict(),
            "mode": self.mode,
            "params": self.params,
        }


def _check_mode(mode: str) -> str:
    if mode == "all-windows":
        return "windows"
    if mode not in MODES:
        raise NormError(f"unknown norm mode {mode!r}")
    return mode


def cube_sizes(grid: Grid, mode: str) -> list[int]:
    if mode == "dyadic":
        return [2**k for k in range(grid.L + grid.K + 1)]
    return list(range(1, grid.cells + 1))


def _cube_averages(prefix: PrefixSum, grid: Grid, size: int, mode: str) -> np.ndarray:
    sums = prefix.window_sums(size)
    if mode == "dyadic":
        sums = sums[(slice(None, None, size),) * grid.n]
    return np.maximum(sums, 0.0) / size**grid.n


def _start_of(index: int, size: int, mode: str) -> int:
    return index * size if mode == "dyadic" else index


def morrey_sup(values: np.ndarray, grid: Grid, p: float, phi: ShapeFunction, mode: str) -> tuple[float, Cube | None]:
    """``max_Q phi(l(Q))**-1 (avg_Q values**p)**(1/p)`` for ``values >= 0``."""
    prefix = PrefixSum(values**p, grid.periodic)
    best, witness = 0.0, None
    for size in cube_sizes(grid, mode):
        avg = _cube_averages(prefix, grid, size, mode)
        scale = 1.0 / float(phi(size * grid.h))
        k = int(np.argmax(avg))
        val = avg.flat[k] ** (1.0 / p) * scale
        if val > best:
            idx = np.unravel_index(k, avg.shape)
            best = float(val)
            witness = Cube(tuple(_start_of(int(i), size, mode) for i in idx), size)
    return best, witness


def morrey_norm(f: GridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> NormReport:
    if p <= 0:
        raise NormError("p must be positive")
    mode = _check_mode(mode)
    value, witness = morrey_sup(np.abs(f.values), f.grid, p, phi, mode)
    return NormReport(value, witness, mode, {"p": p, "phi": phi.literal()})


def witness_value(f: GridFunction, p: float, phi: ShapeFunction, report: NormReport) -> float:
    """Re-evaluate the norm functional on the reported witness cube."""
    if report.witness is None:
        return 0.0
    g = f.with_values(np.abs(f.values) ** p)
    side = report.witness.side(f.grid)
    return cube_average(g, report.witness) ** (1.0 / p) / float(phi(side))


def weak_morrey_norm(f: GridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> NormReport:
    """``sup_T T * ||chi_{|f| > T}||``, exact for step functions.

    On ``[v_{i-1}, v_i)`` the level set is ``{|f| >= v_i}``, so the sup is
    the left limit ``T -> v_i`` over the distinct nonzero values.
    """
    mode = _check_mode(mode)
    a = np.abs(f.values)
    best, witness = 0.0, None
    for v in np.unique(a[a > 0]):
        val, w = morrey_sup((a >= v).astype(float), f.grid, p, phi, mode)
        if v * val > best:
            best, witness = float(v * val), w
    return NormReport(best, witness, mode, {"p": p, "phi": phi.literal(), "weak": True})


@dataclass(frozen=True)
class VectorGridFunction:
    components: tuple
    q: float = 2.0

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise NormError("a vector function needs at least one component")
        if any(c.grid != comps[0].grid for c in comps):
            raise GridError("grid mismatch")
        if not self.q > 0:
            raise NormError("q must be in (0, inf]")
        object.__setattr__(self, "components", comps)

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def stack(self) -> np.ndarray:
        return np.stack([c.values for c in self.components])

    def pointwise(self) -> GridFunction:
        """Pointwise ``l_q`` combination of the components."""
        return GridFunction(self.grid, lq_combine(np.abs(self.stack()), self.q, axis=0))


def lq_combine(a: np.ndarray, q: float, axis: int = 0) -> np.ndarray:
    a = np.abs(a)
    if math.isinf(q):
        return a.max(axis=axis)
    return np.sum(a**q, axis=axis) ** (1.0 / q)


def vector_morrey_norm(F: VectorGridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> NormReport:
    return morrey_norm(F.pointwise(), p, phi, mode)


def vector_weak_morrey_norm(F: VectorGridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> NormReport:
    return weak_morrey_norm(F.pointwise(), p, phi, mode)


def vector_seq_norm(F: VectorGridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> float:
    """``l_q`` combination of the component Morrey norms."""
    norms = np.array([morrey_norm(c, p, phi, mode).value for c in F.components])
    return float(lq_combine(norms, F.q))


# ----------------------------------------------------------------- L log L


def _llogl_functional(a: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Cube average of ``(a/lam) log(e + a/lam)``; ``a`` is (cubes, cells)."""
    x = a / lam[:, None]
    return np.mean(x * np.log(np.e + x), axis=1)


def luxemburg_lambdas(blocks: np.ndarray, rel_tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Solve ``avg (a/lam) log(e + a/lam) = 1`` per row by log-bisection.

    The functional is strictly decreasing in ``lam``; rows that vanish get
    ``lam = 0``.
    """
    blocks = np.abs(np.asarray(blocks, dtype=float))
    top = blocks.max(axis=1)
    live = top > 0
    lam = np.zeros(blocks.shape[0])
    if not np.any(live):
        return lam
    a = blocks[live]
    lo = np.full(a.shape[0], 1e-15)
    hi = 10.0 * top[live]
    for _ in range(max_iter):
        mid = np.sqrt(lo * hi)
        over = _llogl_functional(a, mid) > 1.0
        lo = np.where(over, mid, lo)
        hi = np.where(over, hi, mid)
        if np.all(hi / lo - 1.0 <= rel_tol):
            break
    lam[live] = np.sqrt(lo * hi)
    return lam


def _cube_blocks(a: np.ndarray, grid: Grid, size: int, mode: str):
    """Cell values of every enumerated cube of one size, one row per cube."""
    if grid.periodic:
        a = np.pad(a, [(0, size - 1)] * grid.n, mode="wrap")
    view = sliding_window_view(a, (size,) * grid.n)
    if mode == "dyadic":
        view = view[(slice(None, None, size),) * grid.n]
    elif grid.periodic:
        view = view[(slice(0, grid.cells),) * grid.n]
    starts_shape = view.shape[: grid.n]
    return view.reshape(-1, size**grid.n), starts_shape


def llogl_morrey_norm(f: GridFunction, eta: ShapeFunction, mode: str = "dyadic") -> NormReport:
    mode = _check_mode(mode)
    grid = f.grid
    a = np.abs(f.values)
    best, witness = 0.0, None
    for size in cube_sizes(grid, mode):
        blocks, starts_shape = _cube_blocks(a, grid, size, mode)
        lam = luxemburg_lambdas(blocks) / float(eta(size * grid.h))
        k = int(np.argmax(lam))
        if lam[k] > best:
            idx = np.unravel_index(k, starts_shape)
            best = float(lam[k])
            witness = Cube(tuple(_start_of(int(i), size, mode) for i in idx), size)
    return NormReport(best, witness, mode, {"eta": eta.literal(), "space": "llogl"})


# ------------------------------------------------------------ Hardy-Morrey


def default_heat_scales(grid: Grid, per_octave: int = 1) -> np.ndarray:
    """Heat times ``2**(-2K) .. 2**(2L+2)``, ``per_octave`` per factor 2."""
    lo, hi = -2 * grid.K, 2 * grid.L + 2
    count = (hi - lo) * per_octave + 1
    return 2.0 ** np.linspace(lo, hi, count)


def heat_maximal(f: GridFunction, scales=None) -> GridFunction:
    """``max_t |e^{t Laplacian} f|`` over a finite set of heat times."""
    scales = default_heat_scales(f.grid) if scales is None else np.asarray(scales, dtype=float)
    if scales.size == 0:
        raise NormError("empty heat-scale set")
    out = np.zeros(f.grid.shape)
    for t in scales:
        out = np.maximum(out, np.abs(heat_semigroup(f, float(t)).values))
    return f.with_values(out)


def hardy_morrey_norm(
    f: GridFunction, p: float, phi: ShapeFunction, scales=None, mode: str = "dyadic"
) -> NormReport:
    report = morrey_norm(heat_maximal(f, scales), p, phi, mode)
    return NormReport(report.value, report.witness, report.mode, {**report.params, "space": "hardy-morrey"})


@dataclass(frozen=True)
class RatioReport:
    lhs: float
    rhs: float
    ratio: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio}


def safe_ratio(lhs: float, rhs: float) -> float:
    """``lhs / rhs`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if lhs == 0:
        return 0.0
    if rhs == 0:
        return math.inf
    return lhs / rhs


def pairing_bound_check(f: GridFunction, kappa: GridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> RatioReport:
    if p <= 1:
        raise NormError("the pairing bound needs p > 1")
    if kappa.grid != f.grid:
        raise GridError("grid mismatch")
    lhs = float(np.sum(np.abs(kappa.values * f.values))) * f.grid.cell_volume
    n = f.grid.n
    weight = float(np.max((1 + f.grid.radius()) ** (2 * n + 1) * np.abs(kappa.values)))
    rhs = morrey_norm(f, p, phi, mode).value * weight
    return RatioReport(lhs, rhs, safe_ratio(lhs, rhs))
