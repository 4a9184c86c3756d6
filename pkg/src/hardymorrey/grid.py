"""Dyadic grids, cubes, step functions and compensated prefix sums.

A :class:`Grid` covers the box ``origin + [0, 2**L)**n`` with finest cells of
side ``2**-K``.  Cubes are addressed in finest-cell units so that every
query is an integer rectangle of the value array.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

BOUNDARIES = ("zero", "periodic")


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    n: int
    L: int
    K: int
    boundary: str = "zero"
    origin: float = 0.0

    def __post_init__(self):
        if self.n not in (1, 2):
            raise GridError(f"dimension must be 1 or 2, got {self.n}")
        if self.L < 0 or self.K < 0:
            raise GridError("extent level L and resolution level K must be >= 0")
        if self.boundary not in BOUNDARIES:
            raise GridError(f"unknown boundary mode {self.boundary!r}")

    @property
    def cells(self) -> int:
        """Number of finest cells per axis."""
        return 2 ** (self.L + self.K)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.cells,) * self.n

    @property
    def h(self) -> float:
        return 2.0 ** -self.K

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @property
    def extent(self) -> float:
        return 2.0**self.L

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def axis_centers(self) -> np.ndarray:
        return self.origin + (np.arange(self.cells) + 0.5) * self.h

    def coords(self) -> list[np.ndarray]:
        """Cell-center coordinates, one broadcastable array per axis."""
        c = self.axis_centers()
        if self.n == 1:
            return [c]
        return list(np.meshgrid(c, c, indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x**2 for x in self.coords()))

    def refine(self, levels: int = 1) -> "Grid":
        return Grid(self.n, self.L, self.K + levels, self.boundary, self.origin)

    def cell_of(self, x) -> tuple[int, ...]:
        x = np.broadcast_to(np.asarray(x, dtype=float), (self.n,))
        idx = np.floor((x - self.origin) / self.h).astype(int)
        if np.any(idx < 0) or np.any(idx >= self.cells):
            raise GridError(f"point {x} outside the grid box")
        return tuple(int(i) for i in idx)


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube with lattice corners, in finest-cell units."""

    lo: tuple[int, ...]
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise GridError("cube size must be a positive number of cells")

    @property
    def n(self) -> int:
        return len(self.lo)

    def side(self, grid: Grid) -> float:
        return self.size * grid.h

    def volume(self, grid: Grid) -> float:
        return self.side(grid) ** grid.n

    def center(self, grid: Grid) -> np.ndarray:
        return grid.origin + (np.asarray(self.lo) + self.size / 2) * grid.h

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(a, a + self.size) for a in self.lo)

    def contains(self, other: "Cube") -> bool:
        return all(a <= b and b + other.size <= a + self.size for a, b in zip(self.lo, other.lo))

    def inside(self, grid: Grid) -> bool:
        return all(0 <= a and a + self.size <= grid.cells for a in self.lo)

    def dilate(self, k: int) -> "Cube":
        """Concentric cube of side ``k * size``; needs an integer shift."""
        grow = (k - 1) * self.size
        if k < 1 or grow % 2:
            raise GridError(f"dilation {k} of a {self.size}-cell cube is off-lattice")
        return Cube(tuple(a - grow // 2 for a in self.lo), k * self.size)

    def clip(self, grid: Grid) -> tuple[slice, ...]:
        return tuple(slice(max(a, 0), min(a + self.size, grid.cells)) for a in self.lo)

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "size": self.size}


@dataclass(frozen=True)
class DyadicCube:
    """``2**-level * (corner + [0, 1)**n)`` measured from the grid origin."""

    level: int
    corner: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return 2.0 ** -self.level

    @property
    def volume(self) -> float:
        return self.side**self.n

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.corner) + 0.5) * self.side

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level - 1, tuple(m // 2 for m in self.corner))

    def child(self, i: int) -> "DyadicCube":
        bits = [(i >> k) & 1 for k in range(self.n)]
        return DyadicCube(self.level + 1, tuple(2 * m + b for m, b in zip(self.corner, bits)))

    def children(self) -> list["DyadicCube"]:
        return [self.child(i) for i in range(2**self.n)]

    def contains(self, other: "DyadicCube") -> bool:
        if other.level < self.level:
            return False
        shift = other.level - self.level
        return all((m >> shift) == c for m, c in zip(other.corner, self.corner))

    def to_cube(self, grid: Grid) -> Cube:
        if self.level > grid.K:
            raise GridError("cube finer than grid")
        if self.level < -grid.L:
            raise GridError("cube coarser than the domain box")
        size = 2 ** (grid.K - self.level)
        return Cube(tuple(m * size for m in self.corner), size)

    @classmethod
    def from_cube(cls, cube: Cube, grid: Grid) -> "DyadicCube":
        size = cube.size
        if size & (size - 1) or any(a % size for a in cube.lo):
            raise GridError(f"{cube} is not dyadic")
        level = grid.K - size.bit_length() + 1
        return cls(level, tuple(a // size for a in cube.lo))

    def to_dict(self) -> dict:
        return {"level": self.level, "corner": list(self.corner)}


@dataclass
class CubeFamily:
    cubes: list = field(default_factory=list)
    dilation: int = 1

    def __len__(self) -> int:
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def dilated(self) -> list[Cube]:
        return [c.dilate(self.dilation) if self.dilation != 1 else c for c in self.cubes]


# ---------------------------------------------------------------- prefix sums


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _dd_add(ahi, alo, bhi, blo):
    s, e = _two_sum(ahi, bhi)
    e = e + (alo + blo)
    hi = s + e
    return hi, e - (hi - s)


def _dd_cumsum(hi, lo, axis):
    hi = np.moveaxis(np.array(hi, dtype=float), axis, 0)
    lo = np.moveaxis(np.array(lo, dtype=float), axis, 0)
    out_hi = np.empty((hi.shape[0] + 1,) + hi.shape[1:])
    out_lo = np.empty_like(out_hi)
    out_hi[0] = 0.0
    out_lo[0] = 0.0
    acc_hi = np.zeros(hi.shape[1:])
    acc_lo = np.zeros(hi.shape[1:])
    for i in range(hi.shape[0]):
        acc_hi, acc_lo = _dd_add(acc_hi, acc_lo, hi[i], lo[i])
        out_hi[i + 1] = acc_hi
        out_lo[i + 1] = acc_lo
    return np.moveaxis(out_hi, 0, axis), np.moveaxis(out_lo, 0, axis)


class PrefixSum:
    """Summed-area table kept as a double-double pair (hi, lo).

    Window sums are differences of table entries, so the compensation keeps
    them accurate to a few ulps of the window sum itself rather than of the
    running total.
    """

    def __init__(self, values: np.ndarray, periodic: bool = False):
        values = np.asarray(values, dtype=float)
        self.n = values.ndim
        self.cells = values.shape[0]
        self.periodic = periodic
        if periodic:
            values = np.tile(values, (2,) * self.n)
        hi, lo = values, np.zeros_like(values)
        for ax in range(self.n):
            hi, lo = _dd_cumsum(hi, lo, ax)
        self.hi, self.lo = hi, lo

    def _corner_terms(self, lo_idx, size):
        """Yield (sign, index tuple) for the inclusion-exclusion corners."""
        for bits in itertools.product((0, 1), repeat=self.n):
            sign = (-1) ** (self.n - sum(bits))
            idx = tuple(a + b * size for a, b in zip(lo_idx, bits))
            yield sign, idx

    def window_sums(self, size: int) -> np.ndarray:
        """Sums over every window of ``size`` cells per axis.

        Zero mode returns windows lying inside the box (``cells - size + 1``
        starts per axis); periodic mode returns all ``cells`` wrapped starts.
        """
        count = self.cells if self.periodic else self.cells - size + 1
        if count < 1 or size > self.cells:
            raise GridError(f"window of {size} cells does not fit")
        tot_hi = np.zeros((count,) * self.n)
        tot_lo = np.zeros_like(tot_hi)
        for bits in itertools.product((0, 1), repeat=self.n):
            sign = (-1) ** (self.n - sum(bits))
            sl = tuple(slice(b * size, b * size + count) for b in bits)
            tot_hi, tot_lo = _dd_add(tot_hi, tot_lo, sign * self.hi[sl], sign * self.lo[sl])
        return tot_hi + tot_lo

    def query(self, lo: tuple[int, ...], size: int) -> float:
        if self.periodic:
            lo = tuple(a % self.cells for a in lo)
            size = min(size, self.cells)
        tot_hi, tot_lo = 0.0, 0.0
        for sign, idx in self._corner_terms(lo, size):
            tot_hi, tot_lo = _dd_add(tot_hi, tot_lo, sign * self.hi[idx], sign * self.lo[idx])
        return float(tot_hi + tot_lo)


@dataclass(frozen=True)
class GridFunction:
    """Step function constant on the finest cells of ``grid``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise GridError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(c)))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def abs(self) -> "GridFunction":
        return self.with_values(np.abs(self.values))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        if isinstance(c, GridFunction):
            _check_same_grid(self, c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def integral(self) -> float:
        return float(np.sum(self.values)) * self.grid.cell_volume

    @cached_property
    def abs_prefix(self) -> PrefixSum:
        return PrefixSum(np.abs(self.values), self.grid.periodic)

    @cached_property
    def signed_prefix(self) -> PrefixSum:
        return PrefixSum(self.values, self.grid.periodic)

    def upsample(self, levels: int = 1) -> "GridFunction":
        """Same step function on a grid refined ``levels`` times."""
        vals = self.values
        for ax in range(self.grid.n):
            vals = np.repeat(vals, 2**levels, axis=ax)
        return GridFunction(self.grid.refine(levels), vals)


def _check_same_grid(f: GridFunction, g: GridFunction):
    if f.grid != g.grid:
        raise GridError("grid mismatch")


def _as_cube(Q, grid: Grid) -> Cube:
    if isinstance(Q, DyadicCube):
        return Q.to_cube(grid)
    return Q


def cube_average(f: GridFunction, Q, signed: bool = False) -> float:
    """Average of ``|f|`` (or ``f`` when ``signed``) over ``Q``.

    The divisor is always ``|Q|``: zero-extension contributes nothing
    outside the box, periodic mode wraps.
    """
    grid = f.grid
    cube = _as_cube(Q, grid)
    prefix = f.signed_prefix if signed else f.abs_prefix
    if grid.periodic:
        if cube.size > grid.cells:
            raise GridError("cube larger than the periodic box")
        total = prefix.query(cube.lo, cube.size)
    else:
        sl = cube.clip(grid)
        if any(s.start >= s.stop for s in sl):
            return 0.0
        # clipped region is a box, not necessarily a cube: query axis by axis
        total = _box_query(prefix, sl)
    return total / cube.size**grid.n


def _box_query(prefix: PrefixSum, sl: tuple[slice, ...]) -> float:
    tot_hi, tot_lo = 0.0, 0.0
    for bits in itertools.product((0, 1), repeat=prefix.n):
        sign = (-1) ** (prefix.n - sum(bits))
        idx = tuple(s.stop if b else s.start for s, b in zip(sl, bits))
        tot_hi, tot_lo = _dd_add(tot_hi, tot_lo, sign * prefix.hi[idx], sign * prefix.lo[idx])
    return float(tot_hi + tot_lo)


def dyadic_levels(grid: Grid) -> range:
    """Levels ``j`` with ``2**-K <= 2**-j <= 2**L``, coarse to fine."""
    return range(-grid.L, grid.K + 1)


def enumerate_cubes(grid: Grid, mode: str = "dyadic") -> CubeFamily:
    if mode == "dyadic":
        cubes = []
        for j in dyadic_levels(grid):
            per_axis = 2 ** (j + grid.L)
            for corner in itertools.product(range(per_axis), repeat=grid.n):
                cubes.append(DyadicCube(j, corner))
        return CubeFamily(cubes)
    if mode in ("windows", "all-grid-windows"):
        cubes = []
        for size in range(1, grid.cells + 1):
            starts = range(grid.cells) if grid.periodic else range(grid.cells - size + 1)
            for lo in itertools.product(starts, repeat=grid.n):
                cubes.append(Cube(lo, size))
        return CubeFamily(cubes)
    raise GridError(f"unknown enumeration mode {mode!r}")


def window_sizes(grid: Grid) -> range:
    return range(1, grid.cells + 1)


def dyadic_block_sums(values: np.ndarray, grid: Grid, level: int) -> np.ndarray:
    """Sums of ``values`` over every dyadic cube of the given level."""
    size = 2 ** (grid.K - level)
    count = grid.cells // size
    shape = []
    for _ in range(grid.n):
        shape += [count, size]
    blocks = values.reshape(shape)
    return blocks.sum(axis=tuple(range(1, 2 * grid.n, 2)))
