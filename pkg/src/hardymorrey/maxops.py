"""Hardy-Littlewood, vector-valued, grand and Peetre maximal operators."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.ndimage import maximum_filter1d

from .conv import convolve, gaussian_weights
from .grid import Cube, Grid, GridError, GridFunction, PrefixSum
from .norms import VectorGridFunction, default_heat_scales, lq_combine, safe_ratio

MAXIMAL_MODES = ("windows", "dyadic")


class MaximalError(ValueError):
    pass


def _spread_max(avg: np.ndarray, size: int, N: int, periodic: bool) -> np.ndarray:
    """``out[x] = max avg[start]`` over window starts covering cell ``x``.

    Separable over axes, so a square of starts is handled one axis at a
    time.
    """
    out = avg
    for ax in range(avg.ndim):
        out = np.moveaxis(out, ax, -1)
        if size > 1:
            if periodic:
                padded = np.concatenate([out[..., N - size + 1 :], out], axis=-1)
            else:
                pad = np.full(out.shape[:-1] + (size - 1,), -np.inf)
                padded = np.concatenate([pad, out, pad], axis=-1)
            filt = maximum_filter1d(padded, size, axis=-1, mode="constant", cval=-np.inf)
            out = filt[..., size // 2 : size // 2 + N]
        out = np.moveaxis(out, -1, ax)
    return out


def hl_maximal(f: GridFunction, mode: str = "windows") -> GridFunction:
    """Hardy-Littlewood maximal function on the grid.

    ``windows``: max over every lattice-aligned cube containing the cell
    (inside the box, or wrapped in periodic mode), one sliding max per side
    length.  ``dyadic``: max over the dyadic ancestors of the cell.
    """
    grid = f.grid
    N = grid.cells
    prefix = PrefixSum(np.abs(f.values), grid.periodic)
    out = np.zeros(grid.shape)
    if mode == "windows":
        for size in range(1, N + 1):
            avg = prefix.window_sums(size) / size**grid.n
            out = np.maximum(out, _spread_max(avg, size, N, grid.periodic))
    elif mode == "dyadic":
        for k in range(grid.L + grid.K + 1):
            size = 2**k
            avg = prefix.window_sums(size)[(slice(None, None, size),) * grid.n] / size**grid.n
            for ax in range(grid.n):
                avg = np.repeat(avg, size, axis=ax)
            out = np.maximum(out, avg)
    else:
        raise MaximalError(f"unknown maximal mode {mode!r}")
    return f.with_values(out)


def hl_maximal_naive(f: GridFunction, sizes=None) -> GridFunction:
    """Brute-force oracle: every window summed directly, O(#windows * size**n).

    ``sizes`` restricts the side lengths (used for timing extrapolation).
    """
    grid = f.grid
    N = grid.cells
    a = np.abs(f.values)
    if grid.periodic:
        a = np.tile(a, (2,) * grid.n)
    out = np.zeros(grid.shape)
    for size in sizes if sizes is not None else range(1, N + 1):
        starts = range(N) if grid.periodic else range(N - size + 1)
        for lo in itertools.product(starts, repeat=grid.n):
            sl = tuple(slice(s, s + size) for s in lo)
            avg = float(np.sum(a[sl])) / size**grid.n
            if grid.periodic:
                for shifted in itertools.product(*[_wrap_slices(s, size, N) for s in lo]):
                    out[shifted] = np.maximum(out[shifted], avg)
            else:
                out[sl] = np.maximum(out[sl], avg)
    return f.with_values(out)


def _wrap_slices(start: int, size: int, N: int) -> list[slice]:
    end = start + size
    if end <= N:
        return [slice(start, end)]
    return [slice(start, N), slice(0, end - N)]


def naive_window_count(grid: Grid, sizes=None) -> int:
    N = grid.cells
    sizes = range(1, N + 1) if sizes is None else sizes
    return sum((N if grid.periodic else N - s + 1) ** grid.n for s in sizes)


def shifted_dyadic_maximal(f: GridFunction) -> GridFunction:
    """Max of dyadic maximal functions over the ``3**n`` grids shifted by
    multiples of a third of the box (zero-padded to twice the box)."""
    grid = f.grid
    N = grid.cells
    big = Grid(grid.n, grid.L + 1, grid.K, "zero", grid.origin)
    out = np.zeros(grid.shape)
    shifts = [0, N // 3, (2 * N) // 3]
    for shift in itertools.product(shifts, repeat=grid.n):
        vals = np.zeros(big.shape)
        vals[tuple(slice(s, s + N) for s in shift)] = np.abs(f.values)
        m = hl_maximal(GridFunction(big, vals), "dyadic").values
        out = np.maximum(out, m[tuple(slice(s, s + N) for s in shift)])
    return f.with_values(out)


def vector_maximal(F: VectorGridFunction, mode: str = "windows") -> VectorGridFunction:
    return VectorGridFunction(tuple(hl_maximal(c, mode) for c in F.components), F.q)


# ------------------------------------------------------------ grand maximal


@dataclass(frozen=True)
class TestMember:
    """Radial profile ``amplitude * profile(|x|**2)`` supported in ``|x| <= radius``."""

    __test__ = False  # keep pytest from collecting the class by name

    name: str
    profile: Callable[[np.ndarray], np.ndarray]
    amplitude: float
    radius: float
    unit_mass: float
    separable: bool = False

    @property
    def mass(self) -> float:
        return self.amplitude * self.unit_mass

    def __call__(self, x: list[np.ndarray]) -> np.ndarray:
        r2 = sum(xi**2 for xi in x)
        return self.amplitude * self.profile(r2)


def _gauss_profile(n: int):
    c = (4 * math.pi) ** (-n / 2)
    return lambda r2: c * np.exp(-r2 / 4.0)


BUMP_POWER = 3


def _bump_unit_mass(n: int) -> float:
    m = BUMP_POWER
    if n == 1:
        return math.gamma(m + 1) * math.sqrt(math.pi) / math.gamma(m + 1.5)
    return math.pi / (m + 1)


def _bump_profile(n: int):
    mass = _bump_unit_mass(n)
    return lambda r2: np.clip(1.0 - r2, 0.0, None) ** BUMP_POWER / mass


def discrete_rho(member: TestMember, n: int, N: int, order: int = 2, spacing: float = 1 / 32) -> float:
    """``sum_{|alpha| <= order} max (1+|x|)**N |finite-difference d^alpha psi|``."""
    R = member.radius + 4 * spacing
    ax = np.arange(-R, R + spacing / 2, spacing)
    xs = np.meshgrid(*([ax] * n), indexing="ij")
    vals = member(xs)
    weight = (1 + np.sqrt(sum(x**2 for x in xs))) ** N
    total = 0.0
    for alpha in itertools.product(range(order + 1), repeat=n):
        if sum(alpha) > order:
            continue
        d = vals
        for axis, k in enumerate(alpha):
            for _ in range(k):
                d = np.gradient(d, spacing, axis=axis)
        total += float(np.max(weight * np.abs(d)))
    return total


@dataclass(frozen=True)
class TestFamily:
    __test__ = False

    members: tuple
    N: int
    order: int = 2

    @classmethod
    def standard(cls, n: int) -> "TestFamily":
        """Gaussian and polynomial bump scaled so the discrete ``rho_N <= 1``, ``N = n + 2``."""
        N = n + 2
        raw = cls.unit_mass(n).members
        members = []
        for m in raw:
            rho = discrete_rho(m, n, N)
            members.append(TestMember(m.name, m.profile, 1.0 / rho, m.radius, m.unit_mass, m.separable))
        return cls(tuple(members), N)

    @classmethod
    def unit_mass(cls, n: int) -> "TestFamily":
        """Heat-kernel Gaussian and bump with unit integral (not rho-normalised)."""
        gauss = TestMember("gaussian", _gauss_profile(n), 1.0, 2 * math.sqrt(30.0), 1.0, separable=True)
        bump = TestMember("bump", _bump_profile(n), 1.0, 1.0, 1.0)
        return cls((gauss, bump), n + 2)

    def rho(self, n: int) -> list[float]:
        return [discrete_rho(m, n, self.N, self.order) for m in self.members]


def member_kernel(member: TestMember, grid: Grid, s: float) -> np.ndarray:
    """Weights of ``s**-n psi(x/s)`` at cell offsets, discrete mass = ``member.mass``.

    Separable members (the Gaussian) return the 1D heat weights at ``t = s**2``
    whose n-fold product is the full kernel.
    """
    if member.separable:
        return gaussian_weights(grid, s * s, member.mass ** (1.0 / grid.n))
    h = grid.h
    R = max(0, int(math.ceil(member.radius * s / h)))
    d = np.arange(-R, R + 1) * h / s
    xs = np.meshgrid(*([d] * grid.n), indexing="ij")
    w = member(xs)
    total = w.sum()
    if total <= 0:
        w = np.zeros_like(w)
        w[(R,) * grid.n] = 1.0
        total = 1.0
    return w * (member.mass / total)


def default_grand_scales(grid: Grid) -> np.ndarray:
    """``s = sqrt(t)`` over the default heat times, so the Gaussian member
    reproduces the heat maximal function exactly."""
    return np.sqrt(default_heat_scales(grid))


def grand_maximal(f: GridFunction, family: TestFamily | None = None, scales=None) -> GridFunction:
    family = TestFamily.standard(f.grid.n) if family is None else family
    if not family.members:
        raise MaximalError("empty test family")
    scales = default_grand_scales(f.grid) if scales is None else np.asarray(scales, dtype=float)
    out = np.zeros(f.grid.shape)
    for member in family.members:
        for s in scales:
            k = member_kernel(member, f.grid, float(s))
            if member.separable and f.grid.n > 1:
                vals = f.values
                for ax in range(f.grid.n):
                    vals = convolve(vals, k, f.grid, axis=ax)
            else:
                vals = convolve(f.values, k, f.grid)
            out = np.maximum(out, np.abs(vals))
    return f.with_values(out)


# ------------------------------------------------------------------ Peetre


def angular_frequencies(grid: Grid) -> list[np.ndarray]:
    xi = 2 * math.pi * np.fft.fftfreq(grid.cells, d=grid.h)
    if grid.n == 1:
        return [xi]
    return list(np.meshgrid(xi, xi, indexing="ij"))


def spectral_tail(f: GridFunction, d: float) -> float:
    """Fraction of the discrete spectral energy outside ``|xi| <= d``."""
    F = np.abs(np.fft.fftn(f.values)) ** 2
    total = F.sum()
    if total == 0:
        return 0.0
    mag = np.sqrt(sum(x**2 for x in angular_frequencies(f.grid)))
    return float(F[mag > d * (1 + 1e-9) + 1e-12].sum() / total)


def peetre_maximal(f: GridFunction, r: float, d: float, tail_tol: float = 1e-10) -> GridFunction:
    """``sup_y |f(x - y)| / (1 + d |y|**(n/r))`` over periodic cell shifts."""
    grid = f.grid
    if not grid.periodic:
        raise MaximalError("Peetre maximal needs periodic boundary")
    if spectral_tail(f, d) > tail_tol:
        raise MaximalError("spectrum exceeds declared ball")
    N = grid.cells
    a = np.abs(f.values)
    offs = np.arange(N)
    dist = np.minimum(offs, N - offs) * grid.h
    out = np.zeros(grid.shape)
    for shift in itertools.product(range(N), repeat=grid.n):
        y = math.sqrt(sum(dist[s] ** 2 for s in shift))
        w = 1.0 + d * y ** (grid.n / r)
        out = np.maximum(out, np.roll(a, shift, axis=tuple(range(grid.n))) / w)
    return f.with_values(out)


# ------------------------------------------------------ (M chi_E)^kappa sums


@dataclass(frozen=True)
class PowerSumReport:
    lhs: float
    rhs: float
    ratio: float


def _lp_on_box(values: np.ndarray, grid: Grid, half: float, p: float) -> float:
    inside = np.ones(grid.shape, dtype=bool)
    for x in grid.coords():
        inside &= np.abs(x) <= half
    return float((np.sum(values[inside] ** p) * grid.cell_volume) ** (1.0 / p))


def indicator_power_sum(E: list, grid: Grid, kappa: float, p: float, theta: float) -> PowerSumReport:
    """Both sides of the ``(M chi_{E_k})**kappa`` estimate on ``[-1,1]**n``.

    The right side sums over ``l = 1, 2, ...`` while ``[-2**l, 2**l]**n``
    fits in the grid box.
    """
    if not (p * kappa > 1 and p <= 1 and 0 <= theta < 1):
        raise MaximalError("need p*kappa > 1, p <= 1, 0 <= theta < 1")
    lo, hi = grid.origin, grid.origin + grid.extent
    if lo > -2 or hi < 2:
        raise MaximalError("extent too small")
    if not E:
        return PowerSumReport(0.0, 0.0, 0.0)
    S = np.zeros(grid.shape)
    count = np.zeros(grid.shape)
    for e in E:
        chi = GridFunction(grid, np.asarray(e, dtype=float))
        S += hl_maximal(chi, "windows").values ** kappa
        count += chi.values
    lhs = _lp_on_box(S, grid, 1.0, p)
    total = 0.0
    l = 1
    while -(2.0**l) >= lo and 2.0**l <= hi:
        term = 2.0 ** (-grid.n * theta / p) * _lp_on_box(count, grid, 2.0**l, p)
        total += term ** (1.0 / kappa)
        l += 1
    rhs = total**kappa
    return PowerSumReport(lhs, rhs, safe_ratio(lhs, rhs))


def pointwise_lq(F: VectorGridFunction) -> np.ndarray:
    return lq_combine(F.stack(), F.q, axis=0)


__all__ = [
    "Cube",
    "GridError",
    "MaximalError",
    "TestFamily",
    "TestMember",
    "grand_maximal",
    "hl_maximal",
    "hl_maximal_naive",
    "indicator_power_sum",
    "peetre_maximal",
    "shifted_dyadic_maximal",
    "vector_maximal",
]
