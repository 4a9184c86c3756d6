"""Fractional integrals, Olsen-type products, convolution operators and the
Littlewood-Paley square function on grid functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.signal import fftconvolve

from .grid import Grid, GridError, GridFunction
from .norms import RatioReport, hardy_morrey_norm, morrey_norm, safe_ratio
from .shapes import ShapeFunction, check_integral_condition


class CalderonError(ValueError):
    pass


# ------------------------------------------------------ fractional integral

GAUSS_POINTS = 6
NEAR_CELLS = 2
NEAR_SPLIT = 8


def _riesz_1d_weights(R: int, h: float, alpha: float) -> np.ndarray:
    """``int_{cell d} |z|**(alpha-1) dz`` for offsets ``|d| <= R`` (exact)."""
    edges = (np.arange(-R, R + 2) - 0.5) * h
    F = np.sign(edges) * np.abs(edges) ** alpha / alpha
    return np.diff(F)


def _self_cell_2d(a: float, alpha: float) -> float:
    """``int_{[-a,a]^2} |z|**(alpha-2) dz`` in polar form."""
    I, _ = integrate.quad(lambda t: math.cos(t) ** (-alpha), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return 8.0 / alpha * a**alpha * I


def _gauss_cell_sums(centers_x, centers_y, half, alpha, points):
    """Tensor Gauss-Legendre ``int |z|**(alpha-2)`` over squares of half-side ``half``."""
    nodes, weights = np.polynomial.legendre.leggauss(points)
    out = np.zeros(np.broadcast(centers_x, centers_y).shape)
    for xi, wi in zip(nodes, weights):
        for yj, wj in zip(nodes, weights):
            r2 = (centers_x + half * xi) ** 2 + (centers_y + half * yj) ** 2
            out += wi * wj * r2 ** ((alpha - 2) / 2)
    return out * half * half


@lru_cache(maxsize=32)
def _riesz_2d_weights(R: int, h: float, alpha: float) -> np.ndarray:
    """Cell integrals of ``|z|**(alpha-2)`` for offsets in ``[-R, R]**2``.

    Self cell in closed polar form; the first rings split into subcells;
    the rest by a 6x6 Gauss rule per cell.
    """
    d = np.arange(-R, R + 1) * h
    X, Y = np.meshgrid(d, d, indexing="ij")
    W = _gauss_cell_sums(X, Y, h / 2, alpha, GAUSS_POINTS)
    sub = h / NEAR_SPLIT
    offs = (np.arange(NEAR_SPLIT) + 0.5) * sub - h / 2
    for i in range(-NEAR_CELLS, NEAR_CELLS + 1):
        for j in range(-NEAR_CELLS, NEAR_CELLS + 1):
            if i == 0 and j == 0 or max(abs(i), abs(j)) > R:
                continue
            sx, sy = np.meshgrid(i * h + offs, j * h + offs, indexing="ij")
            W[R + i, R + j] = _gauss_cell_sums(sx, sy, sub / 2, alpha, GAUSS_POINTS).sum()
    W[R, R] = _self_cell_2d(h / 2, alpha)
    return W


def riesz_weights(grid: Grid, alpha: float, R: int | None = None) -> np.ndarray:
    """Centred weights of ``|x - y|**(alpha - n)`` integrated over each cell."""
    if not 0 < alpha < grid.n:
        raise CalderonError("alpha must lie in (0, n)")
    R = grid.cells - 1 if R is None else R
    if grid.n == 1:
        return _riesz_1d_weights(R, grid.h, alpha)
    return _riesz_2d_weights(R, grid.h, float(alpha))


def frac_integral(f: GridFunction, alpha: float) -> GridFunction:
    """``I_alpha f(x) = int f(y) |x - y|**(alpha - n) dy`` at cell centres.

    ``f`` is read as a piecewise-constant function vanishing outside the box
    (periodic grids included), so each cell contributes its value times the
    exact integral of the kernel over that cell.
    """
    W = riesz_weights(f.grid, alpha)
    R = f.grid.cells - 1
    full = fftconvolve(f.values, W, mode="full")
    out = full[(slice(R, R + f.grid.cells),) * f.grid.n]
    return f.with_values(out)


def frac_integral_at(f: GridFunction, alpha: float, x) -> float:
    """``I_alpha f`` at an arbitrary point (1D, exact antiderivative)."""
    if f.grid.n != 1:
        raise CalderonError("point evaluation is 1D only")
    if not 0 < alpha < 1:
        raise CalderonError("alpha must lie in (0, n)")
    h = f.grid.h
    lo = f.grid.origin + np.arange(f.grid.cells) * h - x
    F = lambda z: np.sign(z) * np.abs(z) ** alpha / alpha  # noqa: E731
    return float(np.sum(f.values * (F(lo + h) - F(lo))))


def classical_shape(n: int, lam: float, p: float) -> ShapeFunction:
    """``phi(r) = r**((lam - n) / p)``."""
    return ShapeFunction.power((n - lam) / p)


def adams_target(p: float, lam: float, alpha: float, n: int) -> float:
    inv = 1.0 / p - alpha / (n - lam)
    return math.inf if inv <= 0 else 1.0 / inv


@dataclass(frozen=True)
class CalderonReport:
    lhs: float
    rhs: float
    ratio: float
    params: dict

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "params": self.params}


def verify_adams(f: GridFunction, p: float, q: float, lam: float, alpha: float, mode: str = "dyadic", scales=None) -> CalderonReport:
    n = f.grid.n
    if not 0 <= lam < n:
        raise CalderonError("lambda must lie in [0, n)")
    if abs(1.0 / p - 1.0 / q - alpha / (n - lam)) > 1e-12:
        raise CalderonError("exponents violate 1/p - 1/q = alpha/(n - lambda)")
    src, tgt = classical_shape(n, lam, p), classical_shape(n, lam, q)
    If = frac_integral(f, alpha)
    if p <= 1:
        lhs = hardy_morrey_norm(If, q, tgt, scales, mode).value
        rhs = hardy_morrey_norm(f, p, src, scales, mode).value
    else:
        lhs = morrey_norm(If, q, tgt, mode).value
        rhs = morrey_norm(f, p, src, mode).value
    params = {"p": p, "q": q, "lambda": lam, "alpha": alpha, "source": src.literal(), "target": tgt.literal()}
    return CalderonReport(lhs, rhs, safe_ratio(lhs, rhs), params)


def verify_olsen(f: GridFunction, g: GridFunction, p: float, lam: float, alpha: float, mode: str = "dyadic", scales=None) -> CalderonReport:
    """``||g I_alpha f||_{HM_{p,lam}}`` against ``||g||_{M_{1,n-alpha}} ||f||_{HM_{p,lam}}``.

    ``M_{1,n-alpha}`` is read on the classical scale, i.e. shape ``r**-alpha``.
    """
    if g.grid != f.grid:
        raise GridError("grid mismatch")
    n = f.grid.n
    q = adams_target(p, lam, alpha, n)
    if q < 1:
        raise CalderonError("exponent out of theorem range")
    shape = classical_shape(n, lam, p)
    g_shape = classical_shape(n, n - alpha, 1.0)
    prod = g.values * frac_integral(f, alpha).values
    lhs = hardy_morrey_norm(f.with_values(prod), p, shape, scales, mode).value
    rhs = morrey_norm(g, 1.0, g_shape, mode).value * hardy_morrey_norm(f, p, shape, scales, mode).value
    params = {"p": p, "q": q, "lambda": lam, "alpha": alpha, "g_shape": g_shape.literal(), "shape": shape.literal()}
    return CalderonReport(lhs, rhs, safe_ratio(lhs, rhs), params)


# ----------------------------------------------------- convolution kernels


def _min_image(grid: Grid) -> list[np.ndarray]:
    N = grid.cells
    k = np.arange(N)
    d = np.where(k <= N // 2, k, k - N) * grid.h
    return list(np.meshgrid(*([d] * grid.n), indexing="ij"))


def _periodic_gradient_norm(values: np.ndarray, h: float, m: int) -> np.ndarray:
    """Frobenius norm of the ``m``-th derivative tensor by central differences."""
    n = values.ndim
    derivs = [values]
    for _ in range(m):
        derivs = [(np.roll(d, -1, axis=ax) - np.roll(d, 1, axis=ax)) / (2 * h) for d in derivs for ax in range(n)]
    return np.sqrt(sum(d**2 for d in derivs))


@dataclass(frozen=True, eq=False)
class ConvolutionKernel:
    """Kernel density on a periodic grid; index 0 is the zero offset."""

    grid: Grid
    values: np.ndarray
    fourier_bound: float | None = None
    name: str = "kernel"

    def __post_init__(self):
        if not self.grid.periodic:
            raise CalderonError("convolution kernels live on periodic grids")
        if self.values.shape != self.grid.shape or not np.all(np.isfinite(self.values)):
            raise CalderonError("kernel samples must be finite and match the grid")
        if self.fourier_bound is not None:
            got = self.computed_fourier_bound()
            if abs(got - self.fourier_bound) > 1e-6 * max(1.0, got):
                raise CalderonError(f"declared Fourier bound {self.fourier_bound} != computed {got}")

    @classmethod
    def delta(cls, grid: Grid) -> "ConvolutionKernel":
        v = np.zeros(grid.shape)
        v[(0,) * grid.n] = 1.0 / grid.cell_volume
        return cls(grid, v, name="delta")

    @classmethod
    def odd_gaussian(cls, grid: Grid, scale: float = 0.1) -> "ConvolutionKernel":
        """``x_1 exp(-|x|**2 / scale**2)``, antisymmetrised, scaled to ``||F k||_inf = 1``."""
        xs = _min_image(grid)
        v = xs[0] / scale * np.exp(-sum(x**2 for x in xs) / scale**2)
        flipped = v[tuple(slice(None) for _ in range(grid.n))]
        for ax in range(grid.n):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        v = 0.5 * (v - flipped)
        k = cls(grid, v, name="odd-gaussian")
        return cls(grid, v / k.computed_fourier_bound(), name="odd-gaussian")

    @property
    def weights(self) -> np.ndarray:
        return self.values * self.grid.cell_volume

    def computed_fourier_bound(self) -> float:
        return float(np.max(np.abs(np.fft.fftn(self.weights))))

    def seminorms(self, order: int = 2) -> list[float]:
        """``A_m = max |x|**(n+m) |grad^m k|`` over cells, ``m = 0..order``."""
        r = np.sqrt(sum(x**2 for x in _min_image(self.grid)))
        return [
            float(np.max(r ** (self.grid.n + m) * _periodic_gradient_norm(self.values, self.grid.h, m)))
            for m in range(order + 1)
        ]

    def mean(self) -> float:
        return float(np.sum(self.weights))

    def to_dict(self) -> dict:
        return {"name": self.name, "fourier_bound": self.computed_fourier_bound(), "A": self.seminorms()}


def convolve_operator(f: GridFunction, k: ConvolutionKernel) -> GridFunction:
    if k.grid != f.grid:
        raise GridError("grid mismatch")
    spec = np.fft.fftn(f.values) * np.fft.fftn(k.weights)
    return f.with_values(np.real(np.fft.ifftn(spec)))


def verify_t54(f: GridFunction, k: ConvolutionKernel, p: float, phi: ShapeFunction, mode: str = "dyadic", scales=None) -> CalderonReport:
    if not check_integral_condition(phi).finite:
        raise CalderonError("phi fails the integral condition")
    A = k.seminorms()
    if not all(math.isfinite(a) for a in A):
        raise CalderonError("kernel seminorms are not finite")
    lhs = hardy_morrey_norm(convolve_operator(f, k), p, phi, scales, mode).value
    rhs = hardy_morrey_norm(f, p, phi, scales, mode).value
    params = {"p": p, "phi": phi.literal(), "kernel": k.to_dict()}
    return CalderonReport(lhs, rhs, safe_ratio(lhs, rhs), params)


# --------------------------------------------------------- Littlewood-Paley


def lp_theta(r) -> np.ndarray:
    """Annular bump: 1 on ``[1/2, 2]``, squared-cosine tapers in ``log2 r`` to 0 at ``1/4`` and ``4``."""
    r = np.asarray(r, dtype=float)
    s = np.log2(np.where(r > 0, r, 1e-300))
    out = np.zeros_like(s)
    out = np.where((s >= -2) & (s < -1), np.sin(0.5 * math.pi * (s + 2)) ** 2, out)
    out = np.where((s >= -1) & (s <= 1), 1.0, out)
    out = np.where((s > 1) & (s <= 2), np.cos(0.5 * math.pi * (s - 1)) ** 2, out)
    return np.where(r > 0, out, 0.0)


def _frequency_radius(grid: Grid) -> np.ndarray:
    xi = 2 * math.pi * np.fft.fftfreq(grid.cells, d=grid.h)
    mesh = np.meshgrid(*([xi] * grid.n), indexing="ij")
    return np.sqrt(sum(x**2 for x in mesh))


def lp_scales(grid: Grid) -> range:
    rad = _frequency_radius(grid)
    lo, hi = rad[rad > 0].min(), rad.max()
    return range(math.floor(math.log2(lo)) - 2, math.ceil(math.log2(hi)) + 3)


def partition_sum(grid: Grid) -> np.ndarray:
    rad = _frequency_radius(grid)
    return sum(lp_theta(rad / 2.0**j) ** 2 for j in lp_scales(grid))


def partition_bounds(grid: Grid) -> tuple[float, float]:
    """Min and max of ``sum_j theta(2**-j xi)**2`` over nonzero grid frequencies."""
    s = partition_sum(grid)
    live = _frequency_radius(grid) > 0
    return float(s[live].min()), float(s[live].max())


def square_function(f: GridFunction) -> GridFunction:
    if not f.grid.periodic:
        raise CalderonError("the square function needs a periodic grid")
    F = np.fft.fftn(f.values)
    rad = _frequency_radius(f.grid)
    acc = np.zeros(f.grid.shape)
    for j in lp_scales(f.grid):
        piece = np.fft.ifftn(F * lp_theta(rad / 2.0**j))
        acc += np.abs(piece) ** 2
    return f.with_values(np.sqrt(acc))


def littlewood_paley_norm(f: GridFunction, p: float, phi: ShapeFunction, mode: str = "dyadic") -> float:
    return morrey_norm(square_function(f), p, phi, mode).value


@dataclass(frozen=True)
class LPReport:
    ratio_low: float
    ratio_high: float
    ratios: tuple

    def to_dict(self) -> dict:
        return {"ratio_low": self.ratio_low, "ratio_high": self.ratio_high, "ratios": list(self.ratios)}


def verify_lp_equivalence(fs, p: float, phi: ShapeFunction, mode: str = "dyadic", scales=None) -> LPReport:
    """Square-function norm over Hardy-Morrey norm across one or more functions."""
    fs = [fs] if isinstance(fs, GridFunction) else list(fs)
    ratios = []
    for f in fs:
        lhs = littlewood_paley_norm(f, p, phi, mode)
        rhs = hardy_morrey_norm(f, p, phi, scales, mode).value
        ratios.append(safe_ratio(lhs, rhs))
    return LPReport(min(ratios), max(ratios), tuple(ratios))


def relative_ratio(a: RatioReport | CalderonReport, b: RatioReport | CalderonReport) -> float:
    return abs(a.ratio / b.ratio - 1.0) if b.ratio else math.inf
