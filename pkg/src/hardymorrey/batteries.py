"""Seeded batteries that measure the constants of the main inequalities.

Each function builds the same continuum test functions at a given
resolution ``K`` so a constant can be compared across refinements.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import atomic, calderon, hardy, maxops, norms
from .generators import fourier_mode, indicator, random_step
from .grid import DyadicCube, Grid, GridFunction
from .shapes import ShapeFunction

PHI_SYNTH = ShapeFunction.power(0.75)
ETA_SYNTH = ShapeFunction.power(0.25)


@dataclass(frozen=True)
class Measured:
    """A measured constant: the worst ratio over a battery."""

    name: str
    value: float
    count: int
    extra: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "count": self.count, **self.extra}


# ------------------------------------------------------------ maximal oracle


def maximal_oracle_gap(grid: Grid, seed: int = 7) -> float:
    f = random_step(grid, seed=seed, piece=1)
    fast = maxops.hl_maximal(f, "windows").values
    slow = maxops.hl_maximal_naive(f).values
    return float(np.max(np.abs(fast - slow)))


def maximal_speedup(K: int = 12, sample_sizes: int = 24, seed: int = 7) -> dict:
    """Fast windows maximal against the naive loop on ``2**K`` cells (1D).

    The naive cost is extrapolated from a sample of side lengths spread over
    the full range, scaled by the exact window count.
    """
    grid = Grid(1, 0, K)
    f = random_step(grid, seed=seed, piece=1)
    t0 = time.perf_counter()
    maxops.hl_maximal(f, "windows")
    fast = time.perf_counter() - t0
    sizes = np.unique(np.linspace(1, grid.cells, sample_sizes).astype(int))
    t0 = time.perf_counter()
    maxops.hl_maximal_naive(f, sizes=sizes)
    sampled = time.perf_counter() - t0
    scale = maxops.naive_window_count(grid) / maxops.naive_window_count(grid, sizes)
    naive = sampled * scale
    return {"fast_s": fast, "naive_s_estimate": naive, "speedup": naive / fast}


# ----------------------------------------------------------------- sandwich


def sandwich_pairs(count: int = 20, seed: int = 5, n: int = 1, K: int = 6):
    """``(grid, Q, phi)`` with dyadic ``Q`` and ``phi = power(a)``, ``a in [0.1, 0.9]``."""
    rng = np.random.default_rng(seed)
    grid = Grid(n, 0, K)
    out = []
    for a in np.linspace(0.1, 0.9, count):
        level = int(rng.integers(0, K + 1))
        corner = tuple(int(c) for c in rng.integers(0, 2**level, size=n))
        out.append((grid, DyadicCube(level, corner), ShapeFunction.power(float(a))))
    return out


def sandwich_constants(pairs) -> dict:
    """Max over pairs of ``phi(l(Q)) ||chi_Q||`` per mode, and the min of the same."""
    out = {"dyadic_max": 0.0, "dyadic_min": math.inf, "windows_max": 0.0, "windows_min": math.inf}
    for grid, Q, phi in pairs:
        chi = np.zeros(grid.shape)
        chi[Q.to_cube(grid).slices()] = 1.0
        f = GridFunction(grid, chi)
        scale = float(phi(Q.side))
        for mode in ("dyadic", "windows"):
            c = norms.morrey_norm(f, 1.0, phi, mode).value * scale
            out[f"{mode}_max"] = max(out[f"{mode}_max"], c)
            out[f"{mode}_min"] = min(out[f"{mode}_min"], c)
    return out


# --------------------------------------------------------------- CZ battery


def cz_battery(n: int, K: int, count: int = 50, seed: int = 0, piece_levels: int | None = None):
    """Random step functions constant on ``2**-piece_levels`` blocks.

    The default block is ``1/16`` in 1D and ``1/4`` in 2D, so the coarsest
    2D grid used (``2**4`` per axis) still resolves each block by 4 cells.
    """
    piece_levels = (4 if n == 1 else 2) if piece_levels is None else piece_levels
    grid = Grid(n, 0, K)
    piece = grid.cells >> piece_levels
    return [random_step(grid, seed=seed + i, piece=max(piece, 1)) for i in range(count)]


def check_roundtrip(f: GridFunction, d: int, p: float = 1.0) -> dict:
    D = atomic.cz_decompose(f, p, d=d)
    rec = atomic.synthesize(D.pairs(), f.grid).values + D.residual.values
    err = float(np.max(np.abs(rec - f.values)))
    worst_moment = 0.0
    worst_size = 0.0
    support_ok = True
    for a in D.atoms:
        worst_size = max(worst_size, a.size_norm())
        defects = a.moment_defects()
        worst_moment = max([worst_moment, *defects.values()])
        support_ok &= a.patch.shape == (a.cell_cube.size,) * f.grid.n
    return {
        "error": err,
        "relative_error": err / f.sup() if f.sup() else err,
        "atoms": len(D),
        "C0": D.C0,
        "worst_moment": worst_moment,
        "worst_size": worst_size,
        "support_ok": bool(support_ok),
    }


def coefficient_constant(n: int, K: int, v: float, p: float = 1.0, phi=None, count: int = 50, seed: int = 0, d: int = 1) -> Measured:
    phi = ShapeFunction.power(0.5) if phi is None else phi
    worst = 0.0
    for f in cz_battery(n, K, count, seed):
        D = atomic.cz_decompose(f, p, d=d)
        worst = max(worst, atomic.verify_coefficient_bound(D, f, p, phi, v).ratio)
    return Measured(f"coefficient v={v:g}", worst, count, {"n": n, "K": K})


# ------------------------------------------------------ synthesis families


def _thm1_family(grid: Grid, rng, max_level: int = 3, max_depth: int = 3):
    """Atoms ``(l(Q)/l(Q'))**(1/4) chi_{Q'}`` with ``Q'`` a random subcube of ``Q``."""
    lambdas, atoms = [], []
    for _ in range(int(rng.integers(3, 11))):
        level = int(rng.integers(0, max_level + 1))
        corner = tuple(int(c) for c in rng.integers(0, 2**level, size=grid.n))
        Q = DyadicCube(level, corner)
        depth = int(rng.integers(0, max_depth + 1))
        sub = Q
        for _ in range(depth):
            sub = sub.child(int(rng.integers(0, 2**grid.n)))
        size = Q.to_cube(grid).size
        patch = np.zeros((size,) * grid.n)
        inner = sub.to_cube(grid)
        outer = Q.to_cube(grid)
        sl = tuple(slice(a - b, a - b + inner.size) for a, b in zip(inner.lo, outer.lo))
        patch[sl] = 2.0 ** (depth * 0.25)
        atoms.append(atomic.Atom(grid, Q, patch))
        lambdas.append(float(rng.exponential()))
    return lambdas, atoms


def _thm2_family(grid: Grid, rng, max_level: int = 4):
    """Gaussian bumps inside random cubes, first moments removed, sup 1."""
    lambdas, atoms = [], []
    for _ in range(int(rng.integers(3, 11))):
        level = int(rng.integers(0, max_level + 1))
        corner = tuple(int(c) for c in rng.integers(0, 2**level, size=grid.n))
        Q = DyadicCube(level, corner)
        sigma = float(rng.uniform(0.1, 0.3))
        shift = rng.uniform(-0.2, 0.2, size=grid.n)
        c = Q.to_cube(grid)
        u = [((np.arange(c.size) + 0.5) / c.size - 0.5 - s) / sigma for s in shift]
        mesh = np.meshgrid(*u, indexing="ij")
        patch = np.exp(-0.5 * sum(m**2 for m in mesh))
        atoms.append(atomic.make_atom(grid, Q, patch, d=1))
        lambdas.append(float(rng.exponential()))
    return lambdas, atoms


def synthesis_constants(K: int, count: int = 100, seed: int = 11, n: int = 1) -> dict:
    """Worst thm1 ratio (``p = 1``) and thm2 ratio (``p = 1/2``) over seeded families."""
    grid = Grid(n, 0, K)
    rng = np.random.default_rng(seed)
    w1 = w2 = 0.0
    for _ in range(count):
        lam, atoms = _thm1_family(grid, rng)
        w1 = max(w1, atomic.verify_synthesis_bound(lam, atoms, 1.0, PHI_SYNTH, ETA_SYNTH, "thm1").ratio)
        lam, atoms = _thm2_family(grid, rng)
        w2 = max(w2, atomic.verify_synthesis_bound(lam, atoms, 0.5, PHI_SYNTH, ETA_SYNTH, "thm2").ratio)
    return {"thm1": w1, "thm2": w2, "count": count, "K": K}


# -------------------------------------------------------- Fefferman-Stein


def fefferman_stein_constants(K: int, ps=(1.5, 2.0), qs=(1.5, 2.0, math.inf), count: int = 30, seed: int = 21, components: int = 3) -> dict:
    """Worst ``||MF||_{M_{p,phi}(l_q)} / ||F||`` with ``phi = power(1/2)``."""
    grid = Grid(1, 0, K)
    phi = ShapeFunction.power(0.5)
    worst = {(p, q): 0.0 for p in ps for q in qs}
    for i in range(count):
        comps = tuple(
            random_step(grid, seed=seed + 1000 * i + c, piece=grid.cells >> 4, density=0.5) for c in range(components)
        )
        Ms = tuple(maxops.hl_maximal(c, "windows") for c in comps)
        for p in ps:
            for q in qs:
                lhs = norms.vector_morrey_norm(norms.VectorGridFunction(Ms, q), p, phi).value
                rhs = norms.vector_morrey_norm(norms.VectorGridFunction(comps, q), p, phi).value
                worst[(p, q)] = max(worst[(p, q)], norms.safe_ratio(lhs, rhs))
    return worst


# -------------------------------------------------------- Adams and Olsen


ADAMS = {"p": 1.0, "q": 2.0, "lam": 0.5, "alpha": 0.25}


def calderon_battery(K: int, seed: int = 31, count: int = 6) -> list[GridFunction]:
    grid = Grid(1, 0, K)
    fs = [indicator(grid, lo, side) for lo, side in [(0.0, 0.5), (0.25, 0.25), (0.5, 0.125)]]
    fs += [random_step(grid, seed=seed + i, piece=grid.cells >> 4, positive=True) for i in range(count)]
    return fs


def adams_constant(K: int) -> float:
    a = ADAMS
    return max(calderon.verify_adams(f, a["p"], a["q"], a["lam"], a["alpha"]).ratio for f in calderon_battery(K))


def olsen_constant(K: int, seed: int = 41) -> float:
    a = ADAMS
    grid = Grid(1, 0, K)
    gs = [GridFunction.constant(grid, 1.0)] + [random_step(grid, seed=seed + i, piece=grid.cells >> 4, positive=True) for i in range(3)]
    worst = 0.0
    for f in calderon_battery(K):
        for g in gs:
            worst = max(worst, calderon.verify_olsen(f, g, a["p"], a["lam"], a["alpha"]).ratio)
    return worst


# ------------------------------------------------------ Littlewood-Paley


LP_P = 2.0
LP_PHI = ShapeFunction.power(0.25)


def lp_battery(K: int, seed: int = 51, count: int = 6) -> list[GridFunction]:
    grid = Grid(1, 0, K, "periodic")
    fs = [fourier_mode(grid, j0) for j0 in (1, 2, 3, 4)]
    for i in range(count):
        f = random_step(grid, seed=seed + i, piece=grid.cells >> 4)
        fs.append(f.with_values(f.values - f.values.mean()))
    return fs


def lp_bracket(K: int) -> dict:
    rep = calderon.verify_lp_equivalence(lp_battery(K), LP_P, LP_PHI)
    low, high = calderon.partition_bounds(Grid(1, 0, K, "periodic"))
    return {"ratio_low": rep.ratio_low, "ratio_high": rep.ratio_high, "partition_low": low, "partition_high": high}


def t54_constant(K: int, seed: int = 61) -> float:
    grid = Grid(1, 0, K, "periodic")
    k = calderon.ConvolutionKernel.odd_gaussian(grid)
    phi = ShapeFunction.power(0.5)
    worst = 0.0
    for i in range(4):
        f = random_step(grid, seed=seed + i, piece=grid.cells >> 4)
        worst = max(worst, calderon.verify_t54(f, k, 1.0, phi).ratio)
    return worst


# ------------------------------------------------------------------ Hardy


POWER_TRIPLES = [(1.0, -3.0), (0.0, -2.0), (0.5, -2.5), (0.0, -1.5), (2.0, -4.0), (0.25, -3.0), (1.5, -3.0), (0.75, -2.0), (0.1, -1.6), (3.0, -5.5)]


def hardy_power_battery(trials: int = 16, seed: int = 0) -> list[dict]:
    rows = []
    S = hardy.ray_grid()
    for alpha, beta in POWER_TRIPLES:
        v1, v2, w, B_exact = hardy.power_triple(alpha, beta)
        rep = hardy.verify_hardy_inequality(v1, v2, w, trials=trials, seed=seed, S=S)
        rows.append(
            {
                "alpha": alpha,
                "beta": beta,
                "B_exact": B_exact,
                "B": rep.B,
                "B_rel_error": abs(rep.B / B_exact - 1),
                "worst_ratio": rep.worst_ratio,
                "sharpness": rep.achiever_ratio / rep.B,
            }
        )
    return rows
