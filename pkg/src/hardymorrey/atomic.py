"""Whitney cubes, Calderon-Zygmund splitting, atoms and atomic synthesis.

Level sets ``O_j = {M f > 2**j}`` are covered by their maximal dyadic
subcubes.  On each cube ``f`` is projected onto polynomials of degree
``<= d``; the bad parts ``b = (f - c) chi_Q`` carry vanishing moments and the
telescoped pieces ``A_{j,k} = b_{j,k} - sum b_{j+1,l}`` are the atoms up to
the scale ``C_0 2**j``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Cube, CubeFamily, DyadicCube, Grid, GridError, GridFunction
from .maxops import TestFamily, grand_maximal
from .norms import NormReport, RatioReport, hardy_morrey_norm, heat_maximal, morrey_norm, safe_ratio
from .shapes import ShapeFunction, check_zygmund_pair

MAX_DEGREE = 3
COND_LIMIT = 1e12
MOMENT_TOL = 1e-10
SIZE_TOL = 1e-12
NOISE_FLOOR = 1e-12


class AtomicError(ValueError):
    pass


# ------------------------------------------------------------------ Whitney


def whitney_decompose(O: np.ndarray, grid: Grid) -> CubeFamily:
    """Maximal dyadic cubes inside the cell set ``O`` (a boolean array).

    A cube is kept when it lies in ``O`` and its parent does not; the whole
    box is the coarsest candidate.  The result is disjoint and covers ``O``.
    """
    O = np.asarray(O, dtype=bool)
    if O.shape != grid.shape:
        raise GridError("cell set does not match the grid")
    full = [O]
    for _ in range(grid.L + grid.K):
        prev = full[-1]
        m = prev.shape[0] // 2
        blocks = prev.reshape(sum(((m, 2) for _ in range(grid.n)), ()))
        full.append(blocks.all(axis=tuple(range(1, 2 * grid.n, 2))))
    cubes = []
    top = len(full) - 1
    for k in range(top, -1, -1):
        keep = full[k].copy()
        if k < top:
            parent_full = full[k + 1]
            for ax in range(grid.n):
                parent_full = np.repeat(parent_full, 2, axis=ax)
            keep &= ~parent_full
        for idx in zip(*np.nonzero(keep)):
            cubes.append(DyadicCube(grid.K - k, tuple(int(i) for i in idx)))
    return CubeFamily(cubes)


# --------------------------------------------------------- polynomial moments


def multi_indices(n: int, d: int) -> list[tuple[int, ...]]:
    return [a for a in itertools.product(range(d + 1), repeat=n) if sum(a) <= d]


def _scaled_axis(size: int) -> np.ndarray:
    """Cell centres of a cube of ``size`` cells mapped to ``(-1, 1)``."""
    return (np.arange(size) + 0.5) / size * 2.0 - 1.0


def design_matrix(size: int, n: int, d: int) -> np.ndarray:
    """Scaled monomials ``u**alpha`` at the cells of a cube, one column per ``alpha``."""
    u = _scaled_axis(size)
    grids = np.meshgrid(*([u] * n), indexing="ij")
    cols = [np.prod([g**a for g, a in zip(grids, alpha)], axis=0).ravel() for alpha in multi_indices(n, d)]
    return np.stack(cols, axis=1)


def projector(size: int, n: int, d: int) -> np.ndarray:
    """Least-squares solve matrix ``pinv(A)`` for a cube of ``size`` cells.

    With at least ``d+1`` cells per side the monomials are independent and
    the Gram matrix must be well conditioned; smaller cubes use the
    minimum-norm solution, which still satisfies the normal equations.
    """
    A = design_matrix(size, n, d)
    if size >= d + 1:
        cond = np.linalg.cond(A) ** 2
        if cond > COND_LIMIT:
            raise AtomicError("moment system ill-conditioned")
    return np.linalg.pinv(A)


def discrete_moment(values: np.ndarray, grid: Grid, Q: Cube, alpha: tuple[int, ...]) -> float:
    """``int_Q a(x) x**alpha dx`` by the cell-centre rule (absolute coordinates)."""
    sl = Q.slices()
    xs = [x[sl] for x in grid.coords()]
    mono = np.prod([x**a for x, a in zip(xs, alpha)], axis=0)
    return float(np.sum(values * mono) * grid.cell_volume)


# --------------------------------------------------------------------- atoms


@dataclass(frozen=True, eq=False)
class Atom:
    """Values on the cells of ``cube`` (zero elsewhere by construction).

    ``size_kind`` is ``"inf"`` for ``|a| <= chi_Q`` or ``"q,eta"`` for the
    Morrey size bound ``||a||_{M_{q,eta}} <= 1 / eta(l(Q))``.
    """

    grid: Grid
    cube: DyadicCube
    patch: np.ndarray
    d: int = -1
    size_kind: str = "inf"

    def __post_init__(self):
        c = self.cell_cube
        if self.patch.shape != (c.size,) * self.grid.n:
            raise AtomicError("atom patch does not match its cube")

    @property
    def cell_cube(self) -> Cube:
        return self.cube.to_cube(self.grid)

    def values(self) -> GridFunction:
        out = np.zeros(self.grid.shape)
        out[self.cell_cube.slices()] = self.patch
        return GridFunction(self.grid, out)

    def indicator(self) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        out[self.cell_cube.slices()] = 1.0
        return out

    def moment_defects(self) -> dict:
        """Relative moment defects ``|int a x**alpha| / (||a||_inf |Q| l(Q)**|alpha|)``."""
        Q = self.cell_cube
        sup = float(np.max(np.abs(self.patch))) if self.patch.size else 0.0
        out = {}
        for alpha in multi_indices(self.grid.n, max(self.d, 0)) if self.d >= 0 else []:
            scale = sup * Q.volume(self.grid) * Q.side(self.grid) ** sum(alpha)
            scale *= max(1.0, float(np.max(np.abs(Q.center(self.grid))))) ** sum(alpha)
            m = discrete_moment(self.patch, self.grid, Q, alpha)
            out[alpha] = 0.0 if scale == 0 else abs(m) / scale
        return out

    def size_norm(self, q: float = math.inf, eta: ShapeFunction | None = None) -> float:
        """``||a||_inf`` or ``eta(l(Q)) ||a||_{M_{q,eta}}``; admissible when ``<= 1``."""
        if math.isinf(q):
            return float(np.max(np.abs(self.patch)))
        if eta is None:
            raise AtomicError("a (q, eta) size check needs eta")
        norm = morrey_norm(self.values(), q, eta, "dyadic").value
        return norm * float(eta(self.cube.side))

    def check(self, q: float = math.inf, eta: ShapeFunction | None = None) -> list[str]:
        problems = []
        if self.size_norm(q, eta) > 1 + SIZE_TOL:
            problems.append("size bound")
        bad = [a for a, v in self.moment_defects().items() if v > MOMENT_TOL]
        if bad:
            problems.append(f"moments {bad}")
        return problems


def make_atom(grid: Grid, cube: DyadicCube, patch: np.ndarray, d: int = -1) -> Atom:
    """Subtract the degree-``d`` projection (if ``d >= 0``) and scale to sup 1."""
    patch = np.asarray(patch, dtype=float)
    if d >= 0:
        size = patch.shape[0]
        A = design_matrix(size, grid.n, d)
        coef = projector(size, grid.n, d) @ patch.ravel()
        patch = patch - (A @ coef).reshape(patch.shape)
    sup = float(np.max(np.abs(patch)))
    if sup > 0:
        patch = patch / sup
    return Atom(grid, cube, patch, d)


# ---------------------------------------------------------------- CZ levels


@dataclass(eq=False)
class CZLevel:
    j: int
    O: np.ndarray
    cubes: list
    coeffs: list
    bad: list
    good: GridFunction

    def bad_sum(self) -> np.ndarray:
        out = np.zeros(self.good.grid.shape)
        for Q, b in zip(self.cubes, self.bad):
            out[Q.to_cube(self.good.grid).slices()] += b
        return out


def _blocks(values: np.ndarray, cubes: list[Cube]) -> np.ndarray:
    return np.stack([values[c.slices()].ravel() for c in cubes])


def cz_split(f: GridFunction, j: int, d: int, maximal: GridFunction) -> CZLevel:
    if not 0 <= d <= MAX_DEGREE:
        raise AtomicError(f"moment order d must be in 0..{MAX_DEGREE}")
    grid = f.grid
    O = maximal.values > 2.0**j
    family = whitney_decompose(O, grid)
    by_size: dict[int, list[int]] = {}
    cells = [Q.to_cube(grid) for Q in family.cubes]
    for i, c in enumerate(cells):
        by_size.setdefault(c.size, []).append(i)
    coeffs = [None] * len(cells)
    bad = [None] * len(cells)
    for size, idx in by_size.items():
        A = design_matrix(size, grid.n, d)
        P = projector(size, grid.n, d)
        F = _blocks(f.values, [cells[i] for i in idx])
        C = F @ P.T
        B = F - C @ A.T
        for row, i in enumerate(idx):
            coeffs[i] = C[row]
            bad[i] = B[row].reshape((size,) * grid.n)
    level = CZLevel(j, O, list(family.cubes), coeffs, bad, f)
    level.good = f.with_values(f.values - level.bad_sum())
    return level


# ---------------------------------------------------------- decomposition


@dataclass(eq=False)
class AtomicDecomposition:
    grid: Grid
    lambdas: list
    atoms: list
    labels: list
    residual: GridFunction
    j_min: int | None
    j_max: int | None
    d: int
    C0: float
    maximal: str = "grand"
    notes: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.atoms)

    def pairs(self):
        return list(zip(self.lambdas, self.atoms))


def maximal_for(f: GridFunction, kind: str = "grand") -> GridFunction:
    if kind == "grand":
        return grand_maximal(f, TestFamily.standard(f.grid.n))
    if kind == "heat":
        return heat_maximal(f)
    raise AtomicError(f"unknown maximal kind {kind!r}")


def default_j_min(M: GridFunction) -> int:
    """Lowest ``j`` with ``O_j = {M > 2**j}`` a proper subset of the box.

    Below it the whole box would be a Whitney cube with no parent meeting
    the complement, and its polynomial part no longer scales like ``2**j``.
    """
    low = float(M.values.min())
    if low > 0:
        return math.ceil(math.log2(low))
    return math.floor(math.log2(float(M.values[M.values > 0].min()))) - 1


def moment_order_floor(p: float, n: int) -> float:
    return n / p - n


def cz_decompose(
    f: GridFunction,
    p: float,
    phi: ShapeFunction | None = None,
    d: int | None = None,
    j_min: int | None = None,
    j_max: int | None = None,
    maximal: str | GridFunction = "grand",
    keep_levels: bool = False,
) -> AtomicDecomposition:
    """Atomic decomposition ``f = sum lambda_{j,k} a_{j,k} + residual`` on the grid.

    ``d`` defaults to ``max(0, ceil(n/p - n))``.  ``j_max`` defaults to
    ``ceil(log2 max Mf)``; ``j_min`` is the lowest level whose set ``O_j``
    still misses part of the box (see ``default_j_min``).  The residual is
    ``g_{j_min}``.
    """
    grid = f.grid
    n = grid.n
    dp = moment_order_floor(p, n)
    if d is None:
        d = max(0, math.ceil(dp - 1e-12))
    if d < dp - 1e-12:
        raise AtomicError(f"moment order d={d} below n/p - n = {dp:g}")
    if isinstance(maximal, GridFunction):
        M, kind = maximal, "given"
    else:
        M, kind = maximal_for(f, maximal), maximal
    top = float(M.values.max())
    if top <= 0:
        return AtomicDecomposition(grid, [], [], [], GridFunction.zeros(grid), None, None, d, 0.0, kind)
    if j_max is None:
        j_max = math.ceil(math.log2(top))
    elif np.any(M.values > 2.0**j_max):
        raise AtomicError("range does not exhaust maximal function")
    if j_min is None:
        j_min = default_j_min(M)
    if j_min > j_max:
        raise AtomicError("j_min above j_max")
    levels = [cz_split(f, j, d, M) for j in range(j_min, j_max + 1)]
    lambdas, atoms, labels, pieces = [], [], [], []
    for lo, hi in zip(levels[:-1], levels[1:]):
        A_of = {Q: b.copy() for Q, b in zip(lo.cubes, lo.bad)}
        for Ql, bl in zip(hi.cubes, hi.bad):
            Q = _ancestor_in(Ql, A_of)
            qc, sub = Q.to_cube(grid), Ql.to_cube(grid)
            sl = tuple(slice(a - c, a - c + sub.size) for a, c in zip(sub.lo, qc.lo))
            A_of[Q][sl] -= bl
        for k, Q in enumerate(lo.cubes):
            pieces.append((lo.j, k, Q, A_of[Q]))
    # pieces at cancellation level carry no signal, only rounding noise
    noise = NOISE_FLOOR * f.sup()
    pieces = [piece for piece in pieces if np.max(np.abs(piece[3])) > noise]
    C0 = max((float(np.max(np.abs(A))) / 2.0**j for j, _, _, A in pieces), default=0.0)
    for j, k, Q, A in pieces:
        lam = C0 * 2.0**j
        lambdas.append(lam)
        atoms.append(Atom(grid, Q, A / lam, d))
        labels.append((j, k))
    decomp = AtomicDecomposition(grid, lambdas, atoms, labels, levels[0].good, j_min, j_max, d, C0, kind)
    decomp.notes["partition"] = "indicator"
    if keep_levels:
        decomp.notes["levels"] = levels
    return decomp


def _ancestor_in(Q: DyadicCube, family: dict) -> DyadicCube:
    """The member of ``family`` containing ``Q`` (nesting of the level sets)."""
    cur = Q
    while cur not in family:
        if cur.level < -64:
            raise AtomicError("Whitney cubes are not nested")
        cur = cur.parent()
    return cur


# ------------------------------------------------------------- synthesis


def synthesize(pairs, grid: Grid | None = None) -> GridFunction:
    """``sum lambda_j a_j`` on the common grid (``grid`` needed for an empty list)."""
    pairs = list(pairs.pairs() if isinstance(pairs, AtomicDecomposition) else pairs)
    if not pairs:
        if grid is None:
            raise AtomicError("empty synthesis needs a grid")
        return GridFunction.zeros(grid)
    grid = pairs[0][1].grid if grid is None else grid
    out = np.zeros(grid.shape)
    for lam, atom in pairs:
        if atom.grid != grid:
            raise GridError("grid mismatch")
        out[atom.cell_cube.slices()] += lam * atom.patch
    return GridFunction(grid, out)


def coefficient_function(lambdas, atoms, v: float, grid: Grid) -> GridFunction:
    """``(sum (lambda_j chi_{Q_j})**v)**(1/v)``."""
    out = np.zeros(grid.shape)
    for lam, atom in zip(lambdas, atoms):
        out[atom.cell_cube.slices()] += abs(lam) ** v
    return GridFunction(grid, out ** (1.0 / v))


def verify_synthesis_bound(
    lambdas,
    atoms,
    p: float,
    phi: ShapeFunction,
    eta: ShapeFunction,
    variant: str = "thm1",
    q: float = math.inf,
    mode: str = "dyadic",
    scales=None,
) -> RatioReport:
    """Both sides of the atomic synthesis bound.

    ``thm1`` (``p = 1``): Morrey norm of the sum against that of
    ``sum lambda chi_Q``.  ``thm2`` (``p <= 1``): Hardy-Morrey norm of the sum
    against the ``l^p`` coefficient function.
    """
    lambdas = list(lambdas)
    atoms = list(atoms)
    if not atoms:
        return RatioReport(0.0, 0.0, 0.0)
    grid = atoms[0].grid
    if any(lam < 0 for lam in lambdas):
        raise AtomicError("coefficients must be nonnegative")
    if variant == "thm1":
        if p != 1:
            raise AtomicError("thm1 needs p = 1")
        if not check_zygmund_pair(phi, eta).finite:
            raise AtomicError("(phi, eta) fail the Zygmund pair condition")
        for i, a in enumerate(atoms):
            if a.size_norm(1.0, eta) > 1 + SIZE_TOL:
                raise AtomicError(f"atom {i}: ||a||_(M_1,eta) exceeds 1/eta(l(Q))")
        lhs = morrey_norm(synthesize(zip(lambdas, atoms), grid), 1.0, phi, mode).value
        rhs = morrey_norm(coefficient_function(lambdas, atoms, 1.0, grid), 1.0, phi, mode).value
    elif variant == "thm2":
        if p > 1:
            raise AtomicError("thm2 needs p <= 1")
        dp = moment_order_floor(p, grid.n)
        for i, a in enumerate(atoms):
            if a.d < dp - 1e-12:
                raise AtomicError(f"atom {i}: moment order {a.d} below n/p - n")
            problems = a.check(q, eta)
            if problems:
                raise AtomicError(f"atom {i}: {', '.join(problems)}")
        lhs = hardy_morrey_norm(synthesize(zip(lambdas, atoms), grid), p, phi, scales, mode).value
        rhs = morrey_norm(coefficient_function(lambdas, atoms, p, grid), p, phi, mode).value
    else:
        raise AtomicError(f"unknown variant {variant!r}")
    return RatioReport(lhs, rhs, safe_ratio(lhs, rhs))


def verify_coefficient_bound(
    decomp: AtomicDecomposition,
    f: GridFunction,
    p: float,
    phi: ShapeFunction,
    v: float,
    mode: str = "dyadic",
    scales=None,
) -> RatioReport:
    if v <= 0:
        raise AtomicError("v must be positive")
    coef = coefficient_function(decomp.lambdas, decomp.atoms, v, f.grid)
    lhs = morrey_norm(coef, p, phi, mode).value
    rhs = hardy_morrey_norm(f, p, phi, scales, mode).value
    return RatioReport(lhs, rhs, safe_ratio(lhs, rhs))


# ---------------------------------------------- J1 / J2 bookkeeping path


def split_morrey_norm(lambdas, atoms, phi: ShapeFunction) -> NormReport:
    """Dyadic ``M_{1,phi}`` norm of ``sum lambda_j a_j`` for nonnegative atoms,
    assembled cube by cube from atoms inside the cube (whole masses) and
    atoms containing it (partial masses)."""
    atoms = list(atoms)
    if not atoms:
        raise AtomicError("empty atom list")
    grid = atoms[0].grid
    if any(np.any(a.patch < 0) for a in atoms) or any(lam < 0 for lam in lambdas):
        raise AtomicError("the split evaluator needs nonnegative atoms")
    top = grid.L + grid.K
    mass = [np.zeros((grid.cells >> k,) * grid.n) for k in range(top + 1)]
    for lam, a in zip(lambdas, atoms):
        c = a.cell_cube
        k0 = c.size.bit_length() - 1
        weighted = lam * a.patch
        # J2: sub-cubes of Q_j pick up part of the atom
        for k in range(k0):
            s = 2**k
            m = c.size // s
            blocks = weighted.reshape(sum(((m, s) for _ in range(grid.n)), ())).sum(
                axis=tuple(range(1, 2 * grid.n, 2))
            )
            sl = tuple(slice(lo // s, lo // s + m) for lo in c.lo)
            mass[k][sl] += blocks
        # J1: Q_j itself and every ancestor get the whole mass
        total = float(weighted.sum())
        for k in range(k0, top + 1):
            idx = tuple(lo >> k for lo in c.lo)
            mass[k][idx] += total
    best, witness = 0.0, None
    for k in range(top + 1):
        size = 2**k
        avg = mass[k] / size**grid.n
        val = avg / float(phi(size * grid.h))
        i = int(np.argmax(val))
        if val.flat[i] > best:
            best = float(val.flat[i])
            witness = Cube(tuple(int(x) * size for x in np.unravel_index(i, val.shape)), size)
    return NormReport(best, witness, "dyadic", {"p": 1.0, "phi": phi.literal(), "path": "J1/J2"})
