import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardymorrey.batteries import cz_battery, fefferman_stein_constants
from hardymorrey.generators import fourier_mode, random_step
from hardymorrey.grid import Grid, GridFunction, enumerate_cubes
from hardymorrey.maxops import (
    MaximalError,
    TestFamily,
    discrete_rho,
    grand_maximal,
    hl_maximal,
    hl_maximal_naive,
    indicator_power_sum,
    peetre_maximal,
    shifted_dyadic_maximal,
    vector_maximal,
)
from hardymorrey.norms import (
    VectorGridFunction,
    heat_maximal,
    morrey_norm,
    vector_seq_norm,
    weak_morrey_norm,
)
from hardymorrey.shapes import ShapeFunction

from conftest import random_function


def brute_windows_maximal(f):
    """Loop over every lattice cube, wrapping when periodic, and spread its mean of |f|."""
    a = np.abs(f.values)
    N = f.grid.cells
    out = np.zeros(f.grid.shape)
    for Q in enumerate_cubes(f.grid, "windows"):
        idx = np.ix_(*[np.arange(lo, lo + Q.size) % N for lo in Q.lo])
        out[idx] = np.maximum(out[idx], a[idx].mean())
    return out


@pytest.mark.parametrize("mode", ["windows", "dyadic"])
def test_constant_is_fixed(mode):
    g = Grid(2, 0, 3)
    assert np.allclose(hl_maximal(GridFunction.constant(g, -2.0), mode).values, 2.0)


def test_single_cell_profile():
    g = Grid(1, 0, 5)
    v = np.zeros(g.shape)
    v[10] = 1.0
    M = hl_maximal(GridFunction(g, v)).values
    for m in range(0, 12):
        assert M[10 + m] == pytest.approx(1 / (m + 1), rel=1e-14)
        assert M[10 - min(m, 10)] == pytest.approx(1 / (min(m, 10) + 1), rel=1e-14)


def test_windows_matches_cube_loop():
    for g in (Grid(1, 0, 5), Grid(2, 0, 3), Grid(1, 0, 4, "periodic")):
        f = random_function(g, 4)
        assert np.allclose(hl_maximal(f).values, brute_windows_maximal(f), rtol=1e-13, atol=0)


def test_oracle_exhaustive_1d_and_2d():
    for g in (Grid(1, 0, 9), Grid(2, 0, 5)):
        f = random_step(g, seed=7, piece=1)
        gap = np.max(np.abs(hl_maximal(f).values - hl_maximal_naive(f).values))
        assert gap <= 1e-12


def test_dyadic_below_windows_and_shifted_envelope():
    g = Grid(1, 0, 7)
    f = random_function(g, 7)
    W = hl_maximal(f, "windows").values
    D = hl_maximal(f, "dyadic").values
    T = shifted_dyadic_maximal(f).values
    assert np.all(D <= W * (1 + 1e-14))
    envelope = float(np.max(W / T))
    # a lattice cube sits in a shifted dyadic cube at most 6 times larger
    assert 1.0 <= envelope <= 6.0


def test_vector_maximal_examples(rng):
    g = Grid(1, 0, 6)
    f = random_function(g, 1)
    z = GridFunction.zeros(g)
    MF = vector_maximal(VectorGridFunction((f, z), 2.0))
    assert np.array_equal(MF.components[0].values, hl_maximal(f).values)
    assert np.all(MF.components[1].values == 0)
    F = VectorGridFunction(tuple(random_function(g, s) for s in range(3)), 1.5)
    assert np.all(vector_maximal(F).pointwise().values >= F.pointwise().values * (1 - 1e-14))


def test_grand_maximal_examples():
    g = Grid(1, 0, 6, "periodic")
    assert np.allclose(grand_maximal(GridFunction.constant(g, -3.0), TestFamily.unit_mass(1)).values, 3.0, rtol=1e-12)
    z = Grid(1, 1, 5)
    f = GridFunction(z, (z.axis_centers() < 1).astype(float))
    assert np.all(grand_maximal(f).values >= heat_maximal(f).values * TestFamily.standard(1).members[0].amplitude - 1e-15)
    unit = grand_maximal(f, TestFamily.unit_mass(1))
    assert np.all(unit.values >= heat_maximal(f).values - 1e-15)
    assert np.all(grand_maximal(GridFunction.zeros(z)).values == 0)


@pytest.mark.parametrize("n", [1, 2])
def test_standard_family_rho_budget(n):
    fam = TestFamily.standard(n)
    assert fam.N == n + 2
    for rho in fam.rho(n):
        assert rho <= 1 + 1e-6


def test_rho_scales_with_amplitude():
    fam = TestFamily.unit_mass(1)
    base = discrete_rho(fam.members[1], 1, 3)
    assert base > 1.0
    std = TestFamily.standard(1).members[1]
    assert discrete_rho(std, 1, 3) == pytest.approx(1.0, rel=1e-12)


def test_peetre_examples():
    g = Grid(1, 0, 5, "periodic")
    assert np.allclose(peetre_maximal(GridFunction.constant(g, -2.0), 1.0, 1.0).values, 2.0)
    assert np.all(peetre_maximal(GridFunction.zeros(g), 1.0, 1.0).values == 0)
    f = fourier_mode(g, 2)
    d = 2 * math.pi * 4 + 1e-9
    P = peetre_maximal(f, 0.5, d).values
    M = hl_maximal(f.with_values(np.abs(f.values) ** 0.5)).values ** 2
    constant = float(np.max(P / M))
    assert np.isfinite(constant) and constant < 10
    with pytest.raises(MaximalError, match="spectrum exceeds declared ball"):
        peetre_maximal(random_step(g, seed=1, piece=1), 1.0, 1.0)
    with pytest.raises(MaximalError):
        peetre_maximal(GridFunction.zeros(Grid(1, 0, 3)), 1.0, 1.0)


def _copies(g, count, side=1 / 16):
    x = g.axis_centers()
    return [(x >= -1 + 2 * i / count) & (x < -1 + 2 * i / count + side) for i in range(count)]


def test_indicator_power_sum():
    g = Grid(1, 3, 4, origin=-4.0)
    x = g.axis_centers()
    rep = indicator_power_sum([(x >= -1) & (x < 1)], g, 2.0, 1.0, 0.5)
    assert rep.lhs > 0 and rep.rhs > 0
    empty = indicator_power_sum([], g, 2.0, 1.0, 0.5)
    assert empty.lhs == empty.rhs == 0
    ratios = [indicator_power_sum(_copies(g, c), g, 2.0, 1.0, 0.5).ratio for c in (4, 8, 16)]
    for a, b in zip(ratios, ratios[1:]):
        assert abs(b / a - 1) <= 0.2
    with pytest.raises(MaximalError, match="extent too small"):
        indicator_power_sum([], Grid(1, 0, 3), 2.0, 1.0, 0.5)
    with pytest.raises(MaximalError):
        indicator_power_sum([], g, 0.5, 1.0, 0.5)


fns = st.integers(0, 10_000).map(lambda s: random_function(Grid(1, 0, 6), s))


@given(fns)
def test_dominates_pointwise(f):
    assert np.all(hl_maximal(f).values >= np.abs(f.values))


@given(fns, fns)
def test_sublinear(f, g):
    lhs = hl_maximal(f + g).values
    assert np.all(lhs <= (hl_maximal(f).values + hl_maximal(g).values) * (1 + 1e-13))


def _weak_type_constant(K):
    phi = ShapeFunction.power(0.5)
    worst = 0.0
    for f in cz_battery(1, K, 50):
        ratio = weak_morrey_norm(hl_maximal(f), 1.0, phi).value / morrey_norm(f, 1.0, phi).value
        worst = max(worst, ratio)
    return worst


def test_weak_type_constant_refinement():
    a, b = _weak_type_constant(7), _weak_type_constant(8)
    assert abs(b / a - 1) <= 0.10


def test_sequence_order_constant_refinement():
    phi = ShapeFunction.power(0.5)

    def worst(K):
        g = Grid(1, 0, K)
        w = 0.0
        for i in range(10):
            comps = tuple(random_step(g, seed=100 * i + c, piece=g.cells >> 4, density=0.5) for c in range(3))
            F = VectorGridFunction(comps, 2.0)
            w = max(w, vector_seq_norm(vector_maximal(F), 2.0, phi) / vector_seq_norm(F, 2.0, phi))
        return w

    a, b = worst(7), worst(9)
    assert abs(b / a - 1) <= 0.10


def test_fefferman_stein_small_battery_stable():
    a = fefferman_stein_constants(7, count=8)
    b = fefferman_stein_constants(9, count=8)
    for key in a:
        assert abs(b[key] / a[key] - 1) <= 0.10
