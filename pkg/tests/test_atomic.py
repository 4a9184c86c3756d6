import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardymorrey.atomic import (
    Atom,
    AtomicError,
    coefficient_function,
    cz_decompose,
    cz_split,
    make_atom,
    maximal_for,
    split_morrey_norm,
    synthesize,
    verify_coefficient_bound,
    verify_synthesis_bound,
    whitney_decompose,
)
from hardymorrey.batteries import _thm1_family, _thm2_family, check_roundtrip, cz_battery
from hardymorrey.generators import indicator, random_step, spike
from hardymorrey.grid import DyadicCube, Grid, GridError, GridFunction
from hardymorrey.norms import morrey_norm
from hardymorrey.shapes import ShapeFunction

from conftest import random_function

PHI = ShapeFunction.power(0.75)
ETA = ShapeFunction.power(0.25)


def cover_check(O, family, grid):
    seen = np.zeros(grid.shape, dtype=int)
    for Q in family.cubes:
        c = Q.to_cube(grid)
        seen[c.slices()] += 1
        parent = Q.parent().to_cube(grid) if Q.level > -grid.L else None
        if parent is not None:
            assert not O[parent.slices()].all()
    return seen


def test_whitney_examples():
    g = Grid(1, 0, 3)
    Q = DyadicCube(1, (1,))
    O = np.zeros(g.shape, dtype=bool)
    O[Q.to_cube(g).slices()] = True
    assert list(whitney_decompose(O, g).cubes) == [Q]
    u = Grid(1, 2, 0)
    O = np.array([True, True, True, False])
    assert sorted(whitney_decompose(O, u).cubes, key=lambda c: c.corner) == [DyadicCube(-1, (0,)), DyadicCube(0, (2,))]
    assert len(whitney_decompose(np.zeros(g.shape, dtype=bool), g).cubes) == 0
    with pytest.raises(GridError):
        whitney_decompose(np.zeros(3, dtype=bool), g)


@pytest.mark.parametrize("grid", [Grid(1, 0, 8), Grid(2, 0, 4)])
def test_whitney_exhaustive(grid):
    O = np.random.default_rng(5).random(grid.shape) < 0.6
    fam = whitney_decompose(O, grid)
    seen = cover_check(O, fam, grid)
    assert np.array_equal(seen, O.astype(int))


def test_cz_split_examples():
    g = Grid(1, 0, 4)
    f = GridFunction.constant(g, 0.5)
    lvl = cz_split(f, 0, 0, maximal_for(f))
    assert not lvl.O.any() and not lvl.cubes
    assert np.array_equal(lvl.good.values, f.values)

    s = spike(g, 8.0)
    # the rho-normalized grand maximal of this spike stays below 1, the heat maximal does not
    lvl = cz_split(s, 0, 0, maximal_for(s, "heat"))
    assert lvl.cubes
    for Q, b, c in zip(lvl.cubes, lvl.bad, lvl.coeffs):
        cell = Q.to_cube(g)
        assert c[0] == pytest.approx(s.values[cell.slices()].mean(), rel=1e-13)
        assert abs(b.sum()) * g.cell_volume <= 1e-12
    assert np.allclose(lvl.good.values + lvl.bad_sum(), s.values, atol=1e-12, rtol=0)
    with pytest.raises(AtomicError):
        cz_split(s, 0, 4, maximal_for(s))


def test_cz_split_first_moment_2d():
    g = Grid(2, 0, 4)
    f = random_function(g, 3)
    lvl = cz_split(f, 0, 1, maximal_for(f))
    x, y = g.coords()
    for Q, b in zip(lvl.cubes, lvl.bad):
        sl = Q.to_cube(g).slices()
        scale = np.abs(f.values).max() * Q.to_cube(g).volume(g)
        for mono in (1.0, x[sl], y[sl]):
            assert abs(np.sum(b * mono)) * g.cell_volume <= 1e-12 * scale


def test_decompose_zero_and_indicator():
    g = Grid(1, 0, 7)
    D = cz_decompose(GridFunction.zeros(g), 1.0)
    assert len(D) == 0 and not D.residual.values.any()
    f = indicator(g, 0.25, 0.25)
    D = cz_decompose(f, 1.0, d=0)
    rec = synthesize(D.pairs(), g).values + D.residual.values
    assert np.max(np.abs(rec - f.values)) <= 1e-8
    # good-part bound with the positive sign of the exponent; C is the measured C0 here
    assert D.residual.sup() <= D.C0 * 2.0**D.j_min * (1 + 1e-12)
    assert D.notes["partition"] == "indicator"


def test_decompose_seed3_atoms():
    f = random_step(Grid(1, 0, 8), seed=3)
    D = cz_decompose(f, 1.0, d=1)
    assert len(D) > 0
    for lam, a in D.pairs():
        assert lam == pytest.approx(D.C0 * 2.0 ** a_level(D, a))
        assert a.check() == []
        assert not a.values().values[~a.indicator().astype(bool)].any()


def a_level(D, atom):
    return dict((id(a), j) for (j, _), a in zip(D.labels, D.atoms))[id(atom)]


def test_decompose_errors():
    f = random_step(Grid(1, 0, 6), seed=1)
    with pytest.raises(AtomicError, match="range does not exhaust maximal function"):
        cz_decompose(f, 1.0, j_max=-5)
    with pytest.raises(AtomicError, match="below n/p - n"):
        cz_decompose(f, 0.5, d=0)


def test_telescoping_and_nesting():
    f = random_step(Grid(2, 0, 4), seed=8)
    D = cz_decompose(f, 1.0, d=1, keep_levels=True)
    levels = D.notes["levels"]
    for lo, hi in zip(levels[:-1], levels[1:]):
        assert np.all(hi.O <= lo.O)
        lows = set(lo.cubes)
        for Q in hi.cubes:
            hits = [P for P in lows if P.to_cube(f.grid).contains(Q.to_cube(f.grid))]
            assert len(hits) == 1
        pieces = np.zeros(f.grid.shape)
        for lam, a in D.pairs():
            if a_level(D, a) == lo.j:
                pieces += lam * a.values().values
        assert np.allclose(hi.good.values - lo.good.values, pieces, atol=1e-12 * f.sup(), rtol=0)


@pytest.mark.parametrize("n,K", [(1, 8), (2, 4)])
@pytest.mark.parametrize("d", [0, 1])
def test_roundtrip_battery_sample(n, K, d):
    for f in cz_battery(n, K, count=8):
        rep = check_roundtrip(f, d)
        assert rep["error"] <= 1e-8 * f.sup()
        assert rep["worst_size"] <= 1 + 1e-12
        assert rep["worst_moment"] <= 1e-10
        assert rep["support_ok"]


def test_c0_refinement_1d():
    def worst(K):
        return max(cz_decompose(f, 1.0, d=1).C0 for f in cz_battery(1, K, count=10))

    a, b = worst(7), worst(9)
    assert abs(b / a - 1) <= 0.2


def test_synthesize_examples():
    g = Grid(1, 0, 5)
    Q = DyadicCube(2, (1,))
    a = Atom(g, Q, np.ones((8,)))
    assert np.array_equal(synthesize([(1.0, a)]).values, a.indicator())
    assert not synthesize([], g).values.any()
    with pytest.raises(AtomicError):
        synthesize([])
    other = Atom(Grid(1, 0, 4), DyadicCube(2, (1,)), np.ones((4,)))
    with pytest.raises(GridError):
        synthesize([(1.0, a), (1.0, other)])


def test_roundtrip_via_synthesize():
    f = random_step(Grid(1, 0, 8), seed=12)
    D = cz_decompose(f, 1.0)
    assert np.max(np.abs(synthesize(D).values - (f.values - D.residual.values))) <= 1e-8 * f.sup()


def test_synthesis_single_atom_ratio_one():
    g = Grid(1, 0, 6)
    Q = DyadicCube(2, (1,))
    chi = Atom(g, Q, np.ones((Q.to_cube(g).size,)))
    assert verify_synthesis_bound([1.0], [chi], 1.0, PHI, ETA).ratio == pytest.approx(1.0, rel=1e-12)
    assert verify_synthesis_bound([], [], 1.0, PHI, ETA).ratio == 0.0


def test_synthesis_families():
    g = Grid(1, 0, 8)
    rng = np.random.default_rng(4)
    for _ in range(10):
        lam, atoms = _thm1_family(g, rng)
        assert verify_synthesis_bound(lam, atoms, 1.0, PHI, ETA).ratio <= 1 + 1e-9
    lam, atoms = _thm2_family(g, rng)
    rep = verify_synthesis_bound(lam, atoms, 0.5, PHI, ETA, "thm2")
    assert 0 < rep.ratio < 10


def test_synthesis_admissibility_errors():
    g = Grid(1, 0, 6)
    Q = DyadicCube(2, (1,))
    big = Atom(g, Q, np.full((16,), 50.0))
    with pytest.raises(AtomicError, match="atom 0"):
        verify_synthesis_bound([1.0], [big], 1.0, PHI, ETA)
    with pytest.raises(AtomicError, match="nonnegative"):
        verify_synthesis_bound([-1.0], [big], 1.0, PHI, ETA)
    raw = Atom(g, Q, np.ones((16,)), d=1)
    with pytest.raises(AtomicError, match="atom 0: moments"):
        verify_synthesis_bound([1.0], [raw], 0.5, PHI, ETA, "thm2")
    with pytest.raises(AtomicError, match="Zygmund"):
        verify_synthesis_bound([1.0], [raw], 1.0, ShapeFunction.power(0.25), ShapeFunction.power(0.75))


def test_make_atom_moments():
    g = Grid(1, 0, 6)
    a = make_atom(g, DyadicCube(2, (2,)), np.arange(16.0) ** 2, d=1)
    assert a.check() == []
    assert np.max(np.abs(a.patch)) == pytest.approx(1.0)


def test_coefficient_bound_examples():
    g = Grid(1, 0, 7)
    phi = ShapeFunction.power(0.5)
    z = GridFunction.zeros(g)
    assert verify_coefficient_bound(cz_decompose(z, 1.0), z, 1.0, phi, 1.0).ratio == 0.0
    f = indicator(g, 0.25, 0.25)
    D = cz_decompose(f, 1.0)
    assert math.isfinite(verify_coefficient_bound(D, f, 1.0, phi, 1.0).ratio)
    half = verify_coefficient_bound(D, f, 1.0, phi, 0.5).lhs
    assert half >= verify_coefficient_bound(D, f, 1.0, phi, 1.0).lhs * (1 - 1e-12)
    with pytest.raises(AtomicError):
        verify_coefficient_bound(D, f, 1.0, phi, 0.0)


def test_coefficient_function_exponent():
    g = Grid(1, 0, 4)
    a = Atom(g, DyadicCube(1, (0,)), np.ones((8,)))
    b = Atom(g, DyadicCube(2, (0,)), np.ones((4,)))
    c = coefficient_function([3.0, 4.0], [a, b], 2.0, g).values
    assert c[0] == pytest.approx(5.0) and c[7] == pytest.approx(3.0) and c[8] == 0


@given(st.integers(0, 10_000))
def test_split_evaluator_matches_direct(seed):
    g = Grid(1, 0, 7)
    lam, atoms = _thm1_family(g, np.random.default_rng(seed))
    direct = morrey_norm(synthesize(zip(lam, atoms), g), 1.0, PHI).value
    assert split_morrey_norm(lam, atoms, PHI).value == pytest.approx(direct, rel=1e-10)
