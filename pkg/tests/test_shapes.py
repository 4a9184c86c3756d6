import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardymorrey.quadrature import default_radii
from hardymorrey.shapes import (
    ShapeError,
    ShapeFunction,
    check_gp,
    check_integral_condition,
    check_pth_power_condition,
    check_supremal_condition,
    check_zygmund_pair,
    normalize_shape,
    parse_shape,
)

power = ShapeFunction.power
const = ShapeFunction.constant


def test_gp_examples():
    rep = check_gp(power(0.5), 1.0, 1)
    assert rep.ok and rep.almost_increasing_constant == pytest.approx(1.0)
    assert not check_gp(power(2.0), 1.0, 1).ok
    rep = check_gp(const(1.0), 1.0, 1)
    assert rep.ok and rep.almost_increasing_constant == 1.0


def test_nonpositive_shape_rejected():
    with pytest.raises(ShapeError, match="shape not positive"):
        const(-1.0)
    with pytest.raises(ShapeError, match="shape not positive"):
        ShapeFunction.tabulated([1.0, 2.0], [1.0, -1.0])


def test_normalize_examples():
    r = default_radii()
    psi = normalize_shape(power(0.5), 1.0, 1)
    assert np.allclose(psi(r), power(0.5)(r), rtol=1e-12)
    assert np.allclose(normalize_shape(const(1.0), 1.0, 1)(r), 1.0)


def test_normalize_power_two_by_grid_infimum():
    r = default_radii()
    phi = power(2.0)
    psi = normalize_shape(phi, 1.0, 1)(r)
    # oracle: brute-force infimum over sampled v >= r on a thinned grid
    idx = np.arange(0, r.size, 97)
    for i in idx:
        v = r[i:]
        assert psi[i] == pytest.approx(np.min(phi(v) * v / r[i]), rel=1e-12)
    assert np.all(np.diff(psi * r) >= -1e-12 * psi[1:] * r[1:])
    assert np.all(psi <= phi(r) * (1 + 1e-12))


@pytest.mark.parametrize("phi", [power(0.5), power(2.0), power(1.5), ShapeFunction.logpower(0.5, 1.0), const(2.0)])
def test_normalized_shape_is_in_gp(phi):
    psi = normalize_shape(phi, 1.0, 1)
    rep = check_gp(psi, 1.0, 1)
    assert rep.almost_increasing_constant <= 1 + 1e-10


def test_zygmund_examples():
    assert check_zygmund_pair(power(0.75), power(0.25)).C == pytest.approx(2.0, abs=1e-3)
    assert math.isinf(check_zygmund_pair(power(0.5), power(0.5)).C)
    assert check_zygmund_pair(power(0.5), const(1.0)).C == pytest.approx(2.0, abs=1e-3)


@pytest.mark.parametrize("a", [0.1, 0.25, 0.5, 1.0, 2.0])
def test_integral_condition_power(a):
    assert check_integral_condition(power(a)).C == pytest.approx(1 / a, rel=1e-3)


def test_integral_condition_constant_diverges():
    assert not check_integral_condition(const(3.0)).finite


def test_pth_power_examples():
    assert check_pth_power_condition(power(0.75), power(0.25), 0.5).C == pytest.approx(4.0, abs=1e-2)
    assert math.isinf(check_pth_power_condition(power(0.3), power(0.3), 0.5).C)
    a = check_pth_power_condition(power(0.6), power(0.1), 1.0).C
    assert a == check_zygmund_pair(power(0.6), power(0.1)).C


def test_supremal_examples():
    assert check_supremal_condition(power(0.5), power(0.5), 1.0, 1, variant="VZ").finite
    assert math.isinf(check_supremal_condition(power(0.5), const(1.0), 1.0, 1, variant="MizN").C)
    assert check_supremal_condition(const(1.0), const(1.0), 2.0, 1, variant="VZ").C == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        check_supremal_condition(power(0.5), power(0.5), 1.0, 1, variant="VZM", r_exp=2.0)


BATTERY = [power(a) for a in (0.0, 0.2, 0.5, 0.9, 1.0)] + [ShapeFunction.logpower(a, b) for a in (0.3, 0.6) for b in (-1.0, 1.0)]


@pytest.mark.parametrize("phi1", BATTERY)
@pytest.mark.parametrize("phi2", BATTERY[:4])
def test_mizn_implies_vz(phi1, phi2):
    if check_supremal_condition(phi1, phi2, 1.0, 1, variant="MizN").finite:
        assert check_supremal_condition(phi1, phi2, 1.0, 1, variant="VZ").finite


@given(st.floats(0.05, 1.5), st.floats(0.0, 1.0), st.floats(0.2, 1.0))
def test_zygmund_implies_pth_power(a, b, p):
    phi, eta = power(a), power(b)
    if check_zygmund_pair(phi, eta).finite:
        assert check_pth_power_condition(phi, eta, p).finite


@pytest.mark.parametrize(
    "text, expected",
    [
        ("power:a=0.5", power(0.5)),
        ("logpower:a=0.5,b=1", ShapeFunction.logpower(0.5, 1.0)),
        ("const:1", const(1.0)),
    ],
)
def test_parse_literals(text, expected):
    assert parse_shape(text) == expected
    assert parse_shape(expected.literal()) == expected


def test_parse_table(tmp_path):
    path = tmp_path / "phi.txt"
    np.savetxt(path, np.column_stack([[0.5, 1.0, 2.0], [2.0, 1.0, 0.5]]))
    phi = parse_shape(f"table:{path}")
    assert phi(1.0) == pytest.approx(1.0)
    assert phi(4.0) == pytest.approx(0.25)


@pytest.mark.parametrize("bad", ["power:b=1", "power:a", "wave:a=1", "logpower:b=2"])
def test_parse_rejects(bad):
    with pytest.raises(ShapeError):
        parse_shape(bad)
