"""Radial weights ``phi(r)`` and the admissibility conditions on them.

Every checker returns a measured constant on a log grid of radii.  A
constant of ``inf`` means the defining integral diverges or the grid ratio
keeps growing at an end of the grid, i.e. no finite constant exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quadrature import (
    default_radii,
    grows_at_ends,
    suffix_integrals,
    suffix_max,
    suffix_min,
)

KINDS = ("power", "logpower", "constant", "tabulated")


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class ShapeFunction:
    """``power``: r**-a; ``logpower``: r**-a * log(e + 1/r)**b;
    ``constant``: c; ``tabulated``: log-log interpolation of samples."""

    kind: str
    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    table_r: tuple = ()
    table_v: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ShapeError(f"unknown shape kind {self.kind!r}")
        if self.kind == "constant" and self.c <= 0:
            raise ShapeError("shape not positive")
        if self.kind == "tabulated":
            r = np.asarray(self.table_r, dtype=float)
            v = np.asarray(self.table_v, dtype=float)
            if r.size < 2 or r.shape != v.shape:
                raise ShapeError("tabulated shape needs >= 2 matching samples")
            if np.any(np.diff(r) <= 0):
                raise ShapeError("sample radii must be strictly increasing")
            if np.any(v <= 0) or np.any(r <= 0):
                raise ShapeError("shape not positive")

    @classmethod
    def power(cls, a: float) -> "ShapeFunction":
        return cls("power", a=float(a))

    @classmethod
    def logpower(cls, a: float, b: float) -> "ShapeFunction":
        return cls("logpower", a=float(a), b=float(b))

    @classmethod
    def constant(cls, c: float = 1.0) -> "ShapeFunction":
        return cls("constant", c=float(c))

    @classmethod
    def tabulated(cls, r, v) -> "ShapeFunction":
        return cls("tabulated", table_r=tuple(map(float, r)), table_v=tuple(map(float, v)))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return r ** (-self.a)
        if self.kind == "logpower":
            return r ** (-self.a) * np.log(np.e + 1.0 / r) ** self.b
        if self.kind == "constant":
            return np.full_like(r, self.c)
        lr = np.log(np.asarray(self.table_r))
        lv = np.log(np.asarray(self.table_v))
        x = np.log(r)
        y = np.interp(x, lr, lv)
        lo_slope = (lv[1] - lv[0]) / (lr[1] - lr[0])
        hi_slope = (lv[-1] - lv[-2]) / (lr[-1] - lr[-2])
        y = np.where(x < lr[0], lv[0] + lo_slope * (x - lr[0]), y)
        y = np.where(x > lr[-1], lv[-1] + hi_slope * (x - lr[-1]), y)
        return np.exp(y)

    @property
    def tail_exponent(self) -> float:
        """Exponent ``e`` with ``phi(r) ~ r**e`` as ``r -> inf``."""
        if self.kind in ("power", "logpower"):
            return -self.a
        if self.kind == "constant":
            return 0.0
        r, v = self.table_r, self.table_v
        return math.log(v[-1] / v[-2]) / math.log(r[-1] / r[-2])

    def literal(self) -> str:
        if self.kind == "power":
            return f"power:a={self.a!r}"
        if self.kind == "logpower":
            return f"logpower:a={self.a!r},b={self.b!r}"
        if self.kind == "constant":
            return f"const:{self.c!r}"
        return "table:<inline>"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "literal": self.literal()}


def parse_shape(text: str) -> ShapeFunction:
    """Parse ``power:a=0.5``, ``logpower:a=0.5,b=1``, ``const:1`` or ``table:<path>``."""
    kind, _, rest = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "table":
        data = np.loadtxt(Path(rest.strip()), delimiter=None, ndmin=2)
        return ShapeFunction.tabulated(data[:, 0], data[:, 1])
    if kind in ("const", "constant"):
        return ShapeFunction.constant(float(rest) if rest else 1.0)
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ShapeError(f"malformed shape parameter {item!r} in {text!r}")
        params[key.strip()] = float(value)
    if kind == "power":
        unknown = set(params) - {"a"}
        if unknown or "a" not in params:
            raise ShapeError(f"power shape takes exactly a=..., got {text!r}")
        return ShapeFunction.power(params["a"])
    if kind == "logpower":
        unknown = set(params) - {"a", "b"}
        if unknown or "a" not in params:
            raise ShapeError(f"logpower shape takes a=..,b=.., got {text!r}")
        return ShapeFunction.logpower(params["a"], params.get("b", 0.0))
    raise ShapeError(f"unknown shape literal {text!r}")


@dataclass(frozen=True)
class SpacePair:
    p: float
    phi: ShapeFunction
    n: int = 1

    @property
    def d_p(self) -> float:
        return self.n / self.p - self.n


@dataclass(frozen=True)
class GpReport:
    ok: bool
    monotone_defect: float
    almost_increasing_constant: float


def _radii(radii):
    return default_radii() if radii is None else np.asarray(radii, dtype=float)


def _samples(phi: ShapeFunction, r: np.ndarray) -> np.ndarray:
    v = phi(r)
    if np.any(~(v > 0)):
        raise ShapeError("shape not positive")
    return v


def check_gp(phi: ShapeFunction, p: float, n: int = 1, radii=None) -> GpReport:
    r = _radii(radii)
    if len(r) < 2 or np.any(np.diff(r) <= 0):
        raise ShapeError("radii must have >= 2 increasing points")
    v = _samples(phi, r)
    defect = float(max(np.max((v[1:] - v[:-1]) / v[:-1]), 0.0))
    g = v * r ** (n / p)
    profile = np.maximum.accumulate(g) / g
    C = float(profile.max())
    bounded = not grows_at_ends(r, profile)
    return GpReport(ok=bool(defect <= 1e-12 and bounded), monotone_defect=defect, almost_increasing_constant=C)


def normalize_shape(phi: ShapeFunction, p: float, n: int = 1, radii=None) -> ShapeFunction:
    """``psi(r) = inf_{v >= r} phi(v) (v/r)**(n/p)`` on the grid."""
    r = _radii(radii)
    v = _samples(phi, r)
    psi = suffix_min(v * r ** (n / p)) * r ** (-n / p)
    return ShapeFunction.tabulated(r, psi)


@dataclass(frozen=True)
class ConditionReport:
    C: float
    argmax: float | None = None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.C)


def _ratio_report(r, lhs, rhs) -> ConditionReport:
    if not np.all(np.isfinite(lhs)):
        return ConditionReport(math.inf)
    ratio = lhs / rhs
    if grows_at_ends(r, ratio):
        return ConditionReport(math.inf, float(r[int(np.argmax(ratio))]))
    i = int(np.argmax(ratio))
    return ConditionReport(float(ratio[i]), float(r[i]))


def _integral_over_s(r, weight_vals, tail_exponent) -> np.ndarray:
    """``int_r^inf weight(s) ds / s`` at every grid radius."""
    return suffix_integrals(r, weight_vals / r, tail_exponent=tail_exponent - 1.0)


def check_zygmund_pair(phi: ShapeFunction, eta: ShapeFunction, radii=None) -> ConditionReport:
    """Measured ``C`` in ``int_r^inf phi/(eta s) ds <= C phi(r)/eta(r)``."""
    r = _radii(radii)
    ratio_vals = _samples(phi, r) / _samples(eta, r)
    tail = phi.tail_exponent - eta.tail_exponent
    if tail >= 0:
        return ConditionReport(math.inf)
    lhs = _integral_over_s(r, ratio_vals, tail)
    return _ratio_report(r, lhs, ratio_vals)


def check_integral_condition(phi: ShapeFunction, radii=None) -> ConditionReport:
    return check_zygmund_pair(phi, ShapeFunction.constant(1.0), radii)


def check_pth_power_condition(phi: ShapeFunction, eta: ShapeFunction, p: float, radii=None) -> ConditionReport:
    r = _radii(radii)
    ratio_vals = (_samples(phi, r) / _samples(eta, r)) ** p
    tail = p * (phi.tail_exponent - eta.tail_exponent)
    if tail >= 0:
        return ConditionReport(math.inf)
    lhs = _integral_over_s(r, ratio_vals, tail)
    return _ratio_report(r, lhs, ratio_vals)


def _inner_inf(phi1: ShapeFunction, r, expo: float) -> np.ndarray:
    """``inf_{s > tau} phi1(s) s**expo`` at every grid ``tau``."""
    g = _samples(phi1, r) * r**expo
    if phi1.tail_exponent + expo < 0:
        return np.zeros_like(g)
    return suffix_min(g)


def check_supremal_condition(
    phi1: ShapeFunction,
    phi2: ShapeFunction,
    p: float,
    n: int = 1,
    radii=None,
    variant: str = "VZ",
    r_exp: float | None = None,
) -> ConditionReport:
    """Measured constant of the maximal-operator conditions.

    ``VZ``:    sup_{tau>t} inf_{s>tau} phi1(s) s^{n/p} tau^{-n/p} <= C phi2(t)
    ``VZM``:   same with n/p replaced by n r/p, 0 < r <= p
    ``VZInt``: int_t^inf inf_{s>tau} phi1(s) s^{n/p} tau^{-n/p-1} dtau <= C phi2(t)
    ``MizN``:  int_t^inf phi1(tau) dtau/tau <= C phi2(t)
    """
    r = _radii(radii)
    rhs = _samples(phi2, r)
    if variant in ("VZ", "VZM"):
        if variant == "VZM":
            if r_exp is None or not 0 < r_exp <= p:
                raise ShapeError("VZM needs 0 < r <= p")
            expo = n * r_exp / p
        else:
            expo = n / p
        inner = _inner_inf(phi1, r, expo) * r ** (-expo)
        lhs = suffix_max(inner)
        if phi1.tail_exponent + expo >= 0 and phi1.tail_exponent > 0:
            return ConditionReport(math.inf)
        return _ratio_report(r, lhs, rhs)
    if variant == "VZInt":
        expo = n / p
        inner = _inner_inf(phi1, r, expo)
        integrand = inner * r ** (-expo - 1.0)
        if phi1.tail_exponent + expo < 0:
            lhs = np.zeros_like(r)
        else:
            lhs = suffix_integrals(r, integrand, tail_exponent=phi1.tail_exponent - 1.0)
        return _ratio_report(r, lhs, rhs)
    if variant == "MizN":
        if phi1.tail_exponent >= 0:
            return ConditionReport(math.inf)
        lhs = _integral_over_s(r, _samples(phi1, r), phi1.tail_exponent)
        return _ratio_report(r, lhs, rhs)
    raise ShapeError(f"unknown condition variant {variant!r}")
