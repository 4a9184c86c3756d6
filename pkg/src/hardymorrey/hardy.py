"""Weighted Hardy operator, supremal operator and the best constant ``B``.

Functions on the half-line live on a shared log grid.  Power data is
integrated exactly (power-law panels plus analytic tails), and step
functions jump only at grid points, so both sides of every inequality are
evaluated without quadrature error on the test functions used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import (
    R_MAX,
    estimate_end_exponent,
    grows_at_ends,
    log_grid,
    panel_integrals,
    suffix_integrals,
    suffix_max,
    tail_diverges,
)
from .shapes import ShapeFunction

R_MIN = 2.0**-20


class HardyError(ValueError):
    pass


def ray_grid(r_min: float = R_MIN, r_max: float = R_MAX) -> np.ndarray:
    return log_grid(r_min, r_max)


@dataclass(frozen=True, eq=False)
class RayFunction:
    """A nonnegative function on ``(0, inf)``.

    ``power``: coef * s**exponent.  ``tabulated``: power-law interpolation of
    samples, continued by ``tail_exponent`` past the last one.  ``step``:
    ``values[k]`` on ``[s[k], s[k+1])``, zero below ``s[0]``, the last value
    held to infinity.
    """

    kind: str
    exponent: float = 0.0
    coef: float = 1.0
    s: np.ndarray | None = None
    values: np.ndarray | None = None
    tail: float | None = None
    nondecreasing: bool = False

    def __post_init__(self):
        if self.kind not in ("power", "tabulated", "step"):
            raise HardyError(f"unknown ray function kind {self.kind!r}")
        if self.coef < 0:
            raise HardyError("ray functions must be nonnegative")
        if self.kind != "power":
            s = np.asarray(self.s, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if s.shape != v.shape or s.size < 1 or np.any(np.diff(s) <= 0):
                raise HardyError("samples need increasing radii and matching values")
            if np.any(v < 0):
                raise HardyError("ray functions must be nonnegative")
            if self.kind == "tabulated" and np.any(v <= 0):
                raise HardyError("tabulated ray functions must be positive")
            if self.nondecreasing and np.any(np.diff(v) < 0):
                raise HardyError("function flagged nondecreasing is not")
            object.__setattr__(self, "s", s)
            object.__setattr__(self, "values", v)
        elif self.nondecreasing and self.exponent < 0 and self.coef > 0:
            raise HardyError("function flagged nondecreasing is not")

    @classmethod
    def power(cls, exponent: float, coef: float = 1.0) -> "RayFunction":
        return cls("power", exponent=float(exponent), coef=float(coef), nondecreasing=exponent >= 0)

    @classmethod
    def constant(cls, c: float = 1.0) -> "RayFunction":
        return cls.power(0.0, c)

    @classmethod
    def zero(cls) -> "RayFunction":
        return cls.power(0.0, 0.0)

    @classmethod
    def tabulated(cls, s, values, tail: float | None = None) -> "RayFunction":
        return cls("tabulated", s=s, values=values, tail=tail)

    @classmethod
    def step(cls, s, values) -> "RayFunction":
        v = np.asarray(values, dtype=float)
        return cls("step", s=s, values=v, nondecreasing=bool(np.all(np.diff(v) >= 0)))

    @classmethod
    def from_shape(cls, phi: ShapeFunction) -> "RayFunction":
        if phi.kind == "power":
            return cls.power(-phi.a)
        if phi.kind == "constant":
            return cls.constant(phi.c)
        r = ray_grid()
        return cls.tabulated(r, phi(r), tail=phi.tail_exponent)

    @property
    def is_zero(self) -> bool:
        if self.kind == "power":
            return self.coef == 0
        return not np.any(self.values > 0)

    @property
    def tail_exponent(self) -> float | None:
        if self.kind == "power":
            return self.exponent
        if self.kind == "step":
            return 0.0
        return self.tail

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "power":
            return self.coef * x**self.exponent
        if self.kind == "step":
            idx = np.searchsorted(self.s, x, side="right") - 1
            return np.where(idx >= 0, self.values[np.clip(idx, 0, None)], 0.0)
        lx, ls, lv = np.log(x), np.log(self.s), np.log(self.values)
        y = np.interp(lx, ls, lv)
        if self.tail is not None:
            y = np.where(lx > ls[-1], lv[-1] + self.tail * (lx - ls[-1]), y)
        return np.exp(y)

    def sup_beyond(self, r: float) -> float:
        """``sup_{s >= r} self(s)`` past the end of a grid ending at ``r``."""
        v = float(self(r))
        e = self.tail_exponent
        if v == 0:
            return 0.0
        if e is None or e > 0:
            return math.inf
        return v


def _restricted(S: np.ndarray, t: float) -> np.ndarray:
    return np.concatenate([[t], S[S > t * (1 + 1e-12)]])


def _product_panels(g: RayFunction, w: RayFunction, S: np.ndarray) -> np.ndarray:
    """``int g w`` over each panel of ``S``; step factors are held at their left value."""
    if g.kind == "step" and w.kind == "step":
        return g(S[:-1]) * w(S[:-1]) * np.diff(S)
    if g.kind == "step":
        return g(S[:-1]) * panel_integrals(S, w(S))
    if w.kind == "step":
        return w(S[:-1]) * panel_integrals(S, g(S))
    return panel_integrals(S, g(S) * w(S))


def _tail_exponent(*fs: RayFunction) -> float | None:
    es = [f.tail_exponent for f in fs]
    return None if any(e is None for e in es) else float(sum(es))


def hardy_suffix(g: RayFunction, w: RayFunction, S: np.ndarray) -> np.ndarray:
    """``H*_w g(S_i) = int_{S_i}^inf g w ds`` at every grid point."""
    if g.is_zero or w.is_zero:
        return np.zeros_like(S)
    panels = _product_panels(g, w, S)
    body = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    end = float(g(S[-1]) * w(S[-1]))
    if end == 0:
        return body
    e = _tail_exponent(g, w)
    if e is None:
        h = g(S) * w(S)
        if tail_diverges(S, h):
            raise HardyError("Hardy integral diverges")
        e = estimate_end_exponent(S, h)
        if e is None:
            return body
    if e >= -1.0:
        raise HardyError("Hardy integral diverges")
    return body + end * S[-1] / (-(e + 1.0))


def hardy_operator(g: RayFunction, w: RayFunction, t: float, S: np.ndarray | None = None) -> float:
    """``int_t^inf g(s) w(s) ds``."""
    if not t > 0:
        raise HardyError("t must be positive")
    S = ray_grid() if S is None else S
    return float(hardy_suffix(g, w, _restricted(S, t))[0])


def supremal_operator(g: RayFunction, u: RayFunction, t: float, S: np.ndarray | None = None) -> float:
    """``sup_{s >= t} u(s) g(s)`` (grid maximum plus the analytic tail)."""
    if not t > 0:
        raise HardyError("t must be positive")
    if g.is_zero or u.is_zero:
        return 0.0
    S = _restricted(ray_grid() if S is None else S, t)
    prod = u(S) * g(S)
    end = float(prod[-1])
    if end > 0:
        e = _tail_exponent(g, u)
        if e is None or e > 0:
            raise HardyError("supremal operator unbounded")
    return float(prod.max())


def _suffix_sup(v: RayFunction, S: np.ndarray) -> np.ndarray:
    """``sup_{tau >= s} v(tau)`` at grid points, including the tail."""
    V = suffix_max(v(S))
    return np.maximum(V, v.sup_beyond(S[-1]))


def _safe_div(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a / b`` with ``x / inf = 0`` and ``0 / 0 = 0``."""
    out = np.zeros(np.broadcast(a, b).shape)
    ok = (b > 0) & np.isfinite(b)
    np.divide(a, b, out=out, where=ok)
    return np.where((b == 0) & (a > 0), math.inf, out)


def _inverse_sup(v1: RayFunction, S: np.ndarray) -> np.ndarray:
    V = _suffix_sup(v1, S)
    if not math.isfinite(float(V[-1])):
        raise HardyError("v1 unbounded at infinity")
    return V


@dataclass(frozen=True)
class BReport:
    B: float
    argmax: float | None
    profile: np.ndarray = field(repr=False, default=None)


def _b_profile(v1: RayFunction, v2: RayFunction, w: RayFunction, S: np.ndarray) -> np.ndarray:
    """``I(t) = int_t^inf w / V1`` with ``V1(s) = sup_{tau >= s} v1``."""
    V = _inverse_sup(v1, S)
    if w.is_zero:
        return np.zeros_like(S)
    if np.any(V == 0):
        return np.full_like(S, math.inf)
    integrand = w(S) / V
    e1 = v1.tail_exponent
    ew = w.tail_exponent
    e = None if (e1 is None or ew is None) else ew - min(e1, 0.0)
    if e is not None and e >= -1.0 and integrand[-1] > 0:
        return np.full_like(S, math.inf)
    return suffix_integrals(S, integrand, tail_exponent=e)


def best_constant_B(v1: RayFunction, v2: RayFunction, w: RayFunction, S: np.ndarray | None = None) -> BReport:
    """``B = sup_t v2(t) int_t^inf w(s) / sup_{tau >= s} v1(tau) ds`` on the grid."""
    S = ray_grid() if S is None else S
    if v2.is_zero or w.is_zero:
        return BReport(0.0, None, np.zeros_like(S))
    I = _b_profile(v1, v2, w, S)
    vals = v2(S)
    prof = np.where(vals == 0, 0.0, vals * np.where(np.isfinite(I), I, math.inf))
    prof = np.nan_to_num(prof, nan=0.0, posinf=math.inf)
    if not np.all(np.isfinite(prof)) or grows_at_ends(S, prof):
        return BReport(math.inf, None, prof)
    i = int(np.argmax(prof))
    return BReport(float(prof[i]), float(S[i]), prof)


def _panel_sup(v: RayFunction, S: np.ndarray) -> np.ndarray:
    """``sup v`` over each panel ``[S_k, S_{k+1})`` for panelwise monotone ``v``, tail last."""
    vals = v(S)
    out = np.maximum(vals[:-1], vals[1:])
    return np.concatenate([out, [v.sup_beyond(S[-1])]])


@dataclass(frozen=True)
class HardyReport:
    B: float
    worst_ratio: float
    achiever: float | None
    achiever_ratio: float
    trials: int

    def to_dict(self) -> dict:
        return {
            "B": self.B,
            "worst_ratio": self.worst_ratio,
            "achiever_jump": self.achiever,
            "achiever_ratio": self.achiever_ratio,
            "trials": self.trials,
        }


def random_nondecreasing_steps(S: np.ndarray, trials: int, seed: int, jumps: int = 24) -> np.ndarray:
    """Rows of nondecreasing step values on ``S``: cumulative sums of sparse
    nonnegative increments, with random scales spanning several decades."""
    rng = np.random.default_rng(seed)
    out = np.zeros((trials, S.size))
    for k in range(trials):
        inc = np.zeros(S.size)
        where = rng.choice(S.size, size=min(jumps, S.size), replace=False)
        inc[where] = rng.exponential(size=where.size) * 10.0 ** rng.uniform(-3, 3, size=where.size)
        out[k] = np.cumsum(inc)
    return out


def hardy_sides(g_vals: np.ndarray, v1: RayFunction, v2: RayFunction, w: RayFunction, S: np.ndarray) -> tuple[float, float]:
    """``(sup_t v2 H*_w g, sup_t v1 g)`` for the step function ``g_vals`` on ``S``."""
    g = RayFunction("step", s=S, values=g_vals)
    H = hardy_suffix(g, w, S)
    lhs = float(np.max(_mul0(v2(S), H)))
    rhs = float(np.max(_mul0(_panel_sup(v1, S), g_vals)))
    return lhs, rhs


def _mul0(a, b):
    """Product with ``0 * inf = 0``."""
    return np.where((a == 0) | (b == 0), 0.0, a * b)


def sharpness_sweep(v1: RayFunction, v2: RayFunction, w: RayFunction, S: np.ndarray, stride: int = 1):
    """Best ratio over ``g_J = chi_{[S_J, inf)} / V1`` with the jump ``S_J`` swept.

    Returns ``(ratio, S_J)``.  These step functions are the extremals for
    ``B``; a bare indicator only reaches ``B`` when ``v1`` is constant.
    """
    V = _inverse_sup(v1, S)
    inv = _safe_div(np.ones_like(V), V)
    panels = _product_panels(RayFunction("step", s=S, values=inv), w, S)
    body = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    try:
        tail = hardy_suffix(RayFunction.constant(inv[-1]), w, S[-1:])[0] if inv[-1] > 0 else 0.0
    except HardyError:
        return math.inf, None
    I = body + tail
    v2s = v2(S)
    prefix_v2 = np.maximum.accumulate(v2s)
    right = np.concatenate([suffix_max(_mul0(v2s, I))[1:], [0.0]])
    ratio_terms = _mul0(_panel_sup(v1, S), inv)
    rhs = suffix_max(ratio_terms)
    best, where = 0.0, None
    for J in range(0, S.size, stride):
        lhs = max(prefix_v2[J] * I[J], right[J])
        r = lhs / rhs[J] if rhs[J] > 0 else 0.0
        if r > best:
            best, where = r, float(S[J])
    return best, where


def verify_hardy_inequality(
    v1: RayFunction,
    v2: RayFunction,
    w: RayFunction,
    trials: int = 64,
    seed: int = 0,
    S: np.ndarray | None = None,
) -> HardyReport:
    S = ray_grid() if S is None else S
    B = best_constant_B(v1, v2, w, S).B
    if not math.isfinite(B):
        raise HardyError("B is infinite")
    worst = 0.0
    for g_vals in random_nondecreasing_steps(S, trials, seed):
        lhs, rhs = hardy_sides(g_vals, v1, v2, w, S)
        worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
    if worst > B * (1 + 1e-3) + 1e-300:
        raise HardyError(f"Hardy inequality violated: ratio {worst} > B {B}")
    sharp, where = sharpness_sweep(v1, v2, w, S)
    return HardyReport(B, worst, where, sharp, trials)


@dataclass(frozen=True)
class SupremalReport:
    C_condition: float
    worst_ratio: float
    trials: int

    def to_dict(self) -> dict:
        return {"C_condition": self.C_condition, "worst_ratio": self.worst_ratio, "trials": self.trials}


def supremal_condition(v1: RayFunction, v2: RayFunction, u: RayFunction, S: np.ndarray) -> float:
    """``sup_t v2(t) sup_{s >= t} u(s) / ||v1||_{L_inf(s, inf)}`` on the grid."""
    if u.is_zero or v2.is_zero:
        return 0.0
    V = _inverse_sup(v1, S)
    Q = _safe_div(u(S), V)
    eu = u.tail_exponent
    e1 = v1.tail_exponent
    if eu is None or e1 is None or eu - min(e1, 0.0) > 0:
        return math.inf
    prof = _mul0(v2(S), suffix_max(Q))
    if not np.all(np.isfinite(prof)) or grows_at_ends(S, prof):
        return math.inf
    return float(prof.max())


def supremal_sides(g_vals, v1, v2, u, S) -> tuple[float, float]:
    """Grid ``sup_t v2(t) sup_{s >= t} u g`` against the exact ``sup v1 g``."""
    inner = suffix_max(_mul0(u(S), g_vals))
    lhs = float(np.max(_mul0(v2(S), inner)))
    rhs = float(np.max(_mul0(_panel_sup(v1, S), g_vals)))
    return lhs, rhs


def verify_supremal_boundedness(
    v1: RayFunction,
    v2: RayFunction,
    u: RayFunction,
    trials: int = 64,
    seed: int = 0,
    S: np.ndarray | None = None,
) -> SupremalReport:
    S = ray_grid() if S is None else S
    C = supremal_condition(v1, v2, u, S)
    worst = 0.0
    for g_vals in random_nondecreasing_steps(S, trials, seed):
        lhs, rhs = supremal_sides(g_vals, v1, v2, u, S)
        worst = max(worst, lhs / rhs if rhs > 0 else 0.0)
    if worst > C * (1 + 1e-3) + 1e-300:
        raise HardyError(f"supremal bound violated: ratio {worst} > C {C}")
    return SupremalReport(C, worst, trials)


def power_triple(alpha: float, beta: float) -> tuple[RayFunction, RayFunction, RayFunction, float]:
    """``v1 = t**-alpha``, ``w = s**beta``, ``v2 = t**-(alpha+beta+1)``; ``B = 1/|alpha+beta+1|``."""
    gamma = alpha + beta + 1.0
    if gamma >= 0:
        raise HardyError("need alpha + beta + 1 < 0")
    return RayFunction.power(-alpha), RayFunction.power(-gamma), RayFunction.power(beta), 1.0 / abs(gamma)
