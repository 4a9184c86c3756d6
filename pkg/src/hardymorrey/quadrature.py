"""Log-grid quadrature shared by the shape checkers and the Hardy operators.

Panels are integrated exactly under power-law (log-log linear)
interpolation, so power data is reproduced to rounding error.  Improper
tails are closed analytically from a known or estimated end exponent.
"""

from __future__ import annotations

import math

import numpy as np

PER_DECADE = 512
R_MAX = 2.0**20
# octave-to-octave tail ratio at or above this is treated as divergence
DIVERGENCE_RATIO = 0.99


def log_grid(r_min: float, r_max: float = R_MAX, per_decade: int = PER_DECADE) -> np.ndarray:
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    count = int(math.ceil(per_decade * math.log10(r_max / r_min))) + 1
    return np.geomspace(r_min, r_max, count)


def default_radii(K: int = 8, L: int = 0) -> np.ndarray:
    return log_grid(2.0 ** (-K - L - 2))


def points_per_octave(s: np.ndarray) -> int:
    return max(2, int(round(math.log(2) / math.log(s[1] / s[0]))))


def panel_integrals(s: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``int h ds`` over each panel ``[s_i, s_{i+1}]``, power-law interpolated."""
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float)
    s0, s1 = s[:-1], s[1:]
    h0, h1 = h[:-1], h[1:]
    out = 0.5 * (h0 + h1) * (s1 - s0)
    pos = (h0 > 0) & (h1 > 0)
    if np.any(pos):
        lr = np.log(s1[pos] / s0[pos])
        beta = np.log(h1[pos] / h0[pos]) / lr
        g = beta + 1.0
        x = g * lr
        # (exp(x) - 1) / g, stable near g = 0
        val = np.where(np.abs(x) > 1e-8, np.expm1(x) / np.where(g == 0, 1.0, g), lr * (1 + x / 2))
        out[pos] = h0[pos] * s0[pos] * val
    return out


def estimate_end_exponent(s: np.ndarray, h: np.ndarray) -> float | None:
    """Local power exponent of ``h`` over the last octave (None if it vanishes)."""
    k = points_per_octave(s)
    if h[-1] <= 0 or h[-1 - k] <= 0:
        return None
    return float(math.log(h[-1] / h[-1 - k]) / math.log(s[-1] / s[-1 - k]))


def tail_integral(s_end: float, h_end: float, exponent: float | None) -> float:
    """``int_{s_end}^inf h_end (s/s_end)**exponent ds``."""
    if h_end == 0:
        return 0.0
    if exponent is None or exponent >= -1.0:
        return math.inf
    return h_end * s_end / (-(exponent + 1.0))


def suffix_integrals(s, h, tail_exponent: float | None = None) -> np.ndarray:
    """``I_i = int_{s_i}^inf h ds`` at every grid point.

    With ``tail_exponent`` given the tail beyond the grid is that power law.
    Otherwise the exponent is estimated from the last octave, after a
    doubling test; a divergent tail returns an all-``inf`` array.
    """
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float)
    panels = panel_integrals(s, h)
    body = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]])
    if tail_exponent is None:
        if h[-1] == 0:
            return body
        if tail_diverges(s, h):
            return np.full_like(body, math.inf)
        tail_exponent = estimate_end_exponent(s, h)
    return body + tail_integral(s[-1], h[-1], tail_exponent)


def tail_diverges(s, h) -> bool:
    """Doubling test: last-octave mass vs previous octave mass."""
    k = points_per_octave(s)
    if len(s) < 2 * k + 1:
        return False
    panels = panel_integrals(s, h)
    last = panels[-k:].sum()
    prev = panels[-2 * k : -k].sum()
    if prev <= 0:
        return last > 0
    return last / prev >= DIVERGENCE_RATIO


def suffix_min(a: np.ndarray) -> np.ndarray:
    return np.minimum.accumulate(a[::-1])[::-1]


def suffix_max(a: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(a[::-1])[::-1]


def grows_at_ends(s: np.ndarray, profile: np.ndarray, tol: float = 0.01) -> bool:
    """True when ``profile`` keeps growing at the first or last octaves.

    A finite sup over ``(0, inf)`` needs the grid profile to level off at
    both ends.  Growth by more than ``tol`` per octave that is not slowing
    down (power-law growth) is reported; decelerating growth towards a
    limit is not.  Logarithmic blow-up is below this test's resolution.
    """
    k = points_per_octave(s)
    if len(s) < 4 * k:
        return False
    prof = np.where(np.isfinite(profile), profile, np.inf)
    if not np.all(np.isfinite(prof[: 3 * k])) or not np.all(np.isfinite(prof[-3 * k :])):
        return True

    def growing(o1, o2, o3):
        if o2 <= 0 or o3 <= 0:
            return o1 > 0 and (o2 <= 0)
        g1, g2 = o1 / o2, o2 / o3
        return g1 > 1 + tol and g1 >= g2 * (1 - 1e-3)

    small = growing(prof[:k].max(), prof[k : 2 * k].max(), prof[2 * k : 3 * k].max())
    large = growing(prof[-k:].max(), prof[-2 * k : -k].max(), prof[-3 * k : -2 * k].max())
    return bool(small or large)
