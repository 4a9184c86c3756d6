"""Command-line experiment harness.

Every subcommand emits one report line per check, as JSON (sorted keys) or
CSV.  Exit codes: 0 all asserted bounds hold, 1 usage or input error,
2 a hypothesis of the checked statement is unmet, 3 an inequality failed.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import atomic, batteries, calderon, hardy, maxops, norms, serialize
from .generators import GeneratorError, generate_function
from .grid import Grid, GridError, GridFunction
from .shapes import (
    ShapeError,
    ShapeFunction,
    check_gp,
    check_integral_condition,
    check_pth_power_condition,
    check_supremal_condition,
    check_zygmund_pair,
    parse_shape,
)

SCHEMA = "hardymorrey.report/1"
SUBCOMMANDS = ("check-phi", "norm", "maxop", "hardy", "decompose", "synthesize", "adams", "olsen", "czop", "lp", "suite")
WORKERS_ENV = "HARDYMORREY_WORKERS"

EXIT_OK, EXIT_USAGE, EXIT_HYPOTHESIS, EXIT_VIOLATED = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class HypothesisUnmet(Exception):
    def __init__(self, hypothesis: str):
        super().__init__(hypothesis)
        self.hypothesis = hypothesis


# ------------------------------------------------------------------ config

# config-file section of every field; the key inside a section is the field
# name except where RENAMED says otherwise
SECTIONS = {
    "experiment": ("subcommand", "seed", "trials", "out", "format", "bound", "save"),
    "space": ("p", "q", "phi", "eta", "norm", "mode", "alpha", "lam", "beta", "v1", "v2", "w", "v", "d", "maximal", "variant", "op", "r", "band", "r_exp"),
    "grid": ("n", "L", "K", "boundary", "origin"),
    "input": ("file", "kernel", "generator", "gen_seed", "gen_params"),
}
RENAMED = {("input", "seed"): "gen_seed", ("input", "params"): "gen_params"}
FIELD_KEY = {v: k[1] for k, v in RENAMED.items()}

SUBCOMMAND_DEFAULTS = {
    "synthesize": {"phi": "power:a=0.75", "eta": "power:a=0.25"},
    "adams": {"p": 1.0, "lam": 0.5, "alpha": 0.25},
    "olsen": {"p": 1.0, "lam": 0.5, "alpha": 0.25},
    "czop": {"boundary": "periodic", "phi": "power:a=0.5", "generator": "random-step"},
    "lp": {"boundary": "periodic", "p": 2.0, "phi": "power:a=0.25", "generator": "fourier-mode"},
    "maxop": {"p": 2.0, "phi": "power:a=0.5", "mode": "windows"},
    "decompose": {"generator": "random-step"},
    "hardy": {"alpha": 1.0, "beta": -3.0},
}


@dataclass
class ExperimentConfig:
    subcommand: str
    p: float = 1.0
    q: float | None = None
    phi: str = "const:1"
    eta: str | None = None
    norm: str = "morrey"
    mode: str = "dyadic"
    alpha: float | None = None
    lam: float | None = None
    beta: float | None = None
    v1: str | None = None
    v2: str | None = None
    w: str | None = None
    v: float = 1.0
    d: int | None = None
    maximal: str = "grand"
    variant: str = "thm1"
    op: str = "hl"
    r: float = 1.0
    band: float | None = None
    r_exp: float | None = None
    n: int = 1
    L: int = 0
    K: int = 6
    boundary: str = "zero"
    origin: float = 0.0
    file: str | None = None
    kernel: str | None = None
    generator: str = "indicator"
    gen_seed: int = 0
    gen_params: str = ""
    seed: int = 0
    trials: int = 16
    out: str | None = None
    format: str = "json"
    bound: float | None = None
    save: str | None = None

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        """Typed config from string (or already typed) values; unknown keys rejected."""
        names = {f.name: f for f in fields(cls)}
        unknown = sorted(set(raw) - set(names))
        if unknown:
            raise ConfigError(f"unknown config key {unknown[0]!r}")
        if "subcommand" not in raw or raw["subcommand"] is None:
            raise ConfigError("missing config key 'subcommand'")
        sub = str(raw["subcommand"])
        if sub not in SUBCOMMANDS:
            raise ConfigError(f"config key 'subcommand': unknown value {sub!r}")
        merged = {**SUBCOMMAND_DEFAULTS.get(sub, {}), **{k: v for k, v in raw.items() if v is not None}}
        typed = {}
        for key, value in merged.items():
            typed[key] = _coerce(key, names[key].type, value)
        cfg = cls(**typed)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        checks = [
            ("p", self.p > 0),
            ("q", self.q is None or self.q > 0),
            ("norm", self.norm in ("morrey", "weak", "llogl", "hardy-morrey")),
            ("mode", self.mode in ("dyadic", "windows")),
            ("maximal", self.maximal in ("grand", "heat")),
            ("variant", self.variant in ("thm1", "thm2")),
            ("op", self.op in ("hl", "shifted", "grand", "heat", "peetre")),
            ("r", self.r > 0),
            ("n", self.n in (1, 2)),
            ("K", 0 <= self.K <= 14),
            ("L", 0 <= self.L <= 8),
            ("boundary", self.boundary in ("zero", "periodic")),
            ("trials", self.trials >= 1),
            ("format", self.format in ("json", "csv")),
            ("v", self.v > 0),
        ]
        for key, ok in checks:
            if not ok:
                raise ConfigError(f"config key {key!r}: invalid value {getattr(self, key)!r}")
        for key in ("phi", "eta", "v1", "v2", "w"):
            text = getattr(self, key)
            if text is not None:
                try:
                    parse_shape(text)
                except (ShapeError, OSError, ValueError) as exc:
                    raise ConfigError(f"config key {key!r}: {exc}") from None
        try:
            self.generator_params()
        except ValueError as exc:
            raise ConfigError(f"config key 'gen_params': {exc}") from None

    def generator_params(self) -> dict:
        out = {}
        for item in filter(None, (s.strip() for s in self.gen_params.split(","))):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed generator parameter {item!r}")
            key = key.strip()
            if key in ("piece", "steps", "j0", "axis"):
                out[key] = int(value)
            elif key == "positive":
                out[key] = value.strip().lower() in ("1", "true", "yes")
            else:
                out[key] = float(value)
        return out

    def grid(self) -> Grid:
        return Grid(self.n, self.L, self.K, self.boundary, self.origin)

    def shape(self, key: str) -> ShapeFunction | None:
        text = getattr(self, key)
        return None if text is None else parse_shape(text)

    def to_sections(self) -> dict:
        data = asdict(self)
        out = {}
        for section, keys in SECTIONS.items():
            out[section] = {FIELD_KEY.get(k, k): data[k] for k in keys if data[k] is not None}
        return out

    def dumps(self) -> str:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for section, items in self.to_sections().items():
            parser[section] = {k: str(v) for k, v in items.items()}
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def _coerce(key: str, annotation, value):
    if not isinstance(value, str):
        return value
    text = value.strip()
    ann = str(annotation)
    try:
        if ann.startswith("int"):
            return int(text)
        if ann.startswith("float"):
            return float(text)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {value!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Flat mapping of field name to string value from section/key=value text."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    out = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown config section {section!r}")
        for key, value in parser[section].items():
            name = RENAMED.get((section, key), key)
            if name not in SECTIONS[section]:
                raise ConfigError(f"unknown config key {section + '.' + key!r}")
            out[name] = value
    return out


# ---------------------------------------------------------------- records


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def record(name, params, lhs=None, rhs=None, ratio=None, witness=None, value=None, bound=None, holds=None) -> dict:
    """One report line. ``holds`` is None for purely informational lines."""
    return {
        "schema": SCHEMA,
        "name": name,
        "params": params,
        "lhs": lhs,
        "rhs": rhs,
        "ratio": ratio,
        "witness": witness,
        "value": value,
        "bound": bound,
        "holds": holds,
    }


def _bounded(rec: dict, bound: float | None) -> dict:
    if bound is not None and rec["ratio"] is not None:
        rec["bound"] = bound
        rec["holds"] = bool(rec["ratio"] <= bound)
    return rec


CSV_COLUMNS = ("name", "holds", "value", "lhs", "rhs", "ratio", "bound", "witness", "params")


def render(records: list[dict], fmt: str, timing: bool) -> str:
    records = [_clean(r) for r in records]
    if not timing:
        for r in records:
            r.pop("elapsed_ms", None)
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    cols = list(CSV_COLUMNS) + (["elapsed_ms"] if timing else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        row = []
        for c in cols:
            v = r.get(c)
            row.append(json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else "" if v is None else v)
        w.writerow(row)
    return buf.getvalue()


# ----------------------------------------------------------------- input


def load_input(cfg: ExperimentConfig) -> GridFunction:
    if cfg.file:
        f = serialize.read_grid_function(cfg.file)
        return f
    return generate_function(cfg.generator, cfg.grid(), seed=cfg.gen_seed, **cfg.generator_params())


def _input_params(cfg: ExperimentConfig, f: GridFunction) -> dict:
    src = {"file": cfg.file} if cfg.file else {"generator": cfg.generator, "seed": cfg.gen_seed, "params": cfg.gen_params}
    g = f.grid
    return {"grid": {"n": g.n, "L": g.L, "K": g.K, "boundary": g.boundary}, "input": src}


def _witness(report) -> dict | None:
    w = getattr(report, "witness", None)
    return None if w is None else w.to_dict()


# ------------------------------------------------------------ subcommands


def run_check_phi(cfg: ExperimentConfig) -> list[dict]:
    phi = cfg.shape("phi")
    params = {"phi": phi.literal(), "p": cfg.p, "n": cfg.n}
    gp = check_gp(phi, cfg.p, cfg.n)
    out = [record("gp", params, value=gp.almost_increasing_constant, holds=None)]
    out[0]["params"] = {**params, "ok": gp.ok, "monotone_defect": gp.monotone_defect}
    out.append(record("integral_condition", params, value=check_integral_condition(phi).C))
    for variant in ("VZ", "VZInt", "MizN"):
        out.append(record(f"supremal_{variant}", params, value=check_supremal_condition(phi, phi, cfg.p, cfg.n, variant=variant).C))
    if cfg.eta is not None:
        eta = cfg.shape("eta")
        pe = {**params, "eta": eta.literal()}
        out.append(record("zygmund_pair", pe, value=check_zygmund_pair(phi, eta).C))
        out.append(record("pth_power_condition", pe, value=check_pth_power_condition(phi, eta, cfg.p).C))
    if not gp.ok:
        raise HypothesisUnmet("phi in G_p")
    return out


def run_norm(cfg: ExperimentConfig) -> list[dict]:
    f = load_input(cfg)
    phi = cfg.shape("phi")
    params = {**_input_params(cfg, f), "p": cfg.p, "phi": phi.literal(), "norm": cfg.norm, "mode": cfg.mode}
    if cfg.norm == "morrey":
        rep = norms.morrey_norm(f, cfg.p, phi, cfg.mode)
    elif cfg.norm == "weak":
        rep = norms.weak_morrey_norm(f, cfg.p, phi, cfg.mode)
    elif cfg.norm == "llogl":
        rep = norms.llogl_morrey_norm(f, phi, cfg.mode)
    else:
        rep = norms.hardy_morrey_norm(f, cfg.p, phi, mode=cfg.mode)
    return [record(f"norm_{cfg.norm}", params, value=rep.value, witness=_witness(rep))]


def _maximal(f: GridFunction, cfg: ExperimentConfig) -> GridFunction:
    if cfg.op == "hl":
        return maxops.hl_maximal(f, cfg.mode)
    if cfg.op == "shifted":
        return maxops.shifted_dyadic_maximal(f)
    if cfg.op == "grand":
        return maxops.grand_maximal(f)
    if cfg.op == "heat":
        return norms.heat_maximal(f)
    if not f.grid.periodic:
        raise HypothesisUnmet("periodic boundary")
    if cfg.band is None:
        raise ConfigError("config key 'band': the Peetre maximal needs the spectral radius")
    try:
        return maxops.peetre_maximal(f, cfg.r, cfg.band)
    except maxops.MaximalError as exc:
        raise HypothesisUnmet(str(exc)) from None


def run_maxop(cfg: ExperimentConfig) -> list[dict]:
    f = load_input(cfg)
    phi = cfg.shape("phi")
    params = {**_input_params(cfg, f), "op": cfg.op, "mode": cfg.mode}
    if cfg.op == "peetre":
        params.update(r=cfg.r, band=cfg.band)
    M = _maximal(f, cfg)
    if cfg.save:
        serialize.write_grid_function(M, cfg.save)
    k = int(np.argmax(M.values))
    cell = [int(i) for i in np.unravel_index(k, M.values.shape)]
    out = [record("maxop", params, value=float(M.values.flat[k]), witness={"cell": cell})]
    if cfg.op == "hl":
        # every cell is its own window, so M f >= |f| exactly
        gap = float(np.max(np.abs(f.values) - M.values))
        out.append(record("maximal_dominates", params, value=gap, bound=0.0, holds=bool(gap <= 0.0)))
    if cfg.op in ("hl", "shifted"):
        if cfg.p <= 1:
            raise HypothesisUnmet("p > 1")
        if not check_supremal_condition(phi, phi, cfg.p, cfg.n, variant="VZ").finite:
            raise HypothesisUnmet("phi satisfies the VZ condition")
        lhs = norms.morrey_norm(M, cfg.p, phi)
        rhs = norms.morrey_norm(f, cfg.p, phi)
        rec = record("maximal_bound", {**params, "p": cfg.p, "phi": phi.literal()}, lhs.value, rhs.value, norms.safe_ratio(lhs.value, rhs.value), _witness(lhs))
        out.append(_bounded(rec, cfg.bound))
    return out


def run_hardy(cfg: ExperimentConfig) -> list[dict]:
    params = {"trials": cfg.trials, "seed": cfg.seed}
    B_exact = None
    if cfg.v1 or cfg.v2 or cfg.w:
        if not (cfg.v1 and cfg.v2 and cfg.w):
            raise ConfigError("config keys 'v1', 'v2', 'w' must be given together")
        v1, v2, w = (hardy.RayFunction.from_shape(parse_shape(t)) for t in (cfg.v1, cfg.v2, cfg.w))
        params.update(v1=cfg.v1, v2=cfg.v2, w=cfg.w)
    else:
        params.update(alpha=cfg.alpha, beta=cfg.beta)
        if cfg.alpha + cfg.beta + 1 >= 0:
            raise HypothesisUnmet("alpha + beta + 1 < 0")
        v1, v2, w, B_exact = hardy.power_triple(cfg.alpha, cfg.beta)
    try:
        rep = hardy.verify_hardy_inequality(v1, v2, w, trials=cfg.trials, seed=cfg.seed)
    except hardy.HardyError as exc:
        if "violated" in str(exc):
            return [record("hardy_inequality", {**params, "error": str(exc)}, holds=False)]
        raise HypothesisUnmet(str(exc)) from None
    if not math.isfinite(rep.B):
        raise HypothesisUnmet("B finite")
    bound = rep.B * (1 + 1e-3)
    summary = rep.to_dict()
    out = [
        record("hardy_B", params, value=rep.B, rhs=B_exact, ratio=None if B_exact is None else rep.B / B_exact),
        record("hardy_inequality", params, ratio=rep.worst_ratio, bound=bound, holds=bool(rep.worst_ratio <= bound)),
        record(
            "hardy_sharpness",
            {**params, "achiever_jump": summary.get("achiever_jump")},
            ratio=rep.achiever_ratio / rep.B if rep.B else 0.0,
        ),
    ]
    return out


def run_decompose(cfg: ExperimentConfig) -> list[dict]:
    f = load_input(cfg)
    d = int(max(0, math.floor(atomic.moment_order_floor(cfg.p, cfg.n)))) if cfg.d is None else cfg.d
    params = {**_input_params(cfg, f), "p": cfg.p, "d": d, "maximal": cfg.maximal, "partition": "indicator"}
    if d < atomic.moment_order_floor(cfg.p, cfg.n) - 1e-12:
        raise HypothesisUnmet("d >= n/p - n")
    D = atomic.cz_decompose(f, cfg.p, d=d, maximal=cfg.maximal)
    if cfg.save:
        serialize.write_decomposition(D, cfg.save)
    rec = atomic.synthesize(D.pairs(), f.grid).values + D.residual.values
    err = float(np.max(np.abs(rec - f.values)))
    tol = 1e-8 * f.sup()
    bad = [i for i, a in enumerate(D.atoms) if a.check()]
    return [
        record("cz_roundtrip", {**params, "atoms": len(D), "C0": D.C0, "j_min": D.j_min, "j_max": D.j_max}, value=err, bound=tol, holds=err <= tol),
        record("cz_atoms", params, value=len(bad), bound=0, holds=not bad),
    ]


def run_synthesize(cfg: ExperimentConfig) -> list[dict]:
    phi, eta = cfg.shape("phi"), cfg.shape("eta") or ShapeFunction.constant(1.0)
    grid = cfg.grid()
    if cfg.variant == "thm1":
        if cfg.p != 1:
            raise HypothesisUnmet("p = 1")
        if not check_zygmund_pair(phi, eta).finite:
            raise HypothesisUnmet("(phi, eta) Zygmund pair condition")
    else:
        if cfg.p > 1:
            raise HypothesisUnmet("p <= 1")
        if not check_pth_power_condition(phi, eta, cfg.p).finite:
            raise HypothesisUnmet("(phi, eta) p-th power condition")
    rng = np.random.default_rng(cfg.seed)
    worst, worst_rep = 0.0, None
    for _ in range(cfg.trials):
        if cfg.variant == "thm1":
            lam, atoms = batteries._thm1_family(grid, rng)
        else:
            lam, atoms = batteries._thm2_family(grid, rng)
        rep = atomic.verify_synthesis_bound(lam, atoms, cfg.p, phi, eta, cfg.variant, mode=cfg.mode)
        if worst_rep is None or rep.ratio > worst:
            worst, worst_rep = rep.ratio, rep
    params = {"variant": cfg.variant, "p": cfg.p, "phi": phi.literal(), "eta": eta.literal(), "trials": cfg.trials, "seed": cfg.seed, "K": cfg.K}
    return [_bounded(record(f"synthesis_{cfg.variant}", params, worst_rep.lhs, worst_rep.rhs, worst), cfg.bound)]


def _calderon_gates(cfg: ExperimentConfig):
    if cfg.alpha is None or cfg.alpha <= 0:
        raise HypothesisUnmet("alpha > 0")
    if cfg.lam is None or not 0 <= cfg.lam < cfg.n:
        raise HypothesisUnmet("0 <= lambda < n")
    q = calderon.adams_target(cfg.p, cfg.lam, cfg.alpha, cfg.n)
    if not math.isfinite(q):
        raise HypothesisUnmet("1/p > alpha/(n - lambda)")
    return q


def run_adams(cfg: ExperimentConfig) -> list[dict]:
    q = _calderon_gates(cfg)
    if cfg.q is not None and abs(1 / cfg.q - 1 / q) > 1e-12:
        raise HypothesisUnmet("1/p - 1/q = alpha/(n - lambda)")
    f = load_input(cfg)
    rep = calderon.verify_adams(f, cfg.p, q, cfg.lam, cfg.alpha, cfg.mode)
    params = {**_input_params(cfg, f), **rep.params}
    return [_bounded(record("adams", params, rep.lhs, rep.rhs, rep.ratio), cfg.bound)]


def run_olsen(cfg: ExperimentConfig) -> list[dict]:
    _calderon_gates(cfg)
    f = load_input(cfg)
    g = GridFunction.constant(f.grid, 1.0)
    try:
        rep = calderon.verify_olsen(f, g, cfg.p, cfg.lam, cfg.alpha, cfg.mode)
    except calderon.CalderonError as exc:
        raise HypothesisUnmet(str(exc)) from None
    params = {**_input_params(cfg, f), **rep.params, "g": "const:1"}
    return [_bounded(record("olsen", params, rep.lhs, rep.rhs, rep.ratio), cfg.bound)]


def run_czop(cfg: ExperimentConfig) -> list[dict]:
    if cfg.boundary != "periodic":
        raise HypothesisUnmet("periodic boundary")
    phi = cfg.shape("phi")
    if not check_integral_condition(phi).finite:
        raise HypothesisUnmet("phi satisfies the integral condition")
    f = load_input(cfg)
    if cfg.kernel:
        kf = serialize.read_grid_function(cfg.kernel)
        if kf.grid != f.grid:
            raise ConfigError("config key 'kernel': kernel grid differs from the input grid")
        try:
            k = calderon.ConvolutionKernel(f.grid, kf.values, name=Path(cfg.kernel).name)
        except calderon.CalderonError as exc:
            raise HypothesisUnmet(str(exc)) from None
    else:
        k = calderon.ConvolutionKernel.odd_gaussian(f.grid)
    rep = calderon.verify_t54(f, k, cfg.p, phi, cfg.mode)
    params = {**_input_params(cfg, f), **rep.params}
    return [_bounded(record("czop", params, rep.lhs, rep.rhs, rep.ratio), cfg.bound)]


def run_lp(cfg: ExperimentConfig) -> list[dict]:
    if cfg.boundary != "periodic":
        raise HypothesisUnmet("periodic boundary")
    f = load_input(cfg)
    phi = cfg.shape("phi")
    low, high = calderon.partition_bounds(f.grid)
    rep = calderon.verify_lp_equivalence(f, cfg.p, phi, cfg.mode)
    params = {**_input_params(cfg, f), "p": cfg.p, "phi": phi.literal()}
    return [
        record("lp_partition", params, value=low, lhs=low, rhs=high, bound=0.0, holds=bool(low > 0)),
        _bounded(record("lp_equivalence", params, ratio=rep.ratio_high), cfg.bound),
    ]


# ------------------------------------------------------------------ suite


def _suite_checks(seed: int) -> list[tuple[str, callable]]:
    """Deterministic small-resolution runs of every measured battery."""

    def norm_unit():
        f = generate_function("indicator", Grid(1, 0, 6), side=1.0)
        rep = norms.morrey_norm(f, 1.0, ShapeFunction.constant(1.0))
        return [record("suite.norm_unit_indicator", {"K": 6}, value=rep.value, bound=1.0, holds=abs(rep.value - 1) < 1e-12)]

    def oracle():
        gap = batteries.maximal_oracle_gap(Grid(1, 0, 7), seed=seed + 7)
        return [record("suite.maximal_oracle", {"K": 7}, value=gap, bound=1e-12, holds=gap <= 1e-12)]

    def sandwich():
        c = batteries.sandwich_constants(batteries.sandwich_pairs(seed=seed + 5))
        ok = c["dyadic_min"] >= 1 - 1e-12 and c["dyadic_max"] <= 1 + 1e-12 and c["windows_max"] <= 2 + 1e-12
        return [record("suite.sandwich", c, value=c["dyadic_max"], holds=ok)]

    def hardy_rows():
        rows = batteries.hardy_power_battery(trials=16, seed=seed)
        return [
            record(
                "suite.hardy", row, value=row["B"], ratio=row["worst_ratio"] / row["B"], bound=1 + 1e-3,
                holds=row["worst_ratio"] <= row["B"] * (1 + 1e-3) and row["B_rel_error"] <= 1e-4,
            )
            for row in rows
        ]

    def roundtrip():
        rows = [batteries.check_roundtrip(f, 1) for f in batteries.cz_battery(1, 8, count=50, seed=seed)]
        err = max(r["relative_error"] for r in rows)
        return [record("suite.cz_roundtrip", {"n": 1, "K": 8, "count": 50}, value=err, bound=1e-8, holds=err <= 1e-8)]

    def synthesis():
        c = batteries.synthesis_constants(8, count=100, seed=seed + 11)
        return [record("suite.synthesis", c, value=max(c["thm1"], c["thm2"]))]

    def coefficient():
        return [
            record("suite.coefficient", {"v": v, "n": 1, "K": 8}, value=batteries.coefficient_constant(1, 8, v, count=50, seed=seed).value)
            for v in (0.5, 1.0)
        ]

    def fefferman_stein():
        w = batteries.fefferman_stein_constants(8, count=30, seed=seed + 21)
        return [record("suite.fefferman_stein", {"p": p, "q": q, "K": 8}, value=c) for (p, q), c in sorted(w.items())]

    def calderon_rows():
        return [
            record("suite.adams", {**batteries.ADAMS, "K": 6}, value=batteries.adams_constant(6)),
            record("suite.olsen", {**batteries.ADAMS, "K": 6}, value=batteries.olsen_constant(6, seed=seed + 41)),
            record("suite.czop", {"K": 8}, value=batteries.t54_constant(8, seed=seed + 61)),
        ]

    def lp():
        b = batteries.lp_bracket(8)
        return [record("suite.lp", b, value=b["ratio_high"], holds=b["partition_low"] > 0)]

    return [
        ("norm_unit", norm_unit),
        ("oracle", oracle),
        ("sandwich", sandwich),
        ("hardy", hardy_rows),
        ("roundtrip", roundtrip),
        ("synthesis", synthesis),
        ("coefficient", coefficient),
        ("fefferman_stein", fefferman_stein),
        ("calderon", calderon_rows),
        ("lp", lp),
    ]


def _timed(fn) -> list[dict]:
    t0 = time.perf_counter()
    rows = fn()
    ms = (time.perf_counter() - t0) * 1e3
    for r in rows:
        r["elapsed_ms"] = ms
    return rows


def run_suite(cfg: ExperimentConfig) -> list[dict]:
    out = []
    for _, fn in _suite_checks(cfg.seed):
        out.extend(_timed(fn))
    return sorted(out, key=lambda r: (r["name"], json.dumps(_clean(r["params"]), sort_keys=True)))


RUNNERS = {
    "check-phi": run_check_phi,
    "norm": run_norm,
    "maxop": run_maxop,
    "hardy": run_hardy,
    "decompose": run_decompose,
    "synthesize": run_synthesize,
    "adams": run_adams,
    "olsen": run_olsen,
    "czop": run_czop,
    "lp": run_lp,
    "suite": run_suite,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], int]:
    """Report lines and exit code.  Gating failures raise :class:`HypothesisUnmet`."""
    runner = RUNNERS[cfg.subcommand]
    rows = runner(cfg) if cfg.subcommand == "suite" else _timed(lambda: runner(cfg))
    code = EXIT_VIOLATED if any(r.get("holds") is False for r in rows) else EXIT_OK
    return rows, code


# ------------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


FLAG_ALIASES = {"norm": ("--space",), "file": ("--input",)}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hardymorrey", description="Morrey and Hardy-Morrey numerical experiments.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="config file with [experiment] [space] [grid] [input] sections")
        sp.add_argument("--timing", action="store_true", help="include elapsed_ms in report lines")
        sp.add_argument("--golden", help="(suite) compare the report with this file")
        sp.add_argument("--update-golden", action="store_true", help="(suite) rewrite the golden file")
        for f in fields(ExperimentConfig):
            if f.name != "subcommand":
                flags = [_flag(f.name), *FLAG_ALIASES.get(f.name, ())]
                sp.add_argument(*flags, dest=f.name, default=None, metavar=f.name.upper())
    return parser


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _workers()
        raw = parse_config_text(Path(args.config).read_text()) if args.config else {}
        if args.config and raw.get("subcommand", args.subcommand) != args.subcommand:
            raise ConfigError(f"config key 'subcommand' is {raw['subcommand']!r}, command line says {args.subcommand!r}")
        raw["subcommand"] = args.subcommand
        for f in fields(ExperimentConfig):
            value = getattr(args, f.name, None)
            if f.name != "subcommand" and value is not None:
                raw[f.name] = value
        cfg = ExperimentConfig.from_mapping(raw)
        rows, code = run_experiment(cfg)
    except HypothesisUnmet as exc:
        print(f"hardymorrey: hypothesis unmet: {exc.hypothesis}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (ConfigError, serialize.FormatError, GeneratorError, GridError, ShapeError, OSError) as exc:
        print(f"hardymorrey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (atomic.AtomicError, calderon.CalderonError, hardy.HardyError, maxops.MaximalError, norms.NormError) as exc:
        print(f"hardymorrey: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(rows, cfg.format, args.timing)
    if cfg.subcommand == "suite" and args.golden:
        golden = Path(args.golden)
        plain = render(rows, cfg.format, False)
        if args.update_golden:
            golden.write_text(plain)
        elif not golden.exists():
            print(f"hardymorrey: error: golden file {golden} missing (use --update-golden)", file=sys.stderr)
            return EXIT_USAGE
        elif golden.read_text() != plain:
            print(f"hardymorrey: report drifted from {golden}", file=sys.stderr)
            code = EXIT_VIOLATED
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
