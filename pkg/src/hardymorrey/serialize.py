"""Plain-text grid functions and JSON + npz atomic decompositions."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .atomic import Atom, AtomicDecomposition
from .grid import DyadicCube, Grid, GridFunction

MAGIC = "# hardymorrey grid function v1"
DECOMP_SCHEMA = "hardymorrey.decomposition/1"


class FormatError(ValueError):
    pass


def _header(grid: Grid) -> dict:
    return {"n": grid.n, "L": grid.L, "K": grid.K, "boundary": grid.boundary, "origin": repr(float(grid.origin))}


def _grid_from(fields: dict) -> Grid:
    try:
        return Grid(
            int(fields["n"]),
            int(fields["L"]),
            int(fields["K"]),
            fields.get("boundary", "zero"),
            float(fields.get("origin", 0.0)),
        )
    except KeyError as exc:
        raise FormatError(f"grid header lacks {exc.args[0]!r}") from None


def write_grid_function(f: GridFunction, path, fmt: str | None = None) -> None:
    """Header plus one value per line, row-major, 17 significant digits."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "text")
    head = _header(f.grid)
    vals = [f"{v:.17g}" for v in f.values.ravel()]
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(head))
            w.writerow(list(head.values()))
            w.writerows([v] for v in vals)
        return
    text = [MAGIC, " ".join(f"{k}={v}" for k, v in head.items()), *vals]
    path.write_text("\n".join(text) + "\n")


def read_grid_function(path) -> GridFunction:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    if lines[0].strip() == MAGIC:
        fields = dict(item.split("=", 1) for item in lines[1].split())
        raw = [ln for ln in lines[2:] if ln.strip()]
    else:
        rows = list(csv.reader(lines))
        if len(rows) < 2:
            raise FormatError(f"{path}: not a grid function file")
        fields = dict(zip([c.strip() for c in rows[0]], [c.strip() for c in rows[1]]))
        raw = [c for row in rows[2:] for c in row if c.strip()]
    grid = _grid_from(fields)
    values = np.array([float(v) for v in raw])
    if values.size != grid.cells**grid.n:
        raise FormatError(f"{path}: expected {grid.cells ** grid.n} values, found {values.size}")
    return GridFunction(grid, values.reshape(grid.shape))


def write_decomposition(decomp: AtomicDecomposition, path) -> Path:
    """JSON index at ``path`` and the arrays in ``path.npz``; returns the sidecar path."""
    path = Path(path)
    sidecar = path.with_suffix(path.suffix + ".npz")
    arrays = {"residual": decomp.residual.values}
    atoms = []
    for i, (lam, atom, (j, k)) in enumerate(zip(decomp.lambdas, decomp.atoms, decomp.labels)):
        key = f"atom_{i}"
        arrays[key] = atom.patch
        atoms.append({"j": j, "k": k, "cube": atom.cube.to_dict(), "lambda": lam, "values_ref": key})
    doc = {
        "schema": DECOMP_SCHEMA,
        "grid": _header(decomp.grid),
        "j_min": decomp.j_min,
        "j_max": decomp.j_max,
        "d": decomp.d,
        "C0": decomp.C0,
        "maximal": decomp.maximal,
        "partition": "indicator",
        "sidecar": sidecar.name,
        "residual_ref": "residual",
        "atoms": atoms,
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    np.savez(sidecar, **arrays)
    return sidecar


def read_decomposition(path) -> AtomicDecomposition:
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("schema") != DECOMP_SCHEMA:
        raise FormatError(f"{path}: unknown decomposition schema {doc.get('schema')!r}")
    grid = _grid_from(doc["grid"])
    with np.load(path.parent / doc["sidecar"]) as data:
        arrays = {k: data[k] for k in data.files}
    lambdas, atoms, labels = [], [], []
    for a in doc["atoms"]:
        cube = DyadicCube(int(a["cube"]["level"]), tuple(int(c) for c in a["cube"]["corner"]))
        atoms.append(Atom(grid, cube, arrays[a["values_ref"]], int(doc["d"])))
        lambdas.append(float(a["lambda"]))
        labels.append((int(a["j"]), int(a["k"])))
    residual = GridFunction(grid, arrays[doc["residual_ref"]])
    return AtomicDecomposition(
        grid, lambdas, atoms, labels, residual, doc["j_min"], doc["j_max"], int(doc["d"]), float(doc["C0"]), doc["maximal"]
    )
