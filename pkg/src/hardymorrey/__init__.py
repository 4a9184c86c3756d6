"""Numerical toolkit for generalized Morrey and Hardy-Morrey spaces on dyadic grids."""

from .grid import Cube, CubeFamily, DyadicCube, Grid, GridFunction, PrefixSum
from .norms import (
    NormReport,
    RatioReport,
    VectorGridFunction,
    hardy_morrey_norm,
    heat_maximal,
    llogl_morrey_norm,
    morrey_norm,
    vector_morrey_norm,
    weak_morrey_norm,
)
from .shapes import ShapeFunction, SpacePair, check_gp, normalize_shape, parse_shape

__all__ = [
    "Cube",
    "CubeFamily",
    "DyadicCube",
    "Grid",
    "GridFunction",
    "NormReport",
    "PrefixSum",
    "RatioReport",
    "ShapeFunction",
    "SpacePair",
    "VectorGridFunction",
    "check_gp",
    "hardy_morrey_norm",
    "heat_maximal",
    "llogl_morrey_norm",
    "morrey_norm",
    "normalize_shape",
    "parse_shape",
    "vector_morrey_norm",
    "weak_morrey_norm",
]

__version__ = "0.1.0"
