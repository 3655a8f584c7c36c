"""Exact computations on deformations of one-dimensional substitution tilings."""

__version__ = "0.1.0"

from .exactnum import ONE, PHI, ZERO, ExactMatrix, FieldScalar, perron_decomposition
from .substitution import SubstitutionRule, Tiling1D, fibonacci, generate_window, load_rule, supertile
from .cochain import (
    BoundedExact,
    NumericEvidence,
    PECochain,
    UnboundedExact,
    ZeroCochain,
    class_equal,
    coboundary,
    delta_x,
    indicator,
    integrate,
    is_coboundary,
    supertile_integral,
)
from .ruelle import rs_empirical, rs_exact, rs_invertible, rs_sweep
from .delone import LabeledDeloneSet, check_delone, delone_distance, voronoi
