"""Nodal-set geometry of time slices."""
from .angenent import NodalCountSeries, nodal_count_1d, sign_changes
from .dimension import CAVEAT, DimensionEstimate, box_counts, box_dimension, default_scales
from .extract import NodalSlice, extract_nodal, marching_squares, singular_nodes, slice_grid
from .symmetry import (
    ConeSplittingReport,
    FieldSlice,
    Stratification,
    SymmetricPolynomial,
    SymmetryReport,
    as_slice,
    best_deviation,
    cone_splitting_check,
    dyadic_scales,
    sphere_directions,
    stratify,
    symmetry_test,
)

__all__ = [
    "NodalCountSeries", "nodal_count_1d", "sign_changes",
    "CAVEAT", "DimensionEstimate", "box_counts", "box_dimension", "default_scales",
    "NodalSlice", "extract_nodal", "marching_squares", "singular_nodes", "slice_grid",
    "ConeSplittingReport", "FieldSlice", "Stratification", "SymmetricPolynomial", "SymmetryReport",
    "as_slice", "best_deviation", "cone_splitting_check", "dyadic_scales", "sphere_directions",
    "stratify", "symmetry_test",
]
