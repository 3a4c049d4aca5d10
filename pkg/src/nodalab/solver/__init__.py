"""Solutions of divergence-form parabolic equations: implicit finite
differences on boxes and radial grids, exact radial heat convolution, and
diagnostics (maximum principle, doubling)."""
from .checks import (
    DoublingProfile,
    MaxPrincipleReport,
    cylinder_mean_square_field,
    doubling_profile,
    max_principle_check,
)
from .coefficients import PRESETS, CoefficientField, matrix_sqrt, preset
from .convolution import (
    ConvolutionField,
    RadialProfile,
    example1_profile,
    example2_profile,
    heat_convolve,
    heat_convolve_dt,
    heat_convolve_gradient,
    radial_root,
)
from .fields import FunctionField, GridField, PolynomialField, RadialField, SpaceTimeField, load_snapshot
from .implicit import Grid, OperatorInfo, assemble_operator, solve, solve_radial, time_grid

__all__ = [
    "CoefficientField", "PRESETS", "preset", "matrix_sqrt",
    "SpaceTimeField", "FunctionField", "PolynomialField", "GridField", "RadialField", "load_snapshot",
    "Grid", "OperatorInfo", "assemble_operator", "solve", "solve_radial", "time_grid",
    "RadialProfile", "example1_profile", "example2_profile", "heat_convolve", "heat_convolve_gradient",
    "heat_convolve_dt", "ConvolutionField", "radial_root",
    "MaxPrincipleReport", "max_principle_check", "DoublingProfile", "doubling_profile",
    "cylinder_mean_square_field",
]
