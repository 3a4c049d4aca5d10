"""Gaussian-weighted frequency and doubling analytics on space-time fields."""
from .audit import AuditReport, FlatnessCheck, PinchReport, almost_monotonicity_audit, pinch_scan
from .core import (
    TRUNCATION,
    FrequencyProfile,
    SliceIntegrals,
    frequency_profile,
    h_derivative_residuals,
    metric_at,
    slice_integrals,
)
from .tangent import TangentFit, fit_distance, q1_samples, tangent_fit
from .window import RescaledWindow, h_almost_monotone, normalization_ratio, tail_fraction

__all__ = [
    "SliceIntegrals", "slice_integrals", "FrequencyProfile", "frequency_profile",
    "h_derivative_residuals", "metric_at", "TRUNCATION",
    "RescaledWindow", "normalization_ratio", "h_almost_monotone", "tail_fraction",
    "AuditReport", "FlatnessCheck", "almost_monotonicity_audit", "PinchReport", "pinch_scan",
    "TangentFit", "tangent_fit", "fit_distance", "q1_samples",
]
