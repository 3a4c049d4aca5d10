"""Localized frequency, doubling, windows, audits and tangent fits."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodalab.caloric import (
    caloric_extension,
    cylinder_normalized,
    homogeneous_caloric_basis,
    polynomial_frequency,
    random_caloric_polynomial,
)
from nodalab.errors import DomainError, InapplicableError, UndefinedFrequencyError
from nodalab.frequency import (
    RescaledWindow,
    almost_monotonicity_audit,
    fit_distance,
    frequency_profile,
    h_almost_monotone,
    h_derivative_residuals,
    metric_at,
    normalization_ratio,
    pinch_scan,
    slice_integrals,
    tail_fraction,
    tangent_fit,
)
from nodalab.solver import CoefficientField, FunctionField, PolynomialField


def _field(P):
    return PolynomialField(P.to_float())


def test_slice_integrals_match_closed_form(rng):
    for n in (1, 2, 3):
        P = random_caloric_polynomial(n, 4, rng)
        for r in (0.2, 1.0):
            N = slice_integrals(_field(P), np.zeros(n), r).N
            assert N == pytest.approx(polynomial_frequency(P, r), rel=1e-9, abs=1e-12)


def test_homogeneous_frequency_equals_order():
    for d in range(5):
        for P in homogeneous_caloric_basis(2, d)[:2]:
            for r in (0.1, 0.4, 1.0):
                assert slice_integrals(_field(P), np.zeros(2), r).N == pytest.approx(d, abs=1e-6)


def test_frequency_at_shifted_centre_uses_translated_polynomial():
    P = caloric_extension({(2, 0): 1}, n=2) + caloric_extension({(0, 1): 1}, n=2)
    x0, t0 = np.array([0.5, -0.3]), 0.2
    # u(x0 + y, t0 + s) is again caloric; compare with direct evaluation
    prof = frequency_profile(_field(P), (x0, t0), [0.2, 0.4], doubling=False)
    assert np.all(np.isfinite(prof.N))
    assert np.all(np.diff(prof.N) >= -1e-10)


def test_h_derivative_identity(rng):
    P = random_caloric_polynomial(2, 4, rng)
    res = h_derivative_residuals(_field(P), np.zeros(2), [0.15, 0.3, 0.7, 1.0])
    assert np.max(res) <= 1e-4


def test_global_doubling_residual_on_dense_radii(rng):
    P = random_caloric_polynomial(2, 4, rng)
    prof = frequency_profile(_field(P), np.zeros(2), np.geomspace(0.1, 1, 600), doubling=False)
    assert np.max(np.abs(prof.global_doubling_residual)) <= 1e-4


def test_doubling_sandwich(rng):
    for _ in range(3):
        P = random_caloric_polynomial(3, 3, rng)
        prof = frequency_profile(_field(P), np.zeros(3), np.geomspace(0.1, 0.5, 6))
        assert not prof.sandwich_violations(1e-6)
        assert not prof.monotonicity_violations(1e-9)


def test_constant_coefficients_are_straightened():
    a = np.diag([4.0, 1.0])
    A_inv = np.diag([0.5, 1.0])
    co = CoefficientField(2, lambda x, t: np.broadcast_to(a, np.shape(x)[:-1] + (2, 2)), lam=3.0)
    P = (caloric_extension({(2, 0): 1}, n=2) + caloric_extension({(1, 1): 2}, n=2)
         + caloric_extension({(1, 0): 1}, n=2)).to_float()
    F = FunctionField(2, lambda x, t: P(x @ A_inv, t), lambda x, t: P.grad(x @ A_inv, t) @ A_inv,
                      coefficients=co)
    assert np.allclose(metric_at(F, np.zeros(2), 0.0)[1], np.diag([2.0, 1.0]))
    for r in (0.3, 0.8):
        assert slice_integrals(F, np.zeros(2), r).N == pytest.approx(polynomial_frequency(P, r), rel=1e-9)


def test_localized_frequency_converges_to_global(rng):
    P = random_caloric_polynomial(2, 3, rng)
    g = slice_integrals(_field(P), np.zeros(2), 0.3).N
    loc = slice_integrals(_field(P), np.zeros(2), 0.3, R0=4.0).N
    assert loc == pytest.approx(g, rel=1e-8)


def test_zero_field_has_undefined_frequency():
    F = FunctionField(2, lambda x, t: np.zeros(x.shape[:-1]), lambda x, t: np.zeros(x.shape))
    with pytest.raises(UndefinedFrequencyError):
        slice_integrals(F, np.zeros(2), 0.5)


def test_radius_and_domain_validation():
    F = PolynomialField(caloric_extension({(1,): 1}).to_float(), bbox=[[-1, 1]])
    with pytest.raises(DomainError):
        slice_integrals(F, np.zeros(1), -1.0)
    with pytest.raises(DomainError):
        slice_integrals(F, np.zeros(1), 0.5)  # ball of radius 12 r leaves [-1, 1]
    assert slice_integrals(F, np.zeros(1), 0.05).N == pytest.approx(1.0, abs=1e-6)


def test_profile_csv(tmp_path, rng):
    P = random_caloric_polynomial(2, 2, rng)
    prof = frequency_profile(_field(P), np.zeros(2), [0.1, 0.2, 0.3])
    path = prof.to_csv(tmp_path / "p.csv", extra={"config_hash": "abc"})
    lines = path.read_text().splitlines()
    assert lines[0] == "r,H,E,N,D,global_doubling_residual,config_hash"
    assert len(lines) == 4 and lines[1].endswith(",abc")


def test_window_is_normalized(rng):
    P = random_caloric_polynomial(2, 3, rng)
    w = RescaledWindow(_field(P), (np.array([0.1, 0.2]), 0.0), 0.3)
    assert w.mean_square_q1() == pytest.approx(1.0)
    assert 1 / 50 <= normalization_ratio(w) <= 50
    assert not h_almost_monotone(w, np.linspace(0.1, 1, 8), 1e-10)


def test_tail_fraction_matches_adaptive_oracle():
    # oracle: scipy dblquad in polar coordinates, outer radius 20 r
    P = caloric_extension({(2, 0): 2}, n=2) - caloric_extension({(1, 0): 1}, n=2)
    assert tail_fraction(_field(P), np.zeros(2), 0.2, 8.0) == pytest.approx(9.99367246688855e-06, rel=1e-6)
    fr = [tail_fraction(_field(P), np.zeros(2), 0.2, eta) for eta in (0.5, 1.0, 2.0, 4.0)]
    assert np.all(np.diff(fr) < 0) and fr[0] < 1


def test_audit_on_caloric_polynomial_has_no_violations(rng):
    P = random_caloric_polynomial(2, 3, rng)
    rep = almost_monotonicity_audit(_field(P), np.array([0.2, 0.1]), np.geomspace(0.05, 0.5, 8), 1e-9)
    assert rep.passed
    assert rep.largest_monotone_scale == pytest.approx(0.5)


def test_audit_flatness_for_small_frequency():
    P = caloric_extension({(0, 0): Fraction(1)}, n=2) + caloric_extension({(1, 0): Fraction(1, 50)}, n=2)
    rep = almost_monotonicity_audit(_field(P), np.zeros(2), [0.1, 0.2], 0.05)
    assert rep.flatness and all(f.ratio < 1 for f in rep.flatness)


def test_pinch_scan_homogeneous_has_no_drops():
    P = homogeneous_caloric_basis(2, 3)[0]
    rep = pinch_scan(_field(P), np.zeros(2), 1.0, 0.5, count=6, bound=0)
    assert rep.passed and not rep.drops
    assert all(k == 3 for _, _, k, _ in rep.plateaus)


def test_pinch_scan_counts_transitions():
    P = caloric_extension({(0, 0): Fraction(1)}, n=2) + caloric_extension({(3, 0): Fraction(1)}, n=2)
    rep = pinch_scan(_field(P), np.zeros(2), 10.0, 0.5, delta=0.05, count=16)
    assert 1 <= len(rep.drops) <= math.floor(3 / 0.05)
    with pytest.raises(DomainError):
        pinch_scan(_field(P), np.zeros(2), 1.0, 1.5)


def test_tangent_fit_recovers_homogeneous_polynomial():
    P = homogeneous_caloric_basis(2, 2)[1]
    fit = tangent_fit(_field(P), np.zeros(2), 0.5, 2)
    target = cylinder_normalized(P.to_float())
    assert fit.sup_error < 1e-10
    assert min(fit_distance(fit.polynomial, target), fit_distance(fit.polynomial, -target)) < 1e-10


def test_tangent_fit_requires_plateau():
    P = caloric_extension({(0, 0): 1}, n=2) + caloric_extension({(2, 0): 1}, n=2)
    with pytest.raises(InapplicableError):
        tangent_fit(_field(P), np.zeros(2), 1.0, 2)


@settings(max_examples=15)
@given(st.integers(0, 2**31 - 1), st.floats(0.1, 10.0))
def test_property_frequency_invariant_under_scaling(seed, c):
    P = random_caloric_polynomial(2, 3, np.random.default_rng(seed)).to_float()
    a = slice_integrals(PolynomialField(P), np.zeros(2), 0.4).N
    b = slice_integrals(PolynomialField(P * c), np.zeros(2), 0.4).N
    assert b == pytest.approx(a, rel=1e-10)


@settings(max_examples=15)
@given(st.integers(0, 2**31 - 1))
def test_property_frequency_monotone_for_caloric(seed):
    P = random_caloric_polynomial(2, 4, np.random.default_rng(seed))
    prof = frequency_profile(_field(P), np.zeros(2), np.geomspace(0.05, 1.5, 12), doubling=False)
    assert np.all(np.diff(prof.N) >= -1e-9)
    assert np.all(prof.N <= P.degree + 1e-9)


@settings(max_examples=10)
@given(st.integers(0, 2**31 - 1))
def test_property_doubling_between_n_and_n_of_double_radius(seed):
    P = random_caloric_polynomial(1, 5, np.random.default_rng(seed))
    prof = frequency_profile(_field(P), np.zeros(1), [0.1, 0.3, 0.6])
    assert not prof.sandwich_violations(1e-6)
