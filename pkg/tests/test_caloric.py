"""Exact caloric algebra: residuals, Gaussian moments, frequency."""
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nodalab.caloric import (
    CaloricPolynomial,
    GaussianWeight,
    SpaceTimePolynomial,
    ball_mean_square,
    caloric_extension,
    cylinder_mean_square,
    gaussian_integral,
    gaussian_inner_product,
    homogeneous_caloric_basis,
    homogeneous_decompose,
    polynomial_frequency,
    polynomial_frequency_direct,
    random_caloric_polynomial,
    slice_moment,
    small_frequency_flatness,
)
from nodalab.errors import DegreeMismatchError, DomainError, NotCaloricError, UndefinedFrequencyError


def test_extension_of_x_squared_is_x2_plus_2t():
    P = caloric_extension({(2,): 1})
    assert P.terms == {((2,), 0): Fraction(1), ((0,), 1): Fraction(2)}
    assert P.heat_residual().is_zero


def test_extension_of_x1x2_has_no_time_terms():
    P = caloric_extension({(1, 1): 1})
    assert P.terms == {((1, 1), 0): Fraction(1)}


def test_extension_rejects_inhomogeneous_input():
    with pytest.raises(DegreeMismatchError):
        caloric_extension({(2,): 1, (1,): 1})


def test_non_caloric_polynomial_is_rejected():
    with pytest.raises(NotCaloricError):
        CaloricPolynomial(1, {((2,), 0): 1})


def test_basis_sizes_match_monomial_counts():
    for n in (1, 2, 3):
        for d in range(5):
            assert len(homogeneous_caloric_basis(n, d)) == math.comb(n + d - 1, d)


def test_slice_moment_matches_normal_moments():
    # x^4 with variance 2 r^2 at r = 1: 3 * 2^2 = 12
    assert slice_moment((4,), 0, Fraction(1)) == 12
    assert slice_moment((3,), 0, Fraction(1)) == 0
    assert slice_moment((2, 2), 1, Fraction(1)) == -4


def test_gaussian_integral_exact_vs_quadrature(rng):
    for n in (1, 2, 3):
        P = random_caloric_polynomial(n, 4, rng)
        Q = random_caloric_polynomial(n, 3, rng)
        exact = float(gaussian_inner_product(P, Q, 0.7))
        quad = gaussian_inner_product(P, Q, 0.7, method="quadrature", nodes=20)
        assert quad == pytest.approx(exact, rel=1e-10, abs=1e-12)


def test_gaussian_weight_has_unit_mass():
    w = GaussianWeight((0.3, -0.1), 0.0)
    assert w.slice_mass(-0.5) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(DomainError):
        w(np.zeros(2), 0.1)


def test_frequency_routes_agree(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        P = random_caloric_polynomial(n, 4, rng)
        for r in (0.3, 1.0):
            assert polynomial_frequency(P, r) == pytest.approx(polynomial_frequency_direct(P, r), rel=1e-10, abs=1e-12)


def test_zero_polynomial_has_no_frequency():
    with pytest.raises(UndefinedFrequencyError):
        polynomial_frequency(CaloricPolynomial(2), 1)


def test_ball_and_cylinder_mean_squares():
    x = SpaceTimePolynomial.coordinate(2, 0)
    # average of x1^2 over the unit disk is 1/4
    assert ball_mean_square(x, 1) == Fraction(1, 4)
    one = CaloricPolynomial.constant(3, 2)
    assert cylinder_mean_square(one, 1) == 4


def test_small_frequency_flatness_bound():
    P = caloric_extension({(0, 0): Fraction(1)}, n=2) + caloric_extension({(1, 0): Fraction(1, 20)}, n=2)
    eps = polynomial_frequency(P, 1) * 1.001
    rep = small_frequency_flatness(P, eps)
    assert rep.a0 == pytest.approx(1.0)
    assert rep.higher_mass <= rep.mass_bound
    with pytest.raises(DomainError):
        small_frequency_flatness(P, 1.5)


def test_json_round_trip_is_exact(rng):
    P = random_caloric_polynomial(2, 4, rng)
    Q = CaloricPolynomial.from_json(json.loads(json.dumps(P.to_json())))
    assert Q == P
    data = P.to_json()
    assert all(isinstance(t["coef"], str) for t in data["terms"])


def test_float_polynomials_evaluate_like_exact(rng):
    P = random_caloric_polynomial(3, 3, rng)
    x = rng.normal(size=(7, 3))
    assert np.allclose(P(x, -0.3), P.to_float()(x, -0.3), rtol=1e-13)


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

orders = st.integers(0, 5)
dims = st.integers(1, 3)


@given(dims, orders, st.integers(0, 2**32 - 1))
def test_property_basis_elements_are_caloric_and_homogeneous(n, d, seed):
    basis = homogeneous_caloric_basis(n, d)
    P = basis[seed % len(basis)]
    assert P.heat_residual().is_zero
    assert P.is_homogeneous(d)


@given(dims, st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_property_frequency_between_min_and_max_order(n, m, seed):
    P = random_caloric_polynomial(n, m, np.random.default_rng(seed))
    N = polynomial_frequency(P, 1)
    orders_ = P.orders()
    assert min(orders_) - 1e-12 <= N <= max(orders_) + 1e-12


@given(dims, st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_property_frequency_non_decreasing_in_r(n, m, seed):
    P = random_caloric_polynomial(n, m, np.random.default_rng(seed))
    Ns = [polynomial_frequency(P, r) for r in np.geomspace(0.1, 2, 8)]
    assert np.all(np.diff(Ns) >= -1e-12)


@given(dims, st.integers(1, 4), st.integers(0, 2**32 - 1), st.fractions(min_value=-5, max_value=5))
def test_property_frequency_invariant_under_scaling(n, m, seed, c):
    if c == 0:
        c = Fraction(1)
    P = random_caloric_polynomial(n, m, np.random.default_rng(seed))
    assert polynomial_frequency(P * c, 0.5) == pytest.approx(polynomial_frequency(P, 0.5), rel=1e-12)


@given(dims, st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_property_decomposition_is_orthogonal_and_complete(n, m, seed):
    P = random_caloric_polynomial(n, m, np.random.default_rng(seed))
    parts = homogeneous_decompose(P)
    total = SpaceTimePolynomial(n)
    for _, Pi in parts:
        total = total + Pi
    assert total == P
    for i, (_, A) in enumerate(parts):
        for _, B in parts[i + 1:]:
            assert gaussian_inner_product(A, B, 1) == 0


@given(dims, st.integers(0, 4), st.integers(0, 2**32 - 1))
def test_property_gaussian_integral_scales_homogeneously(n, d, seed):
    basis = homogeneous_caloric_basis(n, d)
    P = basis[seed % len(basis)]
    h1 = gaussian_integral(P * P, 1)
    h2 = gaussian_integral(P * P, Fraction(1, 2))
    assert h2 == h1 * Fraction(1, 4) ** d
