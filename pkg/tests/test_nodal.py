"""Nodal extraction, box counting, symmetry tests and nodal counts."""
import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nodalab.errors import DomainError
from nodalab.nodal import (
    FieldSlice,
    box_counts,
    box_dimension,
    cone_splitting_check,
    dyadic_scales,
    extract_nodal,
    marching_squares,
    nodal_count_1d,
    sign_changes,
    singular_nodes,
    sphere_directions,
    stratify,
    symmetry_test,
)
from nodalab.solver import Grid, preset, solve, time_grid


def _grid2(f, h=0.02, ext=1.0):
    a = np.linspace(-ext, ext, int(round(2 * ext / h)) + 1)
    X, Y = np.meshgrid(a, a, indexing="ij")
    return f(X, Y), [a, a]


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------

def test_circle_length_converges():
    errs = []
    for h in (0.04, 0.02, 0.01):
        vals, axes = _grid2(lambda X, Y: X ** 2 + Y ** 2 - 0.5 ** 2, h)
        sl = extract_nodal(vals, axes, compute_box_counts=False)
        errs.append(abs(sl.measure - math.pi))
    assert errs[-1] < 2e-3
    assert errs[0] > errs[1] > errs[2]


def test_straight_line_is_exact():
    vals, axes = _grid2(lambda X, Y: X - 0.1234)
    sl = extract_nodal(vals, axes)
    assert sl.measure == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(sl.points()[:, 0], 0.1234)


def test_one_dimensional_roots_refined_with_function():
    x = np.linspace(0, 1, 21)
    f = lambda s: np.sin(3 * math.pi * s) + 0.1
    sl = extract_nodal(f(x), [x], func=f)
    roots = np.sort(sl.points()[:, 0])
    # sin(3 pi s) = -0.1 at 3 pi s = pi + a and 2 pi - a with a = arcsin(0.1)
    a = math.asin(0.1)
    assert sl.count == 2
    assert np.allclose(roots, [(math.pi + a) / (3 * math.pi), (2 * math.pi - a) / (3 * math.pi)], atol=1e-13)


def test_sphere_area_from_marching_cubes():
    a = np.linspace(-1, 1, 41)
    X, Y, Z = np.meshgrid(a, a, a, indexing="ij")
    sl = extract_nodal(X ** 2 + Y ** 2 + Z ** 2 - 0.5 ** 2, [a, a, a], compute_box_counts=False)
    assert sl.measure == pytest.approx(math.pi, rel=0.01)
    assert sl.cells.shape[1:] == (3, 3)


def test_positive_slice_is_empty_and_zero_slice_vanishes():
    vals, axes = _grid2(lambda X, Y: 1 + X ** 2)
    sl = extract_nodal(vals, axes)
    assert sl.empty and sl.measure == 0 and not sl.vanishing
    z = extract_nodal(np.zeros_like(vals), axes)
    assert z.vanishing
    assert box_dimension(sl).dimension == -math.inf


def test_invalid_inputs():
    vals, axes = _grid2(lambda X, Y: X)
    vals[3, 3] = np.nan
    with pytest.raises(DomainError):
        extract_nodal(vals, axes)
    with pytest.raises(DomainError):
        extract_nodal(np.zeros((2, 2, 2, 2)), [np.arange(2)] * 4)


def test_mask_excludes_cells_outside_domain():
    vals, axes = _grid2(lambda X, Y: X)
    X, Y = np.meshgrid(*axes, indexing="ij")
    sl = extract_nodal(vals, axes, mask=Y > 0, compute_box_counts=False)
    assert np.all(sl.points()[:, 1] >= 0)
    assert sl.measure == pytest.approx(1.0, abs=0.03)


def test_saddle_is_resolved_without_crossing_segments():
    vals, axes = _grid2(lambda X, Y: X * Y + 1e-3, h=0.1)
    segs = marching_squares(vals, axes[0], axes[1])
    assert len(segs) > 0
    # every segment endpoint is a zero of the bilinear interpolant on grid edges
    for p in segs.reshape(-1, 2):
        assert abs(p[0] * p[1] + 1e-3) < 5e-3


def test_singular_points_of_cross():
    vals, axes = _grid2(lambda X, Y: X ** 2 - Y ** 2 + 1e-4, h=0.05)
    pts, tol = singular_nodes(vals, axes)
    assert len(pts) >= 1
    assert np.min(np.linalg.norm(pts, axis=1)) < 0.1
    assert tol["local"]
    # the bands scale with h, so a regular circle is clean once the grid resolves it
    vals, axes = _grid2(lambda X, Y: X ** 2 + Y ** 2 - 0.25, h=0.01)
    pts, tol = singular_nodes(vals, axes)
    assert len(pts) == 0
    assert tol["tol_u"] == pytest.approx(10 * 0.01 ** 2 * tol["C2"])
    assert tol["tol_g"] == pytest.approx(10 * 0.01 * tol["C2"])


def test_csv_and_summary(tmp_path):
    vals, axes = _grid2(lambda X, Y: X ** 2 + Y ** 2 - 0.25, h=0.1)
    sl = extract_nodal(vals, axes, t=0.5)
    p = sl.to_csv(tmp_path / "z.csv", extra={"config_hash": "h"})
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["t", "x0", "y0", "x1", "y1", "config_hash"]
    assert len(rows) == sl.count + 1
    s = json.loads(sl.write_summary(tmp_path / "s.json", 1.0).read_text())
    assert s == {"t": 0.5, "measure": sl.measure, "dimension": 1.0, "count": sl.count,
                 "singular_count": len(sl.singular_points)}


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------

def test_box_dimension_of_curves():
    vals, axes = _grid2(lambda X, Y: X ** 2 + Y ** 2 - 0.5, h=0.01)
    est = box_dimension(extract_nodal(vals, axes), [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125])
    assert est.dimension == pytest.approx(1.0, abs=0.1)
    assert est.band()[0] < est.dimension < est.band()[1]
    assert "proxy" in est.caveat or "consistency" in est.caveat


def test_box_dimension_of_points_is_zero():
    x = np.linspace(0, 1, 201)
    sl = extract_nodal(np.sin(4 * math.pi * x + 0.1), [x])
    est = box_dimension(sl, [0.1, 0.05, 0.02, 0.01, 0.002])
    assert est.dimension == pytest.approx(0.0, abs=0.05)


def test_box_dimension_scale_validation():
    vals, axes = _grid2(lambda X, Y: X)
    with pytest.raises(DomainError):
        box_dimension(extract_nodal(vals, axes), [0.1, 0.05, 0.025])


@settings(max_examples=15)
@given(st.floats(-0.5, 0.5), st.floats(0.1, 0.9))
def test_property_box_counts_monotone_in_scale(c, r):
    vals, axes = _grid2(lambda X, Y: (X - c) ** 2 + Y ** 2 - r ** 2, h=0.05, ext=2.0)
    sl = extract_nodal(vals, axes, compute_box_counts=False)
    counts = box_counts(sl, [0.8, 0.4, 0.2, 0.1, 0.05])
    assert np.all(np.diff(counts) >= 0)
    assert sl.measure >= 0


@settings(max_examples=15)
@given(st.floats(0.1, 100.0), st.floats(-0.3, 0.3))
def test_property_extraction_invariant_under_positive_scaling(c, shift):
    vals, axes = _grid2(lambda X, Y: np.sin(2 * X + shift) + Y ** 2 - 0.3, h=0.05)
    a = extract_nodal(vals, axes, compute_box_counts=False)
    b = extract_nodal(c * vals, axes, compute_box_counts=False)
    assert b.measure == pytest.approx(a.measure, rel=1e-12)
    assert np.allclose(np.sort(a.points(), axis=0), np.sort(b.points(), axis=0))


# ---------------------------------------------------------------------------
# quantitative symmetry
# ---------------------------------------------------------------------------

def test_linear_function_is_one_symmetric():
    u = FieldSlice(2, lambda p: p[..., 0])
    rep = symmetry_test(u, np.zeros(2), 0.5, 1, 0.1)
    assert rep.verdict and rep.deviation < 1e-10
    assert np.allclose(np.abs(rep.plane), [[0, 1]], atol=1e-6)
    assert rep.polynomial.degree == 1 and rep.polynomial.shift_defect() < 1e-10


def test_saddle_is_zero_but_not_two_symmetric():
    u = FieldSlice(2, lambda p: p[..., 0] ** 2 - p[..., 1] ** 2)
    assert symmetry_test(u, np.zeros(2), 0.5, 0, 0.1).deviation < 1e-10
    assert not symmetry_test(u, np.zeros(2), 0.5, 2, 0.1).verdict
    assert not symmetry_test(u, np.zeros(2), 0.5, 1, 0.1).verdict


def test_three_dimensional_plane_symmetry():
    u = FieldSlice(3, lambda p: (p[..., 0] + p[..., 1]) ** 3)
    rep = symmetry_test(u, np.zeros(3), 0.5, 2, 0.05)
    assert rep.deviation < 1e-6
    assert rep.polynomial.is_homogeneous()
    normal = np.cross(*rep.plane)
    assert abs(abs(normal @ np.array([1, 1, 0]) / math.sqrt(2)) - 1) < 1e-5


def test_constant_is_fully_symmetric():
    u = FieldSlice(2, lambda p: 3.0 + 0 * p[..., 0])
    rep = symmetry_test(u, np.zeros(2), 0.3, 2, 0.0)
    assert rep.deviation == pytest.approx(0.0, abs=1e-12)


def test_symmetry_test_domain_checks():
    vals, axes = _grid2(lambda X, Y: X)
    u = FieldSlice.from_grid(vals, axes)
    with pytest.raises(DomainError):
        symmetry_test(u, np.array([0.9, 0.0]), 0.5, 1, 0.1)
    with pytest.raises(DomainError):
        symmetry_test(u, np.zeros(2), 0.5, 3, 0.1)


def test_sphere_directions_are_unit():
    for n in (2, 3):
        d = sphere_directions(n, 100)
        assert np.allclose(np.linalg.norm(d, axis=1), 1)


@settings(max_examples=10)
@given(st.floats(0.01, 100.0), st.floats(-0.4, 0.4))
def test_property_verdict_invariant_under_positive_scaling(c, b):
    f = lambda p: p[..., 0] ** 2 + b * p[..., 1] - 0.05
    r1 = symmetry_test(FieldSlice(2, f), np.zeros(2), 0.4, 1, 0.1, directions=60)
    r2 = symmetry_test(FieldSlice(2, lambda p: c * f(p)), np.zeros(2), 0.4, 1, 0.1, directions=60)
    assert r1.deviation == pytest.approx(r2.deviation, rel=1e-6, abs=1e-9)
    assert r1.verdict == r2.verdict


def test_dyadic_scales():
    s = dyadic_scales(0.01, 0.4)
    assert s[0] == 0.4 and s[-1] >= 0.02 and s[-1] / 2 < 0.02
    with pytest.raises(DomainError):
        dyadic_scales(0.3, 0.4)


def test_nodal_points_lie_in_top_stratum():
    vals, axes = _grid2(lambda X, Y: X ** 2 + 2 * Y ** 2 - 0.3, h=0.025)
    pts = np.unique(extract_nodal(vals, axes, compute_box_counts=False).points(), axis=0)[::7]
    st_ = stratify(FieldSlice.from_grid(vals, axes), 1, 0.1, [0.05, 0.1, 0.2], pts, directions=60)
    assert st_.count == len(pts)
    # off the nodal set, at the critical point, u is nearly constant at small scales
    far = stratify(FieldSlice.from_grid(vals, axes), 1, 0.1, [0.05], [[0.0, 0.0]], directions=60)
    assert far.count == 0


@settings(max_examples=8)
@given(st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_property_stratum_shrinks_as_eta_grows(e1, e2):
    vals, axes = _grid2(lambda X, Y: X ** 2 + Y - 0.2, h=0.05)
    pts = np.array([[0.0, 0.2], [0.3, 0.0], [0.5, 0.5], [-0.4, 0.1]])
    st_ = stratify(FieldSlice.from_grid(vals, axes), 1, 0.0, [0.1, 0.2], pts, directions=40)
    lo, hi = sorted((e1, e2))
    assert np.all(st_.with_eta(hi).in_stratum <= st_.with_eta(lo).in_stratum)


def test_stratum_nested_in_k():
    vals, axes = _grid2(lambda X, Y: X * Y + 0.05 * X, h=0.05)
    u = FieldSlice.from_grid(vals, axes)
    pts = np.array([[0.0, 0.0], [0.3, 0.3], [0.0, 0.5]])
    s0 = stratify(u, 0, 0.1, [0.1, 0.2], pts, directions=40)
    s1 = stratify(u, 1, 0.1, [0.1, 0.2], pts, directions=40)
    # S^0 is contained in S^1
    assert np.all(s0.in_stratum <= s1.in_stratum)


def test_cone_splitting_upgrades_symmetry():
    u = FieldSlice(3, lambda p: p[..., 0] ** 2 + 0.01 * p[..., 0] ** 3)
    rep = cone_splitting_check(u, np.zeros(3), [[0, 0, 1]], (0.25, 0.5), np.array([0, 0.3, 0]), count=3)
    assert rep.applicable and rep.conclusion and rep.verdict
    assert np.all(rep.deviations_split <= 0.1)


def test_cone_splitting_inapplicable_cases():
    u = FieldSlice(2, lambda p: p[..., 0] * p[..., 1])
    rep = cone_splitting_check(u, np.zeros(2), [[0, 1]], (0.25, 0.5), np.array([0.3, 0.0]), count=2)
    assert not rep.applicable and rep.verdict
    rep = cone_splitting_check(u, np.zeros(2), [[0, 1]], (0.25, 0.5), np.array([0.0, 0.3]), count=2)
    assert not rep.applicable
    # x1 x2 along e2: no function of x1 alone approximates it
    assert symmetry_test(u, np.zeros(2), 0.5, 1, 0.1, plane=[[0, 1]]).deviation == math.inf


# ---------------------------------------------------------------------------
# nodal counts in one dimension
# ---------------------------------------------------------------------------

def test_sign_changes_with_band():
    assert sign_changes([1, -1, 1, -1], 0.0) == 3
    assert sign_changes([1, 1e-12, -1e-12, 1], 1e-10) == 0
    assert sign_changes([0.0, 0.0], 0.0) == 0


@settings(max_examples=30)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=40), st.floats(0, 0.5))
def test_property_band_never_adds_sign_changes(v, band):
    assert sign_changes(v, band) <= sign_changes(v, 0.0)


def test_heat_flow_reduces_nodal_count():
    g = Grid(((0, 1),), 0.01)
    f = lambda q: np.sin(math.pi * q[..., 0]) + 1.5 * np.sin(5 * math.pi * q[..., 0])
    F = solve(preset("heat", n=1), f, 0.0, g, time_grid((0.1, 1e-3), t0=0.0), scheme="be")
    series = nodal_count_1d(F)
    assert series.monotone
    assert series.counts[0] > series.counts[-1] == 0


def test_nodal_count_needs_one_dimension():
    g = Grid(((0, 1), (0, 1)), 0.1)
    F = solve(preset("heat", n=2), 0.0, 0.0, g, [0.0, 0.01])
    with pytest.raises(DomainError):
        nodal_count_1d(F)
