"""Acceptance suite: ten end-to-end criteria at their stated tolerances.

Each test records one ``PASS``/``FAIL`` line (value, tolerance, runtime,
budget); the lines are printed as they complete and again in the pytest
terminal summary.  Run directly with ``python tests/test_acceptance.py`` for
the table alone.
"""
import math
import time

import numpy as np
import pytest

from nodalab.caloric import (
    gaussian_integral,
    gaussian_inner_product,
    homogeneous_caloric_basis,
    polynomial_frequency,
    random_caloric_polynomial,
)
from nodalab.frequency import frequency_profile, h_derivative_residuals, slice_integrals
from nodalab.kernel import remainder_rate_check
from nodalab.lab import default_config
from nodalab.lab.experiments import (
    max_principle_trials,
    run_angenent,
    run_dimension_monotonicity,
    run_example1,
    run_monotonicity_audit,
    run_stratification,
    tangent_stability,
)
from nodalab.solver import ConvolutionField, PolynomialField, example1_profile, radial_root

RESULTS: list = []

pytestmark = pytest.mark.acceptance


def _record(number, title, passed, detail, runtime, budget):
    ok = bool(passed) and runtime < budget
    line = (f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}  "
            f"[{runtime:.1f} s / budget {budget:.0f} s]")
    RESULTS.append(line)
    print(line)
    return ok


def _failed_checks(res):
    return [f"{c.name}={c.value}" for c in res.checks if not c.passed]


# 1 ---------------------------------------------------------------------------

def test_criterion_01_caloric_oracle_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    residual_terms = 0
    worst_orth = 0.0
    worst_orth_quad = 0.0
    worst_freq = 0.0
    for n in (1, 2, 3):
        basis = [(d, P) for d in range(7) for P in homogeneous_caloric_basis(n, d)]
        residual_terms += sum(len(P.heat_residual().terms) for _, P in basis)
        mass = [gaussian_integral(P * P, 1) for _, P in basis]
        for i, (d1, P) in enumerate(basis):
            for j in range(i + 1, len(basis)):
                d2, Q = basis[j]
                if d1 == d2:
                    continue
                scale = math.sqrt(float(mass[i]) * float(mass[j]))
                worst_orth = max(worst_orth, abs(float(gaussian_inner_product(P, Q, 1))) / scale)
                if n <= 2:  # independent route: tensor Gauss-Hermite quadrature
                    q = gaussian_inner_product(P, Q, 1, method="quadrature", nodes=8)
                    worst_orth_quad = max(worst_orth_quad, abs(q) / scale)
        for d, P in basis[:: max(1, len(basis) // 12)]:
            for r in np.linspace(0.1, 1.0, 10):
                worst_freq = max(worst_freq, abs(polynomial_frequency(P, r) - d))
            if n == 2:
                F = PolynomialField(P.to_float())
                worst_freq = max(worst_freq, abs(slice_integrals(F, np.zeros(n), 0.5).N - d))
    excess = -math.inf
    for _ in range(50):
        n = int(rng.integers(1, 4))
        P = random_caloric_polynomial(n, int(rng.integers(1, 7)), rng)
        for r in (0.1, 0.5, 1.0):
            excess = max(excess, polynomial_frequency(P, r) - P.degree)
    runtime = time.perf_counter() - t0
    passed = residual_terms == 0 and worst_orth <= 1e-8 and worst_orth_quad <= 1e-8 \
        and worst_freq <= 1e-6 and excess <= 0
    detail = (f"residual terms {residual_terms}, orthogonality {worst_orth:.1e} (quadrature {worst_orth_quad:.1e}), "
              f"max |N - d| {worst_freq:.1e}, max N - degree {excess:.3f}")
    assert _record(1, "caloric oracle suite", passed, detail, runtime, 30), detail


# 2 ---------------------------------------------------------------------------

def test_criterion_02_frequency_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_h = worst_gd = 0.0
    sandwich = 0
    for n, order in ((1, 5), (2, 4), (3, 3)):
        for _ in range(2):
            F = PolynomialField(random_caloric_polynomial(n, order, rng).to_float())
            c = np.zeros(n)
            worst_h = max(worst_h, float(np.max(h_derivative_residuals(F, c, [0.1, 0.3, 0.6, 1.0]))))
            prof = frequency_profile(F, c, np.geomspace(0.1, 1.0, 600), doubling=False)
            worst_gd = max(worst_gd, float(np.max(np.abs(prof.global_doubling_residual))))
            sandwich += len(frequency_profile(F, c, np.geomspace(0.1, 1.0, 10)).sandwich_violations(1e-6))
    runtime = time.perf_counter() - t0
    passed = worst_h <= 1e-4 and worst_gd <= 1e-4 and sandwich == 0
    detail = f"H' residual {worst_h:.1e}, global doubling residual {worst_gd:.1e}, sandwich violations {sandwich}"
    assert _record(2, "frequency identities", passed, detail, runtime, 60), detail


# 3 ---------------------------------------------------------------------------

def test_criterion_03_example1_reproduction():
    res = run_example1(default_config("example1"))
    vals = {c.name: c.value for c in res.checks}
    detail = (f"r0-1 {vals['r0_equals_one']:.1e}, f(1,0) {vals['slice_value_f(1,0)']:.1e}, "
              f"f_s {vals['radial_derivative_f_s(1,0)']:.9f}, u_t {vals['time_derivative_u_t(1,0+)']:.6f}, "
              f"failed {_failed_checks(res)}")
    assert _record(3, "Example 1 reproduction", res.passed, detail, res.runtime, 60), detail


# 4 ---------------------------------------------------------------------------

def test_criterion_04_discrete_maximum_principle():
    t0 = time.perf_counter()
    reps = max_principle_trials(100, 1, seed=41) + max_principle_trials(100, 2, seed=42)
    worst = max(r.max_later for r in reps)
    runtime = time.perf_counter() - t0
    detail = f"{len(reps)} runs (100 in 1D, 100 in 2D), max later value {worst:.2e} <= 1e-12"
    assert _record(4, "discrete maximum principle", worst <= 1e-12, detail, runtime, 120), detail


# 5 ---------------------------------------------------------------------------

def test_criterion_05_angenent_monotonicity():
    res = run_angenent(default_config("angenent1d"))
    drops = sum(r["initial_count"] - r["final_count"] for r in res.rows)
    detail = f"{len(res.rows)} runs, non-monotone runs {res.checks[0].value}, total count drop {drops}"
    assert _record(5, "Angenent monotonicity", res.passed and len(res.rows) == 100, detail,
                   res.runtime, 120), detail


# 6 ---------------------------------------------------------------------------

def test_criterion_06_almost_monotonicity_audit():
    cfg = default_config("monotonicity_audit")
    res = run_monotonicity_audit(cfg)
    centers = len({r["center"] for r in res.rows})
    detail = f"lambda={cfg.coefficient_params['lam']}, {centers} centres, violations {res.checks[0].value} at eps=0.05"
    assert _record(6, "almost monotonicity audit", res.passed and centers == 25, detail, res.runtime, 180), detail


# 7 ---------------------------------------------------------------------------

def test_criterion_07_green_expansion_rates():
    t0 = time.perf_counter()
    slopes = {}
    for n in (1, 2):
        y = np.zeros(n)
        y[0] = 2.0
        for d in range(4):
            slopes[(n, d)] = remainder_rate_check(y, -4.0, d, 2.0 ** -np.arange(3, 9)).slope
    runtime = time.perf_counter() - t0
    margin = min(s - d for (n, d), s in slopes.items())
    detail = f"min slope - d = {margin:.3f} >= 0.9; " + ", ".join(
        f"n{n}d{d}:{s:.2f}" for (n, d), s in sorted(slopes.items()))
    assert _record(7, "Green expansion remainder rates", margin >= 0.9, detail, runtime, 30), detail


# 8 ---------------------------------------------------------------------------

def test_criterion_08_stratification_containment():
    res = run_stratification(default_config("stratification"))
    pts = sum(r["nodal_points"] for r in res.rows)
    inside = sum(r["in_stratum"] for r in res.rows)
    sym = sum(r["symmetric_on_nodal_set"] for r in res.rows)
    detail = f"{inside}/{pts} nodal points in S^(n-1)_0.1, (n, 0.1)-symmetric nodal points {sym}"
    assert _record(8, "stratification containment", res.passed, detail, res.runtime, 120), detail


# 9 ---------------------------------------------------------------------------

def test_criterion_09_tangent_map_stability():
    t0 = time.perf_counter()
    prof = example1_profile()
    F = ConvolutionField(prof, n=2)
    t_star = 0.02
    r = radial_root(prof, t_star)
    angles = np.linspace(0, 2 * np.pi, 10, endpoint=False) + 0.1
    pts = r * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    out = tangent_stability(F, pts, t_star, scales=(0.01, 0.02), d=1)
    ok = sum(o["passed"] for o in out)
    ratio = max(o["distance"] / (2 * max(o["errors"])) for o in out)
    runtime = time.perf_counter() - t0
    detail = f"{ok}/10 points stable, max distance / (2 x fit error) {ratio:.3f}, plateau |N-1| <= {max(o['plateau'] for o in out):.1e}"
    assert _record(9, "tangent-map stability", ok == 10, detail, runtime, 60), detail


# 10 --------------------------------------------------------------------------

def test_criterion_10_dimension_monotonicity_desk_check():
    res = run_dimension_monotonicity(default_config("dimension"))
    dims = ", ".join(f"{r['dimension']:.3f}" for r in res.rows)
    detail = f"dimensions [{dims}] within +-0.15 (consistency check, not a proof); failed {_failed_checks(res)}"
    assert _record(10, "dimension monotonicity desk check", res.passed and len(res.rows) == 5, detail,
                   res.runtime, 180), detail


if __name__ == "__main__":  # pragma: no cover
    import sys

    status = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                status = 1
    sys.exit(status)
