"""Pass/fail table of numerical checks, one row per mathematical statement.

Every fixture is generated internally from a seed; the suite is the oracle
harness tying the library to the statements it implements.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from ..caloric import (
    caloric_extension,
    gaussian_inner_product,
    homogeneous_caloric_basis,
    polynomial_frequency,
    random_caloric_polynomial,
    small_frequency_flatness,
)
from ..frequency import (
    RescaledWindow,
    almost_monotonicity_audit,
    fit_distance,
    frequency_profile,
    h_almost_monotone,
    h_derivative_residuals,
    normalization_ratio,
    pinch_scan,
    tangent_fit,
)
from ..kernel import remainder_rate_check
from ..nodal import FieldSlice, cone_splitting_check, extract_nodal, stratify
from ..solver import (
    ConvolutionField,
    Grid,
    PolynomialField,
    example1_profile,
    preset,
    radial_root,
    solve,
    time_grid,
)
from .experiments import max_principle_trials

__all__ = ["LemmaRow", "STATEMENTS", "run_lemma_suite"]


@dataclass
class LemmaRow:
    id: str
    statement: str
    check: str
    tolerance: float
    result: float
    passed: bool
    runtime: float
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _rng(seed, salt):
    return np.random.default_rng([seed, salt])


def _poly_field(P, n=None):
    return PolynomialField(P.to_float())


# each check returns (result, tolerance, passed, detail)

def _poon_monotonicity(seed):
    worst = 0.0
    rng = _rng(seed, 1)
    for _ in range(5):
        P = random_caloric_polynomial(2, 4, rng)
        prof = frequency_profile(_poly_field(P, 2), np.zeros(2), np.geomspace(0.1, 1, 25), doubling=False)
        worst = max(worst, float(np.max(np.maximum.accumulate(prof.N) - prof.N)))
    return worst, 1e-9, worst <= 1e-9, "largest drop of N over increasing radii"


def _global_doubling(seed):
    P = random_caloric_polynomial(2, 4, _rng(seed, 2))
    prof = frequency_profile(_poly_field(P, 2), np.zeros(2), np.geomspace(0.1, 1, 600), doubling=False)
    res = float(np.max(np.abs(prof.global_doubling_residual)))
    return res, 1e-4, res <= 1e-4, "log H(r)/H(r0) - 2 int N/s ds"


def _h_derivative(seed):
    P = random_caloric_polynomial(2, 4, _rng(seed, 3))
    res = float(np.max(h_derivative_residuals(_poly_field(P, 2), np.zeros(2), [0.2, 0.5, 1.0])))
    return res, 1e-4, res <= 1e-4, "relative |H' - 2E/r|"


def _doubling_sandwich(seed):
    bad = 0
    rng = _rng(seed, 4)
    for _ in range(5):
        P = random_caloric_polynomial(2, 4, rng)
        prof = frequency_profile(_poly_field(P, 2), np.zeros(2), np.geomspace(0.1, 0.5, 9))
        bad += len(prof.sandwich_violations(1e-6))
    return float(bad), 1e-6, bad == 0, "radii with N(r) <= D(r) <= N(2r) violated"


def _orthogonality(seed):
    worst = 0.0
    for n in (1, 2, 3):
        basis = [(d, b) for d in range(0, 4) for b in homogeneous_caloric_basis(n, d)]
        for i, (d1, p) in enumerate(basis):
            for d2, q in basis[i + 1:]:
                if d1 != d2:
                    v = abs(float(gaussian_inner_product(p, q, 1)))
                    worst = max(worst, v)
    return worst, 0.0, worst == 0.0, "exact Gaussian inner products across orders"


def _bound_by_degree(seed):
    rng = _rng(seed, 5)
    worst = -math.inf
    for _ in range(50):
        n = int(rng.integers(1, 4))
        P = random_caloric_polynomial(n, int(rng.integers(1, 5)), rng)
        worst = max(worst, polynomial_frequency(P, 1) - P.degree)
    return float(worst), 1e-12, worst <= 1e-12, "max N(1) - degree over 50 random polynomials"


def _homogeneous_frequency(seed):
    worst = 0.0
    for n in (1, 2):
        for d in range(0, 5):
            for b in homogeneous_caloric_basis(n, d)[:2]:
                for r in (0.1, 0.5, 1.0):
                    worst = max(worst, abs(polynomial_frequency(b, r) - d))
    return worst, 1e-6, worst <= 1e-6, "|N - d| for homogeneous caloric polynomials"


def _small_frequency(seed):
    P = (caloric_extension({(0, 0): Fraction(1)}, n=2) + caloric_extension({(1, 0): Fraction(1, 10)}, n=2)
         + caloric_extension({(1, 1): Fraction(1, 20)}, n=2))
    eps = max(polynomial_frequency(P, 1), 1e-6) * 1.0000001
    rep = small_frequency_flatness(P, eps)
    ok = rep.higher_mass <= rep.mass_bound * (1 + 1e-12)
    return rep.higher_mass / rep.mass_bound, 1.0, ok, "higher-order mass / (eps/(1-eps) a0^2)"


def _kernel_rates(seed):
    worst = math.inf
    for n in (1, 2):
        y = np.zeros(n)
        y[0] = 2.0
        for d in range(4):
            rep = remainder_rate_check(y, -4.0, d, 2.0 ** -np.arange(3, 9))
            worst = min(worst, rep.slope - d)
    return worst, 0.9, worst >= 0.9, "min over (n, d) of fitted slope - d"


def _maximum_principle(seed):
    reps = max_principle_trials(10, 1, seed) + max_principle_trials(5, 2, seed + 1)
    worst = max(r.max_later for r in reps)
    return worst, 1e-12, worst <= 1e-12, "max of later slices, non-positive data, backward Euler"


def _h_monotone(seed):
    P = random_caloric_polynomial(2, 3, _rng(seed, 6))
    w = RescaledWindow(_poly_field(P, 2), (np.array([0.1, -0.2]), 0.0), 0.25)
    bad = h_almost_monotone(w, np.linspace(0.1, 1, 10), 1e-10)
    return float(len(bad)), 1e-10, not bad, "pairs with H(r1) > H(r2) on a normalized window"


def _normalizations(seed):
    rng = _rng(seed, 7)
    ratios = []
    for _ in range(4):
        P = random_caloric_polynomial(2, 3, rng)
        w = RescaledWindow(_poly_field(P, 2), (rng.uniform(-0.5, 0.5, 2), 0.0), 0.5)
        ratios.append(normalization_ratio(w))
    lo, hi = min(ratios), max(ratios)
    C = 50.0
    return hi / lo, C, (lo >= 1 / C and hi <= C), f"ratios in [{lo:.3g}, {hi:.3g}]"


def _audit(seed):
    co = preset("lipschitz_perturbation", lam=0.05)
    P = random_caloric_polynomial(2, 3, _rng(seed, 8)).to_float()
    g = Grid(((-1, 1), (-1, 1)), 0.025)
    times = time_grid((-0.005, 2e-3), (0.0, 5e-4), t0=-0.05)
    F = solve(co, lambda q: P(q, -0.05), lambda q, t: P(q, t), g, times)
    total = 0
    for c in ([0.0, 0.0], [0.3, -0.2], [-0.3, 0.3]):
        rep = almost_monotonicity_audit(F, (np.array(c), 0.0), np.geomspace(0.03, 0.2, 8), 0.05, R0=0.5,
                                        check_flatness=False)
        total += len(rep.violations)
    return float(total), 0.05, total == 0, "violations of N(r1) <= N(r2) + eps"


def _pinches(seed):
    P = (caloric_extension({(0, 0): Fraction(1)}, n=2) + caloric_extension({(1, 0): Fraction(1)}, n=2)
         + caloric_extension({(3, 0): Fraction(1)}, n=2))
    delta = 0.05
    rep = pinch_scan(_poly_field(P, 2), np.zeros(2), 10.0, 0.5, delta=delta, count=16)
    bound = math.floor(P.degree / delta)
    return float(len(rep.drops)), float(bound), len(rep.drops) <= bound, "delta-drops vs degree/delta"


def _tangent(seed):
    prof = example1_profile()
    F = ConvolutionField(prof, n=2)
    t0 = 0.02
    r = radial_root(prof, t0)
    x = r * np.array([math.cos(0.3), math.sin(0.3)])
    fits = [tangent_fit(F, (x, t0), s, 1, plateau=(0.005, 0.02)) for s in (0.01, 0.02)]
    dist = fit_distance(fits[0].polynomial, fits[1].polynomial)
    bound = 2 * max(f.sup_error for f in fits)
    return dist, bound, dist <= bound, "sup distance of fits at two plateau scales"


def _cone_splitting(seed):
    u = FieldSlice(3, lambda p: p[..., 0] ** 2 + 0.01 * p[..., 0] ** 3)
    rep = cone_splitting_check(u, np.zeros(3), [[0, 0, 1]], (0.25, 0.5), np.array([0, 0.3, 0]),
                               eps=0.05, eta=0.1, count=3)
    ok = rep.applicable and rep.conclusion
    return float(rep.deviations_split.max()), 0.1, ok, rep.reason


def _containment(seed):
    a = np.linspace(-1, 1, 81)
    X, Y = np.meshgrid(a, a, indexing="ij")
    vals = X ** 2 + 2 * Y ** 2 - 0.3 + 0.2 * X * Y
    sl = extract_nodal(vals, [a, a], compute_box_counts=False)
    st = stratify(FieldSlice.from_grid(vals, [a, a]), 1, 0.1, [0.05, 0.1, 0.2], np.unique(sl.points(), axis=0))
    return float(st.count) / len(st.points), 1.0, st.count == len(st.points), "share of nodal points in S^{n-1}"


STATEMENTS = [
    ("frequency.poon_monotonicity", "frequency of a caloric function is non-decreasing in r", _poon_monotonicity),
    ("frequency.global_doubling", "log-ratio of H equals twice the integral of N(s)/s", _global_doubling),
    ("frequency.h_derivative", "H'(r) = 2E(r)/r", _h_derivative),
    ("frequency.doubling_sandwich", "N(r) <= D(r) <= N(2r)", _doubling_sandwich),
    ("caloric.homogeneous_orthogonality", "homogeneous parts of different order are Gaussian-orthogonal", _orthogonality),
    ("caloric.frequency_of_homogeneous", "order-d homogeneous caloric polynomials have N = d", _homogeneous_frequency),
    ("caloric.frequency_bounded_by_degree", "N <= degree for caloric polynomials", _bound_by_degree),
    ("caloric.small_frequency_flatness", "N <= eps forces higher-order mass <= eps/(1-eps) a0^2", _small_frequency),
    ("kernel.remainder_rates", "Taylor remainder of the heat kernel decays like r^(d+1)", _kernel_rates),
    ("solver.maximum_principle", "non-positive data stay non-positive", _maximum_principle),
    ("frequency.h_monotone", "H is almost monotone on normalized windows", _h_monotone),
    ("frequency.normalization_equivalence", "Gaussian and cylinder normalizations are comparable", _normalizations),
    ("frequency.almost_monotonicity", "N(r1) <= N(r2) + eps under Lipschitz perturbations", _audit),
    ("frequency.finitely_many_pinches", "finitely many delta-drops of the frequency", _pinches),
    ("frequency.tangent_uniqueness", "tangent fits on a plateau are stable across scales", _tangent),
    ("nodal.cone_splitting", "two independent symmetries upgrade k to k+1", _cone_splitting),
    ("nodal.nodal_set_in_top_stratum", "the nodal set lies in S^{n-1}_eta for eta < 1/2", _containment),
]


def run_lemma_suite(seed: int = 0, only=None, budget: float | None = 300.0) -> list:
    """Run every registered check and return one :class:`LemmaRow` per statement.

    Exceptions count as failures.  With a ``budget`` a final row
    ``suite.runtime_budget`` records the total wall-clock time.
    """
    rows = []
    start = time.perf_counter()
    for sid, text, fn in STATEMENTS:
        if only and not any(sid.startswith(o) for o in only):
            continue
        t0 = time.perf_counter()
        try:
            result, tol, ok, detail = fn(seed)
        except Exception as exc:  # a crashing fixture is a failed check
            result, tol, ok, detail = math.nan, math.nan, False, f"{type(exc).__name__}: {exc}"
        rows.append(LemmaRow(sid, text, fn.__name__.lstrip("_"), float(tol), float(result), bool(ok),
                             time.perf_counter() - t0, detail))
    if budget is not None:
        total = time.perf_counter() - start
        rows.append(LemmaRow("suite.runtime_budget", "whole suite within the desk budget", "wall_clock",
                             float(budget), total, total <= budget, total, f"{total:.1f} s wall clock"))
    return rows

