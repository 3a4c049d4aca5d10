"""Reproduction experiments driven by :class:`ExperimentConfig`."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from ..caloric import SpaceTimePolynomial, random_caloric_polynomial
from ..errors import DomainError
from ..frequency import almost_monotonicity_audit, fit_distance, tangent_fit
from ..nodal import (
    CAVEAT,
    FieldSlice,
    box_dimension,
    dyadic_scales,
    extract_nodal,
    nodal_count_1d,
    stratify,
)
from ..solver import (
    CoefficientField,
    ConvolutionField,
    Grid,
    example1_profile,
    example2_profile,
    heat_convolve,
    heat_convolve_dt,
    max_principle_check,
    preset,
    radial_root,
    solve,
    solve_radial,
    time_grid,
)
from .config import ExperimentConfig

__all__ = [
    "Check",
    "ExperimentResult",
    "write_rows_csv",
    "initial_data",
    "sampled_time_grid",
    "run_example1",
    "run_example2",
    "run_angenent",
    "run_monotonicity_audit",
    "run_stratification",
    "run_dimension_monotonicity",
    "run_custom",
    "tangent_stability",
    "max_principle_trials",
    "random_sine_data",
    "RUNNERS",
    "run_experiment",
    "run_jobs",
]

log = logging.getLogger(__name__)


@dataclass
class Check:
    name: str
    value: float | bool | str
    tolerance: float | None
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        v = self.value
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        return {"name": self.name, "value": v, "tolerance": self.tolerance,
                "passed": bool(self.passed), "detail": self.detail}


@dataclass
class ExperimentResult:
    name: str
    scenario: str
    config_hash: str
    rows: list
    checks: list
    runtime: float = 0.0
    files: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "runtime": self.runtime,
            "checks": [c.to_dict() for c in self.checks],
            "rows": self.rows,
            "files": [str(f) for f in self.files],
            "metadata": self.metadata,
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def write_rows_csv(path, rows: list, config_hash: str) -> Path:
    """Write ``rows`` (dicts with equal keys) with a trailing ``config_hash`` column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=cols + ["config_hash"])
        wr.writeheader()
        for r in rows:
            wr.writerow({**{k: _plain(v) for k, v in r.items()}, "config_hash": config_hash})
    return path


def _finish(cfg: ExperimentConfig, rows, checks, t_start, files=(), **meta) -> ExperimentResult:
    res = ExperimentResult(cfg.name, cfg.scenario, cfg.config_hash, rows, checks,
                           time.perf_counter() - t_start, list(files), meta)
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        if rows:
            res.files.append(write_rows_csv(out / f"{cfg.name}.csv", rows, cfg.config_hash))
        report = out / f"{cfg.name}_report.json"
        report.write_text(json.dumps(res.to_dict(), indent=1, default=_plain))
        res.files.append(report)
    return res


def sampled_time_grid(t_start: float, samples, tau: float, fine: tuple | None = None) -> np.ndarray:
    """Time grid from ``t_start`` hitting every sample time exactly.

    ``fine = (window, tau_fine)`` uses the smaller step within ``window`` of
    each sample.
    """
    targets = sorted({float(t) for t in samples if t > t_start})
    segs = []
    cur = t_start
    for t in targets:
        if fine is not None and t - fine[0] > cur:
            segs.append((t - fine[0], tau))
            segs.append((t, fine[1]))
        else:
            segs.append((t, fine[1] if fine is not None else tau))
        cur = t
    return time_grid(*segs, t0=t_start)


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def random_sine_data(rng: np.random.Generator, modes: int):
    """``sum_k a_k sin(k pi x)`` with ``a_k ~ N(0, 1) / k`` on ``[0, 1]``."""
    a = rng.normal(size=modes) / np.arange(1, modes + 1)

    def f(p):
        x = np.asarray(p, dtype=float)[..., 0]
        return sum(a[k] * np.sin((k + 1) * np.pi * x) for k in range(modes))

    return f, a


def initial_data(spec, n: int, seed: int = 0, t: float = 0.0):
    """Callable initial data from a configuration entry.

    ``spec`` is a dict with ``kind`` in ``random_caloric`` (``order``),
    ``polynomial`` (``terms`` JSON or ``path``), ``example1`` / ``example2``
    (radial profiles) or ``sine_modes`` (``modes``, 1D).
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = spec.get("kind")
    rng = np.random.default_rng(seed)
    if kind == "random_caloric":
        P = random_caloric_polynomial(n, int(spec.get("order", 3)), rng).to_float()
        return (lambda p: P(p, t)), P
    if kind == "polynomial":
        data = spec.get("terms")
        if data is None:
            data = json.loads(Path(spec["path"]).read_text())
        P = SpaceTimePolynomial.from_json(data)
        return (lambda p: P(p, t)), P
    if kind in ("example1", "example2"):
        prof = example1_profile() if kind == "example1" else example2_profile()
        return prof.of_x, prof
    if kind == "sine_modes":
        f, a = random_sine_data(rng, int(spec.get("modes", 6)))
        return f, a
    raise DomainError(f"unknown initial data kind {kind!r}")


# ---------------------------------------------------------------------------
# Example 1: exact convolution, growing nodal circle
# ---------------------------------------------------------------------------

def run_example1(cfg: ExperimentConfig) -> ExperimentResult:
    """Nodal radius ``r_t`` and length ``2 pi r_t`` of the exact solution.

    Slice anchors at ``t = 0`` (``f(1) = 0``, ``f'(1) = 1/2``) and the initial
    time derivative ``u_t(e_1, 0+) = -2`` are measured on the field.
    """
    t_start = time.perf_counter()
    prof = example1_profile()
    F = ConvolutionField(prof, n=2)
    rows = []
    for t in cfg.times:
        r = radial_root(prof, t)
        rows.append({"t": float(t), "r_t": r, "measure": 2 * math.pi * r})
    checks = []
    r0 = next((row["r_t"] for row in rows if row["t"] == 0.0), radial_root(prof, 0.0))
    tol = cfg.tolerance("r0", 1e-3)
    checks.append(Check("r0_equals_one", abs(r0 - 1), tol, abs(r0 - 1) <= tol))
    pos = [row for row in rows if row["t"] > 0]
    incr = all(b["r_t"] > a["r_t"] for a, b in zip(rows, rows[1:]))
    checks.append(Check("r_t_strictly_increasing", incr, None, incr,
                        ", ".join(f"{row['t']:g}:{row['r_t']:.6f}" for row in rows)))
    if pos:
        above = all(row["r_t"] > 1 for row in pos)
        checks.append(Check("r_t_exceeds_one", above, None, above))
    e1 = np.array([1.0, 0.0])
    f10 = float(F.evaluate(e1, 0.0))
    tol = cfg.tolerance("f_value", 1e-9)
    checks.append(Check("slice_value_f(1,0)", f10, tol, abs(f10) <= tol))
    ds = 1e-4
    fp = float(F.evaluate(np.sqrt(1 + ds) * e1, 0.0))
    fm = float(F.evaluate(np.sqrt(1 - ds) * e1, 0.0))
    slope = (fp - fm) / (2 * ds)
    tol = cfg.tolerance("f_slope", 1e-6)
    checks.append(Check("radial_derivative_f_s(1,0)", slope, tol, abs(slope - 0.5) <= tol))
    dt = float(heat_convolve_dt(prof, 1e-6, e1))
    tol = cfg.tolerance("f_time", 1e-3)
    checks.append(Check("time_derivative_u_t(1,0+)", dt, tol, abs(dt + 2) <= tol))
    ut = float(heat_convolve(prof, 1e-4, e1))
    checks.append(Check("f(1,t)<0_small_t", ut, None, ut < 0))
    return _finish(cfg, rows, checks, t_start)


# ---------------------------------------------------------------------------
# Example 2: Dirichlet ball |x|^2 < 3
# ---------------------------------------------------------------------------

def _inner_root(field_, t, bracket=(0.5, 1.2)):
    def g(r):
        return float(field_.evaluate(np.array([r, 0.0]), t))

    return float(optimize.brentq(g, *bracket, xtol=1e-12))


def run_example2(cfg: ExperimentConfig) -> ExperimentResult:
    """Inner nodal circle of the Dirichlet problem on ``|x|^2 < 3``.

    The radial problem is solved on a fine 1D grid and cross-checked against
    a masked Cartesian solve; the boundary layer ``annulus`` (in ``s = |x|^2``)
    must stay positive.
    """
    t_start = time.perf_counter()
    prof = example2_profile()
    R = math.sqrt(3.0)
    times = sampled_time_grid(0.0, cfg.times, cfg.grid.tau)
    radial = solve_radial(prof.of_x, R, cfg.grid.h, times, n=2, boundary=0.0)
    p = cfg.params
    hc = float(p.get("cartesian_h", 0.025))
    tc = sampled_time_grid(0.0, cfg.times, float(p.get("cartesian_tau", 1e-3)))
    ext = R + 2 * hc
    grid = Grid(((-ext, ext), (-ext, ext)), hc, mask=lambda q: np.sum(q * q, axis=-1) < 3.0)

    def data(q):
        s2 = np.sum(q * q, axis=-1)
        return np.where(s2 < 3.0, prof(np.minimum(s2, 3.0)), 0.0)

    cart = solve(CoefficientField.heat(2), data, 0.0, grid, tc, scheme="cn")
    s_lo, s_hi = p.get("annulus", [2.5, 3.0])
    rho = radial.rho
    ann = (rho ** 2 > s_lo) & (rho ** 2 < s_hi) & (rho < rho[-1])
    rows, checks = [], []
    tol = cfg.tolerance("cross_check", 1e-2)
    for t in cfg.times:
        r = _inner_root(radial, t)
        sl = extract_nodal(cart.slice_values(t), cart.axes, t=t, mask=cart.mask, compute_box_counts=False)
        mid = sl.cells.mean(axis=1) if len(sl.cells) else np.zeros((0, 2))
        inner = sl.cells[np.linalg.norm(mid, axis=1) < 1.5] if len(mid) else sl.cells
        m_cart = float(np.sum(np.linalg.norm(inner[:, 1] - inner[:, 0], axis=1))) if len(inner) else 0.0
        umin = float(radial.profile.slice_values(t)[ann].min())
        rows.append({"t": float(t), "r_t": r, "measure": 2 * math.pi * r, "measure_cartesian": m_cart,
                     "annulus_min": umin})
        rel = abs(m_cart - 2 * math.pi * r) / (2 * math.pi * r)
        checks.append(Check(f"cross_check_t={t:g}", rel, tol, rel <= tol))
        checks.append(Check(f"annulus_positive_t={t:g}", umin, None, umin > 0))
    if 0.0 in [float(t) for t in cfg.times]:
        r0 = rows[[row["t"] for row in rows].index(0.0)]["r_t"]
        checks.append(Check("inner_circle_at_t0", abs(r0 - 1), 1e-6, abs(r0 - 1) <= 1e-6))
    outer = np.sort(np.polynomial.Polynomial([15.0, -8.0, 1.0]).roots().real)
    checks.append(Check("outer_piece_roots", outer.tolist(), 1e-12, bool(np.allclose(outer, [3, 5], atol=1e-12))))
    incr = all(b["measure"] > a["measure"] for a, b in zip(rows, rows[1:]))
    checks.append(Check("inner_measure_increasing", incr, None, incr))
    return _finish(cfg, rows, checks, t_start, radial_h=float(radial.metadata["h"]), cartesian_h=hc)


# ---------------------------------------------------------------------------
# Sturmian nodal counts in one dimension
# ---------------------------------------------------------------------------

def _coefficients(cfg: ExperimentConfig, n: int, seed: int):
    kw = dict(cfg.coefficient_params)
    if cfg.coefficients == "diagonal_random":
        kw.setdefault("seed", seed)
    if cfg.coefficients in ("heat", "diagonal_random", "lipschitz_perturbation"):
        kw.setdefault("n", n)
    return preset(cfg.coefficients, **kw)


def run_angenent(cfg: ExperimentConfig) -> ExperimentResult:
    """Seeded 1D Dirichlet runs; the interior sign-change count must never grow.

    Backward Euler is used: its step matrix is the inverse of a tridiagonal
    M-matrix, which does not increase the number of sign changes.
    """
    t_start = time.perf_counter()
    p = cfg.params
    runs = int(p.get("runs", 100))
    modes = int(p.get("modes", 6))
    t_end = float(p.get("t_end", 0.2))
    grid = Grid(((0.0, 1.0),), cfg.grid.h)
    times = time_grid((t_end, cfg.grid.tau), t0=0.0)
    rows, bad = [], []
    band = cfg.tolerance("band", 1e-10)
    for i in range(runs):
        seed = cfg.seed * 100003 + i
        rng = np.random.default_rng(seed)
        f, _ = random_sine_data(rng, modes)
        co = _coefficients(cfg, 1, seed)
        F = solve(co, f, 0.0, grid, times, scheme="be")
        series = nodal_count_1d(F, tol_u=band)
        rows.append({"run": i, "seed": seed, "initial_count": int(series.counts[0]),
                     "final_count": int(series.counts[-1]), "increases": len(series.increases),
                     "monotone": series.monotone})
        if not series.monotone:
            bad.append(i)
    checks = [Check("counts_non_increasing", len(bad), 0, not bad,
                    f"runs with increases: {bad}" if bad else f"{runs} runs")]
    return _finish(cfg, rows, checks, t_start)


def max_principle_trials(runs: int, n: int, seed: int = 0, h: float | None = None,
                         steps: int = 20, tau: float = 2e-3):
    """Backward-Euler gauge runs with random non-positive data and zero
    Dirichlet values under ``diagonal_random`` coefficients."""
    rng = np.random.default_rng(seed)
    h = h if h is not None else (0.02 if n == 1 else 0.1)
    grid = Grid(tuple((0.0, 1.0) for _ in range(n)), h)
    times = time_grid((steps * tau, tau), t0=0.0)
    out = []
    for i in range(runs):
        co = preset("diagonal_random", n=n, seed=int(rng.integers(1 << 30)), lam=float(rng.uniform(0.05, 0.4)))
        data = -np.abs(rng.normal(size=grid.shape)) * rng.uniform(0.1, 10)
        if rng.random() < 0.3:  # sparse supports and exact zeros
            data *= rng.random(grid.shape) < 0.3
        F = solve(co, data, 0.0, grid, times, scheme="be", gauge=True)
        out.append(max_principle_check(F))
    return out


# ---------------------------------------------------------------------------
# almost monotonicity under Lipschitz perturbations
# ---------------------------------------------------------------------------

def run_monotonicity_audit(cfg: ExperimentConfig) -> ExperimentResult:
    """Frequency audit of a perturbed-coefficient solution on a grid of centres."""
    t_start = time.perf_counter()
    p = cfg.params
    t0 = float(cfg.times[-1]) if cfg.times else 0.0
    bbox = cfg.grid.bbox or [[-1, 1], [-1, 1]]
    n = len(bbox)
    rng = np.random.default_rng(cfg.seed)
    P = random_caloric_polynomial(n, int(p.get("order", 3)), rng).to_float()
    co = _coefficients(cfg, n, cfg.seed)
    grid = Grid(tuple(tuple(b) for b in bbox), cfg.grid.h)
    times = sampled_time_grid(cfg.t_start, [t0], cfg.grid.tau,
                              fine=(float(p.get("fine_window", 0.005)), float(p.get("fine_tau", 2.5e-4))))
    F = solve(co, lambda q: P(q, cfg.t_start), lambda q, t: P(q, t), grid, times, scheme="cn")
    lo, hi = p.get("radii", [0.02, 0.2])
    radii = np.geomspace(lo, hi, int(p.get("n_radii", 12)))
    eps = cfg.tolerance("eps", 0.05)
    ext = float(p.get("center_extent", 0.4))
    cs = np.linspace(-ext, ext, int(p.get("centers", 5)))
    rows, total = [], 0
    for c in np.stack(np.meshgrid(*([cs] * n), indexing="ij"), axis=-1).reshape(-1, n):
        rep = almost_monotonicity_audit(F, (c, t0), radii, eps, R0=float(p.get("R0", 0.5)), check_flatness=False)
        total += len(rep.violations)
        for r, N in zip(rep.radii, rep.N):
            rows.append({"center": " ".join(f"{v:.4f}" for v in c), "r": float(r), "N": float(N)})
    checks = [Check("almost_monotone_violations", total, eps, total == 0)]
    return _finish(cfg, rows, checks, t_start, polynomial=P.pretty(), m_matrix=F.metadata["m_matrix"])


# ---------------------------------------------------------------------------
# stratification containment on Example-1 slices
# ---------------------------------------------------------------------------

def _grid_axes(bbox, h):
    return [np.linspace(lo, hi, int(round((hi - lo) / h)) + 1) for lo, hi in bbox]


def run_stratification(cfg: ExperimentConfig) -> ExperimentResult:
    """Every extracted nodal point of an Example-1 slice must lie in
    ``S^{n-1}_eta``, i.e. no nodal point is ``(n, eta)``-symmetric at a listed scale."""
    t_start = time.perf_counter()
    eta = cfg.tolerance("eta", 0.1)
    bbox = cfg.grid.bbox or [[-1.5, 1.5], [-1.5, 1.5]]
    h = cfg.grid.h
    axes = _grid_axes(bbox, h)
    F = ConvolutionField(example1_profile(), n=2)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    scales = dyadic_scales(h, float(cfg.params.get("max_scale", 0.4)))
    rows, checks = [], []
    for t in cfg.times:
        vals = F.evaluate(mesh, t)
        sl = extract_nodal(vals, axes, t=t, compute_box_counts=False)
        pts = np.unique(sl.points(), axis=0)
        u = FieldSlice.from_grid(vals, axes, label=f"example1@{t}")
        st = stratify(u, 1, eta, scales, pts)
        inside = int(st.count)
        symmetric = int(np.sum(~st.in_stratum))
        usable = int(np.sum(~np.all(st.skipped, axis=1)))
        rows.append({"t": float(t), "nodal_points": len(pts), "in_stratum": inside,
                     "symmetric_on_nodal_set": symmetric, "usable_points": usable,
                     "min_deviation": float(np.min(st.deviations)), "measure": sl.measure})
        checks.append(Check(f"containment_t={t:g}", inside / max(len(pts), 1), 1.0,
                            inside == len(pts) and len(pts) > 0 and usable == len(pts)))
        checks.append(Check(f"no_symmetric_nodal_point_t={t:g}", symmetric, 0, symmetric == 0))
    return _finish(cfg, rows, checks, t_start, scales=scales.tolist())


# ---------------------------------------------------------------------------
# dimension monotonicity on a Dirichlet disk
# ---------------------------------------------------------------------------

def _disk_data(kind: str, radius: float):
    def sign_changing(q):
        x, y = q[..., 0], q[..., 1]
        return (radius ** 2 - x * x - y * y) * (x * y + 0.3 * np.sin(3 * x) - 0.2)

    def positive(q):
        x, y = q[..., 0], q[..., 1]
        return (radius ** 2 - x * x - y * y) * (1.0 + 0.5 * np.cos(x) * np.cos(y))

    table = {"sign_changing": sign_changing, "positive": positive}
    if kind not in table:
        raise DomainError(f"unknown disk data {kind!r}; choose from {sorted(table)}")
    return table[kind]


def run_dimension_monotonicity(cfg: ExperimentConfig) -> ExperimentResult:
    """Box-counting dimension of ``Z_t`` on a Dirichlet disk at sampled times.

    The verdict only states consistency with non-increase within the band;
    box counting is a proxy for Hausdorff dimension, not a proof.
    """
    t_start = time.perf_counter()
    p = cfg.params
    radius = float(p.get("radius", 2.0))
    h = cfg.grid.h
    ext = radius + 2 * h
    grid = Grid(((-ext, ext), (-ext, ext)), h, mask=lambda q: np.sum(q * q, axis=-1) < radius ** 2)
    times = sampled_time_grid(min(cfg.times), cfg.times, cfg.grid.tau)
    co = _coefficients(cfg, 2, cfg.seed)
    F = solve(co, _disk_data(p.get("initial", "sign_changing"), radius), 0.0, grid, times, scheme="cn")
    scales = np.asarray(p.get("scales", [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]), dtype=float)
    band = cfg.tolerance("band", 0.15)
    rows, est = [], []
    for t in cfg.times:
        sl = extract_nodal(F.slice_values(t), F.axes, t=t, mask=F.mask, compute_box_counts=False)
        d = box_dimension(sl, scales)
        est.append(d)
        rows.append({"t": float(t), "dimension": d.dimension, "half_width": d.half_width,
                     "measure": sl.measure, "elements": sl.count, "empty": d.empty})
    bad = []
    for j in range(len(est)):
        for i in range(j):
            a, b = est[i].dimension, est[j].dimension
            if b > a + band and not (math.isinf(b) and b < 0):
                bad.append((cfg.times[i], cfg.times[j], a, b))
    verdict = "consistent with non-increasing" if not bad else "not consistent with non-increasing"
    checks = [Check("dimension_non_increasing_within_band", len(bad), band, not bad,
                    f"{verdict} ({CAVEAT})")]
    return _finish(cfg, rows, checks, t_start, verdict=verdict, caveat=CAVEAT, band=band)


# ---------------------------------------------------------------------------
# custom solve
# ---------------------------------------------------------------------------

def run_custom(cfg: ExperimentConfig, snapshot: str | None = None) -> ExperimentResult:
    """Solve with configured data and coefficients; optionally save a snapshot."""
    t_start = time.perf_counter()
    bbox = cfg.grid.bbox or [[-1, 1], [-1, 1]]
    n = len(bbox)
    spec = cfg.params.get("initial", {"kind": "random_caloric", "order": 3})
    f, obj = initial_data(spec, n, cfg.seed, cfg.t_start)
    boundary = 0.0
    if isinstance(obj, SpaceTimePolynomial) and cfg.params.get("polynomial_boundary", True):
        boundary = (lambda q, t: obj(q, t))
    grid = Grid(tuple(tuple(b) for b in bbox), cfg.grid.h)
    times = sampled_time_grid(cfg.t_start, cfg.times, cfg.grid.tau)
    co = _coefficients(cfg, n, cfg.seed)
    F = solve(co, f, boundary, grid, times, scheme=cfg.params.get("scheme", "cn"))
    F.metadata["config_hash"] = cfg.config_hash
    rows = [{"t": float(t), "max_abs": float(np.max(np.abs(F.slice_values(t))))} for t in cfg.times]
    files = []
    if snapshot:
        files.extend(F.save(snapshot))
    checks = [Check("residual", F.metadata["max_residual"], 1e-9, F.metadata["max_residual"] <= 1e-9)]
    res = _finish(cfg, rows, checks, t_start, files)
    res.metadata["field"] = F
    return res


# ---------------------------------------------------------------------------
# tangent-map stability
# ---------------------------------------------------------------------------

def tangent_stability(field_, points, t0: float, scales=(0.01, 0.02), d: int = 1, delta: float = 0.05):
    """Fits at two scales on a detected order-``d`` plateau and their distance.

    Returns dicts with ``distance``, ``errors`` and ``passed`` (distance at
    most twice the larger single-scale fit error).
    """
    out = []
    lo, hi = min(scales), max(scales)
    for x in np.atleast_2d(points):
        fits = [tangent_fit(field_, (np.asarray(x), t0), r, d, delta=delta, plateau=(lo / 2, hi))
                for r in (lo, hi)]
        dist = fit_distance(fits[0].polynomial, fits[1].polynomial)
        errs = [f.sup_error for f in fits]
        out.append({"x": tuple(float(v) for v in x), "distance": dist, "errors": errs,
                    "plateau": fits[0].plateau[2], "passed": dist <= 2 * max(errs)})
    return out


RUNNERS = {
    "example1": run_example1,
    "example2": run_example2,
    "angenent1d": run_angenent,
    "monotonicity_audit": run_monotonicity_audit,
    "stratification": run_stratification,
    "dimension": run_dimension_monotonicity,
    "custom": run_custom,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.scenario](cfg)


def _run_detached(cfg: ExperimentConfig) -> dict:
    res = run_experiment(cfg)
    res.metadata.pop("field", None)
    return res.to_dict()


def run_jobs(configs, workers: int = 1) -> list:
    """Run independent experiments, at most ``workers`` at a time.

    Results are returned as dictionaries in input order.
    """
    configs = list(configs)
    if workers <= 1 or len(configs) <= 1:
        return [_run_detached(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_detached, configs))

