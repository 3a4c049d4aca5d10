"""Least-squares fit of homogeneous caloric polynomials to rescaled windows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..caloric import CaloricPolynomial, cylinder_mean_square, homogeneous_caloric_basis
from ..errors import DegenerateWindowError, InapplicableError
from ..quadrature import cylinder_rule
from .core import _center, slice_integrals
from .window import RescaledWindow

__all__ = ["TangentFit", "tangent_fit", "fit_distance", "q1_samples"]


@dataclass(frozen=True)
class TangentFit:
    polynomial: CaloricPolynomial  # normalized: fint_{Q_1} P^2 = 1
    sup_error: float  # sup_{Q_1} |v - P|
    sup_error_slice: float  # sup_{B_1} |v(., 0) - P(., 0)|
    order: int
    scale: float
    plateau: tuple  # (r_lo, r_hi, max |N - d| on sampled radii)
    condition: float


def q1_samples(n: int, m: int = 9):
    """Dense sample of ``Q_1``: a ball grid (with its rim) at ``m`` times in ``[-1, 0]``."""
    axis = np.linspace(-1, 1, 2 * m + 1)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    pts = pts[np.sum(pts * pts, axis=1) <= 1 + 1e-12]
    if n == 2:
        th = np.linspace(0, 2 * np.pi, 8 * m, endpoint=False)
        pts = np.concatenate([pts, np.stack([np.cos(th), np.sin(th)], axis=1)])
    elif n == 1:
        pts = np.unique(np.concatenate([pts, [[-1.0], [1.0]]]), axis=0)
    times = np.linspace(-1.0, 0.0, m)
    return pts, times


def tangent_fit(field, center, r: float, d: int, delta: float = 0.05, plateau=None,
                check_plateau: bool = True, time_nodes: int = 8) -> TangentFit:
    """Fit a homogeneous caloric polynomial of order ``d`` to the window at scale ``r``.

    The fit is the ``L^2(Q_1)`` projection of the normalized window onto the
    order-``d`` caloric basis (caloric extensions of the degree-``d``
    monomials), rescaled to ``fint_{Q_1} P^2 = 1``.  ``plateau = (r_lo, r_hi)``
    (default ``(r/2, r)``) must satisfy ``|N - d| <= delta`` on sampled radii.
    """
    x0, t0 = _center(center, field.n)
    lo, hi = plateau if plateau is not None else (0.5 * r, r)
    worst = float("nan")
    if check_plateau:
        rs = np.geomspace(lo, hi, 5)
        Ns = np.array([slice_integrals(field, (x0, t0), rr).N for rr in rs])
        worst = float(np.max(np.abs(Ns - d)))
        if worst > delta:
            raise InapplicableError(f"no order-{d} plateau on [{lo:.4g}, {hi:.4g}]: max |N - d| = {worst:.4g}")
    window = RescaledWindow(field, (x0, t0), r, time_nodes=time_nodes)
    basis = homogeneous_caloric_basis(field.n, d)
    pts, times, w = cylinder_rule(field.n, 1.0, time_nodes)
    nx = len(pts) // time_nodes
    vals = np.empty(len(pts))
    for k in range(time_nodes):
        sl = slice(k * nx, (k + 1) * nx)
        vals[sl] = window.evaluate(pts[sl], times[sl][0])
    design = np.stack([np.asarray(b(pts, times), dtype=float) for b in basis], axis=1)
    sw = np.sqrt(w)
    Aw = design * sw[:, None]
    sv = np.linalg.svd(Aw, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if sv[-1] <= 1e-12 * sv[0]:
        raise DegenerateWindowError(f"normal equations are rank deficient (condition {cond:.3e})")
    coef, *_ = np.linalg.lstsq(Aw, vals * sw, rcond=None)
    P = CaloricPolynomial(field.n)
    for c, b in zip(coef, basis):
        P = P + b.to_float() * float(c)
    ms = float(cylinder_mean_square(P, 1))
    if not ms > 0:
        raise DegenerateWindowError("fitted polynomial vanishes")
    P = P * (1.0 / math.sqrt(ms))
    sp, st = q1_samples(field.n)
    err = 0.0
    err0 = 0.0
    for s in st:
        e = float(np.max(np.abs(window.evaluate(sp, s) - P(sp, s))))
        err = max(err, e)
        if s == 0.0:
            err0 = e
    return TangentFit(P, err, err0, d, float(r), (float(lo), float(hi), worst), cond)


def fit_distance(P: CaloricPolynomial, Q: CaloricPolynomial) -> float:
    """``sup_{Q_1} |P - Q|`` on the dense sample."""
    sp, st = q1_samples(P.n)
    return max(float(np.max(np.abs(P(sp, s) - Q(sp, s)))) for s in st)
