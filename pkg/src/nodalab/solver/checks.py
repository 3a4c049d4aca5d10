"""Diagnostics on solutions: discrete maximum principle and space-time doubling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, InapplicableError, VanishingCylinderError
from ..quadrature import cylinder_rule
from .fields import GridField, SpaceTimeField

__all__ = [
    "MaxPrincipleReport",
    "max_principle_check",
    "DoublingProfile",
    "cylinder_mean_square_field",
    "doubling_profile",
]


@dataclass(frozen=True)
class MaxPrincipleReport:
    max_later: float  # max over interior nodes of all slices after the first
    tolerance: float
    identically_zero: bool  # initial data vanish identically
    interior_zero_count: int  # later interior nodes with u >= 0 (strong-principle candidates)
    strictly_negative: bool
    scheme: str

    @property
    def passed(self) -> bool:
        return self.max_later <= self.tolerance


def _interior(field: GridField) -> np.ndarray:
    m = np.ones(field.shape, dtype=bool) if field.mask is None else field.mask.copy()
    for ax in range(field.n):
        sl = [slice(None)] * field.n
        sl[ax] = 0
        m[tuple(sl)] = False
        sl[ax] = -1
        m[tuple(sl)] = False
    return m


def max_principle_check(field: GridField, tolerance: float | None = None,
                        boundary_tol: float = 0.0) -> MaxPrincipleReport:
    """Check that non-positive data with zero Dirichlet values stay non-positive.

    The default tolerance is ``1e-12`` for backward Euler (sign preservation is
    exact there) and ``1e-8`` for Crank-Nicolson.
    """
    if not isinstance(field, GridField):
        raise InapplicableError("maximum-principle check needs a gridded solver field")
    interior = _interior(field)
    boundary_vals = field.values[:, ~interior]
    if boundary_vals.size and np.max(np.abs(boundary_vals)) > boundary_tol:
        raise InapplicableError("Dirichlet data are not identically zero")
    u0 = field.values[0][interior]
    if np.max(u0, initial=-np.inf) > 0:
        raise InapplicableError("initial slice is not non-positive")
    scheme = field.metadata.get("scheme", "unknown")
    if tolerance is None:
        tolerance = 1e-12 if scheme == "be" else 1e-8
    later = field.values[1:][:, interior]
    max_later = float(later.max()) if later.size else -np.inf
    zero0 = bool(np.all(u0 == 0))
    zeros = 0 if zero0 else int(np.count_nonzero(later >= 0))
    return MaxPrincipleReport(max_later, tolerance, zero0, zeros,
                              (not zero0) and zeros == 0, scheme)


def cylinder_mean_square_field(field: SpaceTimeField, x, r: float, t0: float,
                               time_nodes: int = 8, **ball_kw) -> float:
    """Mean of ``u^2`` over ``Q_r(x, t0) = B_r(x) x (t0 - r^2, t0]`` by product quadrature."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pts, times, w = cylinder_rule(field.n, r, time_nodes, **ball_kw)
    total = 0.0
    nx = len(pts) // time_nodes
    for k in range(time_nodes):
        sl = slice(k * nx, (k + 1) * nx)
        vals = field.evaluate(x + pts[sl], t0 + times[sl][0])
        total += float(np.sum(w[sl] * vals * vals))
    return total


@dataclass(frozen=True)
class DoublingProfile:
    center: tuple
    t0: float
    radii: np.ndarray
    mean_squares: np.ndarray  # fint_{Q_r} u^2 for each r
    indices: np.ndarray  # log_4 of fint_{Q_2r} u^2 / fint_{Q_r} u^2
    Lambda: float  # sup of the measured ratios


def doubling_profile(field: SpaceTimeField, center, radii, t0: float | None = None,
                     underflow: float = 1e-280, **quad_kw) -> DoublingProfile:
    """Space-time doubling indices ``log_4(fint_{Q_2r} u^2 / fint_{Q_r} u^2)``.

    ``t0`` defaults to the last time of the field.  The supremum of the ratios
    is stored on ``field.metadata["Lambda"]``.
    """
    x = np.atleast_1d(np.asarray(center, dtype=float))
    radii = np.asarray(radii, dtype=float)
    if t0 is None:
        t0 = field.time_range[1]
    lo_t = field.time_range[0]
    ms, idx = [], []
    for r in radii:
        if r <= 0:
            raise DomainError("radii must be positive")
        if t0 - 4 * r * r < lo_t - 1e-14:
            raise DomainError(f"Q_(2r) for r={r} starts before the field's first time")
        if field.bbox is not None:
            box = field.bbox
            if np.any(x - 2 * r < box[:, 0] - 1e-12) or np.any(x + 2 * r > box[:, 1] + 1e-12):
                raise DomainError(f"Q_(2r) for r={r} leaves the spatial domain")
        m1 = cylinder_mean_square_field(field, x, r, t0, **quad_kw)
        m2 = cylinder_mean_square_field(field, x, 2 * r, t0, **quad_kw)
        if m1 < underflow:
            raise VanishingCylinderError(f"mean square {m1:.3e} on Q_{r}({tuple(x)}) below underflow threshold")
        ms.append(m1)
        idx.append(math.log(m2 / m1, 4))
    idx = np.array(idx)
    Lam = float(np.max(4.0 ** idx)) if len(idx) else float("nan")
    field.metadata["Lambda"] = Lam
    return DoublingProfile(tuple(x), float(t0), radii, np.array(ms), idx, Lam)
