"""Gaussian-weighted slice integrals, frequency and doubling profiles.

For a centre ``(x0, t0)`` and radius ``r`` the slice is ``t = t0 - r^2``.  With
``A = sqrt(a(x0, t0))`` (the identity for the heat operator) the integrals are
taken in the coordinates ``z = x0 + A y``:

    H(r) = int_{|y| < R0} u(z, t)^2 G(y, -r^2) dy
    E(r) = 2 r^2 int_{|y| < R0} grad u^T a(x0, t0) grad u G(y, -r^2) dy

and ``N = E / H``, ``D(r) = log_4 H(2r) / H(r)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DomainError, UndefinedFrequencyError
from ..quadrature import ball_rule, hermite_rule
from ..solver.coefficients import matrix_sqrt

__all__ = [
    "SliceIntegrals",
    "slice_integrals",
    "FrequencyProfile",
    "frequency_profile",
    "h_derivative_residuals",
    "metric_at",
    "TRUNCATION",
]

TRUNCATION = 12.0  # default truncation radius in units of sqrt(t0 - t)
_UNDERFLOW = 1e-290


def _center(center, n):
    if isinstance(center, tuple) and len(center) == 2 and np.ndim(center[1]) == 0 and np.ndim(center[0]) >= 1:
        x0, t0 = center
    else:
        x0, t0 = center, 0.0
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (n,):
        raise DomainError(f"centre must have {n} coordinates, got {x0.shape}")
    return x0, float(t0)


def metric_at(field, x0, t0, coefficients="auto"):
    """``(a, sqrt(a))`` at the centre; identity when the field carries no coefficients."""
    coeffs = field.coefficients if coefficients == "auto" else coefficients
    if coeffs is None or getattr(coeffs, "is_heat", False):
        eye = np.eye(field.n)
        return eye, eye
    a = np.asarray(coeffs.a_at(x0, t0), dtype=float)
    return a, matrix_sqrt(a)


@dataclass(frozen=True)
class SliceIntegrals:
    r: float
    H: float
    E: float
    rule: str
    npoints: int

    @property
    def N(self) -> float:
        if self.H <= _UNDERFLOW:
            raise UndefinedFrequencyError(f"H({self.r}) = {self.H:.3e} is below underflow")
        return self.E / self.H


def _hermite_nodes(field) -> int:
    """Gauss-Hermite nodes per axis: ``m`` nodes integrate degree ``2m - 1``
    exactly, so a polynomial of degree ``p`` needs ``p + 1`` (one spare is kept)."""
    P = getattr(field, "polynomial", None)
    if P is None:
        return 24
    return int(min(24, max(4, P.degree + 2)))


def _slice_rule(n, r, R0, bounded, nodes=24):
    cut = min(R0, TRUNCATION * r) if bounded else R0
    if cut >= TRUNCATION * r:
        y, w = hermite_rule(n, r, nodes)
        if np.isfinite(cut):
            keep = np.sum(y * y, axis=1) < cut * cut
            y, w = y[keep], w[keep]
        return y, w, "gauss-hermite"
    y, w = ball_rule(n, cut, scale=r)
    g = (4 * math.pi * r * r) ** (-n / 2) * np.exp(-np.sum(y * y, axis=1) / (4 * r * r))
    return y, w * g, "ball"


def slice_integrals(field, center, r: float, R0: float = math.inf, coefficients="auto") -> SliceIntegrals:
    """``(H, E)`` on the slice ``t0 - r^2`` for the centre ``(x0, t0)``.

    ``center`` is ``(x0, t0)`` or just ``x0`` (then ``t0 = 0``).  ``R0`` is the
    localization radius; for gridded fields and ``R0 = inf`` the integrals are
    truncated at ``12 r`` where the Gaussian weight is below ``e^-36``.
    """
    if not (r > 0):
        raise DomainError(f"radius must be positive, got {r}")
    x0, t0 = _center(center, field.n)
    t = t0 - r * r
    lo, hi = field.time_range
    if not (lo - 1e-14 <= t <= hi + 1e-14):
        raise DomainError(f"slice t = {t:.6g} outside the field's time range [{lo}, {hi}]")
    a, A = metric_at(field, x0, t0, coefficients)
    y, w, rule = _slice_rule(field.n, r, R0, field.bbox is not None, _hermite_nodes(field))
    z = x0 + y @ A.T
    if field.bbox is not None and not np.all(field.contains(z)):
        raise DomainError(f"ball of the slice at r={r} around {tuple(x0)} leaves the spatial domain")
    u = field.evaluate(z, t)
    g = field.gradient(z, t)
    H = float(np.sum(w * u * u))
    E = float(2 * r * r * np.sum(w * np.einsum("...i,ij,...j->...", g, a, g)))
    if not (H > _UNDERFLOW):
        raise UndefinedFrequencyError(f"H({r}) = {H:.3e} is below underflow at {tuple(x0)}")
    return SliceIntegrals(float(r), H, E, rule, len(w))


@dataclass
class FrequencyProfile:
    """Per-radius ``(r, H, E, N, D)`` with the global doubling residual."""

    center: tuple
    t0: float
    R0: float
    r: np.ndarray
    H: np.ndarray
    E: np.ndarray
    N: np.ndarray
    D: np.ndarray  # NaN where the slice t0 - 4 r^2 is unavailable
    N_double: np.ndarray  # N(2r), NaN where unavailable
    global_doubling_residual: np.ndarray
    metadata: dict = field(default_factory=dict)

    def sandwich_violations(self, tol: float = 1e-6) -> list:
        """Radii where ``N(r) <= D(r) <= N(2r)`` fails by more than ``tol``."""
        bad = []
        for k in range(len(self.r)):
            if np.isnan(self.D[k]):
                continue
            if self.N[k] > self.D[k] + tol or self.D[k] > self.N_double[k] + tol:
                bad.append((float(self.r[k]), float(self.N[k]), float(self.D[k]), float(self.N_double[k])))
        return bad

    def monotonicity_violations(self, tol: float = 1e-6) -> list:
        """Pairs ``r1 < r2`` with ``N(r1) > N(r2) + tol``."""
        out = []
        for i in range(len(self.r)):
            for j in range(i + 1, len(self.r)):
                if self.N[i] > self.N[j] + tol:
                    out.append((float(self.r[i]), float(self.r[j]), float(self.N[i]), float(self.N[j])))
        return out

    def rows(self):
        for k in range(len(self.r)):
            yield {
                "r": float(self.r[k]),
                "H": float(self.H[k]),
                "E": float(self.E[k]),
                "N": float(self.N[k]),
                "D": float(self.D[k]),
                "global_doubling_residual": float(self.global_doubling_residual[k]),
            }

    def to_csv(self, path, extra: dict | None = None) -> Path:
        """Write columns ``r, H, E, N, D, global_doubling_residual`` (+ ``extra``)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        cols = ["r", "H", "E", "N", "D", "global_doubling_residual"] + list(extra or {})
        with path.open("w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols)
            wr.writeheader()
            for row in self.rows():
                row.update(extra or {})
                wr.writerow(row)
        return path


def _cumulative_trapezoid_log(N, r):
    """``2 int_{r_0}^{r_k} N(s)/s ds`` by the trapezoid rule in ``log s``."""
    lr = np.log(r)
    inc = 0.5 * (N[1:] + N[:-1]) * np.diff(lr)
    return 2 * np.concatenate([[0.0], np.cumsum(inc)])


def frequency_profile(field, center, radii, R0: float = math.inf, coefficients="auto",
                      doubling: bool = True) -> FrequencyProfile:
    """Sample ``H, E, N, D`` on ``radii`` and the global doubling residual
    ``log(H(r_k)/H(r_0)) - 2 int_{r_0}^{r_k} N(s)/s ds``."""
    radii = np.sort(np.asarray(radii, dtype=float))
    if len(radii) < 2:
        raise DomainError("a profile needs at least two radii")
    x0, t0 = _center(center, field.n)
    H, E = [], []
    for r in radii:
        s = slice_integrals(field, (x0, t0), r, R0, coefficients)
        H.append(s.H)
        E.append(s.E)
    H, E = np.array(H), np.array(E)
    N = E / H
    D = np.full(len(radii), np.nan)
    N2 = np.full(len(radii), np.nan)
    if doubling:
        for k, r in enumerate(radii):
            try:
                s2 = slice_integrals(field, (x0, t0), 2 * r, R0, coefficients)
            except DomainError:
                continue
            D[k] = math.log(s2.H / H[k], 4)
            N2[k] = s2.N
    resid = np.log(H / H[0]) - _cumulative_trapezoid_log(N, radii)
    return FrequencyProfile(tuple(x0), t0, R0, radii, H, E, N, D, N2, resid)


def h_derivative_residuals(field, center, radii, R0: float = math.inf, rel_step: float = 1e-3,
                           coefficients="auto") -> np.ndarray:
    """Relative mismatch ``|H'(r) - 2E(r)/r| / (2E(r)/r)`` with ``H'`` from central differences."""
    out = []
    x0, t0 = _center(center, field.n)
    for r in np.asarray(radii, dtype=float):
        dr = rel_step * r
        hp = slice_integrals(field, (x0, t0), r + dr, R0, coefficients).H
        hm = slice_integrals(field, (x0, t0), r - dr, R0, coefficients).H
        s = slice_integrals(field, (x0, t0), r, R0, coefficients)
        target = 2 * s.E / r
        scale = max(abs(target), 1e-300)
        out.append(abs((hp - hm) / (2 * dr) - target) / scale if target != 0 else abs((hp - hm) / (2 * dr)))
    return np.array(out)
