"""Rescaled, normalized windows ``u_{x,t;l}`` and statements checked on them."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DegenerateWindowError, DomainError
from ..quadrature import ball_rule, cylinder_rule
from ..solver.fields import SpaceTimeField
from .core import TRUNCATION, metric_at, slice_integrals

__all__ = [
    "RescaledWindow",
    "normalization_ratio",
    "h_almost_monotone",
    "tail_fraction",
]


class RescaledWindow(SpaceTimeField):
    """``v(y, s) = u(x + l A y, t + l^2 s) / c`` with ``A = sqrt(a(x, t))`` and
    ``c = (fint_{Q_1} u(x + l A y, t + l^2 s)^2)^(1/2)``, so ``fint_{Q_1} v^2 = 1``.

    The rescaled coefficients (``A^-1 a A^-1``, ``l A^-1 b``, ``l^2 c``) are
    available as :attr:`coefficients` when the base field carries them.
    """

    provenance = "rescaled"

    def __init__(self, base: SpaceTimeField, center, ell: float, normalize: bool = True,
                 time_nodes: int = 8):
        super().__init__()
        if not (ell > 0):
            raise DomainError("scale must be positive")
        x, t = (center if (isinstance(center, tuple) and len(center) == 2 and np.ndim(center[0]) >= 1)
                else (center, 0.0))
        self.base = base
        self.n = base.n
        self.x = np.atleast_1d(np.asarray(x, dtype=float))
        self.t = float(t)
        self.ell = float(ell)
        self.a_center, self.A = metric_at(base, self.x, self.t)
        lo, hi = base.time_range
        self.time_range = ((lo - self.t) / ell ** 2, (hi - self.t) / ell ** 2)
        self.bbox = None
        base_coeffs = base.coefficients
        if base_coeffs is not None and not getattr(base_coeffs, "is_heat", False):
            self.coefficients = base_coeffs.rescaled(self.x, self.t, self.ell)
        else:
            self.coefficients = None
        self.scale = 1.0
        if normalize:
            m = self._raw_mean_square(time_nodes)
            if not (m > 1e-300):
                raise DegenerateWindowError("window normalizer vanishes")
            self.scale = 1.0 / math.sqrt(m)
        self.metadata.update({"center": self.x.tolist(), "t": self.t, "ell": self.ell,
                              "normalizer": 1.0 / self.scale})

    def _to_base(self, y, s):
        return self.x + self.ell * y @ self.A.T, self.t + self.ell ** 2 * s

    def _raw_mean_square(self, time_nodes):
        pts, times, w = cylinder_rule(self.n, 1.0, time_nodes)
        nx = len(pts) // time_nodes
        total = 0.0
        for k in range(time_nodes):
            sl = slice(k * nx, (k + 1) * nx)
            z, tt = self._to_base(pts[sl], times[sl][0])
            v = self.base.evaluate(z, tt)
            total += float(np.sum(w[sl] * v * v))
        return total

    def _eval(self, p, s):
        z, tt = self._to_base(p, s)
        return self.scale * self.base.evaluate(z, tt)

    def _grad(self, p, s):
        z, tt = self._to_base(p, s)
        return self.scale * self.ell * self.base.gradient(z, tt) @ self.A

    def mean_square_q1(self, time_nodes: int = 8) -> float:
        return self.scale ** 2 * self._raw_mean_square(time_nodes)


def normalization_ratio(window: RescaledWindow) -> float:
    """``int_{t=-1, B_{1/l}} v^2 G / fint_{Q_1} v^2`` for a window ``v``."""
    R = 1.0 / window.ell
    try:
        H = slice_integrals(window, (np.zeros(window.n), 0.0), 1.0, R, coefficients=None).H
    except DomainError:
        H = slice_integrals(window, (np.zeros(window.n), 0.0), 1.0, min(R, TRUNCATION),
                            coefficients=None).H
    return H / window.mean_square_q1()


def h_almost_monotone(window: RescaledWindow, radii, eps: float) -> list:
    """Pairs ``r1 < r2 <= 1`` with ``H(r1) > H(r2) + eps`` on the window
    (localized to ``B_{1/l}``)."""
    R = 1.0 / window.ell
    radii = np.sort(np.asarray(radii, dtype=float))
    H = [slice_integrals(window, (np.zeros(window.n), 0.0), r, R, coefficients=None).H for r in radii]
    bad = []
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            if H[i] > H[j] + eps:
                bad.append((float(radii[i]), float(radii[j]), H[i], H[j]))
    return bad


def tail_fraction(field, center, r: float, eta: float, R0: float = math.inf,
                  coefficients="auto") -> float:
    """Share of ``H(r)`` carried by ``B_{R0} \\ B_{eta r}`` on the slice ``t0 - r^2``."""
    total = slice_integrals(field, center, r, R0, coefficients).H
    if eta * r >= R0:
        return 0.0
    x0, t0 = center if (isinstance(center, tuple) and len(center) == 2) else (center, 0.0)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    a, A = metric_at(field, x0, t0, coefficients)
    y, w = ball_rule(field.n, eta * r, scale=r)
    g = (4 * math.pi * r * r) ** (-field.n / 2) * np.exp(-np.sum(y * y, axis=1) / (4 * r * r))
    u = field.evaluate(x0 + y @ A.T, t0 - r * r)
    inner = float(np.sum(w * g * u * u))
    return max(total - inner, 0.0) / total
