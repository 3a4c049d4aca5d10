"""Heat kernel, its parabolic Taylor expansion and remainder-rate checks.

Space-time derivatives of the Gaussian are obtained from the probabilists'
Hermite polynomials: in one variable

    d^m/dx^m g(x, t) = (-1)^m (2t)^(-m/2) He_m(x / sqrt(2t)) g(x, t),

and ``d/dt = Laplacian`` on the kernel, so ``D_x^mu D_t^l G`` is a finite sum
of products of one-dimensional factors.  Each factor divided by ``g`` is a
polynomial in ``x`` and ``1/t`` with rational coefficients, which lets the
Taylor components be formed exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .caloric import CaloricPolynomial, _multi_indices
from .errors import DomainError

__all__ = [
    "heat_kernel",
    "kernel_derivative",
    "parabolic_norm",
    "parabolic_eta_norm",
    "GreenExpansion",
    "expand_kernel",
    "RateReport",
    "remainder_rate_check",
    "remainder_source_scaling",
]


def parabolic_norm(x, t):
    """``(|x|^2 + |t|)^(1/2)``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.sqrt(np.sum(x * x) + abs(t)))


def parabolic_eta_norm(x, t, eta: float = 1.0):
    """``max(|x| / eta, |t|^(1/2))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(max(np.sqrt(np.sum(x * x)) / eta, math.sqrt(abs(t))))


def heat_kernel(x, t, y, s):
    """``G(x, t; y, s)``; zero for ``s > t``.

    ``x`` may carry leading batch dimensions ``(..., n)``; ``t`` broadcasts
    against them.  At ``s == t`` the kernel is zero away from ``y`` and
    ``+inf`` at ``x == y``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if y.ndim == 0:
        y = y[None]
    n = y.shape[-1]
    tau = np.asarray(t, dtype=float) - float(s)
    d2 = np.sum((x - y) ** 2, axis=-1)
    tau, d2 = np.broadcast_arrays(tau, d2)
    out = np.zeros(d2.shape)
    pos = tau > 0
    out[pos] = (4 * np.pi * tau[pos]) ** (-n / 2) * np.exp(-d2[pos] / (4 * tau[pos]))
    out[(tau == 0) & (d2 == 0)] = np.inf
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _hermite_terms(m: int):
    """Pairs ``(x_power, inv_2t_power, coefficient)`` for ``d^m g / g``."""
    terms = []
    for j in range(m // 2 + 1):
        c = (-1) ** (m + j) * Fraction(math.factorial(m), math.factorial(j) * math.factorial(m - 2 * j) * 2 ** j)
        terms.append((m - 2 * j, m - j, c))
    return tuple(terms)


def _ratio_1d(m: int, x, t):
    """``(d/dx)^m g(x, t) / g(x, t)`` with the arithmetic of ``x`` and ``t``."""
    inv = 1 / (2 * t)
    return sum(c * x ** a * inv ** b for a, b, c in _hermite_terms(m))


def _derivative_ratio(mu, l, x, t):
    """``D_x^mu D_t^l G(x, t) / G(x, t)``."""
    n = len(mu)
    total = 0
    for beta in _multi_indices(n, l):
        mult = math.factorial(l)
        for b in beta:
            mult //= math.factorial(b)
        prod = mult
        for i in range(n):
            prod = prod * _ratio_1d(mu[i] + 2 * beta[i], x[i], t)
        total = total + prod
    return total


def kernel_derivative(mu, l, x, t) -> float:
    """``D_x^mu D_t^l G(x, t)`` for the kernel with source at the origin, ``t > 0``."""
    if t <= 0:
        raise DomainError("derivatives are taken at positive times")
    x = [float(v) for v in np.atleast_1d(x)]
    g = float(heat_kernel(np.array(x), t, np.zeros(len(x)), 0.0))
    return g * float(_derivative_ratio(tuple(mu), l, x, float(t)))


@dataclass(frozen=True)
class GreenExpansion:
    """Taylor data of ``G(., .; y, s)`` at the origin up to parabolic order ``d``.

    ``exact_components[k]`` is an exact-coefficient caloric polynomial and the
    order-``k`` Taylor component equals ``prefactor * exact_components[k]``
    with ``prefactor = G(-y, -s)``.
    """

    y: tuple
    s: float
    order: int
    prefactor: float
    exact_components: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def components(self) -> list[CaloricPolynomial]:
        return [p * self.prefactor for p in self.exact_components]

    def __call__(self, x, t=0.0):
        total = sum(p(x, t) for p in self.exact_components)
        return self.prefactor * total

    def kernel(self, x, t=0.0):
        return heat_kernel(x, t, np.asarray(self.y), self.s)

    def remainder(self, x, t=0.0):
        return self.kernel(x, t) - self(x, t)

    def remainder_gradient_y(self, x, t=0.0):
        """``grad_y`` of the remainder at a single point ``(x, t)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.asarray(self.y, dtype=float)
        out = np.zeros(self.n)
        for i in range(self.n):
            e = [0] * self.n
            e[i] = 1
            total = -kernel_derivative(e, 0, x - y, t - self.s) if t > self.s else 0.0
            for k in range(self.order + 1):
                for l in range(k // 2 + 1):
                    for mu in _multi_indices(self.n, k - 2 * l):
                        nu = tuple(m + ei for m, ei in zip(mu, e))
                        coef = kernel_derivative(nu, l, -y, -self.s)
                        denom = math.factorial(l)
                        for m in mu:
                            denom *= math.factorial(m)
                        total += coef * np.prod(x ** np.array(mu)) * t ** l / denom
            out[i] = total
        return out


def expand_kernel(y, s: float, d: int) -> GreenExpansion:
    """Expand ``G(x, t; y, s)`` at ``(x, t) = (0, 0)`` into homogeneous caloric
    components of orders ``0..d``."""
    y = tuple(float(v) for v in np.atleast_1d(y))
    s = float(s)
    if s >= 0:
        raise DomainError(f"source time must be negative, got s={s}")
    if d < 0:
        raise DomainError(f"order must be non-negative, got {d}")
    n = len(y)
    xq = [-Fraction(v) for v in y]
    tq = -Fraction(s)
    prefactor = float(heat_kernel(-np.asarray(y), -s, np.zeros(n), 0.0))
    comps = []
    for k in range(d + 1):
        terms = {}
        for l in range(k // 2 + 1):
            for mu in _multi_indices(n, k - 2 * l):
                denom = math.factorial(l)
                for m in mu:
                    denom *= math.factorial(m)
                terms[(mu, l)] = _derivative_ratio(mu, l, xq, tq) / denom
        comps.append(CaloricPolynomial(n, terms))
    return GreenExpansion(y, s, d, prefactor, tuple(comps))


@dataclass(frozen=True)
class RateReport:
    radii: np.ndarray
    sup_remainder: np.ndarray
    slope: float
    order: int

    @property
    def passed(self) -> bool:
        """Contract: the remainder decays at least like ``r^(d + 0.9)``."""
        return self.slope >= self.order + 0.9

    @property
    def in_band(self) -> bool:
        """Slope inside ``[d + 0.9, d + 1.5]`` (no unexpected cancellation)."""
        return self.order + 0.9 <= self.slope <= self.order + 1.5


def _cylinder_samples(n: int, r: float, m: int = 9):
    axis = np.linspace(-r, r, m)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    pts = pts[np.sum(pts ** 2, axis=1) <= r * r * (1 + 1e-12)]
    if n > 1:
        ang = np.linspace(0, 2 * np.pi, 4 * m, endpoint=False)
        rim = np.zeros((len(ang), n))
        rim[:, 0] = r * np.cos(ang)
        rim[:, 1] = r * np.sin(ang)
        pts = np.concatenate([pts, rim])
    times = np.linspace(-r * r, 0.0, m)
    return pts, times


def remainder_rate_check(y, s: float, d: int, radii, eta: float = 1.0,
                         samples: int = 9) -> RateReport:
    """Fit the decay rate of ``sup_{Q_r} |G - sum_k P^k|`` as ``r`` shrinks.

    Each radius must satisfy the separation ``|(y,s)|_eta >= 2 |(x,t)|_eta``
    for every ``(x, t)`` in ``Q_r``.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size < 2 or np.any(np.diff(radii) >= 0):
        raise DomainError("radii must be strictly decreasing")
    exp = expand_kernel(y, s, d)
    src = parabolic_eta_norm(exp.y, s, eta)
    for r in radii:
        if src < 2 * max(r / eta, r):
            raise DomainError(f"radius {r} violates the 2:1 separation from |(y,s)|_eta = {src:.4g}")
    sups = []
    for r in radii:
        pts, times = _cylinder_samples(exp.n, r, samples)
        sups.append(max(float(np.max(np.abs(exp.remainder(pts, t)))) for t in times))
    sups = np.array(sups)
    slope = float(np.polyfit(np.log(radii), np.log(sups), 1)[0])
    return RateReport(radii, sups, slope, d)


def remainder_source_scaling(x, t: float, y, s: float, d: int, scales, gradient: bool = False) -> float:
    """Exponent of ``|R^d_{ly, l^2 s}(x, t)|`` (or of its ``y``-gradient) in ``l``.

    Parabolic homogeneity of the kernel gives the asymptotic exponent
    ``-n - (d + 1)``, one lower for the gradient.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    scales = np.asarray(scales, dtype=float)
    vals = []
    for lam in scales:
        exp = expand_kernel(lam * y, lam * lam * s, d)
        if gradient:
            vals.append(float(np.linalg.norm(exp.remainder_gradient_y(x, t))))
        else:
            vals.append(abs(float(exp.remainder(x, t))))
    norms = np.array([parabolic_norm(lam * y, lam * lam * s) for lam in scales])
    return float(np.polyfit(np.log(norms), np.log(vals), 1)[0])
