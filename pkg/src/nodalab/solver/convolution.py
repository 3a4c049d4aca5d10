"""Exact heat-flow of radial initial data ``f(|y|^2)`` on ``R^n`` (n <= 3).

Radial symmetry reduces the convolution with the Gaussian to a one-dimensional
integral in ``rho = |y|``:

* ``n = 1``: ``K = G1(R - rho) + G1(R + rho)``
* ``n = 2``: ``K = rho/(2t) exp(-(R - rho)^2/(4t)) i0e(R rho/(2t))``
* ``n = 3``: ``K = (rho/R) G1(R - rho) (1 - exp(-R rho/t))``

with ``G1(z) = (4 pi t)^(-1/2) exp(-z^2/(4t))`` and ``i0e`` the exponentially
scaled Bessel function.  A constant tail value ``c`` beyond the last break
is handled by integrating ``f - c`` over the bounded support and adding
``c``.  The primary route is composite Gauss-Legendre restricted to the
window where the kernel is not negligible; ``method="quad"`` integrates each
point with adaptive ``scipy.integrate.quad`` as an independent check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize, special

from ..errors import DomainError
from ..quadrature import ball_rule
from .fields import SpaceTimeField

__all__ = [
    "RadialProfile",
    "example1_profile",
    "example2_profile",
    "heat_convolve",
    "heat_convolve_gradient",
    "heat_convolve_dt",
    "ConvolutionField",
    "radial_root",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise polynomial ``f(s)``, ``s = |y|^2``.

    ``pieces[k]`` applies on ``[breaks[k], breaks[k+1]]``; beyond the last
    break ``f`` equals ``tail`` (``None`` means undefined there).
    """

    breaks: tuple
    pieces: tuple
    tail: float | None = None

    def __post_init__(self):
        if len(self.breaks) != len(self.pieces) + 1:
            raise DomainError("need one more break than pieces")
        if self.breaks[0] != 0 or np.any(np.diff(self.breaks) <= 0):
            raise DomainError("breaks must start at 0 and increase")

    @property
    def support(self) -> float:
        return float(self.breaks[-1])

    def _piece_index(self, s):
        return np.clip(np.searchsorted(self.breaks, s, side="right") - 1, 0, len(self.pieces) - 1)

    def _apply(self, s, deriv: int):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape)
        idx = self._piece_index(s)
        for k, p in enumerate(self.pieces):
            q = p.deriv(deriv) if deriv else p
            sel = idx == k
            out[sel] = q(s[sel])
        beyond = s > self.support
        if np.any(beyond):
            if self.tail is None:
                raise DomainError(f"profile undefined beyond s = {self.support}")
            out[beyond] = self.tail if deriv == 0 else 0.0
        return out

    def __call__(self, s):
        return self._apply(s, 0)

    def derivative(self, s):
        return self._apply(s, 1)

    def second_derivative(self, s):
        return self._apply(s, 2)

    def of_x(self, x):
        """``f(|x|^2)`` for points ``(..., n)``."""
        x = np.asarray(x, dtype=float)
        return self(np.sum(x * x, axis=-1))

    def jumps(self):
        """Jumps of ``f`` and ``f'`` at interior breaks (and at the tail join)."""
        out = []
        ends = list(self.breaks[1:-1])
        for k, s0 in enumerate(ends):
            a, b = self.pieces[k], self.pieces[k + 1]
            out.append((s0, float(b(s0) - a(s0)), float(b.deriv()(s0) - a.deriv()(s0))))
        if self.tail is not None:
            s0 = self.support
            p = self.pieces[-1]
            out.append((s0, float(self.tail - p(s0)), float(-p.deriv()(s0))))
        return out

    def is_c1(self, tol: float = 1e-12) -> bool:
        return all(abs(j0) <= tol and abs(j1) <= tol for _, j0, j1 in self.jumps())

    def laplacian_profile(self, n: int) -> "RadialProfile":
        """Profile of ``Delta f(|x|^2) = 4 s f'' + 2 n f'``; requires ``f`` in C^1."""
        if not self.is_c1(1e-10):
            raise DomainError("Laplacian profile needs a C^1 profile (no surface terms)")
        s = Polynomial([0.0, 1.0])
        pieces = tuple(4 * s * p.deriv(2) + 2 * n * p.deriv(1) for p in self.pieces)
        return RadialProfile(self.breaks, pieces, None if self.tail is None else 0.0)

    def smoothed(self, at, delta: float = 0.05) -> "RadialProfile":
        """Replace ``f`` on ``[s0 - delta, s0 + delta]`` for each ``s0`` in ``at``
        by the cubic Hermite interpolant of the adjacent values and slopes,
        giving a C^1 profile."""
        breaks = list(self.breaks)
        pieces = list(self.pieces)
        tail_join = self.tail is not None
        for s0 in sorted(at):
            a, b = s0 - delta, s0 + delta
            if a <= 0:
                raise DomainError("smoothing window leaves the domain")
            fa, da = float(self(a)), float(self.derivative(a))
            if b > self.support:
                if not tail_join:
                    raise DomainError("smoothing window leaves the domain")
                fb, db = float(self.tail), 0.0
            else:
                fb, db = float(self(b)), float(self.derivative(b))
            cubic = _hermite_cubic(a, b, fa, da, fb, db)
            starts, new_pieces = [], []
            for k, p in enumerate(pieces):
                lo, hi = breaks[k], breaks[k + 1]
                if lo < a:
                    starts.append(lo)
                    new_pieces.append(p)
            starts.append(a)
            new_pieces.append(cubic)
            for k, p in enumerate(pieces):
                lo, hi = breaks[k], breaks[k + 1]
                if hi > b:
                    starts.append(max(lo, b))
                    new_pieces.append(p)
            breaks = starts + [max(b, breaks[-1])]
            pieces = new_pieces
        return RadialProfile(tuple(float(v) for v in breaks), tuple(pieces), self.tail)


def _hermite_cubic(a, b, fa, da, fb, db) -> Polynomial:
    h = b - a
    u = Polynomial([-a / h, 1.0 / h])
    h00 = 2 * u ** 3 - 3 * u ** 2 + 1
    h10 = u ** 3 - 2 * u ** 2 + u
    h01 = -2 * u ** 3 + 3 * u ** 2
    h11 = u ** 3 - u ** 2
    return fa * h00 + h * da * h10 + fb * h01 + h * db * h11


def example1_profile() -> RadialProfile:
    """``f(s) = 3/2 s - 1/2 s^2 - 1`` on ``[0, 3/2]`` and ``1/8`` beyond."""
    return RadialProfile((0.0, 1.5), (Polynomial([-1.0, 1.5, -0.5]),), 0.125)


def example2_profile(smooth: bool = True, delta: float = 0.05) -> RadialProfile:
    """Dirichlet example on ``|x|^2 <= 3``: the example-1 profile on
    ``[0, 3/2]``, ``1/8`` on ``[3/2, 2]`` and ``(s^2 - 8 s + 15)/24`` on ``[2, 3]``,
    optionally C^1-smoothed by cubic blends at ``s = 3/2`` and ``s = 2``."""
    raw = RadialProfile(
        (0.0, 1.5, 2.0, 3.0),
        (Polynomial([-1.0, 1.5, -0.5]), Polynomial([0.125]), Polynomial([15 / 24, -8 / 24, 1 / 24])),
        None,
    )
    return raw.smoothed([1.5, 2.0], delta) if smooth else raw


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def _g1(z, t):
    return np.exp(-z * z / (4 * t)) / math.sqrt(4 * math.pi * t)


def _kernel(n, R, rho, t):
    if n == 1:
        return _g1(R - rho, t) + _g1(R + rho, t)
    if n == 2:
        return rho / (2 * t) * np.exp(-(R - rho) ** 2 / (4 * t)) * special.i0e(R * rho / (2 * t))
    if n == 3:
        small = R < 1e-12
        Rs = np.where(small, 1.0, R)
        regular = rho / Rs * _g1(R - rho, t) * (-np.expm1(-R * rho / t))
        return np.where(small, rho * rho / t * _g1(rho, t), regular)
    raise DomainError(f"radial convolution implemented for n <= 3, got {n}")


def _kernel_dR(n, R, rho, t):
    if n == 1:
        return -(R - rho) / (2 * t) * _g1(R - rho, t) - (R + rho) / (2 * t) * _g1(R + rho, t)
    if n == 2:
        z = R * rho / (2 * t)
        return (rho / (2 * t) * np.exp(-(R - rho) ** 2 / (4 * t))
                * (-R / (2 * t) * special.i0e(z) + rho / (2 * t) * special.i1e(z)))
    if n == 3:
        small = R < 1e-8
        Rs = np.where(small, 1.0, R)
        K = rho / Rs * _g1(R - rho, t) * (-np.expm1(-R * rho / t))
        d = (-K / Rs + rho / Rs * (-(R - rho) / (2 * t) * _g1(R - rho, t)
                                    + (R + rho) / (2 * t) * _g1(R + rho, t)))
        return np.where(small, 0.0, d)
    raise DomainError(f"radial convolution implemented for n <= 3, got {n}")


def _rho_breaks(profile: RadialProfile):
    return np.sqrt(np.asarray(profile.breaks, dtype=float))


def _integrate(profile: RadialProfile, R: np.ndarray, t: float, n: int, kernel, panels: int,
               width: float):
    """Composite GL of ``(f(rho^2) - tail) kernel(R, rho)`` over each piece,
    restricted to ``|rho - R| <= width sqrt(t)``."""
    if profile.tail is None:
        raise DomainError("convolution on R^n needs a profile with a constant tail")
    rb = _rho_breaks(profile)
    R = np.asarray(R, dtype=float).ravel()
    half = width * math.sqrt(t)
    total = np.zeros(R.shape)
    for k in range(len(rb) - 1):
        lo = np.clip(R - half, rb[k], rb[k + 1])
        hi = np.clip(R + half, rb[k], rb[k + 1])
        if n == 1 or n == 3:
            # the reflected term peaks at rho = -R; it is negligible unless R is small
            lo = np.where(R < half, rb[k], lo)
        length = hi - lo
        live = length > 0
        if not np.any(live):
            continue
        Rl, lo_l, len_l = R[live], lo[live], length[live]
        edges = np.arange(panels + 1) / panels
        a = lo_l[:, None] + len_l[:, None] * edges[None, :-1]
        hp = np.broadcast_to(0.5 * len_l[:, None] / panels, a.shape)
        nodes = (a + hp)[:, :, None] + hp[:, :, None] * _GL_NODES[None, None, :]
        wts = hp[:, :, None] * _GL_WEIGHTS[None, None, :]
        rho = nodes.reshape(len(Rl), -1)
        w = wts.reshape(len(Rl), -1)
        fvals = profile.pieces[k](rho * rho) - profile.tail
        total[live] += np.sum(w * fvals * kernel(n, Rl[:, None], rho, t), axis=1)
    return total


def _quad_route(profile: RadialProfile, R: np.ndarray, t: float, n: int, kernel):
    rb = _rho_breaks(profile)
    out = np.zeros(R.shape)
    for i, Ri in enumerate(R.ravel()):
        acc = 0.0
        for k in range(len(rb) - 1):
            p = profile.pieces[k]
            val, _ = integrate.quad(lambda r: (p(r * r) - profile.tail) * float(kernel(n, Ri, r, t)),
                                    rb[k], rb[k + 1], epsabs=1e-13, epsrel=1e-12, limit=400,
                                    points=[Ri] if rb[k] < Ri < rb[k + 1] else None)
            acc += val
        out.flat[i] = acc
    return out


def _radii(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    return np.sqrt(np.sum(x * x, axis=-1)), x.shape[-1], x


def heat_convolve(profile: RadialProfile, t: float, x, method: str = "gl", panels: int = 40,
                  width: float = 40.0):
    """``u(x, t) = int f(|y|^2) G(x - y, t) dy`` for points ``x`` of shape ``(..., n)``.

    For ``t <= 0`` the initial data ``f(|x|^2)`` are returned.
    ``method`` is ``"gl"`` (vectorized composite Gauss-Legendre), ``"quad"``
    (adaptive, pointwise) or ``"tensor"`` (``n = 2`` polar product rule over
    the support, an independent two-dimensional route).
    """
    R, n, x = _radii(x)
    if t <= 0:
        return profile.of_x(x)
    if profile.tail is None:
        raise DomainError("divergent or undefined profile: a constant tail is required on R^n")
    if method == "gl":
        vals = _integrate(profile, R, t, n, _kernel, panels, width)
    elif method == "quad":
        vals = _quad_route(profile, R, t, n, _kernel)
    elif method == "tensor":
        if n != 2:
            raise DomainError("tensor route implemented for n = 2")
        rad = math.sqrt(profile.support)
        y, w = ball_rule(2, rad, scale=min(rad, math.sqrt(t)), order=12, angular=256)
        fy = profile.of_x(y) - profile.tail
        pts = x.reshape(-1, 2)
        d2 = np.sum((pts[:, None, :] - y[None, :, :]) ** 2, axis=-1)
        vals = (np.exp(-d2 / (4 * t)) / (4 * math.pi * t)) @ (w * fy)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (vals + profile.tail).reshape(R.shape)


def heat_convolve_gradient(profile: RadialProfile, t: float, x, panels: int = 40, width: float = 40.0):
    """Spatial gradient of :func:`heat_convolve`, shape ``(..., n)``."""
    R, n, x = _radii(x)
    if t <= 0:
        return 2 * x * profile.derivative(R * R)[..., None]
    dR = _integrate(profile, R, t, n, _kernel_dR, panels, width).reshape(R.shape)
    Rs = np.where(R > 0, R, 1.0)
    return np.where(R[..., None] > 0, dR[..., None] * x / Rs[..., None], 0.0)


def heat_convolve_dt(profile: RadialProfile, t: float, x, **kw):
    """``u_t = (Delta f)`` convolved; at ``t <= 0`` the pointwise ``Delta f(|x|^2)``."""
    R, n, x = _radii(x)
    return heat_convolve(profile.laplacian_profile(n), t, x, **kw)


class ConvolutionField(SpaceTimeField):
    """Exact caloric field generated by radial initial data on ``R^n``."""

    provenance = "convolution"

    def __init__(self, profile: RadialProfile, n: int = 2, time_range=(0.0, np.inf)):
        super().__init__()
        self.profile = profile
        self.n = n
        self.time_range = tuple(time_range)
        self.bbox = None

    def _eval(self, p, t):
        return heat_convolve(self.profile, t, p)

    def _grad(self, p, t):
        return heat_convolve_gradient(self.profile, t, p)


def radial_root(profile: RadialProfile, t: float, bracket=(0.5, 1.2), n: int = 2,
                xtol: float = 1e-13) -> float:
    """Radius ``r`` with ``u(r e_1, t) = 0`` inside ``bracket`` (Brent's method)."""
    def g(r):
        x = np.zeros(n)
        x[0] = r
        return float(heat_convolve(profile, t, x))

    a, b = bracket
    ga, gb = g(a), g(b)
    if ga * gb > 0:
        grid = np.linspace(a, b, 9)
        dump = [(float(r), g(r)) for r in grid]
        raise DomainError(f"no sign change of u(., {t}) on {bracket}; profile samples {dump}")
    return float(optimize.brentq(g, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))
