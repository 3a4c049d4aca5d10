"""Coefficient fields for ``u_t = div(a grad u) + b . grad u + c u``."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..errors import DomainError, EllipticityError

__all__ = ["CoefficientField", "PRESETS", "preset", "matrix_sqrt"]


def matrix_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric positive square root via eigendecomposition."""
    a = np.asarray(a, dtype=float)
    w, v = np.linalg.eigh(0.5 * (a + np.swapaxes(a, -1, -2)))
    if np.any(w <= 0):
        raise DomainError("matrix is not positive definite")
    return (v * np.sqrt(w)[..., None, :]) @ np.swapaxes(v, -1, -2)


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    return x


@dataclass(frozen=True)
class CoefficientField:
    """Variable coefficients of a divergence-form parabolic operator.

    ``a(x, t)`` returns ``(..., n, n)`` matrices for points of shape
    ``(..., n)``; ``b`` returns ``(..., n)`` and ``c`` returns ``(...)``.  ``b``
    and ``c`` may be ``None`` (identically zero).  ``lam`` is the declared bound
    ``(1+lam)^-1 I <= a <= (1+lam) I``, ``|b|, |c| <= lam`` and the parabolic
    modulus ``|a(p) - a(q)| <= lam d(p, q)^alpha``.
    """

    n: int
    a: Callable
    b: Callable | None = None
    c: Callable | None = None
    lam: float = 0.0
    alpha: float = 1.0
    lipschitz_in_time: bool = True
    time_independent: bool = True
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.alpha <= 1):
            raise DomainError(f"Hoelder exponent must lie in (0, 1], got {self.alpha}")
        if self.lam < 0:
            raise DomainError("lam must be non-negative")

    # -- evaluation ----------------------------------------------------------
    def a_at(self, x, t) -> np.ndarray:
        x = _as_points(x, self.n)
        out = np.asarray(self.a(x, t), dtype=float)
        return np.broadcast_to(out, x.shape[:-1] + (self.n, self.n))

    def b_at(self, x, t) -> np.ndarray:
        x = _as_points(x, self.n)
        if self.b is None:
            return np.zeros(x.shape)
        return np.broadcast_to(np.asarray(self.b(x, t), dtype=float), x.shape)

    def c_at(self, x, t) -> np.ndarray:
        x = _as_points(x, self.n)
        if self.c is None:
            return np.zeros(x.shape[:-1])
        return np.broadcast_to(np.asarray(self.c(x, t), dtype=float), x.shape[:-1])

    @property
    def is_heat(self) -> bool:
        return self.name == "heat"

    # -- validation ----------------------------------------------------------
    def check(self, points, t) -> None:
        """Verify ellipticity and the drift/potential bounds at sample nodes.

        Raises :class:`EllipticityError` naming the first offending node.
        """
        x = _as_points(points, self.n).reshape(-1, self.n)
        lo, hi = 1.0 / (1.0 + self.lam), 1.0 + self.lam
        a = self.a_at(x, t)
        if not np.allclose(a, np.swapaxes(a, -1, -2), atol=1e-12):
            bad = int(np.argmax(np.abs(a - np.swapaxes(a, -1, -2)).reshape(len(x), -1).max(axis=1)))
            raise EllipticityError(tuple(x[bad]), float("nan"), (lo, hi))
        w = np.linalg.eigvalsh(a)
        tol = 1e-12
        bad = np.nonzero((w[:, 0] < lo - tol) | (w[:, -1] > hi + tol))[0]
        if bad.size:
            i = int(bad[0])
            val = w[i, 0] if w[i, 0] < lo - tol else w[i, -1]
            raise EllipticityError(tuple(x[i]), float(val), (lo, hi))
        if self.b is not None:
            nb = np.linalg.norm(self.b_at(x, t), axis=-1)
            if np.any(nb > self.lam + tol):
                i = int(np.argmax(nb))
                raise DomainError(f"|b| = {nb[i]:.6g} exceeds lam = {self.lam} at node {tuple(x[i])}")
        if self.c is not None:
            cc = np.abs(self.c_at(x, t))
            if np.any(cc > self.lam + tol):
                i = int(np.argmax(cc))
                raise DomainError(f"|c| = {cc[i]:.6g} exceeds lam = {self.lam} at node {tuple(x[i])}")

    def modulus_ratio(self, points, times, pairs: int = 2000, seed: int = 0) -> float:
        """Largest sampled ``|a(p) - a(q)| / (lam d(p, q)^alpha)``.

        Values ``<= 1`` are consistent with the declared ``(lam, alpha)``.
        """
        rng = np.random.default_rng(seed)
        x = _as_points(points, self.n).reshape(-1, self.n)
        times = np.atleast_1d(np.asarray(times, dtype=float))
        i = rng.integers(0, len(x), pairs)
        j = rng.integers(0, len(x), pairs)
        ti = times[rng.integers(0, len(times), pairs)]
        tj = times[rng.integers(0, len(times), pairs)]
        keep = (i != j) | (ti != tj)
        i, j, ti, tj = i[keep], j[keep], ti[keep], tj[keep]
        ai = np.stack([self.a_at(x[k], s) for k, s in zip(i, ti)])
        aj = np.stack([self.a_at(x[k], s) for k, s in zip(j, tj)])
        diff = np.abs(ai - aj).reshape(len(i), -1).max(axis=1)
        dist = np.sqrt(np.sum((x[i] - x[j]) ** 2, axis=1) + np.abs(ti - tj))
        if self.lam == 0:
            return 0.0 if np.all(diff == 0) else float("inf")
        return float(np.max(diff / (self.lam * dist ** self.alpha)))

    # -- rescaling -----------------------------------------------------------
    def rescaled(self, x0, t0: float, ell: float) -> "CoefficientField":
        """Coefficients seen by ``v(y, s) = u(x0 + ell A y, t0 + ell^2 s)`` with
        ``A = sqrt(a(x0, t0))``: ``A^-1 a A^-1``, ``ell A^-1 b`` and ``ell^2 c``."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        A = matrix_sqrt(self.a_at(x0, t0))
        Ainv = np.linalg.inv(A)

        def to_x(y, s):
            y = _as_points(y, self.n)
            return x0 + ell * y @ A.T, t0 + ell * ell * np.asarray(s)

        def a(y, s):
            xx, tt = to_x(y, s)
            return Ainv @ self.a_at(xx, tt) @ Ainv

        b = c = None
        if self.b is not None:
            def b(y, s):
                xx, tt = to_x(y, s)
                return ell * self.b_at(xx, tt) @ Ainv.T
        if self.c is not None:
            def c(y, s):
                xx, tt = to_x(y, s)
                return ell * ell * self.c_at(xx, tt)
        return CoefficientField(self.n, a, b, c, self.lam, self.alpha, self.lipschitz_in_time,
                                self.time_independent, f"{self.name}@rescaled",
                                {"center": x0.tolist(), "t0": t0, "ell": ell})

    # -- constructors --------------------------------------------------------
    @classmethod
    def heat(cls, n: int) -> "CoefficientField":
        eye = np.eye(n)
        return cls(n, lambda x, t: eye, name="heat")

    @classmethod
    def tabulated(cls, axes, a_values, b_values=None, c_values=None, lam: float = 0.0,
                  alpha: float = 1.0) -> "CoefficientField":
        """Time-independent coefficients interpolated (linearly) from grid tables.

        ``a_values`` has shape ``(*grid, n, n)``; ``b_values`` ``(*grid, n)``;
        ``c_values`` ``grid``.
        """
        axes = tuple(np.asarray(ax, dtype=float) for ax in axes)
        n = len(axes)

        def interp(values):
            f = RegularGridInterpolator(axes, np.asarray(values, dtype=float), bounds_error=False,
                                        fill_value=None)
            return lambda x, t: f(_as_points(x, n))

        return cls(n, interp(a_values),
                   None if b_values is None else interp(b_values),
                   None if c_values is None else interp(c_values),
                   lam, alpha, True, True, "tabulated")


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _lipschitz_perturbation(n: int = 2, lam: float = 0.05, **_) -> CoefficientField:
    """``a = I + small smooth perturbation`` with Lipschitz constant below ``lam``.

    ``a11 = 1 + 0.3 lam sin(2x1) cos(x2)``, ``a22 = 1 - 0.3 lam cos(x1) sin(2x2)``,
    ``a12 = 0.2 lam sin(x1 + x2)``; time independent.
    """
    k = 0.3 * lam
    m = 0.2 * lam

    def a(x, t):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (n, n))
        idx = np.arange(n)
        out[..., idx, idx] = 1.0
        if n == 1:
            out[..., 0, 0] += k * np.sin(2 * x[..., 0])
            return out
        out[..., 0, 0] += k * np.sin(2 * x[..., 0]) * np.cos(x[..., 1])
        out[..., 1, 1] -= k * np.cos(x[..., 0]) * np.sin(2 * x[..., 1])
        off = m * np.sin(x[..., 0] + x[..., 1])
        out[..., 0, 1] = off
        out[..., 1, 0] = off
        return out

    return CoefficientField(n, a, lam=lam, alpha=1.0, name="lipschitz_perturbation",
                            params={"lam": lam})


def _oscillating_1d(amplitude: float = 0.1, **_) -> CoefficientField:
    """``a(x, t) = 1 + amplitude sin(x) cos(t)`` in one dimension."""

    def a(x, t):
        x = np.asarray(x, dtype=float)
        return (1 + amplitude * np.sin(x[..., 0]) * np.cos(t))[..., None, None]

    return CoefficientField(1, a, lam=max(amplitude * 1.5, 1e-12), time_independent=False,
                            name="oscillating_1d", params={"amplitude": amplitude})


def _diagonal_random(n: int = 1, lam: float = 0.2, seed: int = 0, drift: bool = True,
                     potential: bool = True, **_) -> CoefficientField:
    """Smooth random diagonal diffusion with optional drift and potential.

    Coefficients are finite trigonometric sums with random phases drawn from
    ``seed``; all bounds are enforced by construction.
    """
    rng = np.random.default_rng(seed)
    ph = rng.uniform(0, 2 * np.pi, size=(3, n))
    amp = lam / (2 * (1 + lam))

    def a(x, t):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (n, n))
        for i in range(n):
            out[..., i, i] = 1 + amp * np.sin(x[..., i] + ph[0, i]) * np.cos(x[..., (i + 1) % n] + ph[1, i])
        return out

    b = c = None
    if drift:
        def b(x, t):
            x = np.asarray(x, dtype=float)
            return 0.9 * lam * np.sin(2 * x + ph[2]) / np.sqrt(n)
    if potential:
        def c(x, t):
            x = np.asarray(x, dtype=float)
            return 0.9 * lam * np.cos(np.sum(x, axis=-1) + ph[2, 0])
    return CoefficientField(n, a, b, c, lam=lam, name="diagonal_random",
                            params={"lam": lam, "seed": seed})


PRESETS: dict[str, Callable[..., CoefficientField]] = {
    "heat": lambda n=2, **_: CoefficientField.heat(n),
    "lipschitz_perturbation": _lipschitz_perturbation,
    "oscillating_1d": _oscillating_1d,
    "diagonal_random": _diagonal_random,
}


def preset(name: str, **kw) -> CoefficientField:
    """Build a named coefficient preset."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown coefficient preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(**kw)
