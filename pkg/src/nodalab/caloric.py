"""Exact algebra of caloric polynomials.

Polynomials live in the variables ``(x_1, ..., x_n, t)`` and are stored as a
mapping from ``(mu, l)`` to a coefficient, where ``mu`` is the spatial
multi-index and ``l`` the power of ``t``.  Coefficients are kept as
:class:`fractions.Fraction` whenever the inputs are rational, so heat
residuals and Gaussian orthogonality can be checked without rounding.
Float coefficients are accepted and propagate as floats.

All slice integrals are against the backward heat kernel centred at the
origin,

    G(x, t) = (4 pi (-t))^(-n/2) exp(-|x|^2 / (4 (-t))),   t < 0,

on the slice ``t = -r^2``.  Each coordinate is then a centred normal variable
with variance ``2 r^2``, so monomial integrals have closed forms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import cached_property
from numbers import Number, Rational
from typing import Mapping, Sequence

import numpy as np
from scipy.integrate import trapezoid

from .quadrature import hermite_rule
from .errors import (
    DegreeMismatchError,
    DomainError,
    InconsistencyError,
    NotCaloricError,
    UndefinedFrequencyError,
)

__all__ = [
    "SpaceTimePolynomial",
    "CaloricPolynomial",
    "GaussianWeight",
    "FlatnessReport",
    "caloric_extension",
    "homogeneous_caloric_basis",
    "gaussian_integral",
    "gaussian_inner_product",
    "slice_moment",
    "homogeneous_decompose",
    "polynomial_frequency",
    "polynomial_frequency_direct",
    "small_frequency_flatness",
    "gaussian_normalized",
    "cylinder_mean_square",
    "cylinder_normalized",
    "ball_mean_square",
    "random_caloric_polynomial",
]

Key = tuple  # (mu: tuple[int, ...], l: int)


def _is_exact(c) -> bool:
    return isinstance(c, Rational)


def _double_factorial(k: int) -> int:
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


class SpaceTimePolynomial:
    """Polynomial in ``(x, t)`` with exact or float coefficients.

    Instances are treated as immutable values.
    """

    def __init__(self, n: int, terms: Mapping[Key, Number] | None = None):
        n = int(n)
        if n < 1:
            raise DomainError(f"dimension must be positive, got {n}")
        clean: dict[Key, Number] = {}
        for (mu, l), c in (terms or {}).items():
            mu = tuple(int(m) for m in mu)
            l = int(l)
            if len(mu) != n:
                raise DomainError(f"multi-index {mu} does not match dimension {n}")
            if l < 0 or any(m < 0 for m in mu):
                raise DomainError(f"negative exponent in term {(mu, l)}")
            if isinstance(c, (int, np.integer)):
                c = Fraction(int(c))
            elif isinstance(c, np.floating):
                c = float(c)
            key = (mu, l)
            clean[key] = clean[key] + c if key in clean else c
        self.n = n
        self.terms: dict[Key, Number] = {k: c for k, c in clean.items() if c != 0}

    # -- constructors ---------------------------------------------------
    @classmethod
    def monomial(cls, n: int, mu: Sequence[int], l: int = 0, coef=1):
        return cls(n, {(tuple(mu), l): coef})

    @classmethod
    def constant(cls, n: int, c=1):
        return cls(n, {((0,) * n, 0): c})

    @classmethod
    def coordinate(cls, n: int, i: int):
        mu = [0] * n
        mu[i] = 1
        return cls(n, {(tuple(mu), 0): 1})

    @classmethod
    def time(cls, n: int):
        return cls(n, {((0,) * n, 1): 1})

    def _new(self, terms, caloric=False):
        if caloric:
            return CaloricPolynomial(self.n, terms, check=False)
        return SpaceTimePolynomial(self.n, terms)

    # -- structure ------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Parabolic degree ``max(|mu| + 2 l)``; -1 for the zero polynomial."""
        return max((sum(mu) + 2 * l for mu, l in self.terms), default=-1)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def orders(self) -> list[int]:
        return sorted({sum(mu) + 2 * l for mu, l in self.terms})

    def graded(self, k: int):
        """Part of parabolic order ``k``."""
        part = {key: c for key, c in self.terms.items() if sum(key[0]) + 2 * key[1] == k}
        return self._new(part, caloric=isinstance(self, CaloricPolynomial))

    @property
    def homogeneous_order(self) -> int | None:
        orders = self.orders()
        return orders[0] if len(orders) == 1 else None

    def is_homogeneous(self, d: int | None = None) -> bool:
        orders = self.orders()
        if not orders:
            return True
        return len(orders) == 1 and (d is None or orders[0] == d)

    # -- arithmetic -----------------------------------------------------
    def _check_same(self, other):
        if other.n != self.n:
            raise DomainError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other):
        if isinstance(other, Number):
            other = CaloricPolynomial(self.n, {((0,) * self.n, 0): other}, check=False)
        if not isinstance(other, SpaceTimePolynomial):
            return NotImplemented
        self._check_same(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms[k] + c if k in terms else c
        both = isinstance(self, CaloricPolynomial) and isinstance(other, CaloricPolynomial)
        return self._new(terms, caloric=both)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.terms.items()},
                         caloric=isinstance(self, CaloricPolynomial))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            if isinstance(other, (int, np.integer)):
                other = Fraction(int(other))
            return self._new({k: c * other for k, c in self.terms.items()},
                             caloric=isinstance(self, CaloricPolynomial))
        if not isinstance(other, SpaceTimePolynomial):
            return NotImplemented
        self._check_same(other)
        terms: dict[Key, Number] = {}
        for (m1, l1), c1 in self.terms.items():
            for (m2, l2), c2 in other.terms.items():
                key = (tuple(a + b for a, b in zip(m1, m2)), l1 + l2)
                terms[key] = terms[key] + c1 * c2 if key in terms else c1 * c2
        return SpaceTimePolynomial(self.n, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Number):
            return NotImplemented
        if isinstance(other, (int, np.integer)):
            other = Fraction(int(other))
        return self * (1 / other)

    def __eq__(self, other):
        if not isinstance(other, SpaceTimePolynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, {self.pretty()})"

    def pretty(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for (mu, l), c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]) + 2 * kv[0][1], kv[0])):
            factors = [f"x{i + 1}" + (f"^{m}" if m > 1 else "") for i, m in enumerate(mu) if m]
            if l:
                factors.append("t" + (f"^{l}" if l > 1 else ""))
            parts.append("*".join([str(c)] + factors) if factors else str(c))
        return " + ".join(parts)

    def to_float(self):
        return self._new({k: float(c) for k, c in self.terms.items()},
                         caloric=isinstance(self, CaloricPolynomial))

    # -- calculus -------------------------------------------------------
    def dx(self, i: int):
        terms = {}
        for (mu, l), c in self.terms.items():
            if mu[i]:
                nmu = list(mu)
                nmu[i] -= 1
                terms[(tuple(nmu), l)] = c * mu[i]
        return self._new(terms, caloric=isinstance(self, CaloricPolynomial))

    def dt(self):
        terms = {(mu, l - 1): c * l for (mu, l), c in self.terms.items() if l}
        return self._new(terms, caloric=isinstance(self, CaloricPolynomial))

    def laplacian(self):
        out = SpaceTimePolynomial(self.n)
        for i in range(self.n):
            out = out + self.dx(i).dx(i)
        return self._new(out.terms, caloric=isinstance(self, CaloricPolynomial))

    def heat_residual(self) -> "SpaceTimePolynomial":
        """``dP/dt - Laplacian P`` as a (plain) polynomial."""
        return SpaceTimePolynomial(self.n, (self.dt() - self.laplacian()).terms)

    def is_caloric(self) -> bool:
        return self.heat_residual().is_zero

    def shift_time(self, j: int):
        """Multiply by ``t^j``."""
        return SpaceTimePolynomial(self.n, {(mu, l + j): c for (mu, l), c in self.terms.items()})

    @cached_property
    def _float_terms(self):
        keys = list(self.terms)
        mus = np.array([k[0] for k in keys], dtype=int).reshape(len(keys), self.n)
        ls = np.array([k[1] for k in keys], dtype=int)
        coefs = np.array([float(self.terms[k]) for k in keys])
        return mus, ls, coefs

    @cached_property
    def gradient(self) -> list:
        return [self.dx(i) for i in range(self.n)]

    def __call__(self, x, t=0.0):
        """Evaluate at points ``x`` of shape ``(..., n)`` and times ``t``."""
        x = np.asarray(x, dtype=float)
        if self.n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.shape[-1] != self.n:
            raise DomainError(f"points have trailing size {x.shape[-1]}, expected {self.n}")
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
        out = np.zeros(x.shape[:-1])
        if self.is_zero:
            return out
        mus, ls, coefs = self._float_terms
        pows = [x[..., i, None] ** np.arange(mus[:, i].max() + 1) for i in range(self.n)]
        tpow = t[..., None] ** np.arange(ls.max() + 1)
        for mu, l, c in zip(mus, ls, coefs):
            term = c * tpow[..., l]
            for i in range(self.n):
                if mu[i]:
                    term = term * pows[i][..., mu[i]]
            out = out + term
        return out

    def grad(self, x, t=0.0):
        """Spatial gradient at points ``x``; shape ``(..., n)``."""
        return np.stack([g(x, t) for g in self.gradient], axis=-1)

    # -- serialization --------------------------------------------------
    def to_json(self) -> dict:
        return {
            "n": self.n,
            "exact": self.is_exact,
            "terms": [
                {"mu": list(mu), "l": l, "coef": _coef_to_str(c)}
                for (mu, l), c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping):
        exact = data.get("exact", True)
        terms = {}
        for item in data["terms"]:
            terms[(tuple(item["mu"]), int(item.get("l", 0)))] = _coef_from_str(item["coef"], exact)
        poly = SpaceTimePolynomial(int(data["n"]), terms)
        if cls is CaloricPolynomial or poly.is_caloric():
            return CaloricPolynomial(poly.n, poly.terms)
        return poly


class CaloricPolynomial(SpaceTimePolynomial):
    """Polynomial whose heat residual vanishes identically.

    Construction verifies the residual symbolically; with float coefficients
    the check uses a relative tolerance of a few ulps.
    """

    def __init__(self, n, terms=None, check: bool = True):
        super().__init__(n, terms)
        if check:
            res = self.heat_residual()
            if not res.is_zero:
                if res.is_exact:
                    raise NotCaloricError(f"heat residual {res.pretty()} is not zero")
                scale = max((abs(float(c)) for c in self.terms.values()), default=1.0)
                worst = max(abs(float(c)) for c in res.terms.values())
                if worst > 64 * np.finfo(float).eps * scale * max(1, self.degree) ** 2:
                    raise NotCaloricError(f"heat residual {res.pretty()} is not zero")

    @property
    def parabolic_degree(self) -> int:
        return self.degree


def _coef_to_str(c) -> str:
    if isinstance(c, Fraction):
        if c.denominator == 1:
            return str(c.numerator)
        d = c.denominator
        for p in (2, 5):
            while d % p == 0:
                d //= p
        if d == 1:
            with localcontext() as ctx:
                ctx.prec = 200
                return format(Decimal(c.numerator) / Decimal(c.denominator), "f")
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, Rational):
        return str(c)
    return repr(float(c))


def _coef_from_str(s, exact: bool):
    s = str(s).strip()
    if "/" in s:
        return Fraction(s)
    if exact:
        try:
            return Fraction(Decimal(s))
        except (ValueError, ArithmeticError):
            return float(s)
    return float(s)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _as_spatial(p, n=None) -> SpaceTimePolynomial:
    if isinstance(p, SpaceTimePolynomial):
        if any(l for _, l in p.terms):
            raise DomainError("caloric_extension expects a purely spatial polynomial")
        return p
    items = dict(p)
    if n is None:
        n = len(next(iter(items)))
    return SpaceTimePolynomial(n, {(tuple(mu), 0): c for mu, c in items.items()})


def caloric_extension(p, degree: int | None = None, n: int | None = None) -> CaloricPolynomial:
    """Extend a homogeneous spatial polynomial ``p`` to the caloric
    polynomial ``sum_j t^j Laplacian^j p / j!``.

    ``p`` is a :class:`SpaceTimePolynomial` without ``t`` terms or a mapping
    from multi-index to coefficient.
    """
    p = _as_spatial(p, n)
    degrees = {sum(mu) for mu, _ in p.terms}
    if len(degrees) > 1 or (degree is not None and degrees and degrees != {degree}):
        raise DegreeMismatchError(degree if degree is not None else max(degrees), degrees)
    out = SpaceTimePolynomial(p.n)
    current = p
    j = 0
    while not current.is_zero:
        out = out + current.shift_time(j) / math.factorial(j)
        current = current.laplacian()
        j += 1
    return CaloricPolynomial(p.n, out.terms)


def _multi_indices(n: int, k: int):
    """All multi-indices in N^n with |mu| = k."""
    for combo in itertools.combinations_with_replacement(range(n), k):
        mu = [0] * n
        for i in combo:
            mu[i] += 1
        yield tuple(mu)


def homogeneous_caloric_basis(n: int, d: int) -> list[CaloricPolynomial]:
    """Basis of homogeneous caloric polynomials of order ``d`` in ``n`` variables,
    one per spatial monomial of degree ``d``."""
    return [caloric_extension({mu: 1}, degree=d, n=n) for mu in sorted(_multi_indices(n, d), reverse=True)]


# ---------------------------------------------------------------------------
# Gaussian slice integrals
# ---------------------------------------------------------------------------

def _square(r):
    if isinstance(r, (int, np.integer)):
        r = Fraction(int(r))
    return r * r


def slice_moment(mu: Sequence[int], l: int, r2):
    """Integral of ``x^mu t^l`` against ``G_{0,0}`` on the slice ``t = -r2``."""
    var = 2 * r2
    out = (-r2) ** l
    for m in mu:
        if m % 2:
            return 0 * out
        out = out * var ** (m // 2) * _double_factorial(m - 1)
    return out


def gaussian_integral(P: SpaceTimePolynomial, r=1):
    """Integral of ``P`` against ``G_{0,0}`` on ``t = -r^2`` (closed form)."""
    r2 = _square(r)
    total = Fraction(0) if _is_exact(r2) else 0.0
    for (mu, l), c in P.terms.items():
        total = total + c * slice_moment(mu, l, r2)
    return total


@dataclass(frozen=True)
class GaussianWeight:
    """Backward heat kernel ``G_{x0,t0}`` used as a slice weight."""

    center_x: tuple = (0.0,)
    center_t: float = 0.0

    @classmethod
    def origin(cls, n: int):
        return cls(tuple([0.0] * n), 0.0)

    @property
    def n(self) -> int:
        return len(self.center_x)

    @property
    def at_origin(self) -> bool:
        return self.center_t == 0 and all(c == 0 for c in self.center_x)

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        tau = self.center_t - np.asarray(t, dtype=float)
        if np.any(tau <= 0):
            raise DomainError("Gaussian weight is only defined for t < t0")
        d2 = np.sum((x - np.asarray(self.center_x)) ** 2, axis=-1)
        return (4 * np.pi * tau) ** (-self.n / 2) * np.exp(-d2 / (4 * tau))

    def slice_mass(self, t: float, points: int = 241) -> float:
        """Trapezoid-rule mass on the slice ``t``; equals 1 up to quadrature error."""
        tau = self.center_t - t
        half = 12 * math.sqrt(tau)
        axes = [np.linspace(c - half, c + half, points) for c in self.center_x]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        vals = self(mesh, t)
        for ax in axes:
            vals = trapezoid(vals, ax, axis=0)
        return float(vals)


def gaussian_inner_product(P: SpaceTimePolynomial, Q: SpaceTimePolynomial, r=1,
                           weight: GaussianWeight | None = None,
                           method: str = "exact", nodes: int = 32):
    """``int_{t=-r^2} P Q G_{0,0}``.

    ``method="exact"`` sums closed-form Gaussian moments of the product;
    ``method="quadrature"`` uses a tensor Gauss-Hermite rule and serves as
    an independent cross-check.
    """
    if not (r > 0):
        raise DomainError(f"radius must be positive, got {r}")
    if weight is not None and not weight.at_origin:
        raise DomainError("inner products are taken against the weight centred at the origin")
    if P.n != Q.n:
        raise DomainError("dimension mismatch")
    if method == "exact":
        return gaussian_integral(P * Q, r)
    if method == "quadrature":
        rf = float(r)
        x, wts = hermite_rule(P.n, rf, nodes)
        return float(np.sum(wts * P(x, -rf * rf) * Q(x, -rf * rf)))
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# decomposition and frequency
# ---------------------------------------------------------------------------

def homogeneous_decompose(P: SpaceTimePolynomial) -> list[tuple[int, CaloricPolynomial]]:
    """Split ``P`` into its homogeneous parts, ordered by parabolic order."""
    parts = []
    for k in P.orders():
        part = P.graded(k)
        parts.append((k, CaloricPolynomial(P.n, part.terms)))
    return parts


def polynomial_frequency(P: SpaceTimePolynomial, r=1) -> float:
    """Frequency ``N^P(r)`` from the orthogonal decomposition.

    With ``h_i = int_{t=-1} P_i^2 G`` the weight of order ``i`` at radius ``r``
    is ``h_i r^(2i)`` and ``N`` is the weighted mean order.
    """
    if not (r > 0):
        raise DomainError(f"radius must be positive, got {r}")
    if P.is_zero:
        raise UndefinedFrequencyError("frequency of the zero polynomial is undefined")
    r2 = _square(r)
    num = 0
    den = 0
    for i, Pi in homogeneous_decompose(P):
        w = gaussian_integral(Pi * Pi, 1) * r2 ** i
        num = num + i * w
        den = den + w
    return float(num / den) if _is_exact(den) else float(num) / float(den)


def polynomial_frequency_direct(P: SpaceTimePolynomial, r=1) -> float:
    """Frequency ``E/H`` computed straight from the definitions."""
    if P.is_zero:
        raise UndefinedFrequencyError("frequency of the zero polynomial is undefined")
    r2 = _square(r)
    H = gaussian_integral(P * P, r)
    grad_sq = SpaceTimePolynomial(P.n)
    for g in P.gradient:
        grad_sq = grad_sq + g * g
    E = 2 * r2 * gaussian_integral(grad_sq, r)
    return float(E) / float(H)


def gaussian_normalized(P: SpaceTimePolynomial) -> SpaceTimePolynomial:
    """``P`` scaled to unit mass ``int_{t=-1} P^2 G_{0,0} = 1``."""
    h = gaussian_integral(P * P, 1)
    if h == 0:
        raise UndefinedFrequencyError("cannot normalize the zero polynomial")
    return P * (1.0 / math.sqrt(float(h)))


def _sphere_average(mu) -> Fraction:
    if any(m % 2 for m in mu):
        return Fraction(0)
    n = len(mu)
    num = 1
    for m in mu:
        num *= _double_factorial(m - 1)
    den = 1
    for j in range(sum(mu) // 2):
        den *= n + 2 * j
    return Fraction(num, den)


def _ball_average(mu) -> Fraction:
    n = len(mu)
    return _sphere_average(mu) * Fraction(n, n + sum(mu))


def ball_mean_square(p: SpaceTimePolynomial, r=1, t=0):
    """Average of ``p(., t)^2`` over the ball ``B_r`` (closed form)."""
    total = 0
    for (mu, l), c in (p * p).terms.items():
        k = sum(mu)
        if k % 2:
            continue
        total = total + c * _ball_average(mu) * _square(r) ** (k // 2) * t ** l
    return total


def cylinder_mean_square(P: SpaceTimePolynomial, r=1):
    """Average of ``P^2`` over ``Q_r = B_r x (-r^2, 0]`` (closed form)."""
    r2 = _square(r)
    total = Fraction(0) if _is_exact(r2) else 0.0
    for (mu, l), c in (P * P).terms.items():
        if any(m % 2 for m in mu):
            continue
        avg_t = Fraction((-1) ** l, l + 1)
        total = total + c * _ball_average(mu) * avg_t * r2 ** (sum(mu) // 2 + l)
    return total


def cylinder_normalized(P: SpaceTimePolynomial) -> SpaceTimePolynomial:
    """``P`` scaled so that its mean square over ``Q_1`` is one."""
    m = cylinder_mean_square(P, 1)
    if m == 0:
        raise UndefinedFrequencyError("cannot normalize the zero polynomial")
    return P * (1.0 / math.sqrt(float(m)))


@dataclass(frozen=True)
class FlatnessReport:
    a0: float
    deviation: float
    ratio: float  # deviation / (|a0| sqrt(eps)), the empirical constant
    higher_mass: float  # sum_{i>=1} a_i^2 in the unit-normalized decomposition
    mass_bound: float  # eps / (1 - eps) * a0^2
    frequency: float


def small_frequency_flatness(P: SpaceTimePolynomial, eps: float, R: float = 1.0,
                             samples: int = 41) -> FlatnessReport:
    """Constant part and flatness of a small-frequency caloric polynomial.

    Writing ``P = sum a_i P_i`` with unit-mass homogeneous ``P_i``, the
    frequency at radius one is ``sum i a_i^2 / sum a_i^2``; a bound ``eps`` on
    it forces ``sum_{i>=1} a_i^2 <= eps/(1-eps) a_0^2``.
    """
    if not (0 < eps < 1):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    N = polynomial_frequency(P, 1)
    if N > eps * (1 + 1e-12):
        raise DomainError(f"frequency {N:.6g} exceeds eps={eps:.6g}")
    parts = dict(homogeneous_decompose(P))
    if 0 not in parts:
        raise InconsistencyError("order-zero coefficient vanishes although N(1) <= eps < 1")
    a0 = float(next(iter(parts[0].terms.values())))
    higher = sum(float(gaussian_integral(Pi * Pi, 1)) for i, Pi in parts.items() if i > 0)

    # dense sampling of Q_R
    n = P.n
    axes = [np.linspace(-R, R, samples)] * n
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    mesh = mesh[np.sum(mesh ** 2, axis=1) <= R * R]
    if n == 1:
        sphere = np.array([[-R], [R]])
    else:
        dirs = np.random.default_rng(0).normal(size=(64 * n, n))
        sphere = R * dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = np.concatenate([mesh, sphere])
    dev = 0.0
    for t in np.linspace(-R * R, 0.0, samples):
        dev = max(dev, float(np.max(np.abs(P(pts, t) - a0))))
    ratio = dev / (abs(a0) * math.sqrt(eps))
    return FlatnessReport(a0, dev, ratio, higher, eps / (1 - eps) * a0 * a0, N)


def random_caloric_polynomial(n: int, max_order: int, rng: np.random.Generator,
                              exact: bool = True, density: float = 0.7) -> CaloricPolynomial:
    """Random caloric polynomial with orders ``0..max_order`` and small integer
    coefficients on the spatial seeds."""
    out = CaloricPolynomial(n)
    for d in range(max_order + 1):
        for mu in _multi_indices(n, d):
            if rng.random() > density:
                continue
            c = int(rng.integers(-4, 5))
            if c == 0:
                continue
            coef = Fraction(c, int(rng.integers(1, 4))) if exact else float(c) * rng.random()
            out = out + caloric_extension({mu: coef}, degree=d, n=n)
    if out.is_zero:
        out = CaloricPolynomial.constant(n, 1)
    return out
