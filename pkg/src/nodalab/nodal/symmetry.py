"""Quantitative symmetry of time slices, stratification and cone splitting.

For a slice ``u`` the normalized rescaling at ``(x, r)`` is

    u_{x,r}(y) = u(x + r y) / (fint_{B_1} u(x + r y)^2 dy)^(1/2).

``u`` is ``(k, eta, r, x)``-symmetric when some homogeneous polynomial ``P``
that is invariant under translations along a ``k``-plane ``V`` and has
``fint_{B_1} P^2 = 1`` satisfies ``sup_{B_1} |u_{x,r} - P| <= eta``.  Such a
``P`` is a homogeneous polynomial in the coordinates of ``V^perp``; for
``k = n`` it is the constant ``+-1``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ..caloric import SpaceTimePolynomial
from ..errors import DegenerateWindowError, DomainError
from ..quadrature import ball_rule

__all__ = [
    "FieldSlice",
    "as_slice",
    "SymmetricPolynomial",
    "SymmetryReport",
    "symmetry_test",
    "best_deviation",
    "Stratification",
    "stratify",
    "dyadic_scales",
    "ConeSplittingReport",
    "cone_splitting_check",
    "sphere_directions",
]

DEFAULT_MAX_DEGREE = 4
DEFAULT_DIRECTIONS = 500


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------

class FieldSlice:
    """A spatial function ``x -> u(x, t)`` with an optional domain test."""

    def __init__(self, n: int, func, contains=None, label: str = ""):
        self.n = int(n)
        self._func = func
        self._contains = contains
        self.label = label

    @classmethod
    def of_field(cls, field_, t: float) -> "FieldSlice":
        return cls(field_.n, lambda p: field_.evaluate(p, t),
                   field_.contains if field_.bbox is not None else None,
                   label=f"{type(field_).__name__}@t={t}")

    @classmethod
    def from_grid(cls, values, axes, label: str = "grid") -> "FieldSlice":
        """Cubic-spline interpolant of gridded slice values (uniform axes)."""
        from scipy import ndimage

        axes = [np.asarray(a, dtype=float) for a in axes]
        coef = ndimage.spline_filter(np.asarray(values, dtype=float), order=3, mode="nearest")
        lo = np.array([a[0] for a in axes])
        hi = np.array([a[-1] for a in axes])
        step = np.array([a[1] - a[0] for a in axes])

        def func(p):
            idx = ((p - lo) / step).reshape(-1, len(axes)).T
            out = ndimage.map_coordinates(coef, idx, order=3, mode="nearest", prefilter=False)
            return out.reshape(p.shape[:-1])

        def contains(p):
            return np.all((p >= lo - 1e-12) & (p <= hi + 1e-12), axis=-1)

        return cls(len(axes), func, contains, label)

    def __call__(self, points) -> np.ndarray:
        return np.asarray(self._func(np.asarray(points, dtype=float)), dtype=float)

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        if self._contains is None:
            return np.ones(p.shape[:-1], dtype=bool)
        return np.asarray(self._contains(p), dtype=bool)


def as_slice(obj, t: float | None = None, n: int | None = None) -> FieldSlice:
    """Accept a :class:`FieldSlice`, a space-time field plus ``t``, a spatial
    polynomial, or a plain callable together with ``n``."""
    if isinstance(obj, FieldSlice):
        return obj
    if isinstance(obj, SpaceTimePolynomial):
        return FieldSlice(obj.n, lambda p: obj(p, 0.0 if t is None else t), label="polynomial")
    if hasattr(obj, "evaluate") and hasattr(obj, "time_range"):
        return FieldSlice.of_field(obj, 0.0 if t is None else t)
    if callable(obj):
        if n is None:
            raise DomainError("the dimension n is required for a plain callable")
        return FieldSlice(n, obj)
    raise DomainError(f"cannot interpret {type(obj).__name__} as a slice")


# ---------------------------------------------------------------------------
# sampling of B_1 and direction grids
# ---------------------------------------------------------------------------

_SAMPLE_CACHE: dict = {}


def _unit_ball_sample(n: int):
    """Quadrature nodes/weights on ``B_1`` (weights sum to one) and the sup
    sample (quadrature nodes, the origin and the rim)."""
    if n in _SAMPLE_CACHE:
        return _SAMPLE_CACHE[n]
    opts = {1: dict(order=16), 2: dict(order=8, angular=40), 3: dict(order=6, angular=16)}[n]
    y, w = ball_rule(n, 1.0, **opts)
    w = w / w.sum()
    rim = sphere_directions(n, {1: 2, 2: 120, 3: 400}[n], hemisphere=False)
    sup = np.concatenate([y, np.zeros((1, n)), rim])
    out = (np.array(y), np.array(w), sup)
    _SAMPLE_CACHE[n] = out
    return out


def sphere_directions(n: int, count: int = DEFAULT_DIRECTIONS, hemisphere: bool = True) -> np.ndarray:
    """Near-uniform unit vectors; ``hemisphere`` keeps one of each pair ``+-v``."""
    if n == 1:
        return np.array([[1.0]]) if hemisphere else np.array([[1.0], [-1.0]])
    if n == 2:
        span = np.pi if hemisphere else 2 * np.pi
        th = span * np.arange(count) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        total = 2 * count if hemisphere else count
        i = np.arange(total) + 0.5
        z = 1 - 2 * i / total
        phi = np.pi * (1 + 5 ** 0.5) * i
        s = np.sqrt(1 - z * z)
        v = np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)
        return v[v[:, 2] > 0] if hemisphere else v
    raise DomainError(f"n must be 1, 2 or 3, got {n}")


def _complete_basis(v: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``R^n`` whose first row is ``v / |v|``."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    q, _ = np.linalg.qr(np.column_stack([v, np.eye(len(v))]))
    basis = q.T[: len(v)].copy()
    basis[0] = v
    return basis


def _plane_from_direction(v, n: int, k: int):
    """``(V basis, V^perp basis)`` for the plane family searched by direction.

    When ``n - k == 1`` the direction is the normal of ``V``; otherwise
    (``n = 3``, ``k = 1``) it spans ``V``.
    """
    basis = _complete_basis(v)
    if n - k == 1:
        return basis[1:], basis[:1]
    return basis[:1], basis[1:]


def _direction_to_angles(v):
    v = np.asarray(v, dtype=float)
    if len(v) == 2:
        return np.array([math.atan2(v[1], v[0])])
    return np.array([math.acos(np.clip(v[2], -1, 1)), math.atan2(v[1], v[0])])


def _angles_to_direction(a, n):
    if n == 2:
        return np.array([math.cos(a[0]), math.sin(a[0])])
    return np.array([math.sin(a[0]) * math.cos(a[1]), math.sin(a[0]) * math.sin(a[1]), math.cos(a[0])])


def _exponents(m: int, d: int):
    return [e for e in itertools.product(range(d + 1), repeat=m) if sum(e) == d]


# ---------------------------------------------------------------------------
# polynomials invariant along a plane
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetricPolynomial:
    """``P(y) = sum_e c_e prod_j (b_j . y)^{e_j}`` with ``b_j`` the rows of
    ``perp`` (an orthonormal basis of ``V^perp``)."""

    n: int
    degree: int
    plane: np.ndarray  # (k, n) orthonormal rows spanning V
    perp: np.ndarray  # (n - k, n)
    exponents: tuple
    coefficients: np.ndarray

    @property
    def k(self) -> int:
        return int(self.plane.shape[0])

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        z = y @ self.perp.T
        out = np.zeros(y.shape[:-1])
        for e, c in zip(self.exponents, self.coefficients):
            term = np.full(y.shape[:-1], float(c))
            for j, p in enumerate(e):
                if p:
                    term = term * z[..., j] ** p
            out = out + term
        return out

    def to_polynomial(self) -> SpaceTimePolynomial:
        """The same polynomial in monomial form (float coefficients)."""
        coords = [SpaceTimePolynomial.coordinate(self.n, i) for i in range(self.n)]
        lin = []
        for b in self.perp:
            s = SpaceTimePolynomial(self.n)
            for i in range(self.n):
                if b[i] != 0:
                    s = s + coords[i] * float(b[i])
            lin.append(s)
        P = SpaceTimePolynomial(self.n)
        for e, c in zip(self.exponents, self.coefficients):
            term = SpaceTimePolynomial.constant(self.n, float(c))
            for j, p in enumerate(e):
                for _ in range(p):
                    term = term * lin[j]
            P = P + term
        return P

    def shift_defect(self, samples: int = 64, seed: int = 0) -> float:
        """``max |P(y + v) - P(y)|`` over random ``y`` in ``B_1`` and unit ``v`` in ``V``."""
        if self.k == 0:
            return 0.0
        rng = np.random.default_rng(seed)
        y = rng.uniform(-1, 1, (samples, self.n)) / math.sqrt(self.n)
        c = rng.normal(size=(samples, self.k))
        v = (c / np.linalg.norm(c, axis=1, keepdims=True)) @ self.plane
        return float(np.max(np.abs(self(y + v) - self(y))))

    def is_homogeneous(self, tol: float = 1e-10) -> bool:
        y, _, _ = _unit_ball_sample(self.n)
        lam = 0.7
        return bool(np.max(np.abs(self(lam * y) - lam ** self.degree * self(y))) <= tol * max(1.0, np.max(np.abs(self(y)))))


def _fit_family(f, w, Z, exps):
    """Normalized ``L^2(B_1)`` projections for a batch of planes.

    ``Z`` has shape ``(dirs, points, m)``.  Returns ``(coefficients, sup deviations)``.
    """
    D = Z.shape[0]
    Phi = np.ones((D, Z.shape[1], len(exps)))
    for a, e in enumerate(exps):
        for j, p in enumerate(e):
            if p:
                Phi[:, :, a] *= Z[:, :, j] ** p
    G = np.einsum("dpa,p,dpb->dab", Phi, w, Phi)
    rhs = np.einsum("dpa,p,p->da", Phi, w, f)
    G = G + 1e-14 * np.trace(G, axis1=1, axis2=2)[:, None, None] * np.eye(len(exps))[None]
    coef = np.linalg.solve(G, rhs[..., None])[..., 0]
    P = np.einsum("dpa,da->dp", Phi, coef)
    norm = np.sqrt(np.einsum("dp,p->d", P * P, w))
    ok = norm > 1e-14
    coef = np.where(ok[:, None], coef / np.where(ok, norm, 1)[:, None], 0.0)
    return coef, ok


def _sup_deviation(g, Zs, exps, coef):
    Phi = np.ones((Zs.shape[0], Zs.shape[1], len(exps)))
    for a, e in enumerate(exps):
        for j, p in enumerate(e):
            if p:
                Phi[:, :, a] *= Zs[:, :, j] ** p
    P = np.einsum("dpa,da->dp", Phi, coef)
    return np.max(np.abs(g[None, :] - P), axis=1)


@dataclass
class SymmetryReport:
    """Outcome of one ``(k, eta, r, x)`` symmetry test."""

    center: tuple
    r: float
    k: int
    eta: float
    polynomial: SymmetricPolynomial | None
    deviation: float
    normalizer: float
    candidates: int = 0
    metadata: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return bool(self.deviation <= self.eta)

    @property
    def plane(self):
        return None if self.polynomial is None else self.polynomial.plane


class _Window:
    """Samples of ``u_{x,r}`` on the quadrature and sup sets of ``B_1``."""

    def __init__(self, u: FieldSlice, x, r):
        n = u.n
        y, w, sup = _unit_ball_sample(n)
        if not np.all(u.contains(x + r * sup)):
            raise DomainError(f"B_{r:g}({tuple(np.round(x, 6))}) is not inside the slice domain")
        fq = u(x + r * y)
        ms = float(np.sum(w * fq * fq))
        if not (ms > 1e-300) or not np.isfinite(ms):
            raise DegenerateWindowError(f"vanishing normalizer on B_{r:g}({tuple(np.round(x, 6))})")
        c = math.sqrt(ms)
        self.n, self.y, self.w, self.sup = n, y, w, sup
        self.f = fq / c
        self.g = u(x + r * sup) / c
        self.normalizer = c

    def fit(self, perp_batch, degrees):
        """Best (coefficient, degree, index, deviation) over a batch of ``V^perp`` bases."""
        best = (math.inf, None, None, None)
        m = perp_batch.shape[1]
        Z = np.einsum("pn,dmn->dpm", self.y, perp_batch)
        Zs = np.einsum("pn,dmn->dpm", self.sup, perp_batch)
        for d in degrees:
            exps = _exponents(m, d) if m > 0 else [()]
            coef, ok = _fit_family(self.f, self.w, Z, exps)
            dev = _sup_deviation(self.g, Zs, exps, coef)
            dev = np.where(ok, dev, np.inf)
            i = int(np.argmin(dev))
            if dev[i] < best[0]:
                best = (float(dev[i]), d, i, coef[i])
        return best


def _constant_fit(win: _Window, x, r, k_report, eta):
    mean = float(np.sum(win.w * win.f))
    sign = 1.0 if mean >= 0 else -1.0
    dev = float(np.max(np.abs(win.g - sign)))
    P = SymmetricPolynomial(win.n, 0, np.eye(win.n), np.zeros((0, win.n)), ((),), np.array([sign]))
    return SymmetryReport(tuple(np.asarray(x, dtype=float)), float(r), k_report, float(eta), P, dev,
                          win.normalizer, 1)


def symmetry_test(slice_, x, r: float, k: int, eta: float, d_max: int = DEFAULT_MAX_DEGREE,
                  directions: int = DEFAULT_DIRECTIONS, plane=None, refine: bool = True,
                  t: float | None = None) -> SymmetryReport:
    """Test whether ``u`` is ``(k, eta, r, x)``-symmetric.

    Homogeneity orders ``0..d_max`` are tried.  Planes are searched on a grid
    of about ``directions`` orientations and the best one is refined with a
    Nelder-Mead search on the sup deviation.  ``plane`` (rows spanning ``V``)
    fixes the plane instead.  The polynomial for each plane and order is the
    normalized ``L^2(B_1)`` projection of ``u_{x,r}``.
    """
    u = as_slice(slice_, t)
    n = u.n
    if not (0 <= k <= n):
        raise DomainError(f"k must lie in [0, {n}], got {k}")
    if not (r > 0) or not (eta >= 0):
        raise DomainError("scale must be positive and tolerance non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    win = _Window(u, x, r)
    if k == n:
        return _constant_fit(win, x, r, k, eta)
    degrees = range(0, d_max + 1)
    if plane is not None:
        V = np.atleast_2d(np.asarray(plane, dtype=float))
        q, _ = np.linalg.qr(V.T)
        V = q.T[: V.shape[0]]
        if V.shape[0] != k:
            raise DomainError(f"plane has dimension {V.shape[0]}, expected {k}")
        evals, evecs = np.linalg.eigh(np.eye(n) - V.T @ V)
        perp = evecs[:, evals > 0.5].T
        dev, d, _, coef = win.fit(perp[None], degrees)
        return _report(win, x, r, k, eta, V, perp, d, coef, dev, 1)
    if k == 0:
        perp = np.eye(n)
        dev, d, _, coef = win.fit(perp[None], degrees)
        return _report(win, x, r, k, eta, np.zeros((0, n)), perp, d, coef, dev, 1)
    dirs = sphere_directions(n, directions)
    pairs = [_plane_from_direction(v, n, k) for v in dirs]
    perps = np.stack([p for _, p in pairs])
    dev, d, i, coef = win.fit(perps, degrees)
    count = len(dirs) * len(degrees)
    v_best = dirs[i]
    if refine and d is not None and d > 0:
        def objective(a):
            _, p = _plane_from_direction(_angles_to_direction(a, n), n, k)
            return win.fit(p[None], [d])[0]

        res = optimize.minimize(objective, _direction_to_angles(v_best), method="Nelder-Mead",
                                options={"xatol": 1e-7, "fatol": 1e-12, "maxiter": 400})
        count += int(res.nfev)
        if res.fun < dev:
            v_best = _angles_to_direction(res.x, n)
            dev, d, _, coef = win.fit(_plane_from_direction(v_best, n, k)[1][None], [d])
    V, perp = _plane_from_direction(v_best, n, k)
    return _report(win, x, r, k, eta, V, perp, d, coef, dev, count)


def _report(win, x, r, k, eta, V, perp, d, coef, dev, count):
    if d is None:  # every projection vanishes: no symmetric polynomial approximates u
        return SymmetryReport(tuple(x), float(r), int(k), float(eta), None, math.inf, win.normalizer, count)
    exps = tuple(_exponents(perp.shape[0], d)) if perp.shape[0] else ((),)
    P = SymmetricPolynomial(win.n, d, V, perp, exps, np.asarray(coef, dtype=float))
    return SymmetryReport(tuple(x), float(r), int(k), float(eta), P, float(dev), win.normalizer, count)


def best_deviation(slice_, x, r: float, k: int, **kw) -> float:
    """``min_{k' >= k}`` of the best deviation: a ``k'``-symmetric polynomial is
    also ``k``-symmetric, so this is the deviation achievable at level ``k``."""
    u = as_slice(slice_)
    return min(symmetry_test(u, x, r, kk, 0.0, **kw).deviation for kk in range(k, u.n + 1))


# ---------------------------------------------------------------------------
# stratification
# ---------------------------------------------------------------------------

def dyadic_scales(h: float, radius: float) -> np.ndarray:
    """Dyadic scales ``radius 2^-j`` down to ``2h``."""
    if not (0 < 2 * h <= radius):
        raise DomainError("need 0 < 2h <= radius")
    j = int(math.floor(math.log2(radius / (2 * h))))
    return radius * 2.0 ** -np.arange(j + 1)


@dataclass
class Stratification:
    """Per-point membership in ``S^k_eta`` on the supplied scales."""

    k: int
    eta: float
    points: np.ndarray
    scales: np.ndarray
    deviations: np.ndarray  # (points, scales): best deviation at level k + 1
    skipped: np.ndarray  # (points, scales): scale not usable (domain or degenerate)

    @property
    def in_stratum(self) -> np.ndarray:
        ok = ~self.skipped
        sym = (self.deviations <= self.eta) & ok
        return ~np.any(sym, axis=1)

    @property
    def count(self) -> int:
        return int(np.sum(self.in_stratum))

    def with_eta(self, eta: float) -> "Stratification":
        return Stratification(self.k, eta, self.points, self.scales, self.deviations, self.skipped)


def stratify(slice_, k: int, eta: float, scales, points, t: float | None = None,
             d_max: int = DEFAULT_MAX_DEGREE, directions: int = 120) -> Stratification:
    """Classify ``points`` into ``S^k_eta``: not ``(k+1, eta, s, x)``-symmetric for
    any listed scale ``s``.

    Deviations at level ``k + 1`` are minimized over all ``k' >= k + 1``
    (a ``k'``-symmetric polynomial is ``(k+1)``-symmetric).  Scales whose ball
    leaves the domain or whose normalizer vanishes are skipped.
    """
    u = as_slice(slice_, t)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    scales = np.asarray(scales, dtype=float)
    if k + 1 > u.n:
        raise DomainError(f"k must be at most {u.n - 1}")
    dev = np.full((len(pts), len(scales)), np.inf)
    skip = np.zeros((len(pts), len(scales)), dtype=bool)
    for i, x in enumerate(pts):
        for j, s in enumerate(scales):
            best = math.inf
            try:
                for kk in range(u.n, k, -1):
                    rep = symmetry_test(u, x, s, kk, eta, d_max=d_max, directions=directions)
                    best = min(best, rep.deviation)
                    if best <= eta:
                        break
            except (DomainError, DegenerateWindowError):
                skip[i, j] = True
            dev[i, j] = best
    return Stratification(k, float(eta), pts, scales, dev, skip)


# ---------------------------------------------------------------------------
# cone splitting
# ---------------------------------------------------------------------------

@dataclass
class ConeSplittingReport:
    applicable: bool
    reason: str
    k: int
    x: tuple
    y: tuple
    plane: np.ndarray  # V
    split_plane: np.ndarray | None  # span(V, y - x)
    scales: np.ndarray
    eps: float
    eta: float
    deviations_x: np.ndarray  # k-symmetry along V at x
    deviation_y: float  # best 0-symmetry deviation at y
    scale_y: float
    deviations_split: np.ndarray  # (k+1)-symmetry at x
    conclusion: bool

    @property
    def verdict(self) -> bool:
        """The implication ``hypotheses => conclusion`` (vacuously true when
        the hypotheses cannot be verified)."""
        return (not self.applicable) or self.conclusion


def cone_splitting_check(slice_, x, V, r_range, y, eps: float = 0.05, eta: float = 0.1,
                         tau: float = 0.25, c: float = 1.0, count: int = 4, t: float | None = None,
                         d_max: int = DEFAULT_MAX_DEGREE) -> ConeSplittingReport:
    """Check the upgrade from ``k``- to ``(k+1)``-symmetry.

    Hypotheses: ``u`` is ``(k, eps, s, x)``-symmetric along ``V`` for ``count``
    scales ``s`` in ``r_range = (r2, r1)``, and ``u`` is ``(0, eps, s, y)``-
    symmetric at some such ``s`` with ``tau s <= dist(y - x, V)`` and
    ``|y - x| <= c s``.  Conclusion: ``(k+1, eta, s, x)``-symmetry at every
    scale, tested both along ``span(V, y - x)`` and with a free plane search.
    """
    u = as_slice(slice_, t)
    n = u.n
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    Vb = np.zeros((0, n)) if V is None or np.size(V) == 0 else np.atleast_2d(np.asarray(V, dtype=float))
    if Vb.shape[0]:
        q, _ = np.linalg.qr(Vb.T)
        Vb = q.T[: Vb.shape[0]]
    k = Vb.shape[0]
    r2, r1 = sorted(float(s) for s in r_range)
    scales = np.geomspace(r1, r2, count) if r1 > r2 else np.array([r1])
    off = (y - x) - Vb.T @ (Vb @ (y - x)) if k else (y - x)
    dist = float(np.linalg.norm(off))
    empty = np.zeros(0)

    def report(applicable, reason, dx=empty, dy=math.inf, sy=math.nan, split=None, ds=empty, concl=False):
        return ConeSplittingReport(applicable, reason, k, tuple(x), tuple(y), Vb, split, scales, eps, eta,
                                   np.asarray(dx), float(dy), float(sy), np.asarray(ds), bool(concl))

    if k >= n:
        return report(False, f"V already has dimension {n}")
    if dist <= 1e-12:
        return report(False, "y - x lies in V: no new direction to split along")
    dx = np.array([symmetry_test(u, x, s, k, eps, d_max=d_max, plane=Vb if k else None).deviation
                   for s in scales])
    if np.any(dx > eps):
        return report(False, f"k-symmetry along V fails at x (max deviation {dx.max():.3g} > eps)", dx)
    dy, sy = math.inf, math.nan
    for s in scales:
        if not (tau * s <= dist and np.linalg.norm(y - x) <= c * s):
            continue
        try:
            dev = symmetry_test(u, y, s, 0, eps, d_max=d_max).deviation
        except (DomainError, DegenerateWindowError):
            continue
        if dev < dy:
            dy, sy = dev, s
    if not dy <= eps:
        return report(False, "no admissible scale with (0, eps)-symmetry at y", dx, dy, sy)
    split = np.vstack([Vb, off / dist])
    ds = []
    for s in scales:
        along = symmetry_test(u, x, s, k + 1, eta, d_max=d_max, plane=split).deviation
        ds.append(min(along, best_deviation(u, x, s, k + 1, d_max=d_max)))
    ds = np.array(ds)
    return report(True, "hypotheses verified", dx, dy, sy, split, ds, bool(np.all(ds <= eta)))
