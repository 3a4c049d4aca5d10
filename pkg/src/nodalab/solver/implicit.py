"""Implicit finite-difference solver on boxes (optionally masked) and radial grids.

The spatial operator ``L u = d_i(a^ij d_j u) + b^i d_i u + c u`` is assembled in
flux form: diagonal diffusion uses face coefficients averaged from the two
adjacent nodes, mixed terms use the standard four-corner cross stencil, and the
drift is centred unless the cell Peclet number would destroy the sign
structure, in which case that node/axis is upwinded.  Time stepping is
backward Euler (``"be"``) or Crank-Nicolson (``"cn"``) on the gauged unknown
``v = exp(-mu (t - t0)) u``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import DomainError, SolverError
from .coefficients import CoefficientField
from .fields import GridField, RadialField

__all__ = ["Grid", "time_grid", "assemble_operator", "solve", "solve_radial", "OperatorInfo"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on ``bbox`` with spacing close to ``h``.

    ``mask(points) -> bool`` selects the physical domain; nodes outside it (and
    the box faces) carry Dirichlet data.
    """

    bbox: tuple
    h: float
    mask: Callable | None = None

    @property
    def n(self) -> int:
        return len(self.bbox)

    @property
    def axes(self) -> list[np.ndarray]:
        out = []
        for lo, hi in self.bbox:
            m = int(round((hi - lo) / self.h))
            if m < 2:
                raise DomainError(f"grid spacing {self.h} too coarse for interval [{lo}, {hi}]")
            out.append(np.linspace(lo, hi, m + 1))
        return out

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)

    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def domain_mask(self) -> np.ndarray:
        pts = self.points()
        if self.mask is None:
            return np.ones(pts.shape[:-1], dtype=bool)
        return np.asarray(self.mask(pts), dtype=bool)

    def interior_mask(self) -> np.ndarray:
        """Unknown nodes: inside the domain, off the box faces, and with every
        stencil neighbour (including diagonal corners) on the grid."""
        m = self.domain_mask().copy()
        for ax in range(self.n):
            sl = [slice(None)] * self.n
            sl[ax] = 0
            m[tuple(sl)] = False
            sl[ax] = -1
            m[tuple(sl)] = False
        return m


def time_grid(*segments, t0: float) -> np.ndarray:
    """Concatenate uniform segments ``(t_end, tau)`` starting at ``t0``.

    >>> time_grid((1.0, 0.5), t0=0.0)
    array([0. , 0.5, 1. ])
    """
    times = [float(t0)]
    for t_end, tau in segments:
        start = times[-1]
        if t_end <= start:
            raise DomainError("segments must advance in time")
        m = max(1, int(round((t_end - start) / tau)))
        times.extend((start + (t_end - start) * np.arange(1, m + 1) / m).tolist())
    return np.asarray(times)


@dataclass(frozen=True)
class OperatorInfo:
    m_matrix: bool
    upwind_nodes: int
    min_offdiag: float


def assemble_operator(coeffs: CoefficientField, grid: Grid, t: float, upwind: str = "auto"):
    """Sparse ``L`` over all grid nodes; rows of Dirichlet nodes are empty.

    Returns ``(L, info)``.  ``upwind`` is ``"auto"``, ``"always"`` or ``"never"``.
    """
    n = grid.n
    if coeffs.n != n:
        raise DomainError(f"coefficient dimension {coeffs.n} differs from grid dimension {n}")
    axes = grid.axes
    shape = grid.shape
    h = np.array([a[1] - a[0] for a in axes])
    pts = grid.points()
    A = coeffs.a_at(pts, t)
    interior = grid.interior_mask()
    P = np.flatnonzero(interior)
    strides = np.array([int(np.prod(shape[i + 1:])) for i in range(n)])
    Aflat = A.reshape(-1, n, n)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    diag = np.zeros(len(P))
    face = {}
    for i in range(n):
        aii = Aflat[:, i, i]
        fp = 0.5 * (aii[P] + aii[P + strides[i]])
        fm = 0.5 * (aii[P] + aii[P - strides[i]])
        face[i] = (fp, fm)
        add(P, P + strides[i], fp / h[i] ** 2)
        add(P, P - strides[i], fm / h[i] ** 2)
        diag -= (fp + fm) / h[i] ** 2
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            aij = Aflat[:, i, j]
            cp = aij[P + strides[i]] / (4 * h[i] * h[j])
            cm = aij[P - strides[i]] / (4 * h[i] * h[j])
            if not (np.any(cp) or np.any(cm)):
                continue
            add(P, P + strides[i] + strides[j], cp)
            add(P, P + strides[i] - strides[j], -cp)
            add(P, P - strides[i] + strides[j], -cm)
            add(P, P - strides[i] - strides[j], cm)
    upwind_count = 0
    if coeffs.b is not None:
        B = coeffs.b_at(pts, t).reshape(-1, n)[P]
        for i in range(n):
            bi = B[:, i]
            fp, fm = face[i]
            if upwind == "always":
                up = np.ones(len(P), dtype=bool)
            elif upwind == "never":
                up = np.zeros(len(P), dtype=bool)
            else:
                up = np.abs(bi) * h[i] / 2 > np.minimum(fp, fm)
            upwind_count += int(up.sum())
            cen = ~up
            add(P[cen], P[cen] + strides[i], bi[cen] / (2 * h[i]))
            add(P[cen], P[cen] - strides[i], -bi[cen] / (2 * h[i]))
            pos = up & (bi > 0)
            neg = up & (bi <= 0)
            add(P[pos], P[pos] + strides[i], bi[pos] / h[i])
            diag[pos] -= bi[pos] / h[i]
            add(P[neg], P[neg] - strides[i], -bi[neg] / h[i])
            diag[neg] += bi[neg] / h[i]
    if coeffs.c is not None:
        diag += coeffs.c_at(pts, t).reshape(-1)[P]
    add(P, P, diag)
    N = int(np.prod(shape))
    L = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(N, N)).tocsr()
    L.sum_duplicates()
    off = L - sp.diags(L.diagonal())
    min_off = float(off.data.min()) if off.nnz else 0.0
    info = OperatorInfo(min_off >= -1e-14 * max(1.0, abs(L).max()), upwind_count, min_off)
    return L, info


def _as_values(data, pts, t=None):
    if data is None:
        return np.zeros(pts.shape[:-1])
    if callable(data):
        out = data(pts) if t is None else data(pts, t)
        return np.broadcast_to(np.asarray(out, dtype=float), pts.shape[:-1]).copy()
    arr = np.asarray(data, dtype=float)
    return np.broadcast_to(arr, pts.shape[:-1]).copy()


class _Stepper:
    """Shared implicit time marching on the unknown set ``I``."""

    def __init__(self, operator: Callable, time_independent: bool, I: np.ndarray, B: np.ndarray,
                 scheme: str, mu: float, t0: float, residual_tol: float):
        if scheme not in ("be", "cn"):
            raise DomainError(f"scheme must be 'be' or 'cn', got {scheme!r}")
        self.operator = operator
        self.time_independent = time_independent
        self.I, self.B = I, B
        self.scheme = scheme
        self.mu = mu
        self.t0 = t0
        self.tol = residual_tol
        self._L_cache = {}
        self._lu_cache = {}
        self.max_residual = 0.0
        self.m_matrix = True
        self.upwind_nodes = 0

    def _blocks(self, t):
        key = None if self.time_independent else t
        if key not in self._L_cache:
            if not self.time_independent and len(self._L_cache) >= 2:
                self._L_cache.pop(next(iter(self._L_cache)))
            L, info = self.operator(t)
            self.m_matrix &= info.m_matrix
            self.upwind_nodes = max(self.upwind_nodes, info.upwind_nodes)
            self._L_cache[key] = (L[self.I][:, self.I].tocsc(), L[self.I][:, self.B].tocsc())
        return self._L_cache[key]

    def _factor(self, t, tau):
        theta = 1.0 if self.scheme == "be" else 0.5
        key = (round(tau, 15), None if self.time_independent else t)
        if key not in self._lu_cache:
            if not self.time_independent or len(self._lu_cache) > 8:
                self._lu_cache.clear()
            LII, _ = self._blocks(t)
            M = sp.identity(len(self.I), format="csc") - theta * tau * (LII - self.mu * sp.identity(len(self.I), format="csc"))
            self._lu_cache[key] = (M.tocsc(), splu(M.tocsc()))
        return self._lu_cache[key]

    def step(self, u_old, t_old, t_new, gB_old, gB_new):
        tau = t_new - t_old
        go_old = np.exp(-self.mu * (t_old - self.t0))
        go_new = np.exp(-self.mu * (t_new - self.t0))
        v_old = go_old * u_old
        vB_old = go_old * gB_old
        vB_new = go_new * gB_new
        _, LIB_new = self._blocks(t_new)
        if self.scheme == "be":
            rhs = v_old + tau * (LIB_new @ vB_new)
        else:
            LII_old, LIB_old = self._blocks(t_old)
            rhs = (v_old + 0.5 * tau * (LII_old @ v_old - self.mu * v_old)
                   + 0.5 * tau * (LIB_new @ vB_new + LIB_old @ vB_old))
        M, lu = self._factor(t_new, tau)
        v_new = lu.solve(rhs)
        res = float(np.max(np.abs(M @ v_new - rhs))) / max(float(np.max(np.abs(rhs))), 1e-300)
        if not np.all(np.isfinite(v_new)) or res > self.tol:
            raise SolverError(f"linear solve failed at t={t_new:.6g}", res)
        self.max_residual = max(self.max_residual, res)
        return v_new / go_new


def solve(coeffs: CoefficientField, initial, boundary, grid: Grid, times, scheme: str = "cn",
          gauge: bool | float | None = None, upwind: str = "auto", check: bool = True,
          residual_tol: float = 1e-9) -> GridField:
    """March ``u_t = L u`` from ``times[0]`` through ``times`` with Dirichlet data.

    Parameters
    ----------
    coeffs : CoefficientField
    initial : callable ``f(points)`` or array on the grid
        Data at ``times[0]``.
    boundary : callable ``g(points, t)``, scalar or ``None`` (zero)
        Dirichlet values on the box faces and outside the mask.
    grid : Grid
    times : array
        Strictly increasing absolute times; the step may vary.
    scheme : {"cn", "be"}
    gauge : bool or float
        Gauge rate ``mu`` in ``v = exp(-mu (t - t0)) u``; ``True`` uses the
        coefficient bound ``lam``.  Defaults to ``True`` for backward Euler.

    Returns
    -------
    GridField with metadata ``scheme``, ``gauge``, ``m_matrix``,
    ``upwind_nodes`` and ``max_residual``.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
        raise DomainError("times must be a strictly increasing array with at least two entries")
    if gauge is None:
        gauge = scheme == "be"
    mu = float(coeffs.lam if gauge is True else (0.0 if gauge is False else gauge))
    pts = grid.points()
    dom = grid.domain_mask()
    if check:
        coeffs.check(pts[dom], times[0])
        if not coeffs.time_independent:
            coeffs.check(pts[dom], times[-1])
    interior = grid.interior_mask()
    I = np.flatnonzero(interior)
    Bn = np.flatnonzero(~interior)
    flat_pts = pts.reshape(-1, grid.n)

    stepper = _Stepper(lambda t: assemble_operator(coeffs, grid, t, upwind), coeffs.time_independent,
                       I, Bn, scheme, mu, times[0], residual_tol)
    u = _as_values(initial, pts).reshape(-1)
    gB = _as_values(boundary, flat_pts[Bn], times[0])
    u[Bn] = gB
    out = np.empty((len(times),) + grid.shape)
    out[0] = u.reshape(grid.shape)
    for k in range(1, len(times)):
        gB_new = _as_values(boundary, flat_pts[Bn], times[k])
        uI = stepper.step(u[I], times[k - 1], times[k], gB, gB_new)
        u = np.empty_like(u)
        u[I] = uI
        u[Bn] = gB_new
        gB = gB_new
        out[k] = u.reshape(grid.shape)
    meta = {
        "scheme": scheme,
        "gauge": mu,
        "m_matrix": bool(stepper.m_matrix),
        "upwind_nodes": int(stepper.upwind_nodes),
        "max_residual": stepper.max_residual,
        "h": float(grid.h),
        "coefficients": coeffs.name,
    }
    log.debug("solve finished: %s", meta)
    return GridField(grid.axes, times, out, mask=grid.domain_mask(), provenance="solver",
                     coefficients=coeffs, metadata=meta)


def solve_radial(initial, radius: float, h: float, times, n: int = 2, boundary=0.0,
                 scheme: str = "cn", residual_tol: float = 1e-9) -> RadialField:
    """Heat equation for radial data on the ball ``B_radius`` in ``R^n``.

    Finite volumes in ``rho`` with fluxes weighted by ``rho^(n-1)`` at cell
    faces; at the centre the Laplacian is ``2 n (u_1 - u_0) / h^2``.
    ``boundary`` is the Dirichlet value on the sphere (scalar or ``g(t)``).
    """
    times = np.asarray(times, dtype=float)
    m = int(round(radius / h))
    rho = np.linspace(0.0, radius, m + 1)
    hh = rho[1] - rho[0]
    N = m + 1
    j = np.arange(1, m)
    rp = (rho[j] + hh / 2) ** (n - 1)
    rm = (rho[j] - hh / 2) ** (n - 1)
    w = rho[j] ** (n - 1)
    rows = np.concatenate([j, j, j, [0, 0]])
    cols = np.concatenate([j + 1, j - 1, j, [1, 0]])
    vals = np.concatenate([rp / (w * hh * hh), rm / (w * hh * hh), -(rp + rm) / (w * hh * hh),
                           [2 * n / hh ** 2, -2 * n / hh ** 2]])
    L = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    info = OperatorInfo(True, 0, 0.0)
    I = np.arange(0, m)
    Bn = np.array([m])
    gfun = boundary if callable(boundary) else (lambda t: boundary)
    stepper = _Stepper(lambda t: (L, info), True, I, Bn, scheme, 0.0, times[0], residual_tol)
    u = _as_values(initial, rho[:, None]).reshape(-1)
    gB = np.array([float(gfun(times[0]))])
    u[m] = gB[0]
    out = np.empty((len(times), N))
    out[0] = u
    for k in range(1, len(times)):
        gB_new = np.array([float(gfun(times[k]))])
        uI = stepper.step(u[I], times[k - 1], times[k], gB, gB_new)
        u = np.concatenate([uI, gB_new])
        gB = gB_new
        out[k] = u
    return RadialField(n, rho, times, out, provenance="solver",
                       metadata={"scheme": scheme, "h": float(hh), "max_residual": stepper.max_residual})
