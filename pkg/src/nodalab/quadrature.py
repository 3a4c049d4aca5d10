"""Quadrature rules on slices, balls and parabolic cylinders."""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["hermite_rule", "ball_rule", "cylinder_rule", "legendre_panels"]


@lru_cache(maxsize=32)
def _hermite_tensor(n: int, nodes: int):
    z, w = np.polynomial.hermite.hermgauss(nodes)
    grids = np.meshgrid(*([z] * n), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.ones(len(pts))
    for g in np.meshgrid(*([w] * n), indexing="ij"):
        wts = wts * g.ravel()
    wts = wts / np.pi ** (n / 2)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def hermite_rule(n: int, r: float, nodes: int = 24):
    """Nodes and weights for ``int f(x) G_{0,0}(x, -r^2) dx``.

    The weights sum to one; the rule is exact for polynomials of degree
    ``2 * nodes - 1`` in each coordinate.
    """
    pts, wts = _hermite_tensor(n, nodes)
    return 2.0 * r * pts, wts


def legendre_panels(a: float, b: float, panels: int, order: int = 10):
    """Composite Gauss-Legendre nodes and weights on ``[a, b]``."""
    z, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * z[None, :]).ravel()
    wx = (half[:, None] * w[None, :]).ravel()
    return x, wx


@lru_cache(maxsize=64)
def _ball_rule_cached(n: int, radius: float, panels: int, order: int, angular: int):
    rho, wr = legendre_panels(0.0, radius, panels, order)
    if n == 1:
        pts = np.concatenate([rho, -rho])[:, None]
        wts = np.concatenate([wr, wr])
    elif n == 2:
        theta = 2 * np.pi * np.arange(angular) / angular
        wt = 2 * np.pi / angular
        pts = np.stack([
            (rho[:, None] * np.cos(theta)[None, :]).ravel(),
            (rho[:, None] * np.sin(theta)[None, :]).ravel(),
        ], axis=-1)
        wts = (wr[:, None] * rho[:, None] * wt * np.ones(angular)[None, :]).ravel()
    elif n == 3:
        c, wc = np.polynomial.legendre.leggauss(max(angular // 2, 4))
        phi = 2 * np.pi * np.arange(angular) / angular
        wphi = 2 * np.pi / angular
        s = np.sqrt(1 - c ** 2)
        dirs = np.stack([
            (s[:, None] * np.cos(phi)[None, :]).ravel(),
            (s[:, None] * np.sin(phi)[None, :]).ravel(),
            (c[:, None] * np.ones(angular)[None, :]).ravel(),
        ], axis=-1)
        wdir = (wc[:, None] * wphi * np.ones(angular)[None, :]).ravel()
        pts = (rho[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        wts = (wr[:, None] * rho[:, None] ** 2 * wdir[None, :]).ravel()
    else:
        raise ValueError(f"ball rules are implemented for n <= 3, got {n}")
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def ball_rule(n: int, radius: float, scale: float | None = None, order: int = 10,
              angular: int | None = None):
    """Nodes and volume weights for ``int_{B_radius(0)} f dx``.

    ``scale`` is the length on which the integrand varies; radial panels are
    no wider than it.
    """
    scale = radius if scale is None else scale
    panels = max(2, int(math.ceil(radius / scale)))
    if angular is None:
        angular = {1: 1, 2: 64, 3: 24}[n]
    return _ball_rule_cached(n, float(radius), panels, order, angular)


def cylinder_rule(n: int, r: float, time_nodes: int = 8, **ball_kw):
    """Nodes ``(x, s)`` and weights for the mean over ``Q_r = B_r x (-r^2, 0]``.

    Weights sum to one.
    """
    x, wx = ball_rule(n, r, **ball_kw)
    s, ws = np.polynomial.legendre.leggauss(time_nodes)
    s = -0.5 * r * r * (1 - s)
    ws = 0.5 * ws
    pts = np.repeat(x[None, :, :], len(s), axis=0).reshape(-1, n)
    times = np.repeat(s, len(x))
    wts = (ws[:, None] * wx[None, :]).ravel()
    return pts, times, wts / wts.sum()
