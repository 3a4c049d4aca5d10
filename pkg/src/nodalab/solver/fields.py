"""Space-time fields: closed-form, polynomial, gridded and radial.

Every field exposes ``n``, ``time_range``, ``bbox`` (``None`` when defined on
all of ``R^n``), ``evaluate(points, t)`` and ``gradient(points, t)`` where
``points`` has shape ``(..., n)``.
"""
from __future__ import annotations

import json
from collections import OrderedDict
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import ndimage

from ..errors import DomainError

__all__ = [
    "SpaceTimeField",
    "FunctionField",
    "PolynomialField",
    "GridField",
    "RadialField",
    "load_snapshot",
]


def _points(points, n):
    p = np.asarray(points, dtype=float)
    if n == 1 and (p.ndim == 0 or p.shape[-1] != 1):
        p = p[..., None]
    if p.shape[-1] != n:
        raise DomainError(f"points must have trailing dimension {n}, got shape {p.shape}")
    return p


class SpaceTimeField:
    """Common interface; subclasses implement ``_eval`` and ``_grad``."""

    n: int
    provenance: str = "closed-form"
    bbox = None
    time_range = (-np.inf, np.inf)
    coefficients = None

    def __init__(self):
        self.metadata: dict = {}

    def evaluate(self, points, t):
        p = _points(points, self.n)
        self._check_time(t)
        return self._eval(p, float(t))

    def gradient(self, points, t):
        p = _points(points, self.n)
        self._check_time(t)
        return self._grad(p, float(t))

    __call__ = evaluate

    def _check_time(self, t):
        lo, hi = self.time_range
        tol = 1e-12 * max(1.0, abs(lo) if np.isfinite(lo) else 1.0, abs(hi) if np.isfinite(hi) else 1.0)
        if not (lo - tol <= t <= hi + tol):
            raise DomainError(f"time {t} outside field range [{lo}, {hi}]")

    def contains(self, points) -> np.ndarray:
        p = _points(points, self.n)
        if self.bbox is None:
            return np.ones(p.shape[:-1], dtype=bool)
        lo = self.bbox[:, 0] - 1e-12
        hi = self.bbox[:, 1] + 1e-12
        return np.all((p >= lo) & (p <= hi), axis=-1)

    def _grad(self, p, t):
        h = 1e-5
        out = np.empty(p.shape)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = h
            out[..., i] = (self._eval(p + e, t) - self._eval(p - e, t)) / (2 * h)
        return out


class FunctionField(SpaceTimeField):
    """Closed-form field given by vectorized callables."""

    def __init__(self, n: int, func: Callable, grad: Callable | None = None, bbox=None,
                 time_range=(-np.inf, np.inf), provenance: str = "closed-form", coefficients=None):
        super().__init__()
        self.n = n
        self._f = func
        self._g = grad
        self.bbox = None if bbox is None else np.asarray(bbox, dtype=float).reshape(n, 2)
        self.time_range = tuple(time_range)
        self.provenance = provenance
        self.coefficients = coefficients

    def _eval(self, p, t):
        return np.asarray(self._f(p, t), dtype=float)

    def _grad(self, p, t):
        if self._g is None:
            return super()._grad(p, t)
        return np.asarray(self._g(p, t), dtype=float)


class PolynomialField(FunctionField):
    """A (caloric) polynomial viewed as a field on ``R^n x R``."""

    def __init__(self, P, bbox=None, time_range=(-np.inf, np.inf)):
        super().__init__(P.n, P, P.grad, bbox, time_range, "closed-form")
        self.polynomial = P


class GridField(SpaceTimeField):
    """Field sampled on a tensor grid ``axes[0] x ... x axes[n-1]`` at ``times``.

    ``values`` has shape ``(len(times), *grid)``.  Off-grid evaluation uses
    cubic spline interpolation per stored slice and linear interpolation in
    time; spatial gradients are central differences on the slice, interpolated
    the same way.  ``mask`` (optional) marks grid nodes inside the physical
    domain.
    """

    def __init__(self, axes, times, values, mask=None, provenance: str = "solver",
                 coefficients=None, metadata: dict | None = None, cache_slices: int = 64):
        super().__init__()
        self.axes = tuple(np.asarray(a, dtype=float) for a in axes)
        self.n = len(self.axes)
        self.times = np.asarray(times, dtype=float)
        self.values = np.asarray(values, dtype=float)
        expect = (len(self.times),) + tuple(len(a) for a in self.axes)
        if self.values.shape != expect:
            raise DomainError(f"values shape {self.values.shape} does not match grid {expect}")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")
        self.mask = None if mask is None else np.asarray(mask, dtype=bool)
        self.provenance = provenance
        self.coefficients = coefficients
        if metadata:
            self.metadata.update(metadata)
        self.spacing = np.array([a[1] - a[0] for a in self.axes])
        self.bbox = np.array([[a[0], a[-1]] for a in self.axes])
        self.time_range = (float(self.times[0]), float(self.times[-1]))
        self._cache: OrderedDict = OrderedDict()
        self._cache_size = cache_slices

    # -- grid helpers --------------------------------------------------------
    @property
    def shape(self):
        return self.values.shape[1:]

    def grid_points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def _time_weights(self, t):
        ts = self.times
        if len(ts) == 1:
            return 0, 0, 0.0
        k = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
        w = (t - ts[k]) / (ts[k + 1] - ts[k])
        w = float(np.clip(w, 0.0, 1.0))
        if w == 0.0:
            return k, k, 0.0
        if w == 1.0:
            return k + 1, k + 1, 0.0
        return k, k + 1, w

    def slice_values(self, t) -> np.ndarray:
        self._check_time(t)
        i, j, w = self._time_weights(float(t))
        return self.values[i] if w == 0.0 else (1 - w) * self.values[i] + w * self.values[j]

    def slice_gradient(self, t) -> np.ndarray:
        """Central-difference gradient on the stored grid, shape ``(*grid, n)``."""
        i, j, w = self._time_weights(float(t))
        gi = self._slice_data(i)[1]
        if w == 0.0:
            return gi
        return (1 - w) * gi + w * self._slice_data(j)[1]

    def _slice_data(self, k):
        if k in self._cache:
            self._cache.move_to_end(k)
            return self._cache[k]
        v = self.values[k]
        grads = np.gradient(v, *self.axes, edge_order=2)
        if self.n == 1:
            grads = [grads]
        g = np.stack(grads, axis=-1)
        coef_v = ndimage.spline_filter(v, order=3, mode="nearest")
        coef_g = [ndimage.spline_filter(gi, order=3, mode="nearest") for gi in grads]
        data = (coef_v, g, coef_g)
        self._cache[k] = data
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return data

    def _index_coords(self, p):
        if not np.all(self.contains(p)):
            raise DomainError("evaluation point outside the grid")
        coords = [(p[..., i] - self.axes[i][0]) / self.spacing[i] for i in range(self.n)]
        return np.stack([c.ravel() for c in coords])

    def _interp(self, coef, coords, shape):
        out = ndimage.map_coordinates(coef, coords, order=3, mode="nearest", prefilter=False)
        return out.reshape(shape)

    def _eval(self, p, t):
        coords = self._index_coords(p)
        i, j, w = self._time_weights(t)
        vi = self._interp(self._slice_data(i)[0], coords, p.shape[:-1])
        if w == 0.0:
            return vi
        vj = self._interp(self._slice_data(j)[0], coords, p.shape[:-1])
        return (1 - w) * vi + w * vj

    def _grad(self, p, t):
        coords = self._index_coords(p)
        i, j, w = self._time_weights(t)

        def at(k):
            cg = self._slice_data(k)[2]
            return np.stack([self._interp(c, coords, p.shape[:-1]) for c in cg], axis=-1)

        gi = at(i)
        return gi if w == 0.0 else (1 - w) * gi + w * at(j)

    # -- snapshots -----------------------------------------------------------
    def save(self, path) -> tuple[Path, Path]:
        """Write ``<path>.bin`` (little-endian float64, C order) and ``<path>.json``."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        binp = path.with_suffix(".bin")
        jsonp = path.with_suffix(".json")
        self.values.astype("<f8").tofile(binp)
        dts = np.diff(self.times)
        uniform = len(dts) > 0 and np.allclose(dts, dts[0], rtol=1e-12, atol=0)
        sp = self.spacing
        meta = {
            "shape": list(self.values.shape),
            "spacing": float(sp[0]) if np.allclose(sp, sp[0]) else sp.tolist(),
            "t0": float(self.times[0]),
            "dt": float(dts[0]) if uniform else None,
            "bbox": self.bbox.tolist(),
            "provenance": self.provenance,
        }
        if not uniform:
            meta["times"] = self.times.tolist()
        if self.mask is not None:
            meta["mask"] = np.packbits(self.mask.ravel()).tolist()
        extra = {k: v for k, v in self.metadata.items() if _jsonable(v)}
        if extra:
            meta["metadata"] = extra
        jsonp.write_text(json.dumps(meta, indent=1))
        return binp, jsonp


def _jsonable(v) -> bool:
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def load_snapshot(path) -> GridField:
    """Inverse of :meth:`GridField.save`."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    shape = tuple(meta["shape"])
    values = np.fromfile(path.with_suffix(".bin"), dtype="<f8").reshape(shape)
    bbox = np.asarray(meta["bbox"], dtype=float)
    axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(bbox, shape[1:])]
    if "times" in meta:
        times = np.asarray(meta["times"], dtype=float)
    else:
        times = meta["t0"] + (meta["dt"] or 0.0) * np.arange(shape[0])
    mask = None
    if "mask" in meta:
        bits = np.unpackbits(np.asarray(meta["mask"], dtype=np.uint8))
        mask = bits[: int(np.prod(shape[1:]))].reshape(shape[1:]).astype(bool)
    return GridField(axes, times, values, mask=mask, provenance=meta.get("provenance", "solver"),
                     metadata=meta.get("metadata"))


class RadialField(SpaceTimeField):
    """Radially symmetric field in ``R^n`` stored as ``u(rho, t)`` on a radial grid."""

    def __init__(self, n: int, rho, times, values, provenance: str = "solver", metadata=None):
        super().__init__()
        self.n = n
        self.profile = GridField([rho], times, values, provenance=provenance)
        self.rho = self.profile.axes[0]
        self.times = self.profile.times
        self.values = self.profile.values
        R = float(self.rho[-1])
        self.bbox = np.array([[-R, R]] * n)
        self.time_range = self.profile.time_range
        self.provenance = provenance
        if metadata:
            self.metadata.update(metadata)

    @property
    def radius(self) -> float:
        return float(self.rho[-1])

    def _radius_of(self, p):
        r = np.sqrt(np.sum(p * p, axis=-1))
        if np.any(r > self.radius * (1 + 1e-12)):
            raise DomainError("evaluation point outside the radial domain")
        return np.minimum(r, self.radius)

    def _eval(self, p, t):
        return self.profile._eval(self._radius_of(p)[..., None], t)

    def _grad(self, p, t):
        r = self._radius_of(p)
        ur = self.profile._grad(r[..., None], t)[..., 0]
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(r[..., None] > 0, p / np.where(r > 0, r, 1.0)[..., None], 0.0)
        return ur[..., None] * unit
