"""Zero-set extraction on gridded slices (n = 1, 2, 3).

Node values equal to zero are classified as positive throughout, which
gives a consistent topology.  In two dimensions the ambiguous saddle cells
are resolved by the sign of the cell-centre average.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize

from ..errors import DomainError

__all__ = ["NodalSlice", "extract_nodal", "slice_grid", "marching_squares", "singular_nodes"]


@dataclass
class NodalSlice:
    """Extracted codimension-one zero set of one time slice.

    ``cells`` holds points ``(k, 1)`` in 1D, segments ``(k, 2, 2)`` in 2D and
    triangles ``(k, 3, 3)`` in 3D.
    """

    t: float
    n: int
    cells: np.ndarray
    measure: float
    h: float
    singular_points: np.ndarray
    tolerances: dict
    vanishing: bool = False
    box_counts: tuple | None = None  # (scales, counts) once computed
    metadata: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return len(self.cells) == 0

    @property
    def count(self) -> int:
        return int(len(self.cells))

    def points(self) -> np.ndarray:
        """All element vertices, shape ``(m, n)``."""
        if self.empty:
            return np.zeros((0, self.n))
        return self.cells.reshape(-1, self.n)

    def to_csv(self, path, extra: dict | None = None) -> Path:
        """Element vertices, one element per row (``x0, [y0, [z0]], x1, ...``)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        names = "xyz"[: self.n]
        verts = 1 if self.n == 1 else self.n
        cols = ["t"] + [f"{c}{j}" for j in range(verts) for c in names] + list(extra or {})
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(cols)
            for cell in self.cells.reshape(len(self.cells), -1):
                wr.writerow([repr(float(self.t))] + [repr(float(v)) for v in cell] + list((extra or {}).values()))
        return path

    def summary(self, dimension: float | None = None) -> dict:
        return {
            "t": float(self.t),
            "measure": float(self.measure),
            "dimension": None if dimension is None else float(dimension),
            "count": self.count,
            "singular_count": int(len(self.singular_points)),
        }

    def write_summary(self, path, dimension: float | None = None, extra: dict | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.summary(dimension)
        if extra:
            data.update(extra)
        path.write_text(json.dumps(data, indent=1))
        return path


# ---------------------------------------------------------------------------
# 2D marching squares
# ---------------------------------------------------------------------------

def _edge_point(pa, pb, va, vb):
    """Linear-interpolation zero on an edge whose ends have opposite classes."""
    denom = va - vb
    s = np.where(denom != 0, va / np.where(denom != 0, denom, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    return pa + s[..., None] * (pb - pa)


def marching_squares(values: np.ndarray, x: np.ndarray, y: np.ndarray, cell_mask=None) -> np.ndarray:
    """Zero contour of bilinear data on the grid ``x`` by ``y``.

    Returns segments of shape ``(k, 2, 2)``.  ``cell_mask`` (shape
    ``(nx-1, ny-1)``) restricts the cells that are processed.
    """
    V = np.asarray(values, dtype=float)
    pos = V >= 0
    X, Y = np.meshgrid(x, y, indexing="ij")
    P = np.stack([X, Y], axis=-1)
    v00, v10, v11, v01 = V[:-1, :-1], V[1:, :-1], V[1:, 1:], V[:-1, 1:]
    s00, s10, s11, s01 = pos[:-1, :-1], pos[1:, :-1], pos[1:, 1:], pos[:-1, 1:]
    p00, p10, p11, p01 = P[:-1, :-1], P[1:, :-1], P[1:, 1:], P[:-1, 1:]
    # edges: 0 bottom (00-10), 1 right (10-11), 2 top (01-11), 3 left (00-01)
    cross = np.stack([s00 != s10, s10 != s11, s01 != s11, s00 != s01], axis=-1)
    pts = np.stack([
        _edge_point(p00, p10, v00, v10),
        _edge_point(p10, p11, v10, v11),
        _edge_point(p01, p11, v01, v11),
        _edge_point(p00, p01, v00, v01),
    ], axis=-2)  # (nx-1, ny-1, 4, 2)
    ncross = cross.sum(axis=-1)
    active = ncross > 0
    if cell_mask is not None:
        active &= np.asarray(cell_mask, dtype=bool)
    segs = []
    two = active & (ncross == 2)
    if np.any(two):
        idx = np.argwhere(two)
        c = cross[two]
        order = np.argsort(~c, axis=1, kind="stable")[:, :2]
        cp = pts[two]
        a = cp[np.arange(len(idx)), order[:, 0]]
        b = cp[np.arange(len(idx)), order[:, 1]]
        segs.append(np.stack([a, b], axis=1))
    four = active & (ncross == 4)
    if np.any(four):
        cp = pts[four]
        centre = 0.25 * (v00 + v10 + v11 + v01)[four] >= 0
        corner00 = s00[four]
        # when the centre shares the class of corner 00, corners 10 and 01 are
        # cut off separately; otherwise corners 00 and 11 are.
        join = centre == corner00
        A1 = np.where(join[:, None], cp[:, 0], cp[:, 0])
        B1 = np.where(join[:, None], cp[:, 1], cp[:, 3])
        A2 = np.where(join[:, None], cp[:, 2], cp[:, 1])
        B2 = np.where(join[:, None], cp[:, 3], cp[:, 2])
        segs.append(np.stack([A1, B1], axis=1))
        segs.append(np.stack([A2, B2], axis=1))
    if not segs:
        return np.zeros((0, 2, 2))
    out = np.concatenate(segs)
    lengths = np.linalg.norm(out[:, 1] - out[:, 0], axis=1)
    return out[lengths > 0]


# ---------------------------------------------------------------------------
# singular set
# ---------------------------------------------------------------------------

def _local_second_derivative(V, h):
    """Local C^2 estimate: largest second difference quotient over the
    3^n neighbourhood of each node."""
    from scipy import ndimage

    n = V.ndim
    D = np.zeros(V.shape)
    for i in range(n):
        if V.shape[i] < 3:
            continue
        d2 = np.abs(np.diff(V, 2, axis=i)) / (h[i] ** 2)
        pad = [(0, 0)] * n
        pad[i] = (1, 1)
        D = np.maximum(D, np.pad(d2, pad, mode="edge"))
    return ndimage.maximum_filter(D, size=3, mode="nearest")


def singular_nodes(values: np.ndarray, axes, node_mask=None):
    """Grid nodes with ``|u| <= tol_u`` and ``|grad u| <= tol_g``.

    ``tol_u = 10 h^2 C`` and ``tol_g = 10 h C`` where ``C`` is the local
    estimate of the second derivatives (largest second difference quotient
    in the node's neighbourhood).  The reported tolerances use the largest
    local estimate over the slice.
    """
    V = np.asarray(values, dtype=float)
    h = np.array([a[1] - a[0] for a in axes])
    hmax = float(h.max())
    C = _local_second_derivative(V, h)
    tol_u = 10 * hmax ** 2 * C
    tol_g = 10 * hmax * C
    grads = np.gradient(V, *axes, edge_order=2)
    if V.ndim == 1:
        grads = [grads]
    gnorm = np.sqrt(sum(g * g for g in grads))
    sel = (np.abs(V) <= tol_u) & (gnorm <= tol_g)
    if node_mask is not None:
        sel &= node_mask
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    cmax = float(C.max()) if C.size else 0.0
    return mesh[sel], {"tol_u": 10 * hmax ** 2 * cmax, "tol_g": 10 * hmax * cmax, "C2": cmax, "local": True}


# ---------------------------------------------------------------------------
# public entry
# ---------------------------------------------------------------------------

def _cell_mask(node_mask):
    """Cells all of whose corners are domain nodes."""
    m = node_mask
    n = m.ndim
    out = np.ones(tuple(s - 1 for s in m.shape), dtype=bool)
    for corner in np.ndindex(*([2] * n)):
        sl = tuple(slice(c, c + s - 1) for c, s in zip(corner, m.shape))
        out &= m[sl]
    return out


def extract_nodal(values, axes, t: float = 0.0, mask=None, func=None, compute_box_counts: bool = True):
    """Extract the zero set of a gridded slice.

    Parameters
    ----------
    values : array of shape ``tuple(len(a) for a in axes)``
    axes : sequence of uniform 1D coordinate arrays
    mask : boolean node mask of the domain; cells touching a node outside it
        are skipped (Dirichlet exterior)
    func : optional callable ``f(points)``; in 1D roots are refined by Brent
        bisection on ``f`` inside each sign-change cell.
    """
    axes = [np.asarray(a, dtype=float) for a in axes]
    V = np.asarray(values, dtype=float)
    n = len(axes)
    if V.shape != tuple(len(a) for a in axes):
        raise DomainError(f"values shape {V.shape} does not match axes")
    if n not in (1, 2, 3):
        raise DomainError(f"extraction supports n in {{1, 2, 3}}, got {n}")
    if not np.all(np.isfinite(V)):
        raise DomainError("slice values must be finite")
    h = float(max(a[1] - a[0] for a in axes))
    node_mask = np.ones(V.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    cmask = _cell_mask(node_mask)
    vanishing = bool(np.all(V[node_mask] == 0))
    if n == 1:
        x = axes[0]
        pos = V >= 0
        idx = np.flatnonzero((pos[:-1] != pos[1:]) & cmask)
        roots = []

        def f1(s):
            return float(np.asarray(func(np.array([s]))).reshape(-1)[0])

        for i in idx:
            a, b = x[i], x[i + 1]
            if func is not None:
                fa, fb = f1(a), f1(b)
                if fa == 0:
                    roots.append(a)
                    continue
                if fa * fb < 0:
                    roots.append(optimize.brentq(f1, a, b, xtol=1e-14))
                    continue
            va, vb = V[i], V[i + 1]
            roots.append(a + (va / (va - vb)) * (b - a) if va != vb else a)
        cells = np.array(roots, dtype=float).reshape(-1, 1)
        measure = float(len(cells))
    elif n == 2:
        cells = marching_squares(V, axes[0], axes[1], cmask)
        measure = float(np.sum(np.linalg.norm(cells[:, 1] - cells[:, 0], axis=1))) if len(cells) else 0.0
    else:
        cells = _marching_cubes(V, axes, cmask)
        if len(cells):
            cr = np.cross(cells[:, 1] - cells[:, 0], cells[:, 2] - cells[:, 0])
            measure = float(0.5 * np.sum(np.linalg.norm(cr, axis=1)))
        else:
            measure = 0.0
    interior = node_mask.copy()
    sing, tols = singular_nodes(V, axes, interior)
    out = NodalSlice(float(t), n, cells, measure, h, sing, tols, vanishing)
    out.metadata["extent"] = [[float(a[0]), float(a[-1])] for a in axes]
    if compute_box_counts and not out.empty:
        from .dimension import box_counts, default_scales
        sc = default_scales(out)
        out.box_counts = (sc, box_counts(out, sc))
    return out


def _marching_cubes(V, axes, cmask):
    from skimage.measure import marching_cubes

    if np.all(V >= 0) or np.all(V < 0):
        return np.zeros((0, 3, 3))
    tiny = np.finfo(float).tiny * 1e10
    W = np.where(V == 0, tiny, V)
    spacing = tuple(float(a[1] - a[0]) for a in axes)
    verts, faces, _, _ = marching_cubes(W, level=0.0, spacing=spacing, allow_degenerate=False)
    origin = np.array([a[0] for a in axes])
    tri = verts[faces] + origin
    cent = (verts[faces].mean(axis=1) / np.array(spacing)).astype(int)
    cent = np.minimum(cent, np.array(cmask.shape) - 1)
    keep = cmask[cent[:, 0], cent[:, 1], cent[:, 2]]
    return tri[keep]


def slice_grid(field, t: float, h: float | None = None, bbox=None):
    """Sample ``field`` at time ``t`` on a uniform grid.

    Gridded fields return their stored nodes (and mask) when ``h`` and
    ``bbox`` are omitted.  Returns ``(values, axes, mask)``.
    """
    from ..solver.fields import GridField, RadialField

    if isinstance(field, GridField) and h is None and bbox is None:
        return field.slice_values(t), list(field.axes), field.mask
    if bbox is None:
        if field.bbox is None:
            raise DomainError("a bounding box is required for fields on R^n")
        bbox = field.bbox
    if h is None:
        raise DomainError("grid spacing h is required")
    axes = [np.linspace(lo, hi, int(round((hi - lo) / h)) + 1) for lo, hi in np.asarray(bbox, dtype=float)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    mask = None
    if isinstance(field, RadialField):
        mask = np.sum(mesh * mesh, axis=-1) <= field.radius ** 2 * (1 + 1e-12)
        vals = np.zeros(mesh.shape[:-1])
        vals[mask] = field.evaluate(mesh[mask], t)
        return vals, axes, mask
    return field.evaluate(mesh, t), axes, mask
