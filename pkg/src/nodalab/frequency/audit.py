"""Almost-monotonicity audit and pinch (frequency-drop) scans."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..quadrature import cylinder_rule
from .core import frequency_profile, slice_integrals, _center

__all__ = [
    "FlatnessCheck",
    "AuditReport",
    "almost_monotonicity_audit",
    "PinchReport",
    "pinch_scan",
]


@dataclass(frozen=True)
class FlatnessCheck:
    r: float
    N: float
    a0: float
    deviation: float  # sup_{Q_r} |u - a0|
    ratio: float  # deviation / (sqrt(eps) |a0|): the empirical constant


@dataclass
class AuditReport:
    center: tuple
    eps: float
    radii: np.ndarray
    N: np.ndarray
    violations: list  # (r1, r2, N(r1), N(r2)) with N(r1) > N(r2) + eps
    largest_monotone_scale: float  # largest r* with no violation among radii <= r*
    flatness: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _sup_on_cylinder(fld, x0, t0, r, a0, m=9):
    pts, times, _ = cylinder_rule(fld.n, r, time_nodes=m)
    nx = len(pts) // m
    dev = 0.0
    for k in range(m):
        sl = slice(k * nx, (k + 1) * nx)
        v = fld.evaluate(x0 + pts[sl], t0 + times[sl][0])
        dev = max(dev, float(np.max(np.abs(v - a0))))
    return dev


def almost_monotonicity_audit(field_, center, radii, eps: float, R0: float = math.inf,
                              ell0: float | None = None, check_flatness: bool = True) -> AuditReport:
    """List all radius pairs ``r1 < r2`` violating ``N(r1) <= N(r2) + eps``.

    Radii above ``ell0`` (if given) are ignored.  Windows whose frequency is at
    most ``eps`` additionally report ``sup_{Q_r} |u - a0| / (sqrt(eps) |a0|)``
    with ``a0 = u(x0, t0)``.
    """
    radii = np.sort(np.asarray(radii, dtype=float))
    if ell0 is not None:
        radii = radii[radii <= ell0]
    x0, t0 = _center(center, field_.n)
    prof = frequency_profile(field_, (x0, t0), radii, R0, doubling=False)
    N = prof.N
    viol = []
    first_bad = math.inf
    for j in range(len(radii)):
        for i in range(j):
            if N[i] > N[j] + eps:
                viol.append((float(radii[i]), float(radii[j]), float(N[i]), float(N[j])))
                first_bad = min(first_bad, radii[j])
    below = radii[radii < first_bad]
    largest = float(below.max()) if below.size else 0.0
    flat = []
    if check_flatness:
        a0 = float(field_.evaluate(x0, t0))
        for r, Nr in zip(radii, N):
            if Nr <= eps and a0 != 0:
                dev = _sup_on_cylinder(field_, x0, t0, r, a0)
                flat.append(FlatnessCheck(float(r), float(Nr), a0, dev, dev / (math.sqrt(eps) * abs(a0))))
    return AuditReport(tuple(x0), eps, radii, N, viol, largest, flat)


@dataclass
class PinchReport:
    radii: np.ndarray
    N: np.ndarray
    drops: list  # indices i with |N(r_i) - N(r_{i+1})| >= delta
    plateaus: list  # (index, N, nearest integer, distance) for pinched scales
    bound: int | None

    @property
    def passed(self) -> bool:
        return self.bound is None or len(self.drops) <= self.bound


def pinch_scan(field_, center, r: float, ratio: float, delta: float = 0.05, count: int = 4,
               R0: float = math.inf, bound: int | None = None) -> PinchReport:
    """Frequencies at ``r_i = r ratio^i`` (``i < count``) and the indices where
    consecutive values differ by at least ``delta``.

    A scale is *pinched* when neither neighbouring step is a drop; pinched
    values are reported with their nearest integer.
    """
    if not (0 < ratio < 1):
        raise DomainError("ratio must lie in (0, 1)")
    x0, t0 = _center(center, field_.n)
    radii = r * ratio ** np.arange(count)
    N = np.array([slice_integrals(field_, (x0, t0), ri, R0).N for ri in radii])
    drops = [i for i in range(count - 1) if abs(N[i] - N[i + 1]) >= delta]
    dset = set(drops)
    plateaus = []
    for i in range(count):
        if (i in dset) and (i - 1 in dset):
            continue
        k = int(round(N[i]))
        plateaus.append((i, float(N[i]), k, float(abs(N[i] - k))))
    return PinchReport(radii, N, drops, plateaus, bound)
