"""Interior sign-change counts of one-dimensional Dirichlet solutions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError

__all__ = ["NodalCountSeries", "sign_changes", "nodal_count_1d"]


def sign_changes(values, band: float) -> int:
    """Sign changes of ``values`` ignoring entries with ``|v| <= band``.

    Small values near a transversal zero are skipped, so a node sitting on
    the zero (or flickering around it) does not create spurious pairs.
    """
    v = np.asarray(values, dtype=float)
    v = v[np.abs(v) > band]
    if len(v) < 2:
        return 0
    s = np.sign(v)
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass
class NodalCountSeries:
    times: np.ndarray
    counts: np.ndarray
    band: np.ndarray  # absolute hysteresis band per slice
    increases: list  # (t_prev, t, count_prev, count)

    @property
    def monotone(self) -> bool:
        return not self.increases


def nodal_count_1d(field, times=None, tol_u: float = 1e-10) -> NodalCountSeries:
    """Per-slice interior sign-change counts and their monotonicity.

    ``field`` is a 1D gridded field; boundary nodes are excluded.  The
    hysteresis band is ``tol_u * max|u(., t)|``.  Slices that vanish
    identically count zero.
    """
    if getattr(field, "n", None) != 1:
        raise DomainError("nodal counting needs a one-dimensional field")
    times = np.asarray(field.times if times is None else times, dtype=float)
    counts, bands = [], []
    for t in times:
        v = np.asarray(field.slice_values(t), dtype=float)[1:-1]
        m = float(np.max(np.abs(v))) if v.size else 0.0
        band = tol_u * m
        bands.append(band)
        counts.append(sign_changes(v, band) if m > 0 else 0)
    counts = np.array(counts, dtype=int)
    inc = [(float(times[i - 1]), float(times[i]), int(counts[i - 1]), int(counts[i]))
           for i in range(1, len(times)) if counts[i] > counts[i - 1]]
    return NodalCountSeries(times, counts, np.array(bands), inc)
