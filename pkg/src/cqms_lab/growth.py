"""Ball-growth sequences and exponent fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .groups import GroupDescriptor, sphere_sizes

EXPONENTIAL_THRESHOLD = 0.1
MIN_WINDOW_POINTS = 5


def growth_sequence(group: GroupDescriptor, n_max: int, method: str = "bfs") -> list[tuple[int, int]]:
    """Exact (n, |B_n|) for n = 0..n_max.

    ``method="bfs"`` always counts spheres in the Cayley graph; ``"auto"``
    takes the closed-form count where the group has one.
    """
    if n_max < 2:
        raise ParameterError("n_max must be at least 2")
    if method not in ("bfs", "auto"):
        raise ParameterError(f"unknown method {method!r}")
    if method == "auto":
        closed = [group.closed_form_ball_count(n) for n in range(n_max + 1)]
        if all(c is not None for c in closed):
            return list(enumerate(closed))
    out, total = [], 0
    for n, size in enumerate(sphere_sizes(group, n_max)):
        total += size
        out.append((n, total))
    return out


@dataclass(frozen=True)
class GrowthFit:
    """Outcome of a growth fit.

    ``kind`` is ``polynomial`` (``exponent`` is the log-log slope),
    ``exponential`` (``rate`` is the slope of log|B_n| in n) or
    ``finite-group-like`` (counts constant over the window).
    """

    kind: str
    exponent: float | None
    rate: float | None
    residual: float
    loglog_residual: float
    linear_residual: float
    window: tuple[int, int]

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "exponent": self.exponent,
            "rate": self.rate,
            "residual": self.residual,
            "loglog_residual": self.loglog_residual,
            "linear_residual": self.linear_residual,
            "window": list(self.window),
        }


def default_window(n_max: int) -> tuple[int, int]:
    """Drop the first quarter of the radii."""
    return max(1, math.ceil(0.25 * n_max)), n_max


def _rms_fit(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    return float(slope), float(np.sqrt(np.mean(resid ** 2)))


def growth_exponent_fit(counts, window: tuple[int, int] | None = None,
                        threshold: float = EXPONENTIAL_THRESHOLD) -> GrowthFit:
    """Fit log|B_n| against log n, or against n when growth looks exponential.

    ``counts`` is either a list of |B_n| indexed by n or a list of (n, |B_n|).
    The exponential verdict needs both a linear-in-n slope above
    ``threshold`` and a better straight-line fit in (n, log|B_n|) than in
    (log n, log|B_n|).  Slope alone is not enough: for Z^3 the linear slope on
    [10, 40] is about 0.14.
    """
    pairs = list(counts)
    if pairs and not isinstance(pairs[0], (tuple, list)):
        pairs = list(enumerate(pairs))
    table = dict(pairs)
    lo, hi = window if window is not None else default_window(max(table))
    if lo < 1:
        raise ParameterError("window must start at n >= 1")
    ns = [n for n in range(lo, hi + 1) if n in table]
    if len(ns) < MIN_WINDOW_POINTS:
        raise ParameterError(f"window [{lo}, {hi}] has {len(ns)} points, need {MIN_WINDOW_POINTS}")
    x = np.array(ns, dtype=float)
    logc = np.log(np.array([table[n] for n in ns], dtype=float))
    if np.ptp(logc) == 0:
        return GrowthFit("finite-group-like", 0.0, 0.0, 0.0, 0.0, 0.0, (lo, hi))
    exponent, res_ll = _rms_fit(np.log(x), logc)
    rate, res_lin = _rms_fit(x, logc)
    if rate > threshold and res_lin < res_ll:
        return GrowthFit("exponential", None, rate, res_lin, res_ll, res_lin, (lo, hi))
    return GrowthFit("polynomial", exponent, None, res_ll, res_ll, res_lin, (lo, hi))
