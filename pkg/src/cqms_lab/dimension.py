"""Finite-approximation dimension brackets and metric-dimension slopes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import random_element, rapid_decay_ratio, weighted_l1
from .bounds import BoundPair
from .errors import ParameterError
from .groups import FreeAbelian, GroupDescriptor, sphere_sizes
from .operators import dft_norm_oracle, tail_truncation_radius

INFINITE_SIGNATURE_RATIO = 1.5
RAPID_DECAY_MARGIN = 0.25


@dataclass(frozen=True)
class DimensionEstimate(BoundPair):
    delta: float = 0.0
    orthonormal_count: int = 0
    rank: int = 0


def _as_columns(vectors) -> tuple[np.ndarray, list]:
    """Column matrix plus the exact coefficient maps (None for plain arrays)."""
    if isinstance(vectors, np.ndarray):
        mat = np.atleast_2d(vectors)
        return mat.astype(complex), [None] * mat.shape[1]
    vectors = list(vectors)
    maps = [dict(v.items()) for v in vectors]
    basis = sorted({g for m in maps for g in m})
    index = {g: i for i, g in enumerate(basis)}
    mat = np.zeros((max(1, len(basis)), len(maps)), dtype=complex)
    for j, m in enumerate(maps):
        for g, c in m.items():
            mat[index[g], j] = complex(c)
    return mat, maps


def _inner(a: dict, b: dict):
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    total = 0
    for g, c in small.items():
        d = big.get(g)
        if d is not None:
            total += c * (d.conjugate() if isinstance(d, complex) else d)
    return total


def _orthonormal_greedy(mat: np.ndarray, maps: list) -> int:
    """Size of a greedily chosen subset that is orthonormal with no tolerance."""
    chosen: list[int] = []
    for j, m in enumerate(maps):
        if m is not None:
            if _inner(m, m) != 1 or any(_inner(m, maps[i]) != 0 for i in chosen):
                continue
        else:
            col = mat[:, j]
            if np.vdot(col, col) != 1 or any(np.vdot(mat[:, i], col) != 0 for i in chosen):
                continue
        chosen.append(j)
    return len(chosen)


def dimension_estimate(vectors, delta: float) -> DimensionEstimate:
    """Bracket for D(Y, delta), the least dimension of a subspace within delta of every vector.

    Upper: the smallest r with sigma_(r+1) < delta, since projecting onto the
    top r left singular vectors moves every column by at most sigma_(r+1).
    Lower: ceil((1 - delta^2) m) for m exactly orthonormal vectors in the
    family, and at least 1 whenever some vector has norm >= delta.
    ``vectors`` is a sequence of sparse vectors or a matrix whose columns
    are the vectors.
    """
    if not delta > 0:
        raise ParameterError("delta must be positive")
    mat, maps = _as_columns(vectors)
    sigma = np.linalg.svd(mat, compute_uv=False) if mat.size else np.zeros(0)
    rank = int(np.sum(sigma > sigma[0] * max(mat.shape) * np.finfo(float).eps)) if sigma.size and sigma[0] > 0 else 0
    upper = next((r for r in range(len(sigma) + 1) if (sigma[r] if r < len(sigma) else 0.0) < delta), 0)
    upper_method = "span-dimension" if upper >= rank else "svd-threshold"
    m = _orthonormal_greedy(mat, maps)
    frac = 1 - Fraction(delta) ** 2
    lower = max(0, math.ceil(frac * m))
    lower_method = "orthonormal-counting"
    norms = np.linalg.norm(mat, axis=0) if mat.size else np.zeros(0)
    if lower < 1 and norms.size and norms.max() >= delta:
        lower, lower_method = 1, "span-trivial"
    return DimensionEstimate(
        lower, upper, lower_method, upper_method,
        {"singular_values": [float(s) for s in sigma]}, float(delta), m, rank,
    )


# ---------------------------------------------------------------------------
# metric-dimension slopes


def floor_root(delta: float, k: int) -> int:
    """floor(delta^(-1/k)) computed without floating-point drift.

    ``delta`` is read through its shortest decimal repr, so 1e-4 means 1/10000
    rather than the nearest binary double (which is slightly larger).
    """
    d = Fraction(repr(float(delta)))
    n = max(0, int(float(delta) ** (-1.0 / k)))
    while (n + 1) ** k * d <= 1:
        n += 1
    while n > 0 and n ** k * d > 1:
        n -= 1
    return n


def ball_counts(group: GroupDescriptor, n_max: int) -> list[int]:
    """|B_n| for n = 0..n_max, closed form when available, BFS otherwise."""
    closed = [group.closed_form_ball_count(n) for n in range(n_max + 1)]
    if all(c is not None for c in closed):
        return closed
    out, total = [], 0
    for size in sphere_sizes(group, n_max):
        total += size
        out.append(total)
    return out


def delta_grid(lo: float = 1e-4, hi: float = 1e-1, points: int = 8) -> tuple[float, ...]:
    return tuple(float(x) for x in np.geomspace(hi, lo, points))


def empirical_rapid_decay_constant(group: GroupDescriptor, r: float, samples: int, rng,
                                   radius: int = 3, size: int = 6) -> float:
    """Running max of the rapid-decay ratio over random f (seeded by delta_e, ratio 1).

    The reduced-norm upper estimate is the Fourier oracle on Z^d and the
    l^1 norm elsewhere.
    """
    best = 1.0
    for _ in range(samples):
        f = random_element(group, radius, int(rng.integers(1, size + 1)), rng, complex_coeffs=True)
        upper = dft_norm_oracle(f)[1] if isinstance(group, FreeAbelian) else float(weighted_l1(f, 0))
        best = max(best, rapid_decay_ratio(f, r, upper))
    return best


def default_rapid_decay_exponent(r: float, k: float) -> float:
    """r/2 plus a small margin: Z^d has rapid decay for every exponent above d/2."""
    return min(r / 2 + RAPID_DECAY_MARGIN, (r / 2 + k) / 2)


def _fit(x, y) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


@dataclass(frozen=True)
class MdimEstimate(BoundPair):
    k: int = 0
    r: float | None = None
    theoretical: tuple | None = None
    infinite_signature: bool = False
    rows: tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        out = super().to_json()
        out["rows"] = [list(row) for row in self.rows]
        out["theoretical"] = list(self.theoretical) if self.theoretical else None
        return out


def mdim_slope_estimate(group: GroupDescriptor, k: int, deltas: Sequence[float], r: float | None = None,
                        c_hat: float | None = None, p: float | None = None) -> MdimEstimate:
    """Slopes of log D(L_1, delta) against log(1/delta).

    Lower: slope of log((3/4)|U_delta|) with U_delta = B_floor(delta^(-1/k)).
    Upper (only with polynomial growth exponent ``r`` and an empirical
    rapid-decay constant ``c_hat`` at exponent ``p`` in (r/2, k)): slope of
    log|B_n0(delta)| with n0 the tail-truncation radius.  Without ``r`` the
    group is treated as possibly non-polynomial and only the lower slope and
    the infinite-dimension signature are reported.  The signature is a
    second-half slope at least 1.5 times the first-half slope, i.e.
    log|U_delta| superlinear in log(1/delta).
    """
    deltas = sorted(set(float(x) for x in deltas), reverse=True)
    if len(deltas) < 5:
        raise ParameterError("need at least 5 grid points")
    if any(not 0 < x < 1 for x in deltas):
        raise ParameterError("grid points must lie in (0, 1)")
    if math.log10(deltas[0] / deltas[-1]) < 2 - 1e-9:
        raise ParameterError("grid must span at least two decades")
    if r is not None and k <= r:
        raise ParameterError(f"k = {k} must exceed the growth exponent r = {r}")
    radii = [floor_root(x, k) for x in deltas]
    n0s = None
    if r is not None and c_hat is not None:
        p = default_rapid_decay_exponent(r, k) if p is None else p
        n0s = [tail_truncation_radius(k, p, c_hat, x) for x in deltas]
    counts = ball_counts(group, max(radii + (n0s or [])))
    logx = [math.log(1 / x) for x in deltas]
    lows = [math.log(0.75 * counts[n]) for n in radii]
    lower = _fit(logx, lows)
    half = len(deltas) // 2
    first = _fit(logx[: half + 1], lows[: half + 1])
    second = _fit(logx[half:], lows[half:])
    infinite = first > 0 and second >= INFINITE_SIGNATURE_RATIO * first
    rows = []
    for i, x in enumerate(deltas):
        row = [x, radii[i], counts[radii[i]]]
        if n0s is not None:
            row += [n0s[i], counts[n0s[i]]]
        rows.append(tuple(row))
    theoretical = (1 / k, 2 * r / (2 * k - r)) if r is not None else None
    if n0s is not None:
        upper = _fit(logx, [math.log(counts[n]) for n in n0s])
        upper_method = f"tail-truncation(p={p:g}, C_hat={c_hat:.6g})"
    else:
        upper, upper_method = math.inf, "unavailable"
    details = {"first_half_slope": first, "second_half_slope": second}
    if upper < lower:
        # finite-grid slopes are estimates, not certificates; report rather than fail
        details["note"] = "upper slope below lower slope on this grid"
        upper = lower
    return MdimEstimate(lower, upper, "orthonormal-counting", upper_method, details,
                        k, r, theoretical, infinite, tuple(rows))
