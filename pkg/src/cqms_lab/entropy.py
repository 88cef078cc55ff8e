"""Product sets of automorphism orbits and entropy brackets.

For a seed set Omega_0 the product sets are
``P_n = {g_0 alpha(g_1) ... alpha^(n-1)(g_(n-1)) : g_i in Omega_0}``.  Their
delta functions are orthonormal in l^2, so log|P_n| / n feeds the
orthonormal-counting lower bound on product entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .automorphisms import Automorphism, LipschitzCertificate, PolyLengthCheck, hyperbolicity_check
from .bounds import BoundPair
from .errors import ParameterError
from .groups import FreeAbelian, as_int_matrix, mat_vec

DEFAULT_CAP = 10_000_000
# refuse a step whose raw candidate list would exceed this multiple of the cap
CANDIDATE_FACTOR = 4
INT64_SAFE = 2**62


@dataclass(frozen=True)
class ProductSetTrace:
    """|P_n| for n = 1..len(cardinalities), exact up to the cap."""

    alpha: Automorphism = field(repr=False)
    seed: tuple
    cardinalities: tuple
    truncated: bool
    n_max: int

    @property
    def ns(self) -> tuple:
        return tuple(range(1, len(self.cardinalities) + 1))

    @property
    def rates(self) -> tuple:
        return tuple(math.log(c) / n for n, c in zip(self.ns, self.cardinalities))

    def rows(self):
        return [(n, c, r) for n, c, r in zip(self.ns, self.cardinalities, self.rates)]

    def to_json(self) -> dict:
        g = self.alpha.group
        return {
            "automorphism": self.alpha.to_json(),
            "seed": [g.nf_to_json(s) for s in self.seed],
            "n": list(self.ns),
            "cardinalities": list(self.cardinalities),
            "rates": list(self.rates),
            "truncated": self.truncated,
            "n_max": self.n_max,
        }


def _numpy_ready(alpha: Automorphism) -> bool:
    return isinstance(alpha.group, FreeAbelian) and alpha.kind in ("matrix", "identity")


def _unique_rows(arr: np.ndarray) -> np.ndarray:
    lo = arr.min(axis=0)
    span = arr.max(axis=0) - lo + 1
    if math.prod(int(s) for s in span) < INT64_SAFE:
        strides = np.ones(arr.shape[1], dtype=np.int64)
        for i in range(arr.shape[1] - 2, -1, -1):
            strides[i] = strides[i + 1] * span[i + 1]
        keys = np.unique((arr - lo) @ strides)
        out = np.empty((len(keys), arr.shape[1]), dtype=np.int64)
        for i in range(arr.shape[1]):
            out[:, i], keys = np.divmod(keys, strides[i])
        return out + lo
    return np.unique(arr, axis=0)


def _grow_numpy(alpha, seed, n_max, cap):
    mat = alpha.matrix if alpha.kind == "matrix" else None
    images = [tuple(s) for s in seed]
    P = _unique_rows(np.array(images, dtype=np.int64))
    cards = [len(P)]
    for n in range(1, n_max):
        if mat is not None:
            images = [mat_vec(mat, v) for v in images]
        bound = max(abs(x) for v in images for x in v) + int(np.abs(P).max())
        if bound >= INT64_SAFE or len(P) * len(images) > CANDIDATE_FACTOR * cap:
            return cards, True, (P, images, n)
        img = np.array(images, dtype=np.int64)
        P = _unique_rows((P[:, None, :] + img[None, :, :]).reshape(-1, P.shape[1]))
        cards.append(len(P))
        if len(P) > cap:
            return cards, True, None
    return cards, False, None


def product_set_growth(alpha: Automorphism, seed, n_max: int, cap: int = DEFAULT_CAP) -> ProductSetTrace:
    """Exact |P_n| by incremental set products P_(n+1) = P_n alpha^n(Omega_0).

    Stops early, flagging the trace as truncated, once |P_n| exceeds ``cap``
    or the next candidate list would exceed ``4 * cap``.  Z^d under a matrix
    runs vectorised; everything else hashes normal forms.
    """
    seed = tuple(dict.fromkeys(seed))
    if not seed:
        raise ParameterError("seed set must be nonempty")
    if n_max < 1:
        raise ParameterError("n_max must be positive")
    group = alpha.group
    for s in seed:
        group.check(s)
    if _numpy_ready(alpha):
        cards, truncated, _ = _grow_numpy(alpha, seed, n_max, cap)
        return ProductSetTrace(alpha, seed, tuple(cards), truncated, n_max)
    mul = group.mul
    images = list(seed)
    P = set(seed)
    cards, truncated = [len(P)], False
    for _ in range(1, n_max):
        if len(P) * len(images) > CANDIDATE_FACTOR * cap:
            truncated = True
            break
        images = [alpha.apply(s) for s in images]
        P = {mul(p, s) for p in P for s in images}
        cards.append(len(P))
        if len(P) > cap:
            truncated = True
            break
    return ProductSetTrace(alpha, seed, tuple(cards), truncated, n_max)


# ---------------------------------------------------------------------------
# hyperbolic witnesses


@dataclass(frozen=True)
class WitnessResult:
    witness: tuple | None
    n_check: int
    cardinalities: tuple  # |T^(n)| for n = 0..n_check, witness only
    hyperbolic: bool
    max_modulus: float
    scanned: int

    @property
    def certified(self) -> bool:
        return self.witness is not None and all(c == 2 ** (n + 1) for n, c in enumerate(self.cardinalities))

    def to_json(self) -> dict:
        return {
            "witness": list(self.witness) if self.witness is not None else None,
            "n_check": self.n_check,
            "cardinalities": list(self.cardinalities),
            "hyperbolic": self.hyperbolic,
            "max_modulus": self.max_modulus,
            "scanned": self.scanned,
        }


def signed_sum_cardinalities(psi, v, n_check: int, stop_early: bool = False) -> list[int]:
    """|{sum_{j<=n} eps_j psi^j v : eps in {0,1}}| for n = 0..n_check."""
    psi = as_int_matrix(psi)
    v = tuple(int(x) for x in v)
    sums = {tuple(0 for _ in v), v}
    cards = [len(sums)]
    w = v
    for n in range(1, n_check + 1):
        w = mat_vec(psi, w)
        sums = sums | {tuple(a + b for a, b in zip(s, w)) for s in sums}
        cards.append(len(sums))
        if stop_early and len(sums) != 2 ** (n + 1):
            break
    return cards


def _lattice_ball(d: int, radius: int):
    """Nonzero vectors of l1 norm <= radius, by norm then lexicographically."""
    out = []

    def rec(prefix, budget):
        if len(prefix) == d:
            if any(prefix):
                out.append(tuple(prefix))
            return
        for x in range(-budget, budget + 1):
            rec(prefix + [x], budget - abs(x))

    rec([], radius)
    return sorted(out, key=lambda v: (sum(abs(x) for x in v), v))


def hyperbolic_witness_search(psi, search_radius: int, n_check: int) -> WitnessResult:
    """First v in B_radius(Z^d) whose 2^(n_check+1) signed sums are all distinct."""
    psi = as_int_matrix(psi)
    hyperbolic, top = hyperbolicity_check(psi)
    scanned = 0
    for v in _lattice_ball(len(psi), search_radius):
        scanned += 1
        cards = signed_sum_cardinalities(psi, v, n_check, stop_early=True)
        if len(cards) == n_check + 1 and cards[-1] == 2 ** (n_check + 1):
            return WitnessResult(v, n_check, tuple(cards), hyperbolic, top, scanned)
    return WitnessResult(None, n_check, (), hyperbolic, top, scanned)


# ---------------------------------------------------------------------------
# entropy brackets


@dataclass(frozen=True)
class EntropyLower:
    value: float
    window: tuple[int, int]
    increments: tuple
    certified_rates: tuple  # (1/n) log((1 - delta^2) |P_n|)
    delta: float

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "window": list(self.window),
            "increments": list(self.increments),
            "certified_rates": list(self.certified_rates),
            "delta": self.delta,
        }


def entropy_lower_estimate(trace: ProductSetTrace, delta: float = 0.5, window: int | None = None) -> EntropyLower:
    """Conservative tail rate: min of log|P_(n+1)| - log|P_n| over the last third.

    ``delta`` only enters the per-n certified quantities; the tail rate does
    not depend on it.
    """
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    cards = trace.cardinalities
    if len(cards) < 6:
        raise ParameterError(f"trace has {len(cards)} points, need at least 6")
    size = window if window is not None else max(2, math.ceil(len(cards) / 3))
    size = min(size, len(cards))
    tail = cards[-size:]
    logs = [math.log(c) for c in tail]
    incs = tuple(b - a for a, b in zip(logs, logs[1:]))
    shrink = math.log1p(-delta * delta)
    certified = tuple((math.log(c) + shrink) / n for n, c in zip(trace.ns, cards))
    first = len(cards) - size + 1
    return EntropyLower(max(0.0, min(incs)), (first, len(cards)), incs, certified, delta)


@dataclass(frozen=True)
class EntropyUpper:
    value: float
    certificate: str
    hypotheses: dict

    def to_json(self) -> dict:
        return {"value": self.value, "certificate": self.certificate, "hypotheses": self.hypotheses}


def entropy_upper_certificate(alpha: Automorphism, mode: str, lipschitz: LipschitzCertificate | None = None,
                              r: float | None = None, k: float | None = None, d: float | None = None,
                              poly_check: PolyLengthCheck | None = None) -> EntropyUpper:
    """Upper bound on product entropy.

    ``growth``: r log(lambda) for polynomial growth exponent r.
    ``order``: k d log(lambda) with d an upper estimate of the metric dimension.
    ``inner``: 0 for an inner automorphism of a polynomial-growth group.
    ``polynomial-length``: 0 when l(alpha^n g) grows polynomially in n
    (``poly_check`` must have passed) on a polynomial-growth group.
    """
    if mode in ("growth", "order"):
        if lipschitz is None:
            raise ParameterError(f"{mode} mode needs a Lipschitz certificate")
        lam = lipschitz.constant
        if mode == "growth":
            if r is None:
                raise ParameterError("growth mode needs the growth exponent r")
            return EntropyUpper(r * math.log(lam), "growth: r*log(lambda)", {"r": r, "lambda": lam})
        if k is None or d is None:
            raise ParameterError("order mode needs k and a metric-dimension estimate d")
        return EntropyUpper(k * d * math.log(lam), "order: k*d*log(lambda)", {"k": k, "d": d, "lambda": lam})
    if mode == "inner":
        if alpha.kind not in ("inner", "identity"):
            raise ParameterError("inner mode needs an inner automorphism")
        if r is None:
            raise ParameterError("inner mode needs the polynomial growth exponent r")
        return EntropyUpper(0.0, "inner automorphism of a polynomial-growth group", {"r": r})
    if mode == "polynomial-length":
        if poly_check is None or not poly_check.passed:
            raise ParameterError("polynomial-length mode needs a passing length-growth check")
        if r is None:
            raise ParameterError("polynomial-length mode needs the polynomial growth exponent r")
        return EntropyUpper(0.0, "polynomial length growth of iterates", {"r": r, "max_ratio": poly_check.max_ratio})
    raise ParameterError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class EntropyReport(BoundPair):
    context: dict = field(default_factory=dict, compare=False)


def entropy_bracket(lower: EntropyLower, upper: EntropyUpper, context: dict | None = None) -> EntropyReport:
    return EntropyReport(
        lower.value, upper.value, "orthonormal-counting", upper.certificate,
        {"lower": lower.to_json(), "upper": upper.to_json()}, context or {},
    )
