"""lambda(f), the length multiplier and its iterated commutators on l^2(G).

Everything here acts on finitely supported vectors.  ``apply_regular`` and
``apply_delta`` are exact (they work with whatever number type the inputs
carry, so rationals stay rational).  Operator norms are only ever reported as
bounds: compressions to finite balls give lower bounds, weighted l^1 norms give
upper bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb, factorial
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import (
    AlgebraElement,
    SparseFunction,
    convolve_all,
    push_forward,
    random_element,
    weighted_l1,
    weighted_l2,
)
from .bounds import BoundPair
from .errors import NumericalError, ParameterError
from .groups import FreeAbelian, GroupDescriptor, ball

POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000
# relative slack for float round-off when a computed lower bound meets an upper bound
ROUNDING_SLACK = 1e-12
MAX_COMPOSITIONS = 100_000
WARM_START_MIX = 1e-3


class FinVector(SparseFunction):
    """A finitely supported vector in l^2(G), written in the basis delta_h."""

    __slots__ = ()


def apply_regular(f: AlgebraElement, v: FinVector) -> FinVector:
    """lambda(f) v = sum_g sum_h a_g v(h) delta_{gh}."""
    f._same_group(v)
    mul = f.group.mul
    out: dict = {}
    for h, b in v.items():
        for g, a in f.items():
            gh = mul(g, h)
            out[gh] = out.get(gh, 0) + a * b
    return FinVector(f.group, out, check=False)


def apply_delta(f: AlgebraElement, k: int, v: FinVector) -> FinVector:
    """Delta^k(f) v = sum_g sum_h a_g v(h) (l(gh) - l(h))^k delta_{gh}."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    if k == 0:
        return apply_regular(f, v)
    f._same_group(v)
    group = f.group
    mul, length = group.mul, group.length
    out: dict = {}
    for h, b in v.items():
        lh = length(h)
        for g, a in f.items():
            gh = mul(g, h)
            jump = length(gh) - lh
            if jump:
                out[gh] = out.get(gh, 0) + a * b * jump**k
    return FinVector(group, out, check=False)


def compositions(k: int, n: int):
    """All (r_1, ..., r_n) of nonnegative ints summing to k, lexicographic."""
    if n == 1:
        yield (k,)
        return
    for first in range(k, -1, -1):
        for rest in compositions(k - first, n - 1):
            yield (first,) + rest


def multinomial(k: int, parts: Sequence[int]) -> int:
    out = factorial(k)
    for r in parts:
        out //= factorial(r)
    return out


@dataclass
class LeibnizCheck:
    max_deviation: float
    exactly_zero: bool
    n_factors: int
    k: int
    n_compositions: int
    n_vectors: int


def verify_leibniz(fs: Sequence[AlgebraElement], k: int, vectors: Sequence[FinVector],
                   max_compositions: int = MAX_COMPOSITIONS) -> LeibnizCheck:
    """Compare Delta^k(f_1...f_n) v with the multinomial expansion, for each v.

    The left side goes through the convolution product; the right side sums
    multinomial(k; r) * Delta^{r_1}(f_1) ... Delta^{r_n}(f_n) v over every
    composition r of k, applying the factors right to left.  Suffix products
    are memoised by their exponent tuple.
    """
    n = len(fs)
    if n < 1 or k < 1:
        raise ParameterError("need n >= 1 factors and k >= 1")
    n_comp = comb(k + n - 1, n - 1)
    if n_comp > max_compositions:
        raise ParameterError(f"{n_comp} compositions exceeds cap {max_compositions}")
    product = convolve_all(fs)
    comps = list(compositions(k, n))
    worst_sq = 0
    for v in vectors:
        lhs = apply_delta(product, k, v)
        memo: dict = {(): v}

        def suffix(rs):
            out = memo.get(rs)
            if out is None:
                out = apply_delta(fs[n - len(rs)], rs[0], suffix(rs[1:]))
                memo[rs] = out
            return out

        acc: dict = {}
        for rs in comps:
            coeff = multinomial(k, rs)
            for g, c in suffix(rs).items():
                acc[g] = acc.get(g, 0) + coeff * c
        diff = lhs - FinVector(v.group, acc, check=False)
        sq = diff.norm2_squared()
        worst_sq = max(worst_sq, abs(sq))
    return LeibnizCheck(
        max_deviation=math.sqrt(float(worst_sq)),
        exactly_zero=worst_sq == 0,
        n_factors=n,
        k=k,
        n_compositions=n_comp,
        n_vectors=len(vectors),
    )


# --------------------------------------------------------------------------
# compressions


@dataclass
class CompressedOperator:
    """lambda(f) or Delta^k(f) restricted to the domain ball B_N.

    The codomain is B_{N + max l(supp f)}, so no image mass is clipped.
    Rows index codomain elements, columns index domain elements.
    """

    f: AlgebraElement
    k: int
    domain_radius: int
    codomain_radius: int
    domain: tuple
    codomain: tuple
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def tag(self) -> str:
        return "lambda" if self.k == 0 else f"delta^{self.k}"

    @property
    def shape(self):
        return self.matrix.shape

    def export_coo(self, path) -> Path:
        """Coordinate text: a header with dimensions, then ``row col re im`` per entry."""
        path = Path(path)
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with path.open("w") as fh:
            fh.write(f"% compressed {self.tag} on {self.f.group.name} "
                     f"domain_radius={self.domain_radius} codomain_radius={self.codomain_radius}\n")
            fh.write(f"{self.shape[0]} {self.shape[1]} {coo.nnz}\n")
            for i in order:
                val = complex(coo.data[i])
                fh.write(f"{coo.row[i]} {coo.col[i]} {val.real!r} {val.imag!r}\n")
        return path


def _ball_lengths(group: GroupDescriptor, n: int) -> np.ndarray:
    memo = group.__dict__.setdefault("_ball_length_arrays", {})
    arr = memo.get(n)
    if arr is None:
        b = ball(group, n)
        arr = np.fromiter((b.lengths[g] for g in b.elements), dtype=np.int64, count=len(b))
        memo[n] = arr
    return arr


def _translation(group: GroupDescriptor, g, N: int, M: int) -> np.ndarray:
    """Row index in B_M of g h for each h in B_N (requires l(g) <= M - N)."""
    memo = group.__dict__.setdefault("_translations", {})
    key = (g, N, M)
    rows = memo.get(key)
    if rows is None:
        row_of = group.__dict__.setdefault("_ball_index", {}).get(M)
        if row_of is None:
            row_of = ball(group, M).index()
            group.__dict__["_ball_index"][M] = row_of
        mul = group.mul
        rows = np.fromiter((row_of[mul(g, h)] for h in ball(group, N).elements), dtype=np.int64)
        memo[key] = rows
    return rows


def compress(f: AlgebraElement, k: int, N: int) -> CompressedOperator:
    if N < 0:
        raise ParameterError("domain radius must be nonnegative")
    group = f.group
    M = N + f.max_length()
    dom = ball(group, N)
    cod = ball(group, M)
    len_dom = _ball_lengths(group, N)
    len_cod = _ball_lengths(group, M)
    cols = np.arange(len(dom), dtype=np.int64)
    complex_data = any(isinstance(a, complex) and a.imag for _, a in f.items())
    dtype = np.complex128 if complex_data else np.float64
    all_rows, all_cols, all_vals = [], [], []
    for g, a in sorted(f.items()):
        rows = _translation(group, g, N, M)
        a = complex(a) if complex_data else float(a)
        if k == 0:
            vals = np.full(len(rows), a, dtype=dtype)
            keep = slice(None)
        else:
            jump = (len_cod[rows] - len_dom).astype(np.float64)
            vals = a * jump ** k
            keep = jump != 0
        all_rows.append(rows[keep])
        all_cols.append(cols[keep])
        all_vals.append(np.asarray(vals, dtype=dtype)[keep])
    if all_rows:
        rows, cols_, vals = np.concatenate(all_rows), np.concatenate(all_cols), np.concatenate(all_vals)
    else:
        rows = cols_ = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0, dtype=dtype)
    mat = sp.csr_matrix((vals, (rows, cols_)), shape=(len(cod), len(dom)), dtype=dtype)
    return CompressedOperator(f, k, N, M, dom.elements, cod.elements, mat)


@dataclass
class PowerResult:
    value: float
    iterations: int
    converged: bool
    vector: np.ndarray = field(repr=False)

    @property
    def flag(self) -> str:
        return "converged" if self.converged else "unconverged-lower-bound-still-valid"


def power_iteration(mat, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER,
                    start: np.ndarray | None = None) -> PowerResult:
    """Largest singular value of ``mat`` via power iteration on mat^H mat.

    Every iterate v gives |mat v| / |v| <= sigma_max, so the best value seen
    is a valid lower bound whether or not the iteration converged.
    """
    n = mat.shape[1]
    v = np.ones(n, dtype=mat.dtype) if start is None else np.asarray(start, dtype=mat.dtype).copy()
    nv = np.linalg.norm(v)
    if n == 0 or nv == 0:
        return PowerResult(0.0, 0, True, v)
    v /= nv
    matH = mat.conj().T.tocsr()
    best, prev = 0.0, -1.0
    best_v = v
    for it in range(1, max_iter + 1):
        w = mat @ v
        s = float(np.linalg.norm(w))
        if s > best:
            best, best_v = s, v
        if s == 0.0:
            return PowerResult(0.0, it, True, v)
        if abs(s - prev) <= tol * s:
            return PowerResult(best, it, True, best_v)
        prev = s
        u = matH @ w
        v = u / np.linalg.norm(u)
    return PowerResult(best, max_iter, False, best_v)


@dataclass
class CompressionLower:
    value: float
    N: int
    iterations: int
    flag: str
    shape: tuple
    vector: np.ndarray | None = field(default=None, repr=False, compare=False)


def compressed_norm_lower(f: AlgebraElement, k: int, N: int, tol: float = POWER_TOL,
                          max_iter: int = POWER_MAX_ITER, start: np.ndarray | None = None) -> CompressionLower:
    """Lower bound for |Delta^k(f)|_op (for k = 0, |f|_red) from the B_N compression.

    The value is the larger of the power-iteration estimate and the delta_e
    column norm; both are norms of the compression applied to unit vectors.
    ``start`` (indexed by B_N) replaces the all-ones start vector.
    """
    op = compress(f, k, N)
    res = power_iteration(op.matrix, tol=tol, max_iter=max_iter, start=start)
    value = max(res.value, weighted_l2(f, k))
    upper = float(weighted_l1(f, k))
    if value > upper:
        if value > upper * (1 + ROUNDING_SLACK) + ROUNDING_SLACK:
            raise NumericalError(f"compression estimate {value} exceeds the l1 bound {upper}")
        value = upper
    return CompressionLower(value, N, res.iterations, res.flag, op.shape, res.vector)


def _warm_start(group: GroupDescriptor, prev, N: int) -> np.ndarray | None:
    n_prev, v = prev
    if v is None or n_prev > N or not len(v):
        return None
    start = np.full(len(ball(group, N)), WARM_START_MIX / math.sqrt(len(ball(group, N))), dtype=v.dtype)
    start[_translation(group, group.identity, n_prev, N)] += v / np.linalg.norm(v)
    return start


@dataclass(frozen=True)
class SeminormEstimate(BoundPair):
    k: int = 0


def seminorm_sandwich(f: AlgebraElement, k: int, schedule: Sequence[int] = (8, 16, 32),
                      tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> SeminormEstimate:
    """Certified bracket for L^k(f) = |Delta^k(f)|_op.

    Compressions along an increasing schedule are reported as a running max:
    B_N is contained in B_N' for N <= N', so an earlier estimate is also a
    lower bound for the later compression.  Each compression after the
    first starts from the previous top vector (extended by zero, plus a small
    all-ones component), which cuts the iteration count substantially.
    """
    low2 = weighted_l2(f, k)
    up = float(weighted_l1(f, k))
    lower, method = low2, "weightedL2"
    per_n = []
    running = 0.0
    prev = None
    for N in sorted(schedule):
        start = None if prev is None else _warm_start(f.group, prev, N)
        c = compressed_norm_lower(f, k, N, tol=tol, max_iter=max_iter, start=start)
        prev = (N, c.vector)
        running = max(running, c.value)
        per_n.append({"N": N, "value": running, "raw": c.value, "iterations": c.iterations, "flag": c.flag})
        if running > lower:
            lower, method = running, f"compressed({N})"
    if lower > up:
        lower = up  # only reachable through round-off; compressed_norm_lower already checked
    return SeminormEstimate(lower, up, method, "weightedL1", {"weightedL2": low2, "compressions": per_n}, k=k)


# --------------------------------------------------------------------------
# Fourier oracle for Z^d


def dft_norm_oracle(f: AlgebraElement, grid: int | None = None) -> tuple[float, float]:
    """Rigorous (lower, upper) for |f|_red on Z^d via the symbol on the torus.

    F(theta) = sum_v a_v exp(2 pi i <v, theta>) is evaluated on a uniform grid
    with ``grid`` points per axis by FFT.  Every theta is within half a cell
    diagonal of a grid point and |grad F| <= 2 pi sum |v|_2 |a_v|.
    """
    group = f.group
    if not isinstance(group, FreeAbelian):
        raise ParameterError("the Fourier oracle needs a free abelian group")
    d = group.d
    if grid is None:
        grid = {1: 4096, 2: 512}.get(d, 64)
    arr = np.zeros((grid,) * d, dtype=np.complex128)
    lip = 0.0
    for v, a in f.items():
        arr[tuple(x % grid for x in v)] += complex(a)
        lip += 2 * math.pi * math.sqrt(sum(x * x for x in v)) * abs(a)
    values = np.abs(np.fft.fftn(arr))
    lower = float(values.max()) if len(f) else 0.0
    half_diag = math.sqrt(d) / (2 * grid)
    return lower, lower + lip * half_diag


# --------------------------------------------------------------------------
# truncation radius and the Ad inequality


def tail_truncation_radius(k: float, p: float, c_hat: float, delta: float) -> int:
    """n_0 = ceil((2^p C / delta)^(1/(k-p))), at least 1.

    Beyond n_0 the tail bound C 2^p n^(p-k) is below ``delta``.
    """
    if not k > p > 0:
        raise ParameterError("need k > p > 0")
    if c_hat <= 0 or delta <= 0:
        raise ParameterError("need C > 0 and delta > 0")
    x = (2**p * c_hat / delta) ** (1.0 / (k - p))
    # guard against float noise pushing an exact integer over the ceiling
    n0 = math.ceil(x * (1 - 1e-12))
    return max(n0, 1)


@dataclass
class AdCheck:
    passed: bool
    lhs: float
    rhs: float
    k: int
    h_length: int


def conjugate(h, f: AlgebraElement) -> AlgebraElement:
    """Ad_h(f) = delta_h f delta_{h^-1}."""
    G = f.group
    hinv = G.inv(h)
    return push_forward(f, lambda g: G.mul(G.mul(h, g), hinv))


def ad_inequality_check(h, f: AlgebraElement, k: int, schedule: Sequence[int] = (4, 8)) -> AdCheck:
    """lower(L^k(Ad_h f)) <= sum_j C(k, j) (2 l(h))^(k-j) upper(L^j(f))."""
    G = f.group
    lh = G.length(h)
    lhs = seminorm_sandwich(conjugate(h, f), k, schedule).lower
    rhs = sum(comb(k, j) * (2 * lh) ** (k - j) * float(weighted_l1(f, j)) for j in range(k + 1))
    return AdCheck(lhs <= rhs * (1 + ROUNDING_SLACK), lhs, rhs, k, lh)


def random_vector(group: GroupDescriptor, radius: int, size: int, rng, exact: bool = False) -> FinVector:
    f = random_element(group, radius, size, rng, exact=exact)
    return FinVector(group, dict(f.items()), check=False)

