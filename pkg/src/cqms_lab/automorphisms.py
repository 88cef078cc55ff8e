"""Group automorphisms acting exactly on normal forms.

Four kinds are supported: an integer matrix acting on ``Z^d``, the extension
``(v, k) -> (psi v, k)`` of a matrix commuting with ``phi`` to ``Z^d x|_phi Z``,
an inner automorphism ``g -> h g h^-1``, and the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np
import sympy

from .algebra import AlgebraElement, push_forward
from .errors import GroupMismatchError, HorizonExceededError, NumericalError, ParameterError, ResourceLimitError
from .groups import (
    FreeAbelian,
    GroupDescriptor,
    Semidirect,
    as_int_matrix,
    ball,
    mat_det,
    mat_mul,
    mat_pow,
    mat_vec,
)

CAT_MAP = ((2, 1), (1, 1))
RESIDUAL_TOL = 1e-6
HYPERBOLIC_THRESHOLD = 2.0


def heisenberg_matrix(d: int):
    """Ones on the diagonal and the superdiagonal."""
    if d < 1:
        raise ParameterError("d must be positive")
    return tuple(tuple(int(j == i or j == i + 1) for j in range(d)) for i in range(d))


class Automorphism:
    """An automorphism of one fixed group, applied to normal forms."""

    KINDS = ("matrix", "extended", "inner", "identity")

    def __init__(self, group: GroupDescriptor, kind: str, matrix=None, inner_element=None):
        if kind not in self.KINDS:
            raise ParameterError(f"unknown automorphism kind {kind!r}")
        self.group = group
        self.kind = kind
        self.matrix = None
        self.inner_element = None
        if kind in ("matrix", "extended"):
            if matrix is None:
                raise ParameterError(f"{kind} automorphism needs a matrix")
            mat = as_int_matrix(matrix)
            if abs(mat_det(mat)) != 1:
                raise ParameterError("automorphism matrix must have determinant +-1")
            if kind == "matrix":
                if not isinstance(group, FreeAbelian) or group.d != len(mat):
                    raise GroupMismatchError(f"a {len(mat)}x{len(mat)} matrix does not act on {group.name}")
            else:
                if not isinstance(group, Semidirect) or group.d != len(mat):
                    raise GroupMismatchError(f"extension of a {len(mat)}x{len(mat)} matrix needs Z^{len(mat)} x| Z")
                if mat_mul(mat, group.phi) != mat_mul(group.phi, mat):
                    raise ParameterError("extended automorphism requires psi phi = phi psi")
            self.matrix = mat
        elif kind == "inner":
            if inner_element is None:
                raise ParameterError("inner automorphism needs an element")
            group.check(inner_element)
            self.inner_element = inner_element
            self._inner_inv = group.inv(inner_element)

    # constructors ---------------------------------------------------------

    @classmethod
    def identity(cls, group):
        return cls(group, "identity")

    @classmethod
    def from_matrix(cls, group, matrix):
        kind = "extended" if isinstance(group, Semidirect) else "matrix"
        return cls(group, kind, matrix=matrix)

    @classmethod
    def inner(cls, group, h):
        return cls(group, "inner", inner_element=h)

    @classmethod
    def from_json(cls, group, obj):
        kind = obj.get("kind", "identity")
        if kind == "inner":
            return cls(group, kind, inner_element=group.nf_from_json(obj["inner_element"]))
        matrix = obj.get("matrix")
        if matrix == "cat":
            matrix = CAT_MAP
        elif isinstance(matrix, str) and matrix.startswith("heisenberg"):
            matrix = heisenberg_matrix(group.d)
        return cls(group, kind, matrix=matrix)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.inner_element is not None:
            out["inner_element"] = self.group.nf_to_json(self.inner_element)
        return out

    def __repr__(self):
        extra = self.matrix if self.matrix is not None else self.inner_element
        return f"Automorphism({self.kind}, {extra!r} on {self.group.name})"

    # action ---------------------------------------------------------------

    def apply(self, g):
        if self.kind == "identity":
            return g
        if self.kind == "matrix":
            return mat_vec(self.matrix, g)
        if self.kind == "extended":
            v, k = g
            return (mat_vec(self.matrix, v), k)
        mul = self.group.mul
        return mul(mul(self.inner_element, g), self._inner_inv)

    __call__ = apply

    def power(self, n: int) -> "Automorphism":
        """alpha^n as a new automorphism (negative n allowed)."""
        if self.kind == "identity" or n == 1:
            return self
        if n == 0:
            return Automorphism.identity(self.group)
        if self.kind == "inner":
            return Automorphism.inner(self.group, self.group.power(self.inner_element, n))
        return Automorphism(self.group, self.kind, matrix=mat_pow(self.matrix, n))

    def iterate(self, g, n: int):
        """alpha^n(g) for n >= 0."""
        if n < 0:
            raise ParameterError("iterate expects n >= 0; use power(n) for inverses")
        for _ in range(n):
            g = self.apply(g)
        return g

    def on_algebra(self, f: AlgebraElement) -> AlgebraElement:
        """sum c_g delta_g -> sum c_g delta_alpha(g)."""
        if f.group != self.group:
            raise GroupMismatchError(f"{f.group.name} vs {self.group.name}")
        return push_forward(f, self.apply)


# ---------------------------------------------------------------------------
# Lipschitz constants


@dataclass(frozen=True)
class LipschitzCertificate:
    constant: int
    witness: object
    validation_radius: int
    max_observed_ratio: float
    scanned: int

    @property
    def valid(self) -> bool:
        return self.max_observed_ratio <= self.constant

    def to_json(self, group) -> dict:
        return {
            "constant": self.constant,
            "witness": group.nf_to_json(self.witness),
            "validation_radius": self.validation_radius,
            "max_observed_ratio": self.max_observed_ratio,
            "scanned": self.scanned,
        }


def lipschitz_constant(alpha: Automorphism, validation_radius: int = 4) -> LipschitzCertificate:
    """max over generators s of l(alpha(s)), cross-checked on B_R.

    Subadditivity of word length makes the generator maximum a global bound;
    the ball scan only guards against implementation errors.
    """
    group = alpha.group
    try:
        best, witness = 0, None
        for s in group.generators:
            n = group.length(alpha.apply(s))
            if n > best:
                best, witness = n, s
        ratio, scanned = 0.0, 0
        for g in ball(group, validation_radius).elements:
            n = group.length(g)
            if n == 0:
                continue
            ratio = max(ratio, group.length(alpha.apply(g)) / n)
            scanned += 1
    except HorizonExceededError as exc:
        raise ResourceLimitError(
            f"images of B_{validation_radius} escape the length horizon", partial_radius=exc.required_radius
        ) from exc
    return LipschitzCertificate(max(best, 1), witness, validation_radius, ratio, scanned)


@dataclass(frozen=True)
class PolyLengthCheck:
    passed: bool
    max_ratio: float
    worst: tuple | None  # (v, n, l(psi^n v), bound)
    checked: int


def polynomial_length_bound_check(psi, vectors, n_max: int) -> PolyLengthCheck:
    """Check |psi^n v|_1 <= d n^(d-1) |v|_1 for n = 1..n_max.

    ``max_ratio`` is the largest |psi^n v|_1 / (d n^(d-1) |v|_1) seen, so the
    check passes iff it is at most 1.
    """
    psi = as_int_matrix(psi)
    d = len(psi)
    worst, max_ratio, checked = None, 0.0, 0
    passed = True
    for v in vectors:
        v = tuple(int(x) for x in v)
        base = sum(abs(x) for x in v)
        if base == 0:
            continue
        w = v
        for n in range(1, n_max + 1):
            w = mat_vec(psi, w)
            length = sum(abs(x) for x in w)
            bound = d * n ** (d - 1) * base
            ratio = length / bound
            checked += 1
            if ratio > max_ratio:
                max_ratio, worst = ratio, (v, n, length, bound)
            if length > bound:
                passed = False
    return PolyLengthCheck(passed, max_ratio, worst, checked)


# ---------------------------------------------------------------------------
# spectra


def charpoly(mat) -> list[int]:
    """Integer characteristic polynomial coefficients, leading 1 first."""
    x = sympy.Symbol("x")
    poly = sympy.Matrix(as_int_matrix(mat)).charpoly(x)
    return [int(c) for c in poly.all_coeffs()]


@dataclass(frozen=True)
class Spectrum:
    moduli: tuple
    residual: float
    method: str

    @property
    def entropy(self) -> float:
        return math.fsum(math.log(m) for m in self.moduli if m >= 1.0)

    @property
    def max_modulus(self) -> float:
        return max(self.moduli)


def _factor_roots(coeffs: list[int]) -> tuple[list[float], str]:
    roots = np.roots(np.array(coeffs, dtype=float))
    if len(roots) == len(coeffs) - 1:
        moduli = [float(abs(r)) for r in roots]
        if abs(math.prod(moduli) - abs(coeffs[-1])) < RESIDUAL_TOL:
            return moduli, "numpy.roots"
    try:
        with mpmath.workdps(60):
            mroots = mpmath.polyroots(coeffs, maxsteps=500, extraprec=200)
            return [float(abs(r)) for r in mroots], "mpmath.polyroots"
    except mpmath.libmp.NoConvergence as exc:
        raise NumericalError(f"root finding failed for {coeffs}") from exc


def spectrum(mat) -> Spectrum:
    """Eigenvalue moduli (with multiplicity) of an integer matrix.

    The characteristic polynomial is split exactly into squarefree factors so
    the root finder only ever sees simple roots; repeated roots would
    otherwise come out with error ~eps^(1/multiplicity).  Each factor goes to
    numpy's companion-matrix roots, falling back to mpmath at 60 digits.  The
    residual | prod |lambda_i| - |det T| | must stay below 1e-6.
    """
    x = sympy.Symbol("x")
    coeffs = charpoly(mat)
    det = abs(coeffs[-1])
    _, factors = sympy.sqf_list(sympy.Poly(coeffs, x))
    moduli, methods = [], set()
    for factor, mult in factors:
        fc = [int(c) for c in factor.all_coeffs()]
        if len(fc) == 1:
            continue
        mods, method = _factor_roots(fc)
        methods.add(method)
        moduli.extend(mods * mult)
    residual = abs(math.prod(moduli) - det)
    if len(moduli) != len(coeffs) - 1 or residual >= RESIDUAL_TOL:
        raise NumericalError(f"spectrum residual {residual:.3g} exceeds {RESIDUAL_TOL}")
    method = "mpmath.polyroots" if "mpmath.polyroots" in methods else "numpy.roots"
    return Spectrum(tuple(sorted(moduli)), residual, method)


def eigen_entropy(mat) -> float:
    """Sum of log|lambda| over eigenvalues of modulus at least 1."""
    return spectrum(mat).entropy


def hyperbolicity_check(mat) -> tuple[bool, float]:
    """(some |lambda| >= 2, max |lambda|)."""
    top = spectrum(mat).max_modulus
    return top >= HYPERBOLIC_THRESHOLD - 1e-12, top
