"""The convolution algebra C_c(G) of finitely supported functions on a group."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Callable, Iterable, Mapping

from .errors import GroupMismatchError, ParameterError
from .groups import GroupDescriptor, ball


class SparseFunction:
    """A finitely supported map from group elements to numbers.

    Exact zeros are dropped on construction; nothing else is pruned, so a
    float coefficient of 1e-300 stays in the support.
    """

    __slots__ = ("group", "_coeffs")

    def __init__(self, group: GroupDescriptor, coeffs: Mapping | Iterable = (), check: bool = True):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        data = {}
        for g, c in items:
            if check:
                group.check(g)
            data[g] = data.get(g, 0) + c
        self.group = group
        self._coeffs = {g: c for g, c in data.items() if c != 0}

    @classmethod
    def delta(cls, group, g, coeff=1):
        return cls(group, {g: coeff})

    def __getitem__(self, g):
        return self._coeffs.get(g, 0)

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def items(self):
        return self._coeffs.items()

    @property
    def support(self) -> tuple:
        return tuple(sorted(self._coeffs))

    def _same_group(self, other):
        if self.group != other.group:
            raise GroupMismatchError(f"{self.group.name} vs {other.group.name}")

    def __eq__(self, other):
        return type(self) is type(other) and self.group == other.group and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.group, frozenset(self._coeffs.items())))

    def __add__(self, other):
        self._same_group(other)
        out = dict(self._coeffs)
        for g, c in other.items():
            out[g] = out.get(g, 0) + c
        return type(self)(self.group, out, check=False)

    def __neg__(self):
        return type(self)(self.group, {g: -c for g, c in self.items()}, check=False)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return type(self)(self.group, {g: c * a for g, a in self.items()}, check=False)

    def norm2(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self._coeffs.values()))

    def norm2_squared(self):
        """Exact when the coefficients are rationals."""
        return sum((c * c.conjugate()) if isinstance(c, complex) else c * c for c in self._coeffs.values())

    def max_length(self) -> int:
        return max((self.group.length(g) for g in self._coeffs), default=0)

    def __repr__(self):
        terms = ", ".join(f"{g}: {c}" for g, c in sorted(self._coeffs.items())[:6])
        more = ", ..." if len(self) > 6 else ""
        return f"{type(self).__name__}({self.group.name}, {{{terms}{more}}})"

    def to_json(self) -> dict:
        rows = []
        for g in self.support:
            c = complex(self._coeffs[g])
            rows.append({"g": self.group.nf_to_json(g), "re": c.real, "im": c.imag})
        return {"support": rows}

    @classmethod
    def from_json(cls, group, obj):
        data = {}
        for row in obj["support"]:
            im = row.get("im", 0.0)
            c = complex(row["re"], im) if im else row["re"]
            data[group.nf_from_json(row["g"])] = c
        return cls(group, data)


class AlgebraElement(SparseFunction):
    """f = sum_g a_g delta_g in C_c(G); ``*`` between elements is convolution."""

    __slots__ = ()

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.scale(other)
        return NotImplemented

    def adjoint(self):
        return adjoint(self)


def convolve(f1: AlgebraElement, f2: AlgebraElement) -> AlgebraElement:
    """(f1 * f2)(g) = sum_h f1(h) f2(h^-1 g)."""
    f1._same_group(f2)
    mul = f1.group.mul
    out: dict = {}
    for g, a in f1.items():
        for h, b in f2.items():
            gh = mul(g, h)
            out[gh] = out.get(gh, 0) + a * b
    return AlgebraElement(f1.group, out, check=False)


def convolve_all(fs: Iterable[AlgebraElement]) -> AlgebraElement:
    fs = list(fs)
    if not fs:
        raise ParameterError("need at least one factor")
    out = fs[0]
    for f in fs[1:]:
        out = convolve(out, f)
    return out


def _conj(c):
    return c.conjugate() if isinstance(c, complex) else c


def adjoint(f: AlgebraElement) -> AlgebraElement:
    """f*(g) = conj(f(g^-1))."""
    inv = f.group.inv
    return AlgebraElement(f.group, {inv(g): _conj(c) for g, c in f.items()}, check=False)


def push_forward(f: AlgebraElement, mapping: Callable) -> AlgebraElement:
    """sum_g a_g delta_{mapping(g)}; ``mapping`` must be injective (an automorphism)."""
    return AlgebraElement(f.group, {mapping(g): c for g, c in f.items()}, check=False)


def weighted_l1(f: AlgebraElement, k: int):
    """sum_g l(g)^k |a_g|, an upper bound for L^k(f)."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    length = f.group.length
    return sum(length(g) ** k * abs(c) for g, c in f.items())


def weighted_l2(f: AlgebraElement, k: int) -> float:
    """(sum_g l(g)^2k |a_g|^2)^(1/2) = |Delta^k(f) delta_e|_2, a lower bound for L^k(f)."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    length = f.group.length
    return math.sqrt(sum(float(length(g)) ** (2 * k) * abs(c) ** 2 for g, c in f.items()))


def rapid_decay_weight(f: AlgebraElement, r: float) -> float:
    length = f.group.length
    return math.sqrt(sum(abs(c) ** 2 * (1.0 + length(g)) ** (2 * r) for g, c in f.items()))


def rapid_decay_ratio(f: AlgebraElement, r: float, norm_upper: float) -> float:
    """``norm_upper / (sum |f(g)|^2 (1 + l(g))^(2r))^(1/2)``.

    ``norm_upper`` is an upper estimate of the reduced norm, e.g. the DFT
    oracle on Z^d or ``weighted_l1(f, 0)`` in general.
    """
    denom = rapid_decay_weight(f, r)
    if denom == 0:
        raise ParameterError("rapid-decay ratio undefined for f = 0")
    return float(norm_upper) / denom


def random_element(group: GroupDescriptor, radius: int, size: int, rng, exact: bool = False,
                   complex_coeffs: bool = False) -> AlgebraElement:
    """Random f supported on ``size`` distinct elements of B_radius.

    ``exact`` draws small rationals; otherwise Gaussian coefficients.
    """
    elems = ball(group, radius).elements
    idx = sorted(rng.choice(len(elems), size=min(size, len(elems)), replace=False).tolist())
    data = {}
    for i in idx:
        if exact:
            num = int(rng.integers(-6, 7)) or 1
            data[elems[i]] = Fraction(num, int(rng.integers(1, 5)))
        elif complex_coeffs:
            data[elems[i]] = complex(rng.normal(), rng.normal())
        else:
            data[elems[i]] = float(rng.normal())
    return AlgebraElement(group, data, check=False)
