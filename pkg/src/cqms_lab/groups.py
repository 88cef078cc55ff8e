"""Finitely generated groups as exact word machines.

Three families are supported, each with a canonical normal form that is a
plain hashable tuple so that sets and dicts of elements hash cheaply:

* ``FreeAbelian(d)``: ``Z^d``, normal form is a length-``d`` tuple of ints.
* ``FreeGroup(m)``: ``F_m``, normal form is a reduced word given as a tuple of
  nonzero ints, ``+i`` for the generator ``a_i`` and ``-i`` for its inverse.
* ``Semidirect(phi)``: ``Z^d x|_phi Z``, normal form is ``(v, k)`` with ``v`` a
  length-``d`` tuple, multiplied by ``(v, k)(w, m) = (v + phi^k w, k + m)``.

Word lengths are taken with respect to the symmetric generating sets listed in
each class.  Where a closed form exists it is used; otherwise the length comes
from a memoised breadth-first search of the Cayley graph.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import (
    GroupMismatchError,
    HorizonExceededError,
    ParameterError,
    ResourceLimitError,
)

CACHE_FORMAT_VERSION = 1
DEFAULT_MAX_ELEMENTS = 5_000_000
DEFAULT_MAX_RADIUS = 64


# --------------------------------------------------------------------------
# integer matrix helpers (pure Python ints, so no overflow)


def as_int_matrix(rows) -> tuple[tuple[int, ...], ...]:
    mat = tuple(tuple(int(x) for x in row) for row in rows)
    if not mat or any(len(row) != len(mat) for row in mat):
        raise ParameterError(f"expected a nonempty square matrix, got {rows!r}")
    return mat


def identity_matrix(d: int):
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def mat_mul(a, b):
    n, m = len(a), len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(m)) for i in range(n)
    )


def mat_vec(a, v):
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_det(a) -> int:
    """Exact determinant by fraction-free Gaussian elimination."""
    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for j in range(c, n):
                    m[r][j] -= f * m[c][j]
    return int(det)


def mat_inv_int(a):
    """Inverse of a unimodular integer matrix (raises if it is not in GL_d(Z))."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ParameterError("matrix is singular")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [x / p for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    inv = [row[n:] for row in m]
    if any(x.denominator != 1 for row in inv for x in row):
        raise ParameterError("matrix is not invertible over the integers")
    return tuple(tuple(int(x) for x in row) for row in inv)


def mat_pow(a, k: int):
    if k < 0:
        return mat_pow(mat_inv_int(a), -k)
    result = identity_matrix(len(a))
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


# --------------------------------------------------------------------------
# descriptors


class GroupDescriptor:
    """A finitely generated group with a fixed symmetric generating set.

    Elements are normal-form tuples; all arithmetic goes through the
    descriptor so that the same tuple type can serve several groups.
    """

    kind: str = ""

    def __init__(self, name: str, max_elements: int = DEFAULT_MAX_ELEMENTS,
                 max_radius: int = DEFAULT_MAX_RADIUS):
        self.name = name
        self.max_elements = max_elements
        self.max_radius = max_radius
        self._bfs: BFSLengthCache | None = None

    # -- subclass interface -------------------------------------------------
    @property
    def identity(self):
        raise NotImplementedError

    @property
    def generators(self) -> tuple:
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, g):
        raise NotImplementedError

    def check(self, g) -> None:
        """Raise GroupMismatchError unless ``g`` is a canonical normal form here."""
        raise NotImplementedError

    def closed_form_length(self, g) -> int | None:
        return None

    def closed_form_ball_count(self, n: int) -> int | None:
        return None

    def params(self) -> dict:
        raise NotImplementedError

    def nf_to_json(self, g):
        raise NotImplementedError

    def nf_from_json(self, obj):
        raise NotImplementedError

    # -- shared machinery ---------------------------------------------------
    def describe(self) -> dict:
        return {"kind": self.kind, "name": self.name, **self.params()}

    @property
    def fingerprint(self) -> str:
        blob = json.dumps({"kind": self.kind, **self.params()}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, GroupDescriptor) and self.describe_key() == other.describe_key()

    def __hash__(self):
        return hash(self.describe_key())

    def describe_key(self):
        return (self.kind, json.dumps(self.params(), sort_keys=True))

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"

    def multiply(self, a, b):
        """Checked product; raises GroupMismatchError on foreign operands."""
        self.check(a)
        self.check(b)
        return self.mul(a, b)

    def product(self, elements: Iterable):
        out = self.identity
        for g in elements:
            out = self.mul(out, g)
        return out

    def power(self, g, n: int):
        if n < 0:
            g, n = self.inv(g), -n
        out = self.identity
        base = g
        while n:
            if n & 1:
                out = self.mul(out, base)
            base = self.mul(base, base)
            n >>= 1
        return out

    def neighbors(self, g):
        """Right multiples of ``g`` by every generator, in generator order."""
        return [self.mul(g, s) for s in self.generators]

    @property
    def bfs(self) -> "BFSLengthCache":
        if self._bfs is None:
            self._bfs = BFSLengthCache(self, self.max_elements, self.max_radius)
        return self._bfs

    def length(self, g) -> int:
        """Word length of ``g``; closed form when available, else BFS."""
        value = self.closed_form_length(g)
        if value is not None:
            return value
        return self.bfs.length(g)

    def bfs_length(self, g) -> int:
        return self.bfs.length(g)


class FreeAbelian(GroupDescriptor):
    """Z^d with generators +-e_1, ..., +-e_d; word length is the l1 norm."""

    kind = "free_abelian"

    def __init__(self, d: int, name: str | None = None, **kw):
        if d < 1:
            raise ParameterError("dimension must be positive")
        self.d = int(d)
        super().__init__(name or f"Z^{d}", **kw)
        self._identity = (0,) * self.d
        gens = []
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            gens.append(tuple(e))
            e[i] = -1
            gens.append(tuple(e))
        self._gens = tuple(gens)

    @property
    def identity(self):
        return self._identity

    @property
    def generators(self):
        return self._gens

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, g):
        return tuple(-x for x in g)

    def check(self, g):
        if not (isinstance(g, tuple) and len(g) == self.d and all(isinstance(x, int) for x in g)):
            raise GroupMismatchError(f"{g!r} is not an element of {self.name}")

    def closed_form_length(self, g):
        return sum(abs(x) for x in g)

    def closed_form_ball_count(self, n):
        # lattice points of the l1 ball: sum_i 2^i C(d,i) C(n,i)
        from math import comb

        return sum(2**i * comb(self.d, i) * comb(n, i) for i in range(self.d + 1))

    def params(self):
        return {"d": self.d}

    def nf_to_json(self, g):
        return list(g)

    def nf_from_json(self, obj):
        g = tuple(int(x) for x in obj)
        self.check(g)
        return g


class FreeGroup(GroupDescriptor):
    """F_m on a_1..a_m; reduced words, letter ``i`` is a_i and ``-i`` its inverse."""

    kind = "free"

    def __init__(self, m: int, name: str | None = None, **kw):
        if m < 1:
            raise ParameterError("rank must be positive")
        self.m = int(m)
        super().__init__(name or f"F_{m}", **kw)
        self._gens = tuple((s * i,) for i in range(1, self.m + 1) for s in (1, -1))

    @property
    def identity(self):
        return ()

    @property
    def generators(self):
        return self._gens

    def mul(self, a, b):
        i = 0
        n = min(len(a), len(b))
        while i < n and a[-1 - i] == -b[i]:
            i += 1
        return a[: len(a) - i] + b[i:]

    def inv(self, g):
        return tuple(-x for x in reversed(g))

    def check(self, g):
        ok = isinstance(g, tuple) and all(isinstance(x, int) and 0 < abs(x) <= self.m for x in g)
        if not ok or any(g[i] == -g[i + 1] for i in range(len(g) - 1)):
            raise GroupMismatchError(f"{g!r} is not a reduced word of {self.name}")

    def neighbors(self, g):
        last = g[-1] if g else 0
        return [g + s if s[0] != -last else g[:-1] for s in self._gens]

    def closed_form_length(self, g):
        return len(g)

    def closed_form_ball_count(self, n):
        m = self.m
        return 1 + sum(2 * m * (2 * m - 1) ** (j - 1) for j in range(1, n + 1))

    def params(self):
        return {"m": self.m}

    def nf_to_json(self, g):
        return list(g)

    def nf_from_json(self, obj):
        g = tuple(int(x) for x in obj)
        self.check(g)
        return g

    def word(self, letters: str):
        """Parse letters such as ``"abA"``; upper case means inverse."""
        out = ()
        for ch in letters:
            idx = ord(ch.lower()) - ord("a") + 1
            if not 1 <= idx <= self.m:
                raise ParameterError(f"letter {ch!r} is not a generator of {self.name}")
            out = self.mul(out, (idx if ch.islower() else -idx,))
        return out


class Semidirect(GroupDescriptor):
    """Z^d x|_phi Z with generators +-x_1, ..., +-x_d, +-t and t x t^-1 = phi(x)."""

    kind = "semidirect"

    def __init__(self, phi, name: str | None = None, closed_form_validation_radius: int = 6, **kw):
        self.phi = as_int_matrix(phi)
        self.d = len(self.phi)
        if abs(mat_det(self.phi)) != 1:
            raise ParameterError("phi must have determinant +-1")
        if name is None:
            label = {minus_identity(self.d): "-I", identity_matrix(self.d): "I"}.get(self.phi, "phi")
            name = f"Z^{self.d} x|_{label} Z"
        super().__init__(name, **kw)
        self._identity = ((0,) * self.d, 0)
        gens = []
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            gens.append((tuple(e), 0))
            e[i] = -1
            gens.append((tuple(e), 0))
        gens.append(((0,) * self.d, 1))
        gens.append(((0,) * self.d, -1))
        self._gens = tuple(gens)
        self._powers = {0: identity_matrix(self.d), 1: self.phi}
        self.closed_form_validation_radius = closed_form_validation_radius
        self._closed_form_ok: bool | None = None
        ident = identity_matrix(self.d)
        self._pm_identity = self.phi in (ident, tuple(tuple(-x for x in row) for row in ident))

    def phi_power(self, k: int):
        mat = self._powers.get(k)
        if mat is None:
            mat = mat_pow(self.phi, k)
            self._powers[k] = mat
        return mat

    @property
    def identity(self):
        return self._identity

    @property
    def generators(self):
        return self._gens

    def act(self, k: int, w):
        """phi^k applied to the vector ``w``."""
        if k == 0:
            return w
        return mat_vec(self.phi_power(k), w)

    def mul(self, a, b):
        (v, k), (w, m) = a, b
        w = self.act(k, w)
        return (tuple(x + y for x, y in zip(v, w)), k + m)

    def inv(self, g):
        v, k = g
        w = self.act(-k, v)
        return (tuple(-x for x in w), -k)

    def check(self, g):
        ok = (
            isinstance(g, tuple)
            and len(g) == 2
            and isinstance(g[0], tuple)
            and len(g[0]) == self.d
            and all(isinstance(x, int) for x in g[0])
            and isinstance(g[1], int)
        )
        if not ok:
            raise GroupMismatchError(f"{g!r} is not an element of {self.name}")

    def neighbors(self, g):
        v, k = g
        cols = self.phi_power(k)
        out = []
        for i in range(self.d):
            out.append((tuple(v[r] + cols[r][i] for r in range(self.d)), k))
            out.append((tuple(v[r] - cols[r][i] for r in range(self.d)), k))
        out.append((v, k + 1))
        out.append((v, k - 1))
        return out

    @property
    def is_plus_minus_identity(self) -> bool:
        return self._pm_identity

    def conjectured_length(self, g) -> int:
        """The candidate formula ``|v|_1 + |k|``; exact only once validated."""
        v, k = g
        return sum(abs(x) for x in v) + abs(k)

    def validate_closed_form(self, radius: int | None = None) -> bool:
        """Compare the candidate formula with BFS on the whole ball of ``radius``."""
        radius = self.closed_form_validation_radius if radius is None else radius
        cache = self.bfs
        cache.ensure_radius(radius)
        ok = all(self.conjectured_length(g) == n for g, n in cache.items() if n <= radius)
        self._closed_form_ok = ok
        return ok

    def closed_form_length(self, g):
        # only offered for phi = +-I, and only after BFS has confirmed it
        if not self.is_plus_minus_identity:
            return None
        if self._closed_form_ok is None:
            self.validate_closed_form()
        return self.conjectured_length(g) if self._closed_form_ok else None

    def params(self):
        return {"d": self.d, "phi": [list(row) for row in self.phi]}

    def nf_to_json(self, g):
        return [list(g[0]), g[1]]

    def nf_from_json(self, obj):
        g = (tuple(int(x) for x in obj[0]), int(obj[1]))
        self.check(g)
        return g

    def vec(self, *v):
        return (tuple(v), 0)

    @property
    def t(self):
        return ((0,) * self.d, 1)


def minus_identity(d: int):
    return tuple(tuple(-int(i == j) for j in range(d)) for i in range(d))


def descriptor_from_json(obj: Mapping) -> GroupDescriptor:
    kind = obj.get("kind")
    name = obj.get("name")
    kw = {k: obj[k] for k in ("max_elements", "max_radius") if k in obj}
    if kind == "free_abelian":
        return FreeAbelian(obj["d"], name=name, **kw)
    if kind == "free":
        return FreeGroup(obj["m"], name=name, **kw)
    if kind == "semidirect":
        phi = obj.get("phi")
        if phi is None or phi == "minus_identity":
            phi = minus_identity(obj["d"])
        return Semidirect(phi, name=name, **kw)
    raise ParameterError(f"unknown group kind {kind!r}")


# --------------------------------------------------------------------------
# breadth-first search


class BFSLengthCache:
    """Memoised BFS over the Cayley graph, grown one layer at a time."""

    def __init__(self, group: GroupDescriptor, max_elements: int, max_radius: int):
        self.group = group
        self.max_elements = max_elements
        self.max_radius = max_radius
        self._lengths = {group.identity: 0}
        self._frontier = [group.identity]
        self.radius = 0  # every element of length <= radius is present

    def __len__(self):
        return len(self._lengths)

    def items(self):
        return self._lengths.items()

    def _grow(self):
        r = self.radius + 1
        lengths = self._lengths
        new = []
        for g in self._frontier:
            for h in self.group.neighbors(g):
                if h not in lengths:
                    lengths[h] = r
                    new.append(h)
            if len(lengths) > self.max_elements:
                # roll back the partial layer so the cache stays consistent
                for h in new:
                    del lengths[h]
                raise ResourceLimitError(
                    f"ball of {self.group.name} exceeds {self.max_elements} elements "
                    f"while building radius {r}",
                    partial_radius=self.radius,
                )
        self._frontier = new
        self.radius = r

    def ensure_radius(self, n: int):
        while self.radius < n:
            self._grow()

    def length(self, g) -> int:
        value = self._lengths.get(g)
        while value is None:
            if self.radius >= self.max_radius:
                raise HorizonExceededError(
                    f"{g!r} has length > {self.radius} in {self.group.name}; "
                    f"needs radius >= {self.radius + 1} beyond max_radius={self.max_radius}",
                    required_radius=self.radius + 1,
                )
            self._grow()
            value = self._lengths.get(g)
        return value

    def load(self, lengths: Mapping, radius: int):
        self._lengths = dict(lengths)
        self.radius = radius
        self._frontier = [g for g, n in self._lengths.items() if n == radius]


@dataclass(frozen=True)
class Ball:
    """All elements of word length at most ``radius``, in lexicographic order."""

    group: GroupDescriptor
    radius: int
    elements: tuple
    lengths: Mapping = field(repr=False)
    counts: tuple  # counts[n] = |B_n| for n <= radius

    def __len__(self):
        return len(self.elements)

    def __contains__(self, g):
        return g in self.lengths

    def __iter__(self):
        return iter(self.elements)

    def index(self) -> dict:
        return {g: i for i, g in enumerate(self.elements)}


def ball(group: GroupDescriptor, n: int) -> Ball:
    """Enumerate ``B_n`` exactly by BFS layering."""
    if n < 0:
        raise ParameterError("radius must be nonnegative")
    memo = group.__dict__.setdefault("_balls", {})
    if n in memo:
        return memo[n]
    cache = group.bfs
    cache.ensure_radius(n)
    lengths = {g: r for g, r in cache.items() if r <= n}
    per_layer = [0] * (n + 1)
    for r in lengths.values():
        per_layer[r] += 1
    counts, total = [], 0
    for c in per_layer:
        total += c
        counts.append(total)
    out = Ball(group, n, tuple(sorted(lengths)), MappingProxyType(lengths), tuple(counts))
    memo[n] = out
    return out


def sphere_sizes(group: GroupDescriptor, n_max: int, max_layer: int | None = None) -> list[int]:
    """Sizes of the spheres S_0..S_n_max, keeping only three BFS layers alive.

    Valid because neighbours of S_n lie in S_{n-1}, S_n or S_{n+1}.
    """
    max_layer = group.max_elements if max_layer is None else max_layer
    prev, cur = set(), {group.identity}
    sizes = [1]
    for r in range(1, n_max + 1):
        nxt = set()
        for g in cur:
            for h in group.neighbors(g):
                if h not in cur and h not in prev:
                    nxt.add(h)
            if len(nxt) > max_layer:
                raise ResourceLimitError(
                    f"sphere {r} of {group.name} exceeds {max_layer} elements", partial_radius=r - 1
                )
        prev, cur = cur, nxt
        sizes.append(len(cur))
    return sizes


# --------------------------------------------------------------------------
# persisted caches (JSON lines)


def save_ball_cache(group: GroupDescriptor, path, radius: int | None = None) -> Path:
    """Write the BFS cache up to ``radius`` as JSON lines: header then one record per element."""
    cache = group.bfs
    radius = cache.radius if radius is None else radius
    cache.ensure_radius(radius)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = sorted((g, n) for g, n in cache.items() if n <= radius)
    with path.open("w") as fh:
        header = {
            "format_version": CACHE_FORMAT_VERSION,
            "descriptor": group.describe(),
            "descriptor_hash": group.fingerprint,
            "radius": radius,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for g, n in rows:
            fh.write(json.dumps({"normal_form": group.nf_to_json(g), "length": n}) + "\n")
    return path


def load_ball_cache(group: GroupDescriptor, path) -> bool:
    """Load a cache written by :func:`save_ball_cache`.

    Returns False (and leaves the group untouched) when the file is missing,
    has another format version, or was written for a different descriptor.
    """
    path = Path(path)
    if not path.exists():
        return False
    with path.open() as fh:
        header = json.loads(fh.readline())
        if header.get("format_version") != CACHE_FORMAT_VERSION:
            return False
        if header.get("descriptor_hash") != group.fingerprint:
            return False
        radius = int(header["radius"])
        if group.bfs.radius >= radius:
            return True
        lengths = {}
        for line in fh:
            rec = json.loads(line)
            lengths[group.nf_from_json(rec["normal_form"])] = int(rec["length"])
    group.bfs.load(lengths, radius)
    return True


def cache_path(cache_dir, group: GroupDescriptor) -> Path:
    return Path(cache_dir) / f"ball-{group.kind}-{group.fingerprint}.jsonl"


def random_elements(group: GroupDescriptor, radius: int, count: int, rng) -> list:
    """``count`` elements drawn uniformly (with replacement) from ``B_radius``."""
    elems = ball(group, radius).elements
    idx = rng.integers(0, len(elems), size=count)
    return [elems[i] for i in idx]


def random_subset(elements: Sequence, size: int, rng) -> list:
    idx = rng.choice(len(elements), size=min(size, len(elements)), replace=False)
    return [elements[i] for i in sorted(idx)]
