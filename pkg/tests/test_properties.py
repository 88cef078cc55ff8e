"""Property tests for the structural invariants of each module."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqms_lab.algebra import AlgebraElement, adjoint, convolve, random_element, weighted_l1, weighted_l2
from cqms_lab.automorphisms import CAT_MAP, Automorphism, eigen_entropy, hyperbolicity_check, lipschitz_constant
from cqms_lab.dimension import dimension_estimate
from cqms_lab.entropy import entropy_lower_estimate, product_set_growth
from cqms_lab.groups import (
    FreeAbelian,
    FreeGroup,
    Semidirect,
    ball,
    mat_inv_int,
    mat_mul,
    minus_identity,
    sphere_sizes,
)
from cqms_lab.operators import (
    FinVector,
    apply_delta,
    apply_regular,
    compress,
    compressed_norm_lower,
    conjugate,
    dft_norm_oracle,
    random_vector,
    seminorm_sandwich,
    verify_leibniz,
)

GROUPS = {
    "Z1": FreeAbelian(1),
    "Z2": FreeAbelian(2),
    "F2": FreeGroup(2),
    "Z2xZ": Semidirect(minus_identity(2)),
    "Z2xcatZ": Semidirect(CAT_MAP),
}
seeds = st.integers(min_value=0, max_value=2**32 - 1)
group_names = st.sampled_from(sorted(GROUPS))


def rng_of(seed):
    return np.random.default_rng(seed)


def pick(group, radius, rng):
    elems = ball(group, radius).elements
    return elems[int(rng.integers(len(elems)))]


# ---------------------------------------------------------------- word length


@given(group_names, seeds)
def test_length_is_a_metric_norm(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    g, h = pick(G, 5, rng), pick(G, 5, rng)
    assert G.length(G.mul(g, h)) <= G.length(g) + G.length(h)
    assert G.length(G.inv(g)) == G.length(g)
    assert (G.length(g) == 0) == (g == G.identity)


@given(st.sampled_from(["Z1", "Z2", "F2", "Z2xZ"]), seeds)
def test_closed_form_equals_bfs(name, seed):
    G = GROUPS[name]
    g = pick(G, 6, rng_of(seed))
    assert G.closed_form_length(g) == G.bfs_length(g)


@pytest.mark.parametrize("name", ["Z1", "Z2", "F2", "Z2xZ", "Z2xcatZ"])
def test_balls_strictly_increase(name):
    sizes = sphere_sizes(GROUPS[name], 6)
    assert all(s > 0 for s in sizes[1:])


@pytest.mark.parametrize("name", ["Z2", "F2", "Z2xcatZ"])
def test_bfs_layering(name):
    G = GROUPS[name]
    for g in ball(G, 5).elements:
        n = G.length(g)
        if n:
            assert any(G.length(G.mul(g, s)) == n - 1 for s in G.generators)


@given(st.integers(1, 3), st.integers(0, 12))
def test_free_group_counts(m, n):
    G = FreeGroup(m)
    assert G.closed_form_ball_count(n) == 1 + sum(2 * m * (2 * m - 1) ** (j - 1) for j in range(1, n + 1))


# ---------------------------------------------------------------- automorphisms


@given(st.sampled_from(["Z2", "Z2xZ"]), seeds)
def test_automorphisms_are_homomorphisms(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    alphas = [Automorphism.from_matrix(G, CAT_MAP), Automorphism.identity(G)]
    if name == "Z2xZ":
        alphas.append(Automorphism.inner(G, pick(G, 3, rng)))
    g, h = pick(G, 10, rng), pick(G, 10, rng)
    for a in alphas:
        assert a(G.mul(g, h)) == G.mul(a(g), a(h))


@given(seeds)
def test_inner_action_matches_algebra_conjugation(seed):
    G = GROUPS["Z2xZ"]
    rng = rng_of(seed)
    h = pick(G, 3, rng)
    f = random_element(G, 3, 4, rng, exact=True)
    dh = AlgebraElement.delta(G, h)
    assert Automorphism.inner(G, h).on_algebra(f) == dh * f * AlgebraElement.delta(G, G.inv(h))
    assert conjugate(h, f) == dh * f * adjoint(dh)


@given(st.sampled_from(["Z2xZ", "Z2xcatZ"]), seeds)
def test_lipschitz_bound_holds_on_samples(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    alpha = Automorphism.from_matrix(G, CAT_MAP) if name == "Z2xZ" else Automorphism.inner(G, pick(G, 2, rng))
    lam = lipschitz_constant(alpha, validation_radius=2).constant
    g = pick(G, 6, rng)
    assert G.length(alpha(g)) <= lam * G.length(g)


def random_unimodular(rng, d=2, steps=6):
    m = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(steps):
        i, j = rng.choice(d, size=2, replace=False)
        s = int(rng.choice([-1, 1]))
        m[i] = [a + s * b for a, b in zip(m[i], m[j])]
    return tuple(tuple(r) for r in m)


def test_eigen_entropy_inverse_symmetry():
    assert eigen_entropy(CAT_MAP) == pytest.approx(eigen_entropy(mat_inv_int(CAT_MAP)), abs=1e-12)


@given(seeds)
def test_eigen_entropy_inverse_symmetry_random(seed):
    T = random_unimodular(rng_of(seed), d=3)
    assert eigen_entropy(T) == pytest.approx(eigen_entropy(mat_inv_int(T)), abs=1e-8)


@given(seeds, st.sampled_from([CAT_MAP, ((0, -1), (1, 0)), ((1, 1), (0, 1)), ((3, 2), (1, 1))]))
def test_hyperbolicity_conjugation_invariant(seed, T):
    P = random_unimodular(rng_of(seed))
    conj = mat_mul(mat_mul(P, T), mat_inv_int(P))
    a, top_a = hyperbolicity_check(T)
    b, top_b = hyperbolicity_check(conj)
    assert a == b and top_a == pytest.approx(top_b, rel=1e-9)


# ---------------------------------------------------------------- algebra


@given(st.sampled_from(["Z2", "F2", "Z2xZ"]), seeds)
def test_convolution_associative_exact(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    f1, f2, f3 = (random_element(G, 4 if name != "F2" else 3, 4, rng, exact=True) for _ in range(3))
    assert (f1 * f2) * f3 == f1 * (f2 * f3)


@given(group_names, seeds, st.integers(0, 4))
def test_adjoint_preserves_weighted_norms(name, seed, k):
    G = GROUPS[name]
    f = random_element(G, 3, 5, rng_of(seed), complex_coeffs=True)
    assert float(weighted_l1(adjoint(f), k)) == pytest.approx(float(weighted_l1(f, k)), rel=1e-12)
    assert weighted_l2(adjoint(f), k) == pytest.approx(weighted_l2(f, k), rel=1e-12)


@given(group_names, seeds, st.integers(0, 4), st.floats(-5, 5, allow_nan=False))
def test_single_support_l2_below_l1(name, seed, k, c):
    G = GROUPS[name]
    f = AlgebraElement(G, {pick(G, 4, rng_of(seed)): c})
    assert weighted_l2(f, k) <= float(weighted_l1(f, k)) * (1 + 1e-12)


@given(group_names, seeds)
def test_convolution_support(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    f1, f2 = random_element(G, 3, 4, rng), random_element(G, 3, 4, rng)
    allowed = {G.mul(g, h) for g in f1.support for h in f2.support}
    assert set(convolve(f1, f2).support) <= allowed


# ---------------------------------------------------------------- operators


@given(group_names, seeds)
def test_delta_zero_is_regular(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    f, v = random_element(G, 3, 4, rng, exact=True), random_vector(G, 3, 4, rng, exact=True)
    assert apply_delta(f, 0, v) == apply_regular(f, v)


@given(group_names, seeds)
def test_regular_representation_bounded_by_l1(name, seed):
    G = GROUPS[name]
    rng = rng_of(seed)
    f, v = random_element(G, 3, 4, rng), random_vector(G, 3, 5, rng)
    assert apply_regular(f, v).norm2() <= float(weighted_l1(f, 0)) * v.norm2() * (1 + 1e-12)


@settings(max_examples=25)
@given(st.sampled_from(["Z1", "Z2", "F2", "Z2xZ"]), seeds, st.integers(0, 3))
def test_compressions_monotone_and_bounded(name, seed, k):
    G = GROUPS[name]
    f = random_element(G, 2, 3, rng_of(seed))
    schedule = (1, 2, 3) if name == "F2" else (2, 4, 8)
    est = seminorm_sandwich(f, k, schedule)
    vals = [c["value"] for c in est.details["compressions"]]
    up = float(weighted_l1(f, k))
    assert vals == sorted(vals)
    assert all(v <= up * (1 + 1e-12) for v in vals)
    assert est.lower <= est.upper


@given(group_names, seeds, st.integers(1, 3))
def test_deltag_tight(name, seed, k):
    G = GROUPS[name]
    g = pick(G, 4, rng_of(seed))
    est = seminorm_sandwich(AlgebraElement.delta(G, g), k, (1,))
    assert est.lower == est.upper == G.length(g) ** k


@settings(max_examples=30)
@given(st.sampled_from(["Z1", "Z2"]), seeds, st.sampled_from([2, 8, 16]))
def test_compression_below_dft_upper(name, seed, N):
    G = GROUPS[name]
    f = random_element(G, 3, 5, rng_of(seed), complex_coeffs=True)
    assert compressed_norm_lower(f, 0, N).value <= dft_norm_oracle(f)[1]


@settings(max_examples=20)
@given(st.sampled_from(["Z2", "Z2xZ"]), seeds, st.integers(2, 4), st.integers(1, 4))
def test_leibniz_exact(name, seed, n, k):
    G = GROUPS[name]
    rng = rng_of(seed)
    fs = [random_element(G, 2, 2, rng, exact=True) for _ in range(n)]
    vs = [random_vector(G, 1, 2, rng, exact=True)]
    assert verify_leibniz(fs, k, vs).exactly_zero


@given(st.sampled_from(["Z2", "F2", "Z2xZ"]), seeds)
def test_compression_of_selfadjoint_is_hermitian(name, seed):
    G = GROUPS[name]
    f = random_element(G, 2, 3, rng_of(seed), complex_coeffs=True)
    h = f + adjoint(f)
    op = compress(h, 0, 2)
    row = {g: i for i, g in enumerate(op.codomain)}
    square = op.matrix.toarray()[[row[g] for g in op.domain], :]
    assert np.allclose(square, square.conj().T, atol=1e-12)


# ---------------------------------------------------------------- dimension


@given(st.integers(1, 6), st.integers(1, 6), seeds, st.floats(0.01, 3.0))
def test_dimension_bounds_ordered(rows, cols, seed, delta):
    m = rng_of(seed).normal(size=(rows, cols))
    est = dimension_estimate(m, delta)
    assert 0 <= est.lower <= est.upper <= min(rows, cols)


@given(st.integers(1, 6), st.integers(1, 6), seeds, st.floats(0.01, 1.5), st.floats(0.01, 1.5))
def test_dimension_monotone_in_delta(rows, cols, seed, d1, d2):
    m = rng_of(seed).normal(size=(rows, cols))
    small, large = sorted((d1, d2))
    a, b = dimension_estimate(m, small), dimension_estimate(m, large)
    assert b.upper <= a.upper and b.lower <= a.lower


@given(st.integers(1, 12), st.floats(0.01, 0.99))
def test_dimension_of_orthonormal_family(m, delta):
    G = GROUPS["Z1"]
    est = dimension_estimate([FinVector(G, {(i,): 1}) for i in range(m)], delta)
    assert est.lower == math.ceil((1 - Fraction(delta) ** 2) * m)
    assert est.upper == m


# ---------------------------------------------------------------- product sets


def seed_set(G, rng, radius, size, with_identity):
    elems = list(ball(G, radius).elements)
    out = [elems[i] for i in sorted(rng.choice(len(elems), size=min(size, len(elems)), replace=False))]
    if with_identity and G.identity not in out:
        out[0] = G.identity
    return out


@settings(max_examples=30)
@given(st.sampled_from(["Z2", "Z2xZ"]), seeds, st.integers(2, 4))
def test_product_sets_nested_and_submultiplicative(name, seed, size):
    G = GROUPS[name]
    alpha = Automorphism.from_matrix(G, CAT_MAP)
    omega = seed_set(G, rng_of(seed), 1, size, with_identity=True)
    cards = product_set_growth(alpha, omega, 7).cardinalities
    assert all(a <= b for a, b in zip(cards, cards[1:]))
    assert all(b <= a * len(omega) for a, b in zip(cards, cards[1:]))


@settings(max_examples=30)
@given(seeds, st.integers(2, 3))
def test_product_sets_monotone_in_seed(seed, size):
    G = GROUPS["Z2"]
    rng = rng_of(seed)
    alpha = Automorphism.from_matrix(G, CAT_MAP)
    omega = seed_set(G, rng, 2, size, with_identity=False)
    extra = next(g for g in ball(G, 2).elements if g not in omega)
    a = product_set_growth(alpha, omega, 8).cardinalities
    b = product_set_growth(alpha, omega + [extra], 8).cardinalities
    assert all(x <= y for x, y in zip(a, b))


@settings(max_examples=20)
@given(seeds)
def test_lower_estimate_independent_of_delta(seed):
    G = GROUPS["Z2"]
    omega = seed_set(G, rng_of(seed), 1, 3, with_identity=True)
    trace = product_set_growth(Automorphism.from_matrix(G, CAT_MAP), omega, 10)
    assert entropy_lower_estimate(trace, 0.1).value == entropy_lower_estimate(trace, 0.9).value


@pytest.mark.xfail(strict=True, reason="finite-n transient: tail increments approach log(lambda) from above")
def test_abelian_ceiling_for_every_seed_set():
    G = GROUPS["Z2"]
    trace = product_set_growth(Automorphism.from_matrix(G, CAT_MAP), [(-2, 0), (0, -1), (0, 2)], 16, cap=10**6)
    assert entropy_lower_estimate(trace).value <= eigen_entropy(CAT_MAP) + 0.02


@pytest.mark.xfail(strict=True, reason="the tail-increment estimator is not monotone in the seed set")
def test_lower_estimate_monotone_in_seed_set():
    G = GROUPS["Z2"]
    alpha = Automorphism.from_matrix(G, CAT_MAP)
    small = [(-1, 0), (-1, 1), (1, -1)]
    a = entropy_lower_estimate(product_set_growth(alpha, small, 16, cap=10**6)).value
    b = entropy_lower_estimate(product_set_growth(alpha, small + [(0, -1)], 16, cap=10**6)).value
    assert b >= a
