"""One function per CLI command: run the configured scenarios and judge them.

Every command returns a :class:`CommandReport` whose verdicts carry an anchor
string naming the bound being tested.
"""

from __future__ import annotations

import json
import math
from itertools import product as cartesian

from .algebra import AlgebraElement, random_element, weighted_l1, weighted_l2
from .automorphisms import (
    CAT_MAP,
    Automorphism,
    heisenberg_matrix,
    lipschitz_constant,
    polynomial_length_bound_check,
    spectrum,
)
from .config import ExperimentConfig
from .dimension import default_rapid_decay_exponent, delta_grid, empirical_rapid_decay_constant, mdim_slope_estimate
from .entropy import (
    entropy_lower_estimate,
    entropy_upper_certificate,
    hyperbolic_witness_search,
    product_set_growth,
    signed_sum_cardinalities,
)
from .errors import ConfigError
from .groups import (
    FreeAbelian,
    GroupDescriptor,
    Semidirect,
    ball,
    cache_path,
    descriptor_from_json,
    load_ball_cache,
    random_elements,
    save_ball_cache,
)
from .growth import growth_exponent_fit, growth_sequence
from .operators import (
    ad_inequality_check,
    compressed_norm_lower,
    dft_norm_oracle,
    random_vector,
    seminorm_sandwich,
    verify_leibniz,
)
from .report import CommandReport

LOG2 = math.log(2)


# ---------------------------------------------------------------------------
# config helpers


def make_group(spec) -> GroupDescriptor:
    if isinstance(spec, str):
        spec = GROUP_ALIASES.get(spec)
        if spec is None:
            raise ConfigError("unknown group alias")
    spec = dict(spec)
    if spec.get("phi") == "cat":
        spec["phi"] = [list(r) for r in CAT_MAP]
    return descriptor_from_json(spec)


GROUP_ALIASES = {
    "Z1": {"kind": "free_abelian", "d": 1},
    "Z2": {"kind": "free_abelian", "d": 2},
    "Z3": {"kind": "free_abelian", "d": 3},
    "F2": {"kind": "free", "m": 2},
    "Z2xZ": {"kind": "semidirect", "d": 2, "phi": "minus_identity"},
    "Z3xZ": {"kind": "semidirect", "d": 3, "phi": "minus_identity"},
    "Z2xcatZ": {"kind": "semidirect", "d": 2, "phi": "cat"},
}


def make_automorphism(group: GroupDescriptor, spec) -> Automorphism:
    spec = dict(spec or {"kind": "identity"})
    if spec.get("kind") == "inner" and spec.get("inner_element") == "t":
        return Automorphism.inner(group, group.t)
    return Automorphism.from_json(group, spec)


def make_seed(group: GroupDescriptor, entries, witness=None) -> list:
    out = []
    for e in entries:
        if e == "e":
            out.append(group.identity)
        elif e == "witness":
            if witness is None:
                raise ConfigError("seed uses 'witness' but no witness search is configured")
            out.append((tuple(witness), 0) if isinstance(group, Semidirect) else tuple(witness))
        else:
            out.append(group.nf_from_json(e))
    return out


def _with_cache(config: ExperimentConfig, group: GroupDescriptor):
    """Load a persisted BFS cache for groups without a closed-form length."""
    if config.cache_dir and isinstance(group, Semidirect) and not group.is_plus_minus_identity:
        load_ball_cache(group, cache_path(config.cache_dir, group))


def _save_cache(config: ExperimentConfig, group: GroupDescriptor):
    """Persist the BFS cache unless the file on disk already reaches as far."""
    path = cache_path(config.cache_dir, group)
    if path.exists():
        with path.open() as fh:
            header = json.loads(fh.readline())
        if header.get("descriptor_hash") == group.fingerprint and header.get("radius", -1) >= group.bfs.radius:
            return
    save_ball_cache(group, path)


def _fingerprints(groups) -> dict:
    return {g.name: g.fingerprint for g in groups}


# ---------------------------------------------------------------------------
# growth


def cmd_growth(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("growth")
    section = config.section("growth")
    groups = []
    rows = []
    for sc in section.get("scenarios", []):
        name = sc["name"]
        group = make_group(sc["group"])
        groups.append(group)
        n_max = int(sc["n_max"])
        if config.cache_dir and isinstance(group, Semidirect) and not group.is_plus_minus_identity:
            _with_cache(config, group)
            group.bfs.ensure_radius(n_max)
            seq = [(n, c) for n, c in enumerate(ball(group, n_max).counts)]
            _save_cache(config, group)
        else:
            seq = growth_sequence(group, n_max)
        fit = growth_exponent_fit(seq, tuple(sc["window"]) if "window" in sc else None,
                                  threshold=sc.get("threshold", 0.1))
        rep.results[name] = {"group": group.describe(), "counts": [c for _, c in seq], "fit": fit.to_json()}
        rows.extend((name, n, c) for n, c in seq)
        checks = sc.get("checks", {})
        if checks.get("closed_form"):
            formula = [group.closed_form_ball_count(n) for n, _ in seq]
            rep.check(f"{name}: BFS ball counts equal the closed form", "|B_n(F_m)| = 1 + sum_j 2m(2m-1)^(j-1)",
                      [c for _, c in seq] == formula, [c for _, c in seq][-3:], formula[-3:])
        if "exponent" in checks:
            lo, hi = checks["exponent"]
            ok = fit.kind == "polynomial" and lo <= fit.exponent <= hi
            rep.check(f"{name}: fitted growth exponent", "polynomial growth of degree d on Z^d",
                      ok, fit.exponent, [lo, hi])
        if "max_exponent" in checks:
            bound = checks["max_exponent"]
            ok = fit.kind == "polynomial" and fit.exponent <= bound
            rep.check(f"{name}: fitted growth exponent at most d+1", "Z^d x|_(-I) Z grows with exponent at most d+1",
                      ok, fit.exponent, bound)
        if "exponential_rate" in checks:
            lo, hi = checks["exponential_rate"]
            ok = fit.kind == "exponential" and lo <= fit.rate <= hi
            rep.check(f"{name}: exponential growth rate", "free groups grow like (2m-1)^n", ok, fit.rate, [lo, hi])
        if "min_exponential_rate" in checks:
            bound = checks["min_exponential_rate"]
            ok = fit.kind == "exponential" and fit.rate >= bound
            rep.check(f"{name}: exponential growth", "Z^d x|_psi Z with hyperbolic psi grows exponentially",
                      ok, fit.rate, f">= {bound}")
    rep.table("counts", ["scenario", "n", "ball_size"], rows)
    rep.results["cache_fingerprints"] = _fingerprints(groups)
    return rep


# ---------------------------------------------------------------------------
# leibniz


def cmd_leibniz(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("leibniz")
    section = config.section("leibniz")
    ns = section.get("n", [2, 3, 4])
    ks = section.get("k", [1, 2, 3, 4])
    tuples = int(section.get("tuples", 50))
    radius = int(section.get("support_radius", 2))
    size = int(section.get("support_size", 3))
    n_vectors = int(section.get("vectors", 2))
    combos = list(cartesian(ns, ks))
    rows = []
    for gspec in section.get("groups", ["Z2", "Z2xZ"]):
        group = make_group(gspec)
        rng = config.rng("leibniz", group.fingerprint)
        worst, zero, count = 0.0, True, 0
        for t in range(tuples):
            n, k = combos[t % len(combos)]
            fs = [random_element(group, radius, int(rng.integers(1, size + 1)), rng, exact=True) for _ in range(n)]
            vs = [random_vector(group, radius, int(rng.integers(1, size + 1)), rng, exact=True)
                  for _ in range(n_vectors)]
            res = verify_leibniz(fs, k, vs)
            worst = max(worst, res.max_deviation)
            zero = zero and res.exactly_zero
            count += 1
            rows.append((group.name, t, n, k, res.n_compositions, res.max_deviation, res.exactly_zero))
        # the identity tuple: every term with some r_i > 0 vanishes
        unit = AlgebraElement.delta(group, group.identity)
        v = random_vector(group, radius, size, rng, exact=True)
        trivial = verify_leibniz([unit] * 3, 2, [v])
        rep.results[group.name] = {"tuples": count, "max_deviation": worst, "exactly_zero": zero,
                                   "identity_tuple_zero": trivial.exactly_zero}
        rep.check(f"{group.name}: higher Leibniz rule holds exactly on {count} rational tuples",
                  "Delta^k(f_1...f_n) = sum multinomial(k; r) prod Delta^(r_i)(f_i)", zero, worst, 0)
        rep.check(f"{group.name}: identity tuple", "Delta^k(delta_e ... delta_e) = 0 for k >= 1",
                  trivial.exactly_zero, trivial.max_deviation, 0)
    rep.table("tuples", ["group", "index", "n", "k", "compositions", "deviation", "exact_zero"], rows)
    return rep


# ---------------------------------------------------------------------------
# seminorm


def _sched(x):
    return tuple(int(n) for n in x)


def _seminorm_deltag(config, rep, sec):
    rows = []
    for fam in sec.get("families", []):
        group = make_group(fam["group"])
        rng = config.rng("seminorm", "deltag", group.fingerprint)
        ks = fam.get("k", [1, 2, 3])
        schedule = _sched(fam.get("schedule", [4, 8]))
        tight = True
        elems = random_elements(group, int(fam.get("radius", 8)), int(fam.get("count", 100)), rng)
        for i, g in enumerate(elems):
            f = AlgebraElement.delta(group, g)
            lg = group.length(g)
            for k in ks:
                est = seminorm_sandwich(f, k, schedule, tol=config.power_tol, max_iter=config.iteration_cap)
                ok = est.lower == lg**k and est.upper == lg**k
                tight = tight and ok
                rows.append((group.name, i, lg, k, est.lower, est.upper, ok))
        rep.check(f"{group.name}: sandwich of delta_g is tight", "L^k(delta_g) = l(g)^k",
                  tight, f"{len(elems)} elements x k={ks}", "lower = upper = l(g)^k")
    rep.table("deltag", ["group", "index", "length", "k", "lower", "upper", "tight"], rows)


def _leq(a: float, b: float, rel: float = 1e-12) -> bool:
    # The two weighted norms are summed in different orders, so equal
    # quantities (|supp f| = 1) can differ in the last bit.
    return a <= b + rel * max(abs(a), abs(b))


def _seminorm_sandwich(config, rep, sec):
    groups = [make_group(g) for g in sec.get("groups", ["Z1", "Z2", "Z2xZ"])]
    count = int(sec.get("count", 200))
    k_max = int(sec.get("k_max", 3))
    schedule = _sched(sec.get("schedule", [8, 16, 32]))
    radius, size = int(sec.get("radius", 3)), int(sec.get("size", 5))
    rng = config.rng("seminorm", "sandwich")
    rows = []
    ordered = monotone = True
    raw_dips = 0
    for i in range(count):
        group = groups[i % len(groups)]
        f = random_element(group, radius, int(rng.integers(1, size + 1)), rng)
        k = int(rng.integers(0, k_max + 1))
        est = seminorm_sandwich(f, k, schedule, tol=config.power_tol, max_iter=config.iteration_cap)
        l2, l1 = weighted_l2(f, k), float(weighted_l1(f, k))
        vals = [c["value"] for c in est.details["compressions"]]
        raws = [c["raw"] for c in est.details["compressions"]]
        ordered = ordered and all(_leq(l2, v) and _leq(v, l1) for v in vals)
        monotone = monotone and all(a <= b for a, b in zip(vals, vals[1:]))
        raw_dips += sum(a > b for a, b in zip(raws, raws[1:]))
        rows.append((group.name, i, k, l2, *vals, l1))
    rep.results["sandwich"] = {"count": count, "ordered": ordered, "monotone": monotone,
                               "raw_power_iteration_dips": raw_dips}
    rep.check("weightedL2 <= compressions <= weightedL1", "|Delta^k(f) delta_e| <= L^k(f) <= sum l(g)^k |a_g|",
              ordered, f"{count} random f", "ordered")
    rep.check("compression bounds nondecreasing in N", "compressions of one operator on nested balls",
              monotone, f"{count} random f", "nondecreasing")
    rep.table("sandwich", ["group", "index", "k", "weightedL2", *[f"N={n}" for n in schedule], "weightedL1"], rows)


def _seminorm_dft(config, rep, sec):
    groups = [make_group(g) for g in sec.get("groups", ["Z1", "Z2"])]
    count = int(sec.get("count", 50))
    N = int(sec.get("N", 64))
    radius, size = int(sec.get("radius", 3)), int(sec.get("size", 6))
    tol_low, tol_gap = float(sec.get("lower_slack", 1e-3)), float(sec.get("max_gap", 1e-2))
    rng = config.rng("seminorm", "dft")
    rows = []
    above = below = close = True
    worst_short, worst_gap = 0.0, 0.0
    for i in range(count):
        group = groups[i % len(groups)]
        f = random_element(group, radius, int(rng.integers(1, size + 1)), rng, complex_coeffs=True)
        f = f.scale(1.0 / float(weighted_l1(f, 0)))  # unit l^1 norm, so |f|_red <= 1
        lo, hi = dft_norm_oracle(f)
        c = compressed_norm_lower(f, 0, N, tol=config.power_tol, max_iter=config.iteration_cap)
        gap = lo - c.value
        worst_short = max(worst_short, gap)
        worst_gap = max(worst_gap, gap)
        above = above and c.value >= lo - tol_low
        below = below and c.value <= hi
        close = close and gap <= tol_gap
        rows.append((group.name, i, len(f), c.value, lo, hi, gap, c.iterations, c.flag))
    rep.results["dft"] = {"count": count, "N": N, "max_shortfall": worst_short}
    anchor = "Fourier transform C*_r(Z^d) = C(T^d)"
    rep.check(f"compressed(N={N}) >= DFT lower - {tol_low:g}", anchor, above, worst_short, f"<= {tol_low:g}")
    rep.check(f"compressed(N={N}) <= DFT upper", anchor, below, None, "all")
    rep.check(f"gap to DFT sup at N={N} <= {tol_gap:g}", anchor, close, worst_gap, f"<= {tol_gap:g}")
    rep.table("dft", ["group", "index", "support", "compressed", "dft_lower", "dft_upper", "gap", "iterations", "flag"],
              rows)


def _seminorm_examples(config, rep, sec):
    Z1 = make_group("Z1")
    f = AlgebraElement(Z1, {(1,): 1, (-1,): 1})
    est = seminorm_sandwich(f, 0, (64,), tol=config.power_tol, max_iter=config.iteration_cap)
    rep.check("Z^1, delta_1 + delta_-1, k=0: lower bound at N=64", "sup |2 cos| = 2",
              est.lower >= 1.99 and est.upper == 2, [est.lower, est.upper], ">= 1.99, upper 2")
    group = make_group("Z2xZ")
    for k in (1, 2):
        est = seminorm_sandwich(AlgebraElement.delta(group, group.identity, 3), k, (4,))
        rep.check(f"3 delta_e, k={k}", "L^k vanishes on scalars", est.lower == 0 and est.upper == 0,
                  [est.lower, est.upper], [0, 0])


def _seminorm_ad(config, rep, sec):
    group = make_group(sec.get("group", "Z2xZ"))
    count = int(sec.get("count", 100))
    radius = int(sec.get("radius", 3))
    size = int(sec.get("size", 4))
    k_max = int(sec.get("k_max", 3))
    schedule = _sched(sec.get("schedule", [4, 8]))
    rng = config.rng("seminorm", "ad")
    hs = random_elements(group, radius, count, rng)
    ok, worst, rows = True, 0.0, []
    for i, h in enumerate(hs):
        f = random_element(group, radius, int(rng.integers(1, size + 1)), rng)
        k = int(rng.integers(1, k_max + 1))
        res = ad_inequality_check(h, f, k, schedule)
        ok = ok and res.passed
        worst = max(worst, res.lhs / res.rhs if res.rhs else 0.0)
        rows.append((i, res.h_length, k, res.lhs, res.rhs, res.passed))
    rep.check(f"{group.name}: Ad inequality on {count} random (h, f, k)",
              "L^k(Ad_h f) <= sum_j C(k,j) (2 l(h))^(k-j) L^j(f)", ok, worst, "<= 1")
    rep.table("ad", ["index", "length_h", "k", "lhs", "rhs", "passed"], rows)


def cmd_seminorm(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("seminorm")
    section = config.section("seminorm")
    if "deltag" in section:
        _seminorm_deltag(config, rep, section["deltag"])
    if "sandwich" in section:
        _seminorm_sandwich(config, rep, section["sandwich"])
    if "dft" in section:
        _seminorm_dft(config, rep, section["dft"])
    if section.get("examples", True):
        _seminorm_examples(config, rep, section)
    if "ad" in section:
        _seminorm_ad(config, rep, section["ad"])
    return rep


# ---------------------------------------------------------------------------
# mdim


def cmd_mdim(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("mdim")
    section = config.section("mdim")
    g = section.get("grid", {})
    grid = delta_grid(g.get("lo", 1e-4), g.get("hi", 1e-1), g.get("points", 8))
    slack = float(section.get("slack", 0.05))
    rows = []
    for sc in section.get("scenarios", []):
        name = sc["name"]
        group = make_group(sc["group"])
        k = int(sc["k"])
        r = sc.get("r")
        c_hat = p = None
        if r is not None:
            p = sc.get("p", default_rapid_decay_exponent(r, k))
            c_hat = empirical_rapid_decay_constant(group, p, int(sc.get("c_hat_samples", 200)),
                                                   config.rng("mdim", name))
        est = mdim_slope_estimate(group, k, grid, r=r, c_hat=c_hat, p=p)
        rep.results[name] = {"estimate": est.to_json(), "c_hat": c_hat, "p": p}
        for row in est.rows:
            rows.append((name, *row[:3]))
        if r is not None:
            lo, hi = 1 / k, 2 * r / (2 * k - r)
            ok = lo - slack <= est.lower <= hi + slack
            rep.check(f"{name}: lower-certificate slope in the metric-dimension bracket",
                      "1/k <= Mdim <= 2r/(2k-r)", ok, est.lower, [lo - slack, hi + slack])
        if sc.get("expect_infinite"):
            rep.check(f"{name}: infinite metric-dimension signature", "F_2 has infinite metric dimension",
                      est.infinite_signature, est.details, "second-half slope >= 1.5 x first-half slope")
    rep.table("grid", ["scenario", "delta", "radius", "ball_size"], rows)
    return rep


# ---------------------------------------------------------------------------
# entropy


def _trace_rows(name, trace):
    return [(name, n, c, r) for n, c, r in trace.rows()]


def _entropy_cat(config, rep, sc, rows):
    name = sc["name"]
    group = make_group(sc["group"])
    alpha = make_automorphism(group, sc["automorphism"])
    ws = sc.get("witness", {"search_radius": 2, "n_check": 17})
    wit = hyperbolic_witness_search(alpha.matrix, int(ws["search_radius"]), int(ws["n_check"]))
    seed = make_seed(group, sc.get("seed", ["e", "witness"]), wit.witness)
    trace = product_set_growth(alpha, seed, int(sc["n_max"]), cap=config.cardinality_cap)
    low = entropy_lower_estimate(trace, sc.get("delta", 0.5))
    lip = lipschitz_constant(alpha, int(sc.get("lipschitz_radius", 4)))
    r = sc.get("r", group.d + 1)
    up = entropy_upper_certificate(alpha, "growth", lipschitz=lip, r=r)
    rows.extend(_trace_rows(name, trace))
    rep.results[name] = {"witness": wit.to_json(), "trace": trace.to_json(), "lower": low.to_json(),
                         "lipschitz": lip.to_json(group), "upper": up.to_json()}
    exact = list(trace.cardinalities) == [2**n for n in trace.ns]
    rep.check(f"{name}: |P_n| = 2^n", "distinct signed sums |T^(n)| = 2^(n+1)", exact,
              list(trace.cardinalities[-3:]), [2**n for n in trace.ns[-3:]])
    rep.check(f"{name}: lower estimate = log 2", "Entp >= log 2", abs(low.value - LOG2) <= 1e-6,
              low.value, LOG2)
    rep.check(f"{name}: Lipschitz constant", "l(psi g) <= 3 l(g)", lip.constant == 3 and lip.valid,
              lip.constant, 3)
    rep.check(f"{name}: growth-mode upper certificate", "Entp <= r log(lambda) = 3 log 3",
              up.value == 3 * math.log(3), up.value, 3 * math.log(3))
    rep.check(f"{name}: bracket", "log 2 <= Entp <= 3 log 3",
              LOG2 - 0.01 <= low.value <= up.value, [low.value, up.value], [LOG2 - 0.01, 3 * math.log(3)])


def _entropy_zero(config, rep, sc, rows):
    name = sc["name"]
    group = make_group(sc["group"])
    alpha = make_automorphism(group, sc["automorphism"])
    seed = make_seed(group, sc["seed"])
    n_max = int(sc["n_max"])
    trace = product_set_growth(alpha, seed, n_max, cap=config.cardinality_cap)
    low = entropy_lower_estimate(trace, sc.get("delta", 0.5))
    mode = sc.get("certificate", "growth")
    r = sc.get("r")
    poly = None
    if mode == "polynomial-length":
        vecs = ball(FreeAbelian(group.d), 2).elements
        poly = polynomial_length_bound_check(alpha.matrix, vecs, int(sc.get("poly_n_max", 20)))
    lip = lipschitz_constant(alpha, int(sc.get("lipschitz_radius", 3))) if mode == "growth" else None
    up = entropy_upper_certificate(alpha, mode, lipschitz=lip, r=r, poly_check=poly)
    fit = growth_exponent_fit([(n, c) for n, c in zip(trace.ns, trace.cardinalities)])
    threshold = float(sc.get("max_rate", 0.05))
    rows.extend(_trace_rows(name, trace))
    rep.results[name] = {"trace": trace.to_json(), "lower": low.to_json(), "upper": up.to_json(),
                         "fit": fit.to_json(), "raw_rate_at_n_max": trace.rates[-1]}
    anchor = sc.get("anchor", "zero product entropy")
    rep.check(f"{name}: tail rate estimate at n={trace.ns[-1]} below {threshold:g}", anchor,
              low.value < threshold, low.value, f"< {threshold:g}")
    rep.check(f"{name}: product-set growth is polynomial", anchor, fit.kind == "polynomial",
              {"kind": fit.kind, "exponent": fit.exponent}, "polynomial")
    rep.check(f"{name}: certified upper bound is 0", anchor, up.value == 0.0, up.value, 0.0)


def _entropy_toral(config, rep, sc, rows):
    name = sc["name"]
    group = make_group(sc["group"])
    alpha = make_automorphism(group, sc["automorphism"])
    spec = spectrum(alpha.matrix)
    ceiling = spec.entropy
    slack = float(sc.get("slack", 0.02))
    rep.check(f"{name}: eigenvalue residual", "|det T| = prod |lambda_i|", spec.residual < 1e-6,
              spec.residual, "< 1e-6")
    rates = []
    for j, entries in enumerate(sc["seeds"]):
        seed = make_seed(group, entries)
        trace = product_set_growth(alpha, seed, int(sc["n_max"]), cap=config.cardinality_cap)
        low = entropy_lower_estimate(trace, sc.get("delta", 0.5))
        rates.append(low.value)
        rows.extend(_trace_rows(f"{name}[{j}]", trace))
        rep.results[f"{name}[{j}]"] = {"trace": trace.to_json(), "lower": low.to_json()}
    rep.results[name] = {"ceiling": ceiling, "moduli": list(spec.moduli), "rates": rates}
    rep.check(f"{name}: every seed-set rate below the eigenvalue entropy", "Entp(T) <= sum log|lambda_i|, |lambda_i| >= 1",
              all(r <= ceiling + slack for r in rates), max(rates), f"<= {ceiling + slack}")


def _entropy_free(config, rep, sc, rows):
    name = sc["name"]
    group = make_group(sc["group"])
    alpha = Automorphism.identity(group)
    rates, exact = [], True
    for p in sc.get("p", [1, 2, 3]):
        seed = [tuple(w) for w in cartesian(range(1, group.m + 1), repeat=p)]
        trace = product_set_growth(alpha, seed, int(sc["n_max"]), cap=config.cardinality_cap)
        low = entropy_lower_estimate(trace, sc.get("delta", 0.5))
        exact = exact and list(trace.cardinalities) == [2 ** (p * n) for n in trace.ns]
        rates.append(low.value)
        rows.extend(_trace_rows(f"{name}[p={p}]", trace))
        rep.check(f"{name}: p={p} rate = p log 2", "Entp(id) >= p log 2 for every p",
                  abs(low.value - p * LOG2) <= 0.02, low.value, p * LOG2)
    rep.results[name] = {"rates": rates}
    rep.check(f"{name}: |Omega_p^n| = 2^(pn)", "positive words of length p multiply freely", exact, None, "exact")
    rep.check(f"{name}: rates increase with p", "Entp(id) = infinity on F_2",
              all(a < b for a, b in zip(rates, rates[1:])), rates, "increasing")


def cmd_entropy(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("entropy")
    rows = []
    handlers = {"bracket": _entropy_cat, "zero": _entropy_zero, "toral": _entropy_toral, "free": _entropy_free}
    for sc in config.section("entropy").get("scenarios", []):
        kind = sc.get("type")
        if kind not in handlers:
            raise ConfigError(f"unknown entropy scenario type {kind!r}")
        handlers[kind](config, rep, sc, rows)
    rep.table("traces", ["scenario", "n", "cardinality", "rate"], rows)
    return rep


# ---------------------------------------------------------------------------
# hyperbolic certificate and Lipschitz constants


def _matrix(spec):
    if spec == "cat":
        return CAT_MAP
    if isinstance(spec, str) and spec.startswith("heisenberg"):
        return heisenberg_matrix(int(spec.split(":")[1]))
    if isinstance(spec, str) and spec.startswith("minus_identity"):
        d = int(spec.split(":")[1])
        return tuple(tuple(-int(i == j) for j in range(d)) for i in range(d))
    return tuple(tuple(int(x) for x in row) for row in spec)


def cmd_hyperbolic_cert(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("hyperbolic-cert")
    rows = []
    for sc in config.section("hyperbolic-cert").get("scenarios", []):
        name = sc["name"]
        psi = _matrix(sc["matrix"])
        res = hyperbolic_witness_search(psi, int(sc["search_radius"]), int(sc["n_check"]))
        rep.results[name] = res.to_json()
        expect = sc.get("expect", "witness")
        anchor = "|lambda| >= 2 gives distinct signed sums"
        if expect == "witness":
            full = signed_sum_cardinalities(psi, res.witness, res.n_check) if res.witness else []
            ok = res.hyperbolic and res.witness is not None and full == [2 ** (n + 1) for n in range(res.n_check + 1)]
            rows.extend((name, n, c) for n, c in enumerate(full))
            rep.check(f"{name}: witness with all 2^(n+1) signed sums distinct up to n={res.n_check}", anchor,
                      ok, {"witness": res.witness, "last": full[-1] if full else None}, 2 ** (res.n_check + 1))
        elif expect == "none":
            rep.check(f"{name}: no witness (control)", anchor, res.witness is None, res.witness, None)
        elif expect == "non-hyperbolic":
            rep.check(f"{name}: flagged non-hyperbolic", anchor, not res.hyperbolic, res.max_modulus, "< 2")
    rep.table("cardinalities", ["scenario", "n", "distinct_sums"], rows)
    return rep


def cmd_lipschitz(config: ExperimentConfig) -> CommandReport:
    rep = CommandReport("lipschitz")
    rows = []
    for sc in config.section("lipschitz").get("scenarios", []):
        name = sc["name"]
        if sc.get("type") == "polynomial-length":
            d = int(sc["d"])
            psi = heisenberg_matrix(d)
            rng = config.rng("lipschitz", name)
            vecs = [tuple(int(x) for x in rng.integers(-5, 6, size=d)) for _ in range(int(sc.get("samples", 50)))]
            vecs += [tuple(int(i == j) for j in range(d)) for i in range(d)]
            res = polynomial_length_bound_check(psi, vecs, int(sc.get("n_max", 20)))
            rep.results[name] = {"passed": res.passed, "max_ratio": res.max_ratio, "checked": res.checked}
            rep.check(f"{name}: l(psi^n v) <= d n^(d-1) l(v)", "P(x) = d x^(d-1)", res.passed, res.max_ratio, "<= 1")
            continue
        group = make_group(sc["group"])
        alpha = make_automorphism(group, sc.get("automorphism"))
        cert = lipschitz_constant(alpha, int(sc.get("validation_radius", 4)))
        rep.results[name] = cert.to_json(group)
        rows.append((name, cert.constant, cert.max_observed_ratio, cert.scanned))
        expect = sc["expect"]
        rep.check(f"{name}: Lipschitz constant", sc.get("anchor", "max over generators of l(alpha(s))"),
                  cert.constant == expect and cert.valid, cert.constant, expect)
    rep.table("constants", ["scenario", "constant", "max_observed_ratio", "scanned"], rows)
    return rep


COMMAND_FUNCS = {
    "growth": cmd_growth,
    "leibniz": cmd_leibniz,
    "seminorm": cmd_seminorm,
    "mdim": cmd_mdim,
    "entropy": cmd_entropy,
    "hyperbolic-cert": cmd_hyperbolic_cert,
    "lipschitz": cmd_lipschitz,
}


def run_command(config: ExperimentConfig, name: str) -> CommandReport:
    if name not in COMMAND_FUNCS:
        raise ConfigError(f"unknown command {name!r}")
    return COMMAND_FUNCS[name](config)

