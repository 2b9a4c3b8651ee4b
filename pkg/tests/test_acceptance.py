"""End-to-end acceptance checks.  Each test prints (and records for the
terminal summary) a single PASS/FAIL line."""

import time
from itertools import product

import numpy as np

from affinitylab.affinity import (AffinityState, Permutation, Verdict, classify_coaffinity,
                                  compute_vf, count_affinity, transposition_formula)
from affinitylab.cli import run
from affinitylab.constructions import (fixture, inverse_map, lift_perm, product_perm,
                                       random_permutation, transposition)
from affinitylab.field import is_prime_power
from affinitylab.geometry import count_flats
from affinitylab.groups import (coset_intersection_count, group_orders, minimal_coaffinity_count,
                                transposition_distance_two, transposition_distance_two_batch)
from affinitylab.inequalities import check_lemma32, check_lemma34, sweep
from affinitylab.search import (SearchConfig, all_permutations, exhaustive_affinities,
                                exhaustive_spectrum, random_spectrum)
from affinitylab.walsh import BoolFun, fourth_moment, parseval_check, walsh_transform

# 2-spectrum(4,2) as listed in the literature: 5..20, 22, 24..26, 28, 30, 32, 36, 38,
# 44, 48, 52, 56, 76, 84, 140
LISTED_4_2_2 = (set(range(5, 21)) | {22, 24, 25, 26, 28, 30, 32, 36, 38, 44, 48, 52, 56, 76, 84,
                                     140})
# the partial 2-spectrum(6,2) listed alongside it starts at 21
FIRST_LISTED_6_2_2 = 21


def test_c1_exhaustive_spectrum_q3_n2_k1(report):
    t = time.perf_counter()
    res = exhaustive_spectrum(2, 3, 1)
    verified = res.verify("naive")
    dt = time.perf_counter() - t
    ok = res.values == [0, 1, 2, 3, 4, 6, 12] and verified and res.budget_used == 362880 \
        and dt <= 120
    assert report("C1", ok, f"1-spectrum(2,3) = {res.values}, witnesses verified={verified}, "
                  f"{res.budget_used} perms in {dt:.1f}s")


def test_c2_exhaustive_spectrum_q2_n3_k2(report):
    t = time.perf_counter()
    res = exhaustive_spectrum(3, 2, 2)
    dt = time.perf_counter() - t
    ok = res.values == [0, 2, 6, 14] and res.verify("naive") and res.budget_used == 40320 \
        and dt <= 10
    assert report("C2", ok, f"2-spectrum(3,2) = {res.values} over {res.budget_used} perms "
                  f"in {dt:.2f}s")


def test_c3_minimal_coaffinity_n3(report):
    t = time.perf_counter()
    perms = all_permutations(8)
    co = 14 - exhaustive_affinities(3, 2, 2, perms)
    at8 = co == 8
    members = transposition_distance_two_batch(perms, 3, 2)
    gap = int(np.count_nonzero((co > 0) & (co < 8)))
    # spot-check the single-permutation routine on part of the set
    single = all(transposition_distance_two(Permutation(3, 2, p, check=False)) is not None
                 for p in perms[at8][::97])
    dt = time.perf_counter() - t
    ok = (int(at8.sum()) == 9408 and np.array_equal(members, at8) and gap == 0 and single
          and dt <= 60)
    assert report("C3", ok, f"{int(at8.sum())} perms with 2-coaffinity 8, double coset matches="
                  f"{np.array_equal(members, at8)}, {gap} in (0,8), {dt:.1f}s")


def test_c4_inverse_map(report):
    t = time.perf_counter()
    rows = []
    ok = True
    for n in range(3, 11):
        f = inverse_map(n)
        fast = count_affinity(f, 2, "fast")
        stream = count_affinity(f, 2, "stream")
        want = 0 if n % 2 else (2 ** n - 1) // 3
        ok &= fast == stream == want
        rows.append(f"{n}:{fast}")
    dt = time.perf_counter() - t
    ok &= count_affinity(inverse_map(6), 2) == FIRST_LISTED_6_2_2 and dt <= 300
    assert report("C4", ok, f"inverse-map 2-affinity {' '.join(rows)} (two routes) in {dt:.0f}s")


def _c5_cases():
    for q in (2, 3, 4, 5):
        for n in range(2, 40):
            ks = [k for k in range(1, n) if count_flats(n, k, q) <= 10 ** 6]
            if not ks and n > 2:
                break  # flat counts only grow with n
            for k in ks:
                yield n, k, q


def test_c5_transposition_formula(report):
    t = time.perf_counter()
    cases = list(_c5_cases())
    rng = np.random.default_rng(5)
    bad = []
    for n, k, q in cases:
        u, v = (int(x) for x in rng.choice(q ** n, size=2, replace=False))
        direct = count_affinity(transposition(n, q, u, v), k, "stream")
        if direct != transposition_formula(n, k, q)[0]:
            bad.append((n, k, q))
    dt = time.perf_counter() - t
    assert report("C5", not bad, f"{len(cases) - len(bad)}/{len(cases)} (n,k,q) cases with "
                  f"count_flats <= 10^6 match exactly, {dt:.1f}s" + (f"; bad {bad}" if bad else ""))


def test_c6_threshold_q3_n2(report):
    t = time.perf_counter()
    perms = all_permutations(9)
    co = 12 - exhaustive_affinities(2, 3, 1, perms)
    verdicts = {v: 0 for v in Verdict}
    for value, count in zip(*np.unique(co, return_counts=True)):
        verdicts[classify_coaffinity(int(value), 2, 1, 3).classification] += int(count)
    at6 = co == 6
    members = transposition_distance_two_batch(perms, 2, 3)
    dt = time.perf_counter() - t
    below = verdicts[Verdict.BELOW_THRESHOLD_COUNTEREXAMPLE]
    same = np.array_equal(members, at6)
    assert report("C6", below == 0 and same,
                  f"{below} counterexamples over {len(perms)} perms; coaffinity-6 set "
                  f"({int(at6.sum())}) equals the double coset: {same}, {dt:.1f}s")


def test_c7_inequalities(report):
    reports = sweep(16, 12, 4096)
    failed = [r for r in reports if not r.holds]
    b1 = check_lemma34(4, 1).margin == 0 and check_lemma34(2, 3).margin == 0
    b2 = check_lemma32(2, 3).lhs.numerator == 5 and check_lemma32(2, 3).lhs.denominator == 286
    code = run(["verify", "--suite", "section3", "--q-max", "16", "--n-max", "12", "--json"])
    ok = not failed and b1 and b2 and code == 0
    assert report("C7", ok, f"{len(reports)} exact reports, {len(failed)} failed; boundary "
                  f"margins 0: {b1}; lemma32 lhs 5/286: {b2}; CLI exit {code}")


def _vf_affinity(p):
    return 2 ** (compute_vf(p).dim + 1) - 2


def test_c8_hyperplane_spectrum(report):
    rng = np.random.default_rng(8)
    # n = 3 base witnesses
    two = next(p for p in (random_permutation(3, 2, seed=s) for s in range(1000))
               if _vf_affinity(p) == 2)
    level = {0: inverse_map(3), 2: two, 6: transposition(3, 2), 14: Permutation.identity(3, 2)}
    ok = True
    covered = []
    for n in range(3, 9):
        if n > 3:
            nxt = {}
            for g in level.values():
                f = lift_perm(g)
                nxt[_vf_affinity(f)] = f
            zero = next(p for p in (random_permutation(n, 2, seed=int(rng.integers(1 << 31)))
                                    for _ in range(1000)) if _vf_affinity(p) == 0)
            nxt[0] = zero
            level = nxt
        want = {2 ** i - 2 for i in range(1, n + 2)}
        ok &= set(level) == want
        # the V_f value agrees with a direct count
        ok &= all(count_affinity(p, n - 1, "stream" if n > 6 else "table") == v
                  for v, p in level.items())
        seen = set()
        for _ in range(10 ** 4):
            p = Permutation(n, 2, rng.permutation(2 ** n), check=False)
            seen.add(count_affinity(p, n - 1, "fast"))
        ok &= seen <= want
        covered.append(f"n={n}:{len(level)}/{len(want)}")
    assert report("C8", ok, "lifts realize every 2^i-2 (" + " ".join(covered) +
                  "); 10^4 random perms per n stay in the set")


def test_c9_property_suites(report):
    rng = np.random.default_rng(9)
    walsh_ok = True
    for n in range(1, 13):
        for _ in range(1000):
            g = BoolFun.random(n, rng)
            w = walsh_transform(g)
            lhs, rhs = fourth_moment(g)
            walsh_ok &= parseval_check(w) and lhs == rhs
    delta_ok = True
    for n, q, k in [(4, 2, 2), (3, 3, 1), (2, 5, 1)]:
        s = AffinityState(random_permutation(n, q, seed=n + q), k)
        N = q ** n
        for step in range(10 ** 4):
            u, v = rng.choice(N, size=2, replace=False)
            s.apply_transposition_delta(int(u), int(v))
            if step % 50 == 49 or step == 10 ** 4 - 1:
                fresh = AffinityState(s.perm, k)
                delta_ok &= bool(np.array_equal(fresh.status, s.status)) and \
                    fresh.affinity == s.affinity
    fx = [fixture("f32"), fixture("f33")]
    prod_ok = all(count_affinity(product_perm(a, b), 1) == 0
                  for a, b in product(fx, fx) if a.n + b.n <= 5)
    prod_ok &= count_affinity(product_perm(fx[1], fx[1]), 1, "stream") == 0
    lift_ok = True
    for n in range(3, 9):
        for g in (inverse_map(n - 1), Permutation.identity(n - 1, 2), transposition(n - 1, 2),
                  random_permutation(n - 1, 2, seed=n)):
            lift_ok &= count_affinity(lift_perm(g), n - 1) == 2 + 2 * count_affinity(g, n - 2)
    ok = walsh_ok and delta_ok and prod_ok and lift_ok
    assert report("C9", ok, f"Parseval/fourth moment (12000 functions): {walsh_ok}; delta walks: "
                  f"{delta_ok}; product law: {prod_ok}; lift law: {lift_ok}")


def test_c10_random_spectrum_4_2_2(report):
    t = time.perf_counter()
    cfg = SearchConfig(budget=10 ** 7, seed=2024)
    res = random_spectrum(4, 2, 2, cfg, starts=[inverse_map(4), Permutation.identity(4, 2)],
                          reference=LISTED_4_2_2)
    dt = time.perf_counter() - t
    vals = set(res.values)
    ok = vals <= LISTED_4_2_2 and {5, 84, 140} <= vals and res.verify()
    missing = sorted(LISTED_4_2_2 - vals)
    assert report("C10", ok, f"{len(vals)} values, coverage {res.coverage['percent']:.1f}% of "
                  f"{len(LISTED_4_2_2)} listed values, outside list: "
                  f"{res.coverage['outside_reference']}, missing: {missing}, {dt:.0f}s")


def test_c11_double_coset_counts(report):
    c3 = coset_intersection_count(3)
    c3b = coset_intersection_count(3, method="brute")
    c4 = coset_intersection_count(4)
    agl4 = group_orders(4, 2)[1]
    m4 = minimal_coaffinity_count(4)
    ok = c3 == c3b == 192 and c4 == 2688 and agl4 == 322560 and m4 == 38707200 \
        and agl4 ** 2 // c4 == m4 and agl4 ** 2 % c4 == 0
    assert report("C11", ok, f"n=3: {c3} (brute {c3b}); n=4: {c4} over {agl4} elements; "
                  f"minimal count {m4} = |AGL|^2/2688")


def test_c5_case_count():
    # the sweep is restricted to prime powers and stays desk-sized
    cases = list(_c5_cases())
    assert all(is_prime_power(q) for _, _, q in cases)
    assert len(cases) == 89
