import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinitylab.affinity import (AffinityState, Permutation, Verdict, affinity_profile,
                                  apply_transposition_delta, classify_coaffinity, compute_vf,
                                  count_affinity, k_affinity, naive_affinity, threshold_check,
                                  transposition_formula)
from affinitylab.constructions import (fixture, inverse_map, random_affine, random_permutation,
                                       random_semi_affine, transposition)
from affinitylab.errors import InternalInvariantViolation
from affinitylab.geometry import count_flats

METHODS = ["table", "kernel", "stream", "naive"]


def test_permutation_validation():
    with pytest.raises(ValueError):
        Permutation(2, 2, [0, 1, 1, 3])
    with pytest.raises(ValueError):
        Permutation(2, 2, [0, 1, 2])
    p = Permutation(2, 3, [1, 2, 0, 3, 4, 5, 6, 7, 8])
    assert p(0) == 1 and list(p.support()) == [0, 1, 2]
    assert p.compose(p.inverse()) == Permutation.identity(2, 3)
    assert p.swapped(0, 1).images[:3].tolist() == [2, 1, 0]


def test_spec_examples():
    assert count_affinity(Permutation.identity(4, 2), 2) == 140
    assert count_affinity(inverse_map(4), 2) == 5
    rp = random_permutation(5, 2, seed=3)
    assert count_affinity(rp, 1) == count_flats(5, 1, 2)


@pytest.mark.parametrize("n,k,q", [(3, 1, 3), (3, 2, 3), (2, 1, 4), (2, 1, 5), (4, 2, 2),
                                   (4, 3, 2), (3, 1, 4), (5, 2, 2), (4, 1, 3), (3, 2, 2)])
def test_routes_agree(n, k, q):
    for seed in range(3):
        p = random_permutation(n, q, seed=seed)
        vals = {m: count_affinity(p, k, m) for m in METHODS}
        if q == 2 and (k == 2 or k == n - 1):
            vals["fast"] = count_affinity(p, k, "fast")
        vals["auto"] = count_affinity(p, k)
        assert len(set(vals.values())) == 1, vals


def test_transposition_profile_matches_formula():
    t = transposition(3, 3, 4, 17)
    prof = affinity_profile(t)
    for k, aff, coaff in prof:
        assert (aff, coaff) == transposition_formula(3, k, 3)


@pytest.mark.parametrize("n,k,q,aff", [(4, 2, 2, 84), (2, 1, 3, 6), (2, 1, 4, 12)])
def test_transposition_formula_examples(n, k, q, aff):
    a, c = transposition_formula(n, k, q)
    assert a == aff and a + c == count_flats(n, k, q)
    assert count_affinity(transposition(n, q), k) == a


def test_transposition_formula_q2_k1_degenerate():
    assert transposition_formula(4, 1, 2) == (count_flats(4, 1, 2), 0)
    assert count_affinity(transposition(4, 2, 3, 9), 1) == count_flats(4, 1, 2)


def test_fixture_profiles():
    assert count_affinity(fixture("f32"), 1) == 0
    assert [a for _, a, _ in affinity_profile(fixture("f33"))] == [0, 0]


def test_k_affinity_state_and_identity():
    p = random_permutation(3, 3, seed=0)
    aff, co, st_ = k_affinity(p, 1)
    assert aff + co == count_flats(3, 1, 3)
    assert st_.affinity == aff and st_.recompute() == aff
    assert k_affinity(p, 0)[:2] == (27, 0)
    assert count_affinity(p, 0) == 27 and count_affinity(p, 3) == 1


def test_delta_examples():
    s = AffinityState(Permutation.identity(3, 2), 2)
    s.apply_transposition_delta(0, 1)
    assert s.affinity == 6
    apply_transposition_delta(s, 0, 1)
    assert s.affinity == 14 and s.perm == Permutation.identity(3, 2)
    with pytest.raises(ValueError):
        s.apply_transposition_delta(3, 3)


def test_delta_thousand_steps_f3_2():
    rng = np.random.default_rng(11)
    s = AffinityState(random_permutation(2, 3, seed=1), 1)
    for _ in range(1000):
        u, v = rng.choice(9, size=2, replace=False)
        s.apply_transposition_delta(u, v)
        assert s.affinity == naive_affinity(s.perm, 1)
        assert s.affinity + s.coaffinity == 12


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(3, 2, 2), (2, 1, 3), (3, 1, 3), (4, 2, 2), (2, 1, 4), (4, 3, 2)]),
       st.integers(0, 2 ** 31), st.lists(st.tuples(st.integers(0, 80), st.integers(0, 80)),
                                         min_size=1, max_size=25))
def test_delta_oracle_equivalence(params, seed, moves):
    n, k, q = params
    N = q ** n
    s = AffinityState(random_permutation(n, q, seed=seed), k)
    for u, v in moves:
        u, v = u % N, v % N
        if u == v:
            continue
        s.apply_transposition_delta(u, v)
        fresh = AffinityState(s.perm, k)
        assert np.array_equal(s.status, fresh.status)
        assert s.affinity == fresh.affinity


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(3, 1, 3), (2, 1, 4), (4, 2, 2), (3, 2, 3), (2, 1, 5), (5, 3, 2)]),
       st.integers(0, 2 ** 31))
def test_conjugation_invariance(params, seed):
    n, k, q = params
    f = random_permutation(n, q, seed=seed)
    a = random_semi_affine(n, q, seed=seed + 1)
    b = random_affine(n, q, seed=seed + 2)
    assert count_affinity(a.compose(f).compose(b), k) == count_affinity(f, k)


def test_affine_maps_have_full_affinity():
    for q, n in [(4, 2), (3, 3), (2, 4), (8, 2)]:
        g = random_semi_affine(n, q, seed=5)
        for k in range(1, n):
            assert count_affinity(g, k) == count_flats(n, k, q)


def test_vf_exhaustive_n3():
    from itertools import permutations
    seen = set()
    for imgs in permutations(range(8)):
        p = Permutation(3, 2, imgs, check=False)
        d = compute_vf(p).dim
        aff = count_affinity(p, 2, "fast")
        assert aff == 2 ** (d + 1) - 2
        seen.add(aff)
    assert seen == {0, 2, 6, 14}


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
def test_vf_random(n):
    for seed in range(20):
        p = random_permutation(n, 2, seed=seed)
        vf = compute_vf(p)
        assert count_affinity(p, n - 1, "table" if n <= 6 else "stream") == 2 ** (vf.dim + 1) - 2


def test_vf_identity():
    vf = compute_vf(Permutation.identity(5, 2))
    assert vf.dim == 5


def test_vf_requires_q2():
    with pytest.raises(ValueError):
        compute_vf(Permutation.identity(2, 3))


@pytest.mark.parametrize("n", range(3, 11))
def test_inverse_map_law(n):
    want = 0 if n % 2 else (2 ** n - 1) // 3
    assert count_affinity(inverse_map(n), 2) == want


def test_threshold_check():
    assert threshold_check(transposition(3, 3), 1).classification is Verdict.AT_TRANSPOSITION
    assert threshold_check(random_affine(3, 3, seed=2), 2).classification is Verdict.AFFINE
    v = classify_coaffinity(3, 2, 1, 3)
    assert v.classification is Verdict.BELOW_THRESHOLD_COUNTEREXAMPLE and v.is_counterexample
    assert classify_coaffinity(9, 2, 1, 3).classification is Verdict.ABOVE_THRESHOLD
    assert classify_coaffinity(6, 2, 1, 3).threshold == 6


def test_invariant_violation_class():
    assert issubclass(InternalInvariantViolation, AssertionError)
