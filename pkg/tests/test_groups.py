from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinitylab.affinity import Permutation, count_affinity
from affinitylab.constructions import (fixture, frobenius_map, random_affine, random_permutation,
                                       random_semi_affine, transposition)
from affinitylab.errors import TooLarge
from affinitylab.geometry import count_flats
from affinitylab.groups import (AffineMap, agl_array, coset_intersection_count, double_coset_size,
                                enumerate_agl, group_orders, is_affine, is_affine_batch,
                                is_semi_affine, is_semi_affine_batch, minimal_coaffinity_count,
                                transposition_distance_two, transposition_distance_two_batch)


def test_group_orders():
    assert group_orders(2, 3)[1] == 432
    assert group_orders(3, 2)[1] == 1344
    assert group_orders(1, 2)[1] == 2
    gl, agl, agaml = group_orders(2, 4)
    assert gl == (16 - 1) * (16 - 4) and agl == 16 * gl and agaml == 2 * agl


@pytest.mark.parametrize("n,q", [(1, 2), (2, 2), (2, 3), (3, 2), (1, 5), (2, 4)])
def test_enumerate_agl(n, q):
    rows = agl_array(n, q)
    assert len(rows) == group_orders(n, q)[1]
    assert len({r.tobytes() for r in rows}) == len(rows)
    assert is_affine_batch(rows, n, q).all()
    if n >= 2:
        for p in list(enumerate_agl(n, q))[::37]:
            assert count_affinity(p, 1) == count_flats(n, 1, q)


def test_agl_f2_1():
    assert sorted(p.images.tolist() for p in enumerate_agl(1, 2)) == [[0, 1], [1, 0]]


def test_agl_too_large():
    with pytest.raises(TooLarge):
        agl_array(5, 2)


def test_is_affine():
    ident = Permutation.identity(3, 3)
    m = is_affine(ident)
    assert m is not None and m.b == 0 and m.matrix == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert is_affine(transposition(3, 3)) is None
    p = random_affine(3, 4, seed=2)
    m = is_affine(p)
    assert m is not None and m.to_permutation() == p


def test_is_semi_affine():
    fr = frobenius_map(2, 4)
    assert is_affine(fr) is None
    m = is_semi_affine(fr)
    assert m is not None and m.sigma == 1 and m.to_permutation() == fr
    assert is_semi_affine(fixture("f32")) is None
    for seed in range(5):
        p = random_semi_affine(2, 9, seed=seed)
        m = is_semi_affine(p)
        assert m is not None and m.to_permutation() == p


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([(2, 3), (3, 2), (2, 5), (2, 4), (3, 3)]), st.integers(0, 2 ** 31))
def test_prime_field_semi_equals_affine(nq, seed):
    n, q = nq
    p = random_permutation(n, q, seed=seed) if seed % 2 else random_affine(n, q, seed=seed)
    if q in (2, 3, 5):
        assert (is_semi_affine(p) is None) == (is_affine(p) is None)
    imgs = p.images[None, :]
    assert is_affine_batch(imgs, n, q)[0] == (is_affine(p) is not None)
    assert is_semi_affine_batch(imgs, n, q)[0] == (is_semi_affine(p) is not None)


def test_affine_map_apply():
    m = AffineMap(2, 3, ((0, 1), (1, 0)), 4)
    p = m.to_permutation()
    assert sorted(p.images.tolist()) == list(range(9))
    assert not m.is_linear
    assert is_affine(p).to_permutation() == p


def test_distance_two_examples():
    # unique decomposition from n = 4 on
    g, u, v = transposition_distance_two(transposition(4, 2, 1, 6))
    assert g.to_permutation() == Permutation.identity(4, 2) and {u, v} == {1, 6}
    g, u, v = transposition_distance_two(transposition(2, 3, 2, 7))
    assert g.to_permutation() == Permutation.identity(2, 3) and {u, v} == {2, 7}
    # on F_2^3 some double transpositions are affine, so g need not be the identity
    t = transposition(3, 2, 1, 6)
    g, u, v = transposition_distance_two(t)
    assert g.to_permutation().compose(transposition(3, 2, u, v)) == t
    assert transposition_distance_two(random_affine(3, 2, seed=1)) is None


@pytest.mark.parametrize("n,q,semi", [(3, 2, False), (4, 2, False), (2, 3, False), (3, 3, False),
                                      (2, 4, True), (2, 5, False), (5, 2, False)])
def test_distance_two_roundtrip(n, q, semi):
    rng = np.random.default_rng(n * 10 + q)
    for seed in range(4):
        a = random_semi_affine(n, q, seed=seed) if semi else random_affine(n, q, seed=seed)
        b = random_affine(n, q, seed=seed + 100)
        u, v = rng.choice(q ** n, size=2, replace=False)
        f = a.compose(transposition(n, q, int(u), int(v))).compose(b)
        r = transposition_distance_two(f, semi=semi)
        assert r is not None
        g, x, y = r
        assert g.to_permutation().compose(transposition(n, q, x, y)) == f
        # one more transposition moves it out of the double coset (q^n > 4)
        far = f.swapped(*[int(t) for t in rng.choice(q ** n, size=2, replace=False)])
        if far != g.to_permutation() and count_affinity(far, 1) != count_affinity(f, 1):
            assert transposition_distance_two(far, semi=semi) is None


def test_distance_two_batch_agrees():
    rng = np.random.default_rng(0)
    rows = []
    for _ in range(30):
        a = random_affine(2, 3, seed=int(rng.integers(1 << 30))).images
        u, v = rng.choice(9, size=2, replace=False)
        a = a.copy()
        a[[u, v]] = a[[v, u]]
        rows.append(a)
    rows += [random_permutation(2, 3, seed=s).images for s in range(30)]
    rows = np.array(rows)
    batch = transposition_distance_two_batch(rows, 2, 3)
    single = [transposition_distance_two(Permutation(2, 3, r)) is not None for r in rows]
    assert batch.tolist() == single
    assert batch[:30].all()


def test_coset_counts():
    assert coset_intersection_count(3) == 192 == coset_intersection_count(3, method="brute")
    assert coset_intersection_count(3, a=5, method="brute") == 192
    assert double_coset_size(3) == 9408 == minimal_coaffinity_count(3)
    assert minimal_coaffinity_count(4) == 38707200
    assert group_orders(4, 2)[1] ** 2 // 2688 == 38707200
    assert minimal_coaffinity_count(5) == double_coset_size(5)


@pytest.mark.slow
def test_coset_count_n4():
    assert coset_intersection_count(4) == 2688
    assert coset_intersection_count(4, a=9, method="brute") == 2688


def test_double_coset_exhaustive_n3_small_slice():
    perms = np.array(list(permutations(range(8)))[:5040])
    members = transposition_distance_two_batch(perms, 3, 2)
    co = np.array([14 - count_affinity(Permutation(3, 2, p, check=False), 2, "fast")
                   for p in perms[members]])
    assert np.all(co == 8)
