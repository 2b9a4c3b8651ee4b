
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from affinitylab.errors import NotPrimePower, TooLarge
from affinitylab.field import (automorphisms, factor_prime_power, is_prime_power, make_field,
                               smallest_irreducible)

SMALL_Q = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16]


def test_make_field_basics():
    F2 = make_field(2)
    assert (F2.p, F2.m) == (2, 1)
    F4 = make_field(4)
    assert (F4.p, F4.m) == (2, 2)
    assert tuple(F4.modulus) == (1, 1, 1)  # t^2 + t + 1, low degree first
    assert make_field(4) is make_field(4)


@pytest.mark.parametrize("q", [6, 10, 12, 1 << 17])
def test_make_field_rejects(q):
    with pytest.raises((NotPrimePower, TooLarge)):
        make_field(q)


def test_not_prime_power_six():
    with pytest.raises(NotPrimePower):
        make_field(6)


def test_too_large():
    with pytest.raises(TooLarge):
        make_field(1 << 17)


def test_prime_power_helpers():
    assert factor_prime_power(81) == (3, 4)
    assert is_prime_power(49) and not is_prime_power(12) and not is_prime_power(1)
    assert smallest_irreducible(2, 3) == (1, 1, 0, 1)


def test_small_examples():
    F3, F4, F8 = make_field(3), make_field(4), make_field(8)
    assert F3.inv(2) == 2
    assert F4.mul(2, 2) == 3
    x = np.arange(1, 8)
    assert np.all(F8.mul(F8.inv(x), x) == 1)


@pytest.mark.parametrize("q", SMALL_Q)
def test_field_axioms_exhaustive(q):
    F = make_field(q)
    e = F.elements()
    a, b = np.meshgrid(e, e, indexing="ij")
    assert np.array_equal(F.add(a, b), F.add(b, a))
    assert np.array_equal(F.mul(a, b), F.mul(b, a))
    assert np.all(F.add(a, F.neg(a)) == 0)
    assert np.array_equal(F.sub(F.add(a, b), b), a)
    for c in e:
        assert np.array_equal(F.mul(a, F.add(b, c)), F.add(F.mul(a, b), F.mul(a, c)))
        assert np.array_equal(F.mul(F.mul(a, b), c), F.mul(a, F.mul(b, c)))
    nz = e[1:]
    assert np.all(F.mul(nz, F.inv(nz)) == 1)
    assert np.array_equal(F.div(F.mul(a[:, 1:], b[:, 1:]), b[:, 1:]), a[:, 1:])


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        make_field(5).inv(0)


@pytest.mark.parametrize("q", [2 ** 10, 2 ** 16, 3 ** 7])
def test_large_fields_log_tables(q):
    F = make_field(q)
    rng = np.random.default_rng(q)
    x = rng.integers(1, q, size=200)
    y = rng.integers(1, q, size=200)
    assert np.all(F.mul(x, F.inv(x)) == 1)
    assert np.array_equal(F.mul(x, y), F.mul(y, x))
    assert F.pow(int(x[0]), q - 1) == 1


@pytest.mark.parametrize("q", [2, 3, 4, 8, 9, 16, 27, 25, 64, 81, 256])
def test_automorphisms(q):
    F = make_field(q)
    autos = automorphisms(F)
    assert len(autos) == F.m
    e = F.elements()
    assert np.array_equal(autos[0], e)
    a, b = np.meshgrid(e, e, indexing="ij")
    for s in autos:
        s = np.asarray(s)
        assert sorted(s.tolist()) == e.tolist()
        assert np.array_equal(s[F.add(a, b)], F.add(s[a], s[b]))
        assert np.array_equal(s[F.mul(a, b)], F.mul(s[a], s[b]))
    # cyclic group generated by Frobenius
    if F.m > 1:
        frob = np.asarray(autos[1])
        cur = e.copy()
        for i in range(F.m):
            assert np.array_equal(cur, autos[i])
            cur = frob[cur]
        assert np.array_equal(cur, e)


def test_f4_frobenius_swaps_2_3():
    autos = automorphisms(make_field(4))
    assert list(autos[1]) == [0, 1, 3, 2]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SMALL_Q + [32, 49, 125]), st.data())
def test_pow_matches_repeated_mul(q, data):
    F = make_field(q)
    a = data.draw(st.integers(0, q - 1))
    e = data.draw(st.integers(0, 40))
    acc = 1
    for _ in range(e):
        acc = int(F.mul(acc, a))
    assert F.pow(a, e) == acc
