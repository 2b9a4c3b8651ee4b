"""Arithmetic in F_q, q = p^m <= 2^16.

Elements are plain integers 0..q-1: the polynomial sum(c_i t^i) over F_p is
stored as sum(c_i p^i).  Every operation accepts either Python ints or numpy
integer arrays and works elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import NotPrimePower, TooLarge

MAX_ORDER = 1 << 16
TABLE_LIMIT = 256


def _smallest_prime_factor(q: int) -> int:
    d = 2
    while d * d <= q:
        if q % d == 0:
            return d
        d += 1
    return q


def factor_prime_power(q: int) -> tuple[int, int]:
    """Return (p, m) with q = p**m, or raise NotPrimePower."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = _smallest_prime_factor(q)
    m, r = 0, q
    while r % p == 0:
        r //= p
        m += 1
    if r != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    return p, m


# -- polynomials over F_p, coefficient lists low degree first ---------------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim(list(a))
    b = _poly_trim(list(b))
    inv_lead = pow(b[-1], -1, p)
    while len(a) >= len(b):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, bc in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bc) % p
        _poly_trim(a)
    return a


def is_irreducible(poly: list[int], p: int) -> bool:
    """Trial factorization: no monic factor of degree 1..deg/2."""
    m = len(poly) - 1
    for d in range(1, m // 2 + 1):
        for low in product(range(p), repeat=d):
            if not _poly_mod(poly, list(low) + [1], p):
                return False
    return True


def smallest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree m (low degree first)."""
    # itertools.product varies the last slot fastest, so feed reversed tuples
    for high_first in product(range(p), repeat=m):
        low = tuple(reversed(high_first))
        poly = list(low) + [1]
        if is_irreducible(poly, p):
            return tuple(poly)
    raise AssertionError("an irreducible polynomial of every degree exists")


def _digits(x: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(x % p)
        x //= p
    return out


def _undigits(ds, p: int) -> int:
    v = 0
    for d in reversed(ds):
        v = v * p + d
    return v


def _mul_slow(a: int, b: int, p: int, m: int, modulus: tuple[int, ...]) -> int:
    da, db = _digits(a, p, m), _digits(b, p, m)
    prod = [0] * (2 * m - 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
    red = _poly_mod(prod, list(modulus), p)
    red += [0] * (m - len(red))
    return _undigits(red, p)


@dataclass(frozen=True, eq=False)
class FieldSpec:
    p: int
    m: int
    q: int
    modulus: tuple[int, ...]
    # lookup tables; which ones are populated depends on q
    add_table: np.ndarray | None = field(default=None, repr=False)
    mul_table: np.ndarray | None = field(default=None, repr=False)
    neg_table: np.ndarray = field(default=None, repr=False)
    inv_table: np.ndarray = field(default=None, repr=False)
    exp_table: np.ndarray | None = field(default=None, repr=False)
    log_table: np.ndarray | None = field(default=None, repr=False)

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.m, self.modulus) == (
            other.p, other.m, other.modulus)

    def __hash__(self):
        return hash((self.p, self.m, self.modulus))

    @property
    def is_prime(self) -> bool:
        return self.m == 1

    # -- elementwise arithmetic -------------------------------------------------
    def add(self, a, b):
        if self.add_table is not None:
            return self.add_table[a, b]
        if self.p == 2:
            return np.bitwise_xor(a, b)
        return self._digitwise(a, b, 1)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def neg(self, a):
        return self.neg_table[a]

    def mul(self, a, b):
        if self.mul_table is not None:
            return self.mul_table[a, b]
        a = np.asarray(a)
        b = np.asarray(b)
        s = (self.log_table[a] + self.log_table[b]) % (self.q - 1)
        out = np.where((a == 0) | (b == 0), 0, self.exp_table[s])
        return out if out.ndim else int(out)

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self.inv_table[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        result, base = 1, int(a)
        if e < 0:
            base, e = int(self.inv(base)), -e
        while e:
            if e & 1:
                result = int(self.mul(result, base))
            base = int(self.mul(base, base))
            e >>= 1
        return result

    def _digitwise(self, a, b, sign):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
        scale = 1
        for _ in range(self.m):
            out += ((a // scale % self.p + sign * (b // scale % self.p)) % self.p) * scale
            scale *= self.p
        return out if out.ndim else int(out)

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)


def _build(p: int, m: int) -> FieldSpec:
    q = p ** m
    modulus = () if m == 1 else smallest_irreducible(p, m)
    els = np.arange(q, dtype=np.int64)
    if m == 1:
        neg = (-els) % p
    else:
        neg = np.zeros(q, dtype=np.int64)
        for x in range(q):
            neg[x] = _undigits([(-d) % p for d in _digits(x, p, m)], p)

    if q <= TABLE_LIMIT:
        if m == 1:
            add = (els[:, None] + els[None, :]) % p
            mul = (els[:, None] * els[None, :]) % p
        else:
            digs = np.array([_digits(x, p, m) for x in range(q)], dtype=np.int64)
            weights = p ** np.arange(m, dtype=np.int64)
            add = ((digs[:, None, :] + digs[None, :, :]) % p) @ weights
            mul = np.zeros((q, q), dtype=np.int64)
            for a in range(1, q):
                for b in range(a, q):
                    mul[a, b] = mul[b, a] = _mul_slow(a, b, p, m, modulus)
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        return FieldSpec(p, m, q, modulus, add_table=add, mul_table=mul,
                         neg_table=neg, inv_table=inv)

    # log/antilog tables w.r.t. the smallest generator of the multiplicative group
    order = q - 1
    primes = []
    r = order
    d = 2
    while d * d <= r:
        if r % d == 0:
            primes.append(d)
            while r % d == 0:
                r //= d
        d += 1
    if r > 1:
        primes.append(r)

    def power(a, e):
        res, base = 1, a
        while e:
            if e & 1:
                res = _mul_slow(res, base, p, m, modulus)
            base = _mul_slow(base, base, p, m, modulus)
            e >>= 1
        return res

    gen = next(g for g in range(2, q) if all(power(g, order // r) != 1 for r in primes))
    exp = np.zeros(order, dtype=np.int64)
    x = 1
    for i in range(order):
        exp[i] = x
        x = _mul_slow(x, gen, p, m, modulus)
    log = np.zeros(q, dtype=np.int64)
    log[exp] = np.arange(order, dtype=np.int64)
    inv = np.zeros(q, dtype=np.int64)
    inv[exp] = exp[(-np.arange(order)) % order]
    return FieldSpec(p, m, q, modulus, neg_table=neg, inv_table=inv,
                     exp_table=exp, log_table=log)


@lru_cache(maxsize=None)
def make_field(q: int) -> FieldSpec:
    """The field of order q with the canonical (lexicographically smallest) modulus."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    if q > MAX_ORDER:
        raise TooLarge(f"q = {q} exceeds the supported maximum {MAX_ORDER}")
    p, m = factor_prime_power(q)
    return _build(p, m)


def automorphisms(spec: FieldSpec) -> list[np.ndarray]:
    """Frobenius powers x -> x^(p^i), i = 0..m-1, each as a lookup array over F_q."""
    maps = [spec.elements()]
    for _ in range(1, spec.m):
        prev = maps[-1]
        frob = prev
        for _ in range(spec.p - 1):
            frob = spec.mul(frob, prev)
        maps.append(np.asarray(frob, dtype=np.int64))
    return maps


def is_prime_power(q: int) -> bool:
    try:
        factor_prime_power(q)
    except NotPrimePower:
        return False
    return True
