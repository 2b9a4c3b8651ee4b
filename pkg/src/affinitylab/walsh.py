"""Boolean functions on F_2^n: Walsh transform, ANF, the fourth-moment identity
and the component-function route to 2-coaffinity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .affinity import Permutation
from .errors import DegreeTooLow


@dataclass(frozen=True, eq=False)
class BoolFun:
    n: int
    truth: np.ndarray  # uint8 values at each point index

    def __post_init__(self):
        t = np.ascontiguousarray(self.truth, dtype=np.uint8)
        if t.shape != (1 << self.n,):
            raise ValueError(f"truth table must have length 2^{self.n}")
        if t.max(initial=0) > 1:
            raise ValueError("truth table entries must be 0 or 1")
        object.__setattr__(self, "truth", t)

    def __eq__(self, other):
        return isinstance(other, BoolFun) and self.n == other.n and np.array_equal(
            self.truth, other.truth)

    @property
    def weight(self) -> int:
        return int(self.truth.sum())

    def __add__(self, other: "BoolFun") -> "BoolFun":
        return BoolFun(self.n, self.truth ^ other.truth)

    @classmethod
    def from_hex(cls, text: str, n: int | None = None) -> "BoolFun":
        """Hex integer whose bit x is g(x); n defaults to what the digit count implies."""
        text = text.strip().lower().removeprefix("0x")
        value = int(text, 16)
        if n is None:
            bits = max(4 * len(text), 1)
            n = max(bits.bit_length() - 1, 0)
            if 1 << n != bits:
                raise ValueError("hex length does not match a power-of-two table; pass n")
        if value >> (1 << n):
            raise ValueError(f"value has bits beyond 2^{n} entries")
        truth = np.array([(value >> x) & 1 for x in range(1 << n)], dtype=np.uint8)
        return cls(n, truth)

    def to_hex(self) -> str:
        value = 0
        for x in np.nonzero(self.truth)[0]:
            value |= 1 << int(x)
        width = max(1, (1 << self.n) // 4)
        return format(value, f"0{width}x")

    @classmethod
    def linear(cls, n: int, c: int) -> "BoolFun":
        x = np.arange(1 << n)
        return cls(n, _parity(x & c))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BoolFun":
        return cls(n, rng.integers(0, 2, size=1 << n, dtype=np.uint8))


def _parity(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).copy()
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x >>= 1
    return p.astype(np.uint8)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    n: int
    values: np.ndarray

    def __eq__(self, other):
        return isinstance(other, WalshSpectrum) and np.array_equal(self.values, other.values)


def fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform of an integer vector."""
    a = np.array(v, dtype=np.int64)
    h = 1
    N = len(a)
    while h < N:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1).reshape(N)
        h *= 2
    return a


def walsh_transform(g: BoolFun) -> WalshSpectrum:
    """g^(a) = sum_x (-1)^(g(x) + <a,x>)."""
    return WalshSpectrum(g.n, fwht(1 - 2 * g.truth.astype(np.int64)))


def parseval_check(g: BoolFun | WalshSpectrum) -> bool:
    spec = walsh_transform(g) if isinstance(g, BoolFun) else g
    v = [int(x) for x in spec.values]
    return sum(x * x for x in v) == 1 << (2 * spec.n)


def anf(g: BoolFun) -> np.ndarray:
    """Algebraic normal form coefficients (Moebius transform over F_2)."""
    a = g.truth.copy()
    h = 1
    N = len(a)
    while h < N:
        a = a.reshape(-1, 2, h)
        a[:, 1] ^= a[:, 0]
        a = a.reshape(N)
        h *= 2
    return a


def degree(g: BoolFun) -> int:
    """Algebraic degree; the zero function has degree 0 here."""
    coeffs = np.nonzero(anf(g))[0]
    if len(coeffs) == 0:
        return 0
    return int(max(bin(int(m)).count("1") for m in coeffs))


def autocorrelation_sq_sum(g: BoolFun) -> int:
    """sum_a (sum_x (-1)^(g(x+a) + g(x)))^2, evaluated directly."""
    return int(K.autocorrelation_sq_sum(g.truth, g.n))


def fourth_moment(g: BoolFun) -> tuple[int, int]:
    """(sum_a g^(a)^4, 2^n * autocorrelation square sum); the two are always equal."""
    lhs = sum(int(x) ** 4 for x in walsh_transform(g).values)
    return lhs, (1 << g.n) * autocorrelation_sq_sum(g)


def affine_distance_min(g: BoolFun) -> int:
    """min over affine h of |g + h|."""
    w = walsh_transform(g).values
    N = 1 << g.n
    return int(min((N - w).min(), (N + w).min()) // 2)


def lemma_bound_check(g: BoolFun) -> tuple[int, int, bool]:
    """(autocorrelation square sum, 2^(2n) + (2^n-1)(2^n-4)^2, some affine h has |g+h| = 1)."""
    if degree(g) <= 1:
        raise DegreeTooLow("the autocorrelation bound needs deg g >= 2")
    n = g.n
    lhs = autocorrelation_sq_sum(g)
    rhs = (1 << (2 * n)) + ((1 << n) - 1) * ((1 << n) - 4) ** 2
    return lhs, rhs, affine_distance_min(g) == 1


def component_permutation(g1: BoolFun) -> Permutation:
    """f = (x_1 + g1(x_2..x_n), x_2, ..., x_n) on F_2^n, n = g1.n + 1."""
    m = g1.n
    y = np.arange(1 << (m + 1)) & ((1 << m) - 1)
    x1 = np.arange(1 << (m + 1)) >> m
    images = ((x1 ^ g1.truth[y].astype(np.int64)) << m) | y
    return Permutation(m + 1, 2, images, check=False)


def coaffinity_via_component(g1: BoolFun) -> int:
    """2-coaffinity of component_permutation(g1), as |G|/3 with
    |G| = (2^(3m) - autocorrelation square sum of g1) / 2, m = g1.n."""
    m = g1.n
    twice_G = (1 << (3 * m)) - autocorrelation_sq_sum(g1)
    if twice_G % 6:
        raise ArithmeticError("|G| must be divisible by 3")
    return twice_G // 6


def min_nonzero_coaffinity_bound(n: int) -> int:
    """(8/3)(2^(n-1)-1)(2^(n-2)-1): the least nonzero 2-coaffinity on F_2^n."""
    if n < 3:
        raise ValueError("need n >= 3")
    num = 8 * ((1 << (n - 1)) - 1) * ((1 << (n - 2)) - 1)
    assert num % 3 == 0
    return num // 3
