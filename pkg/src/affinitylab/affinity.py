"""k-affinity and k-coaffinity of permutations of F_q^n."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, InternalInvariantViolation, TooLarge
from .field import make_field
from .geometry import (FlatTable, Subspace, count_flats, flat_table, is_kflat_image, qbinom,
                       space)

# tables up to this many entries are used by the "auto" route
AUTO_TABLE_ENTRIES = 1 << 22


class Permutation:
    """A bijection of F_q^n stored as the image of every point index."""

    __slots__ = ("n", "q", "images")

    def __init__(self, n: int, q: int, images, check: bool = True):
        self.n = int(n)
        self.q = int(q)
        self.images = np.ascontiguousarray(images, dtype=np.int64)
        if check:
            size = q ** n
            if self.images.shape != (size,):
                raise ValueError(f"expected {size} images, got {self.images.shape}")
            seen = np.zeros(size, dtype=bool)
            if self.images.min() < 0 or self.images.max() >= size:
                raise ValueError("image out of range")
            seen[self.images] = True
            if not seen.all():
                raise ValueError("images do not form a bijection")

    @classmethod
    def identity(cls, n: int, q: int) -> "Permutation":
        return cls(n, q, np.arange(q ** n, dtype=np.int64), check=False)

    def __call__(self, x):
        return self.images[x]

    def __len__(self):
        return len(self.images)

    def __eq__(self, other):
        return (isinstance(other, Permutation) and (self.n, self.q) == (other.n, other.q)
                and np.array_equal(self.images, other.images))

    def __hash__(self):
        return hash((self.n, self.q, self.images.tobytes()))

    def __repr__(self):
        body = self.images.tolist() if len(self) <= 32 else f"<{len(self)} images>"
        return f"Permutation(n={self.n}, q={self.q}, images={body})"

    def copy(self) -> "Permutation":
        return Permutation(self.n, self.q, self.images.copy(), check=False)

    def compose(self, other: "Permutation") -> "Permutation":
        """self after other: x -> self(other(x))."""
        return Permutation(self.n, self.q, self.images[other.images], check=False)

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.images)
        inv[self.images] = np.arange(len(self.images))
        return Permutation(self.n, self.q, inv, check=False)

    def support(self) -> np.ndarray:
        """Points moved by the permutation."""
        return np.nonzero(self.images != np.arange(len(self.images)))[0]

    def swapped(self, u: int, v: int) -> "Permutation":
        """self composed with the transposition (u v)."""
        out = self.images.copy()
        out[u], out[v] = out[v], out[u]
        return Permutation(self.n, self.q, out, check=False)


@lru_cache(maxsize=None)
def kernel_tables(q: int):
    """(add, sub, mul, inv) lookup tables as int64 arrays for the compiled kernels."""
    F = make_field(q)
    if F.mul_table is None:
        raise TooLarge(f"compiled kernels need q <= 256, got {q}")
    add = np.ascontiguousarray(F.add_table, dtype=np.int64)
    sub = np.ascontiguousarray(add[:, F.neg_table], dtype=np.int64)
    mul = np.ascontiguousarray(F.mul_table, dtype=np.int64)
    inv = np.ascontiguousarray(F.inv_table, dtype=np.int64)
    return add, sub, mul, inv


def _trivial(n: int, k: int, q: int) -> bool:
    # every image of a 0-flat, a 1-flat when q=2, or the whole space is a flat
    return k == 0 or k == n or (q == 2 and k == 1)


# -- counting routes ------------------------------------------------------------

def naive_affinity(perm: Permutation, k: int) -> int:
    """Reference count: test each flat's image with the pure-Python span routine."""
    n, q = perm.n, perm.q
    table = flat_table(n, k, q)
    return sum(bool(is_kflat_image(perm.images[row], k, n, q)) for row in table.points)


def _table_count(perm: Permutation, k: int, table: FlatTable, chunk: int = 1 << 20) -> np.ndarray:
    """Status bitmap via set-hash lookup of each image in the flat table."""
    status = np.zeros(len(table), dtype=np.uint8)
    rows = max(1, chunk // table.points.shape[1])
    for start in range(0, len(table), rows):
        img = perm.images[table.points[start:start + rows]]
        status[start:start + rows] = table.lookup(img) >= 0
    return status


def _kernel_status(perm: Permutation, k: int, table: FlatTable) -> np.ndarray:
    add, sub, mul, inv = kernel_tables(perm.q)
    sp = space(perm.n, perm.q)
    return K.table_status(perm.images, table.points.astype(np.int64), sp.coords, k, perm.n,
                          perm.q, sub, mul, inv)


@lru_cache(maxsize=64)
def _pivot_sets(n: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(n), k)), dtype=np.int64).reshape(-1, k)


def stream_affinity(perm: Permutation, k: int) -> int:
    """Count by enumerating subspaces and cosets on the fly (no flat table)."""
    n, q = perm.n, perm.q
    if _trivial(n, k, q):
        return count_flats(n, k, q)
    add, sub, mul, inv = kernel_tables(q)
    sp = space(n, q)
    return int(K.stream_count(perm.images, perm.support(), sp.coords, sp.weights,
                              _pivot_sets(n, k), k, n, q, add, sub, mul, inv))


def fast_affinity_q2k2(perm: Permutation) -> int:
    if perm.q != 2 or perm.n < 2:
        raise ValueError("difference-count route needs q = 2 and n >= 2")
    total = int(K.diff_count_q2k2(perm.images, perm.n))
    if total % 24:
        raise InternalInvariantViolation("2-flat incidence count not divisible by 24")
    return total // 24


def hyperplane_flags(perm: Permutation) -> np.ndarray:
    if perm.q != 2:
        raise ValueError("V_f is defined for q = 2")
    add, sub, mul, inv = kernel_tables(2)
    sp = space(perm.n, 2)
    return K.hyperplane_flags_q2(perm.images, perm.n, sp.coords, sub, mul, inv)


def compute_vf(perm: Permutation) -> Subspace:
    """V_f = {0} and every a whose hyperplane {<a,x> = 0} maps onto a hyperplane."""
    if perm.q != 2 or perm.n < 2:
        raise ValueError("compute_vf needs q = 2 and n >= 2")
    members = np.nonzero(hyperplane_flags(perm))[0]
    sub = Subspace.spanned_by(members.tolist(), perm.n, 2)
    if len(members) != 2 ** sub.dim:
        raise InternalInvariantViolation(
            f"V_f has {len(members)} elements, not closed under addition")
    return sub


def count_affinity(perm: Permutation, k: int, method: str = "auto") -> int:
    """k-affinity of perm.

    method: "auto", "table" (set-hash lookup in a materialized table),
    "kernel" (compiled rank test over a table), "stream" (no table),
    "fast" (q=2 closed routes for k=2 and k=n-1) or "naive".
    """
    n, q = perm.n, perm.q
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}")
    if method == "auto":
        if _trivial(n, k, q):
            return count_flats(n, k, q)
        if q == 2 and (k == 2 and n <= 14 or k == n - 1):
            method = "fast"
        elif count_flats(n, k, q) * q ** k <= AUTO_TABLE_ENTRIES:
            method = "table"
        else:
            method = "stream" if q <= 256 else "table"
    if method == "fast":
        if q == 2 and k == n - 1 and n >= 2:
            return 2 * (int(hyperplane_flags(perm).sum()) - 1)
        if q == 2 and k == 2:
            return fast_affinity_q2k2(perm)
        if _trivial(n, k, q):
            return count_flats(n, k, q)
        raise ValueError(f"no closed route for (n={n}, k={k}, q={q})")
    if method == "table":
        return int(_table_count(perm, k, flat_table(n, k, q)).sum())
    if method == "kernel":
        return int(_kernel_status(perm, k, flat_table(n, k, q)).sum())
    if method == "stream":
        return stream_affinity(perm, k)
    if method == "naive":
        return naive_affinity(perm, k)
    raise ValueError(f"unknown method {method!r}")


# -- incremental state ------------------------------------------------------------

class AffinityState:
    """A permutation together with the flat-image status of every flat.

    Mutated in place by transposition deltas; owns its images array, shares
    the (immutable) flat table.
    """

    def __init__(self, perm: Permutation, k: int, table: FlatTable | None = None):
        n, q = perm.n, perm.q
        self.k = k
        self.table = table if table is not None else flat_table(n, k, q)
        self.perm = perm.copy()
        self._points = self.table.points.astype(np.int64)
        self._by_point = self.table.by_point
        self._coords = space(n, q).coords
        _, self._sub, self._mul, self._inv = kernel_tables(q)
        self.status = K.table_status(self.perm.images, self._points, self._coords, k, n, q,
                                     self._sub, self._mul, self._inv)
        self.affinity = int(self.status.sum())
        self._rows = np.zeros((k + 2, n), dtype=np.int64)
        self._pivs = np.zeros(k + 2, dtype=np.int64)
        self._d = np.zeros(n, dtype=np.int64)

    @property
    def total(self) -> int:
        return len(self.table)

    @property
    def coaffinity(self) -> int:
        return self.total - self.affinity

    def apply_transposition_delta(self, u: int, v: int) -> "AffinityState":
        """Replace perm by perm o (u v) and update status incrementally."""
        if u == v:
            raise ValueError("transposition needs two distinct points")
        p = self.perm
        self.affinity += int(K.swap_delta(int(u), int(v), p.images, self.status, self._by_point,
                                          self._points, self._coords, self.k, p.n, p.q,
                                          self._sub, self._mul, self._inv, self._rows,
                                          self._pivs, self._d))
        return self

    def recompute(self) -> int:
        return int(_table_count(self.perm, self.k, self.table).sum())

    def __repr__(self):
        p = self.perm
        return (f"AffinityState(n={p.n}, q={p.q}, k={self.k}, affinity={self.affinity}, "
                f"coaffinity={self.coaffinity})")


def apply_transposition_delta(state: AffinityState, u: int, v: int) -> AffinityState:
    return state.apply_transposition_delta(u, v)


def k_affinity(perm: Permutation, k: int, method: str = "auto",
               with_state: bool | None = None):
    """(affinity, coaffinity, state); state is None unless a flat table was affordable."""
    n, q = perm.n, perm.q
    total = count_flats(n, k, q)
    if with_state is None:
        with_state = (total * q ** k <= AUTO_TABLE_ENTRIES
                      and q ** n * qbinom(n, k, q) <= AUTO_TABLE_ENTRIES and q <= 256)
    if with_state:
        state = AffinityState(perm, k)
        aff = state.affinity
        if method != "auto":
            check = count_affinity(perm, k, method)
            if check != aff:
                raise InternalInvariantViolation(f"routes disagree: {aff} vs {check}")
        return aff, total - aff, state
    aff = count_affinity(perm, k, method)
    return aff, total - aff, None


def affinity_profile(perm: Permutation, method: str = "auto") -> list[tuple[int, int, int]]:
    """(k, affinity, coaffinity) for k = 1..n-1."""
    out = []
    for k in range(1, perm.n):
        try:
            aff = count_affinity(perm, k, method)
        except BudgetExceeded as exc:
            exc.partial = out
            raise
        out.append((k, aff, count_flats(perm.n, k, perm.q) - aff))
    return out


# -- closed forms and the threshold conjecture ---------------------------------------

def transposition_formula(n: int, k: int, q: int) -> tuple[int, int]:
    """(affinity, coaffinity) of any transposition of F_q^n."""
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    if q == 2 and k == 1:
        # every pair of points is a 1-flat, so nothing is ever lost; the general
        # expression below assumes a flat holding exactly one swapped point breaks
        return count_flats(n, 1, 2), 0
    coaff = 2 * q ** k * qbinom(n - 1, k, q)
    aff = (Fraction((q ** (n - k) - 2) * (q ** n - 1), q ** k - 1) + 2) * qbinom(n - 1, k - 1, q)
    if aff.denominator != 1:
        raise InternalInvariantViolation("transposition affinity is not an integer")
    aff = int(aff)
    if aff + coaff != count_flats(n, k, q):
        raise InternalInvariantViolation("transposition counts do not sum to the flat count")
    return aff, coaff


class Verdict(enum.Enum):
    AFFINE = "Affine"
    AT_TRANSPOSITION = "AtTransposition"
    ABOVE_THRESHOLD = "AboveThreshold"
    BELOW_THRESHOLD_COUNTEREXAMPLE = "BelowThresholdCounterexample"


@dataclass(frozen=True)
class ThresholdVerdict:
    classification: Verdict
    coaffinity: int
    threshold: int

    @property
    def is_counterexample(self) -> bool:
        return self.classification is Verdict.BELOW_THRESHOLD_COUNTEREXAMPLE


def classify_coaffinity(coaffinity: int, n: int, k: int, q: int) -> ThresholdVerdict:
    threshold = transposition_formula(n, k, q)[1]
    if coaffinity == 0:
        cls = Verdict.AFFINE
    elif coaffinity == threshold:
        cls = Verdict.AT_TRANSPOSITION
    elif coaffinity > threshold:
        cls = Verdict.ABOVE_THRESHOLD
    else:
        cls = Verdict.BELOW_THRESHOLD_COUNTEREXAMPLE
    return ThresholdVerdict(cls, int(coaffinity), threshold)


def threshold_check(perm: Permutation, k: int, method: str = "auto") -> ThresholdVerdict:
    aff = count_affinity(perm, k, method)
    return classify_coaffinity(count_flats(perm.n, k, perm.q) - aff, perm.n, k, perm.q)
