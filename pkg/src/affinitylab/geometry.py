"""Points, subspaces and k-flats of F_q^n.

A point is an integer index: (x_1, ..., x_n) <-> sum x_i q^(n-i), so x_1 is the
most significant digit and F_3^2 is labelled (0,0), (0,1), ..., (2,2) -> 0..8.
A k-flat is stored canonically as (RREF basis of its direction, representative
with zero coordinates at the pivot columns).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, product
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded
from .field import FieldSpec, make_field

# count_flats * q^k entries (int32) a materialized table may hold
DEFAULT_MAX_ENTRIES = int(os.environ.get("AFFINITYLAB_MAX_TABLE", 1 << 25))
# incidence lists are only built below this many entries
BY_POINT_LIMIT = 1 << 27

_ZOBRIST_SEED = 0x5EED_AFF1


def qbinom(n: int, k: int, q: int) -> int:
    """Gaussian binomial coefficient: number of k-dim subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def count_flats(n: int, k: int, q: int) -> int:
    return q ** (n - k) * qbinom(n, k, q)


class Space:
    """The vector space F_q^n with vectorized arithmetic on point indices."""

    def __init__(self, n: int, q: int):
        if n < 0:
            raise ValueError("dimension must be non-negative")
        self.n = n
        self.q = q
        self.field: FieldSpec = make_field(q)
        self.size = q ** n
        self.weights = np.array([q ** (n - 1 - i) for i in range(n)], dtype=np.int64)

    def __repr__(self):
        return f"Space(n={self.n}, q={self.q})"

    # -- encoding -----------------------------------------------------------
    def decode(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return (x[..., None] // self.weights) % self.q

    def encode(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=np.int64)
        return coords @ self.weights

    @cached_property
    def coords(self) -> np.ndarray:
        return self.decode(np.arange(self.size, dtype=np.int64))

    def unit(self, i: int) -> int:
        """Index of the i-th standard basis vector (0-based, i=0 most significant)."""
        return int(self.weights[i])

    # -- arithmetic on indices ----------------------------------------------
    @cached_property
    def add_table(self) -> np.ndarray | None:
        if self.size > 1024:
            return None
        idx = np.arange(self.size, dtype=np.int64)
        return self._add_digits(idx[:, None], idx[None, :])

    def _add_digits(self, a, b):
        F = self.field
        if self.q == 2:
            return np.bitwise_xor(a, b)
        out = 0
        for w in self.weights:
            out = out + F.add((a // w) % self.q, (b // w) % self.q) * w
        return out

    def add(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.q == 2:
            return np.bitwise_xor(a, b)
        table = self.add_table
        if table is not None:
            return table[a, b]
        return self._add_digits(a, b)

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.q == 2:
            return a
        out = 0
        for w in self.weights:
            out = out + self.field.neg((a // w) % self.q) * w
        return out

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, c, a):
        """Scalar multiple c*a (c a field element, broadcast against a)."""
        a = np.asarray(a, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        out = 0
        for w in self.weights:
            out = out + self.field.mul(c, (a // w) % self.q) * w
        return np.asarray(out, dtype=np.int64)

    def dot(self, a, x):
        """Standard bilinear form <a, x> as a field element."""
        ca, cx = self.decode(a), self.decode(x)
        F = self.field
        acc = np.zeros(np.broadcast(ca[..., 0], cx[..., 0]).shape, dtype=np.int64)
        for i in range(self.n):
            acc = F.add(acc, F.mul(ca[..., i], cx[..., i]))
        return acc

    @cached_property
    def zobrist(self) -> np.ndarray:
        rng = np.random.default_rng([_ZOBRIST_SEED, self.n, self.q])
        return rng.integers(0, 2**63, size=self.size, dtype=np.int64).astype(np.uint64) * np.uint64(2) + np.uint64(1)


@lru_cache(maxsize=64)
def space(n: int, q: int) -> Space:
    return Space(n, q)


# -- exact linear algebra over F_q (small, pure Python) -------------------

def rref(rows: Iterable[Iterable[int]], F: FieldSpec) -> tuple[list[list[int]], list[int]]:
    """Reduced row-echelon form of the given rows; returns (nonzero rows, pivots)."""
    mat = [[int(v) for v in r] for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(mat)) if mat[i][c]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = int(F.inv(mat[r][c]))
        mat[r] = [int(F.mul(inv, v)) for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [int(F.sub(a, F.mul(f, b))) for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


@dataclass(frozen=True)
class Subspace:
    basis: tuple[tuple[int, ...], ...]
    pivots: tuple[int, ...]
    n: int
    q: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def spanned_by(cls, vectors, n: int, q: int) -> "Subspace":
        """Subspace spanned by coordinate vectors (or point indices)."""
        sp = space(n, q)
        rows = []
        for v in vectors:
            if np.ndim(v) == 0:
                v = sp.decode(int(v))
            rows.append([int(x) for x in v])
        basis, pivots = rref(rows, sp.field)
        return cls(tuple(tuple(r) for r in basis), tuple(pivots), n, q)

    def points(self) -> np.ndarray:
        sp = space(self.n, self.q)
        pts = np.zeros(1, dtype=np.int64)
        for row in self.basis:
            r = int(sp.encode(row))
            mults = sp.scale(np.arange(self.q), r)
            pts = sp.add(pts[:, None], mults[None, :]).ravel()
        return pts

    def canonical_rep(self, x: int) -> int:
        """The unique point of x + U whose pivot coordinates are zero."""
        sp = space(self.n, self.q)
        F = sp.field
        c = [int(v) for v in sp.decode(int(x))]
        for row, piv in zip(self.basis, self.pivots):
            f = c[piv]
            if f:
                c = [int(F.sub(a, F.mul(f, b))) for a, b in zip(c, row)]
        return int(sp.encode(c))


@dataclass(frozen=True)
class Flat:
    subspace: Subspace
    rep: int

    @property
    def dim(self) -> int:
        return self.subspace.dim

    def points(self) -> np.ndarray:
        sp = space(self.subspace.n, self.subspace.q)
        return np.sort(sp.add(self.rep, self.subspace.points()))

    def __contains__(self, x) -> bool:
        return self.subspace.canonical_rep(int(x)) == self.rep


def affine_span(points, n: int, q: int) -> Flat:
    """Smallest flat containing the given points."""
    pts = [int(p) for p in points]
    if not pts:
        raise ValueError("affine span of an empty set")
    sp = space(n, q)
    base = pts[0]
    diffs = sp.sub(np.array(pts[1:], dtype=np.int64), base) if len(pts) > 1 else []
    sub = Subspace.spanned_by(list(diffs), n, q)
    return Flat(sub, sub.canonical_rep(base))


def span_dimension(points, n: int, q: int, stop_above: int | None = None) -> int:
    """Dimension of the affine span, with optional early exit once it exceeds stop_above."""
    sp = space(n, q)
    F = sp.field
    it = iter(int(p) for p in points)
    try:
        base = sp.decode(next(it))
    except StopIteration:
        raise ValueError("affine span of an empty set") from None
    rows: list[list[int]] = []
    pivs: list[int] = []
    for p in it:
        d = [int(v) for v in F.sub(sp.decode(p), base)]
        for row, pc in zip(rows, pivs):
            f = d[pc]
            if f:
                d = [int(F.sub(a, F.mul(f, b))) for a, b in zip(d, row)]
        lead = next((i for i, v in enumerate(d) if v), None)
        if lead is None:
            continue
        inv = int(F.inv(d[lead]))
        rows.append([int(F.mul(inv, v)) for v in d])
        pivs.append(lead)
        if stop_above is not None and len(rows) > stop_above:
            break
    return len(rows)


def is_kflat_image(points, k: int, n: int, q: int) -> bool:
    """True iff the point set is a k-flat of F_q^n."""
    pts = set(int(p) for p in points)
    if len(pts) != q ** k:
        return False
    return span_dimension(pts, n, q, stop_above=k) == k


# -- enumeration ------------------------------------------------------------

def enumerate_subspaces(n: int, k: int, q: int) -> np.ndarray:
    """All RREF k x n matrices, sorted lexicographically row-major; shape (S, k, n)."""
    blocks = []
    for pivots in combinations(range(n), k):
        free = [(i, j) for i, p in enumerate(pivots) for j in range(p + 1, n) if j not in pivots]
        vals = np.array(list(product(range(q), repeat=len(free))), dtype=np.int64)
        vals = vals.reshape(q ** len(free), len(free))
        mats = np.zeros((len(vals), k, n), dtype=np.int64)
        for i, p in enumerate(pivots):
            mats[:, i, p] = 1
        for t, (i, j) in enumerate(free):
            mats[:, i, j] = vals[:, t]
        blocks.append(mats)
    mats = np.concatenate(blocks) if blocks else np.zeros((1, 0, n), dtype=np.int64)
    if k == 0:
        return np.zeros((1, 0, n), dtype=np.int64)
    flat = mats.reshape(len(mats), -1)
    order = np.lexsort(flat.T[::-1])
    return mats[order]


class FlatTable:
    """Every k-flat of F_q^n with a dense id.

    Flat ids run over subspaces (lexicographic RREF order) and, within a
    subspace, over representatives in increasing point index.  ``points`` holds
    each flat's point set sorted ascending.
    """

    def __init__(self, n: int, k: int, q: int, bases: np.ndarray, points: np.ndarray):
        self.n, self.k, self.q = n, k, q
        self.space = space(n, q)
        self.bases = bases
        self.pivots = np.array([[int(np.nonzero(row)[0][0]) for row in b] for b in bases],
                               dtype=np.int64).reshape(len(bases), k)
        self.free = np.array([[j for j in range(n) if j not in set(p)] for p in self.pivots.tolist()],
                             dtype=np.int64).reshape(len(bases), n - k)
        self.points = points
        self.reps_per_subspace = q ** (n - k)
        self._by_point = None
        self._build_keys()

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self):
        return f"FlatTable(n={self.n}, k={self.k}, q={self.q}, flats={len(self)})"

    def _build_keys(self):
        zob = self.space.zobrist
        keys = np.bitwise_xor.reduce(zob[self.points], axis=1)
        order = np.argsort(keys, kind="stable")
        sk = keys[order]
        if len(sk) > 1 and np.any(sk[1:] == sk[:-1]):
            # a 64-bit collision between two flats; never observed, but stay exact
            raise BudgetExceeded("set-hash collision in flat table")
        self.keys_sorted = sk
        self.key_order = order

    # -- ids <-> flats ---------------------------------------------------------
    def subspace(self, s: int) -> Subspace:
        b = self.bases[s]
        return Subspace(tuple(tuple(int(v) for v in row) for row in b),
                        tuple(int(p) for p in self.pivots[s]), self.n, self.q)

    def flat(self, fid: int) -> Flat:
        s, pos = divmod(int(fid), self.reps_per_subspace)
        digits = []
        for _ in range(self.n - self.k):
            digits.append(pos % self.q)
            pos //= self.q
        coords = np.zeros(self.n, dtype=np.int64)
        coords[self.free[s]] = digits[::-1]
        return Flat(self.subspace(s), int(self.space.encode(coords)))

    @cached_property
    def _subspace_index(self) -> dict[bytes, int]:
        return {self.bases[s].tobytes(): s for s in range(len(self.bases))}

    def flat_id(self, flat: Flat) -> int:
        b = np.array(flat.subspace.basis, dtype=np.int64).reshape(self.k, self.n)
        s = self._subspace_index[b.tobytes()]
        coords = self.space.decode(flat.rep)
        pos = 0
        for j in self.free[s]:
            pos = pos * self.q + int(coords[j])
        return s * self.reps_per_subspace + pos

    # -- incidence ---------------------------------------------------------------
    def flats_through(self, p: int) -> np.ndarray:
        """Ids of all flats containing point p, ascending."""
        if self._by_point is not None:
            return self._by_point[p]
        F = self.space.field
        pc = self.space.decode(int(p))
        rep = np.broadcast_to(pc, (len(self.bases), self.n)).copy()
        for i in range(self.k):
            c = pc[self.pivots[:, i]]
            rep = F.sub(rep, F.mul(c[:, None], self.bases[:, i, :]))
        pos = np.zeros(len(self.bases), dtype=np.int64)
        for t in range(self.n - self.k):
            pos = pos * self.q + np.take_along_axis(rep, self.free[:, t:t + 1], axis=1)[:, 0]
        return np.arange(len(self.bases), dtype=np.int64) * self.reps_per_subspace + pos

    @property
    def by_point(self) -> np.ndarray:
        """(q^n, qbinom(n,k,q)) array of flat ids through each point."""
        if self._by_point is None:
            size = self.space.size * qbinom(self.n, self.k, self.q)
            if size > BY_POINT_LIMIT:
                raise BudgetExceeded(f"incidence lists would need {size} entries")
            ids = np.repeat(np.arange(len(self), dtype=np.int64), self.points.shape[1])
            order = np.argsort(self.points.ravel(), kind="stable")
            self._by_point = ids[order].reshape(self.space.size, -1)
        return self._by_point

    # -- membership of arbitrary point sets ---------------------------------------
    def lookup(self, point_sets: np.ndarray) -> np.ndarray:
        """Flat id of each row (a set of q^k points), or -1 if the row is not a flat."""
        point_sets = np.asarray(point_sets)
        keys = np.bitwise_xor.reduce(self.space.zobrist[point_sets], axis=-1)
        pos = np.searchsorted(self.keys_sorted, keys)
        pos = np.minimum(pos, len(self.keys_sorted) - 1)
        hit = self.keys_sorted[pos] == keys
        cand = self.key_order[pos]
        out = np.full(keys.shape, -1, dtype=np.int64)
        if np.any(hit):
            rows = np.sort(point_sets[hit], axis=-1)
            same = np.all(rows == self.points[cand[hit]], axis=-1)
            idx = np.nonzero(hit)
            sel = tuple(i[same] for i in idx)
            out[sel] = cand[hit][same]
        return out

    def is_flat(self, point_sets: np.ndarray) -> np.ndarray:
        return self.lookup(point_sets) >= 0


def subspace_points(bases: np.ndarray, sp: Space) -> np.ndarray:
    """Points of each subspace, shape (S, q^k); coefficient of row 0 most significant."""
    S, k, _ = bases.shape
    q = sp.q
    pts = np.zeros((S, 1), dtype=np.int64)
    cs = np.arange(q, dtype=np.int64)
    for i in range(k):
        r = sp.encode(bases[:, i, :])
        mults = sp.scale(cs[None, :], r[:, None])
        pts = sp.add(pts[:, :, None], mults[:, None, :]).reshape(S, -1)
    return pts


def enumerate_flats(n: int, k: int, q: int, max_entries: int | None = None) -> FlatTable:
    """Materialize every k-flat of F_q^n."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    limit = DEFAULT_MAX_ENTRIES if max_entries is None else max_entries
    total = count_flats(n, k, q)
    if total * q ** k > limit:
        raise BudgetExceeded(
            f"{total} flats of {q**k} points exceed the table budget of {limit} entries")
    sp = space(n, q)
    bases = enumerate_subspaces(n, k, q)
    span = subspace_points(bases, sp)
    S = len(bases)
    nrep = q ** (n - k)
    reps = np.zeros((S, nrep), dtype=np.int64)
    digits = np.array(list(product(range(q), repeat=n - k)), dtype=np.int64).reshape(nrep, n - k)
    pivots = [[int(np.nonzero(row)[0][0]) for row in b] for b in bases]
    for s in range(S):
        free = [j for j in range(n) if j not in pivots[s]]
        reps[s] = digits @ sp.weights[free]
    pts = sp.add(reps[:, :, None], span[:, None, :]).reshape(S * nrep, q ** k)
    pts = np.sort(pts, axis=1).astype(np.int32 if sp.size < 2**31 else np.int64)
    return FlatTable(n, k, q, bases, pts)


@lru_cache(maxsize=16)
def flat_table(n: int, k: int, q: int) -> FlatTable:
    """Cached table with the default budget (tables are immutable)."""
    return enumerate_flats(n, k, q)
