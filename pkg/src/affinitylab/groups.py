"""Affine and semi-affine maps: membership, group orders, AGL enumeration and
the transposition double coset AGL o tau o AGL.

Maps act on row vectors: x -> sigma(x) A + b, sigma applied coordinatewise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .affinity import Permutation
from .errors import TooLarge
from .field import automorphisms, factor_prime_power, make_field
from .geometry import rref, space

AGL_ENUM_LIMIT = 10 ** 7


@dataclass(frozen=True)
class AffineMap:
    n: int
    q: int
    matrix: tuple[tuple[int, ...], ...]
    b: int
    sigma: int = 0

    def apply(self, x) -> np.ndarray:
        sp = space(self.n, self.q)
        F = sp.field
        c = sp.decode(x)
        if self.sigma:
            c = automorphisms(F)[self.sigma][c]
        A = np.array(self.matrix, dtype=np.int64).reshape(self.n, self.n)
        out = np.broadcast_to(sp.decode(self.b), c.shape).copy()
        for i in range(self.n):
            out = F.add(out, F.mul(c[..., i:i + 1], A[i]))
        return sp.encode(out)

    def to_permutation(self) -> Permutation:
        sp = space(self.n, self.q)
        return Permutation(self.n, self.q, self.apply(np.arange(sp.size)), check=False)

    @property
    def is_linear(self) -> bool:
        return self.b == 0 and self.sigma == 0


def _rank(rows, F) -> int:
    return len(rref(rows, F)[0])


@lru_cache(maxsize=16)
def _point_tables(n: int, q: int):
    """Point-level (add, scale) tables; scale[c, x] = c*x.  Only for q^n <= 1024."""
    sp = space(n, q)
    idx = np.arange(sp.size, dtype=np.int64)
    add = sp.add(idx[:, None], idx[None, :])
    scale = sp.scale(np.arange(q)[:, None], idx[None, :])
    return add, scale


def _affine_predict(images: np.ndarray, n: int, q: int) -> np.ndarray:
    """For each row f, the affine map through f(0) and f(e_i): x -> f(0) + sum x_i (f(e_i) - f(0))."""
    sp = space(n, q)
    b = images[:, 0]
    units = [sp.unit(i) for i in range(n)]
    coords = sp.coords
    if sp.size <= 1024:
        add, scale = _point_tables(n, q)
        negb = sp.neg(b)
        pred = np.repeat(b[:, None], sp.size, axis=1)
        for i, u in enumerate(units):
            col = add[images[:, u], negb]
            pred = add[pred, scale[coords[:, i][None, :], col[:, None]]]
        return pred
    pred = np.repeat(b[:, None], sp.size, axis=1)
    for i, u in enumerate(units):
        col = sp.sub(images[:, u], b)
        pred = sp.add(pred, sp.scale(coords[:, i][None, :], col[:, None]))
    return pred


def is_affine_batch(images: np.ndarray, n: int, q: int) -> np.ndarray:
    """Row-wise affine test for an array of image sequences (rows must be bijections)."""
    images = np.asarray(images, dtype=np.int64)
    if images.ndim == 1:
        images = images[None, :]
    return np.all(_affine_predict(images, n, q) == images, axis=1)


def is_affine(perm: Permutation) -> AffineMap | None:
    """The affine map equal to perm, if there is one."""
    n, q = perm.n, perm.q
    if not is_affine_batch(perm.images[None, :], n, q)[0]:
        return None
    sp = space(n, q)
    b = int(perm.images[0])
    rows = tuple(tuple(int(v) for v in sp.decode(int(sp.sub(perm.images[sp.unit(i)], b))))
                 for i in range(n))
    return AffineMap(n, q, rows, b, 0)


def _sigma_inverse_inputs(n: int, q: int, j: int) -> np.ndarray:
    """Point permutation x -> sigma_j^(-1)(x) coordinatewise."""
    sp = space(n, q)
    autos = automorphisms(make_field(q))
    inv = np.empty(q, dtype=np.int64)
    inv[autos[j]] = np.arange(q)
    return sp.encode(inv[sp.coords])


def is_semi_affine(perm: Permutation) -> AffineMap | None:
    """x -> sigma(x) A + b for some field automorphism sigma, if perm has that form."""
    n, q = perm.n, perm.q
    for j in range(factor_prime_power(q)[1]):
        g = perm.images[_sigma_inverse_inputs(n, q, j)] if j else perm.images
        m = is_affine(Permutation(n, q, g, check=False))
        if m is not None:
            return AffineMap(n, q, m.matrix, m.b, j)
    return None


def is_semi_affine_batch(images: np.ndarray, n: int, q: int) -> np.ndarray:
    images = np.asarray(images, dtype=np.int64)
    out = is_affine_batch(images, n, q)
    for j in range(1, factor_prime_power(q)[1]):
        out |= is_affine_batch(images[:, _sigma_inverse_inputs(n, q, j)], n, q)
    return out


# -- group orders and enumeration ----------------------------------------------

def group_orders(n: int, q: int) -> tuple[int, int, int]:
    """(|GL(n,q)|, |AGL(n,q)|, |AGammaL(n,q)|)."""
    _, m = factor_prime_power(q)
    gl = 1
    for i in range(n):
        gl *= q ** n - q ** i
    agl = q ** n * gl
    return gl, agl, m * agl


def gl_rows(n: int, q: int) -> np.ndarray:
    """Every invertible n x n matrix as an (|GL|, n) array of row point indices, lexicographic."""
    sp = space(n, q)
    out = []

    def span_of(rows):
        pts = np.zeros(1, dtype=np.int64)
        for r in rows:
            mults = sp.scale(np.arange(q), r)
            pts = sp.add(pts[:, None], mults[None, :]).ravel()
        return pts

    def rec(rows):
        if len(rows) == n:
            out.append(rows)
            return
        inside = np.zeros(sp.size, dtype=bool)
        inside[span_of(rows)] = True
        for r in np.nonzero(~inside)[0]:
            rec(rows + [int(r)])

    rec([])
    return np.array(out, dtype=np.int64).reshape(len(out), n)


def agl_array(n: int, q: int) -> np.ndarray:
    """All of AGL(n,q) as an (|AGL|, q^n) image array: matrices lexicographic, then b."""
    _, agl, _ = group_orders(n, q)
    if agl > AGL_ENUM_LIMIT:
        raise TooLarge(f"|AGL({n},{q})| = {agl} exceeds {AGL_ENUM_LIMIT}")
    sp = space(n, q)
    rows = gl_rows(n, q)
    lin = np.zeros((len(rows), sp.size), dtype=np.int64)
    for i in range(n):
        lin = sp.add(lin, sp.scale(sp.coords[:, i][None, :], rows[:, i][:, None]))
    b = np.arange(sp.size, dtype=np.int64)
    out = sp.add(lin[:, None, :], b[None, :, None]).reshape(-1, sp.size)
    dtype = np.int16 if sp.size <= 1 << 15 else np.int64
    return out.astype(dtype)


def enumerate_agl(n: int, q: int):
    """Yield every element of AGL(n,q) exactly once."""
    for row in agl_array(n, q):
        yield Permutation(n, q, row, check=False)


# -- the transposition double coset ---------------------------------------------------

def _pairs(size: int) -> np.ndarray:
    return np.array(list(combinations(range(size), 2)), dtype=np.int64).reshape(-1, 2)


def transposition_distance_two_batch(images: np.ndarray, n: int, q: int,
                                     semi: bool = False) -> np.ndarray:
    """Row-wise membership in AGL o tau o AGL (or the AGammaL version when semi)."""
    images = np.asarray(images, dtype=np.int64)
    test = is_semi_affine_batch if semi else is_affine_batch
    out = np.zeros(len(images), dtype=bool)
    for u, v in _pairs(images.shape[1]):
        todo = ~out
        if not todo.any():
            break
        sw = images[todo].copy()
        sw[:, [u, v]] = sw[:, [v, u]]
        out[todo] = test(sw, n, q)
    return out


def _disjoint_frames(n: int, q: int, count: int = 3):
    sp = space(n, q)
    units = [sp.unit(i) for i in range(n)]
    used: set[int] = set()
    frames = []
    for t in range(sp.size):
        pts = [t] + [int(sp.add(t, u)) for u in units]
        if used.isdisjoint(pts):
            frames.append(pts)
            used.update(pts)
            if len(frames) == count:
                return frames
    return None


def _frame_candidate(perm: Permutation, frame, semi_j: int = 0):
    """The affine map agreeing with perm on the frame {t, t+e_1, ..., t+e_n}, or None if singular."""
    n, q = perm.n, perm.q
    sp = space(n, q)
    F = sp.field
    imgs = perm.images if not semi_j else perm.images[_sigma_inverse_inputs(n, q, semi_j)]
    t = frame[0]
    rows = [sp.decode(int(sp.sub(imgs[p], imgs[t]))) for p in frame[1:]]
    if _rank(rows, F) < n:
        return None
    A = np.array(rows, dtype=np.int64)
    # g(x) = g(t) + (x - t) A
    diff = sp.decode(sp.sub(np.arange(sp.size), t))
    out = np.broadcast_to(sp.decode(int(imgs[t])), diff.shape).copy()
    for i in range(n):
        out = F.add(out, F.mul(diff[:, i:i + 1], A[i]))
    g = sp.encode(out)
    b = int(g[0])
    return AffineMap(n, q, tuple(tuple(int(v) for v in r) for r in A), b, semi_j), g, imgs


def transposition_distance_two(perm: Permutation, semi: bool = False):
    """(g, u, v) with perm = g o (u v), g affine (semi-affine when semi), or None.

    perm lies in AGL o tau o AGL exactly when it differs from an affine map in
    two points whose images are swapped.
    """
    n, q = perm.n, perm.q
    sigmas = range(factor_prime_power(q)[1]) if semi else [0]
    frames = _disjoint_frames(n, q)
    if frames is not None:
        # two bad points meet at most two of three disjoint frames
        for j in sigmas:
            for fr in frames:
                cand = _frame_candidate(perm, fr, j)
                if cand is None:
                    continue
                g_map, g, imgs = cand
                bad = np.nonzero(g != imgs)[0]
                if len(bad) == 2:
                    u, v = (int(x) for x in bad)
                    if imgs[u] == g[v] and imgs[v] == g[u]:
                        if j:
                            # bad points were found in sigma-twisted coordinates
                            sinv = _sigma_inverse_inputs(n, q, j)
                            u, v = int(sinv[u]), int(sinv[v])
                        return g_map, u, v
        return None
    for u, v in _pairs(len(perm)):
        sw = perm.swapped(int(u), int(v))
        m = is_semi_affine(sw) if semi else is_affine(sw)
        if m is not None:
            return m, int(u), int(v)
    return None


def coset_intersection_count(n: int, a: int = 1, method: str = "criterion") -> int:
    """#{f in AGL(n,2) : tau f tau in AGL(n,2)}, tau = (0 a).

    method "criterion" applies the membership criterion (n >= 4: f{0,a} = {0,a};
    n = 3: f(a) + f(0) = a); "brute" conjugates every element and tests it.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if not 0 < a < 2 ** n:
        raise ValueError("a must be a nonzero point")
    G = agl_array(n, 2).astype(np.int64)
    if method == "criterion":
        if n == 3:
            return int(np.count_nonzero((G[:, a] ^ G[:, 0]) == a))
        fa, f0 = G[:, a], G[:, 0]
        return int(np.count_nonzero(((f0 == 0) & (fa == a)) | ((f0 == a) & (fa == 0))))
    if method == "brute":
        tau = np.arange(2 ** n)
        tau[[0, a]] = tau[[a, 0]]
        conj = tau[G[:, tau]]
        return int(np.count_nonzero(is_affine_batch(conj, n, 2)))
    raise ValueError(f"unknown method {method!r}")


def double_coset_size(n: int) -> int:
    """|AGL o tau o AGL| = |AGL|^2 / |AGL cap tau AGL tau| for q = 2, from the closed intersection count."""
    _, agl, _ = group_orders(n, 2)
    inter = 2 ** 5 * group_orders(2, 2)[0] if n == 3 else 2 ** n * group_orders(n - 1, 2)[0]
    return agl * agl // inter


def minimal_coaffinity_count(n: int) -> int:
    """Number of permutations of F_2^n with the smallest nonzero 2-coaffinity."""
    if n < 3:
        raise ValueError("need n >= 3")
    if n == 3:
        return double_coset_size(3)
    e2 = (n * n + 3 * n - 2)
    out = 2 ** (e2 // 2) * (2 ** n - 1) ** 2
    for j in range(1, n):
        out *= 2 ** j - 1
    return out
