"""Named permutations: inverse map, transpositions, products, lifts, fixtures,
random (semi-)affine maps, plus permutation file I/O."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .affinity import Permutation
from .errors import FieldMismatch
from .field import automorphisms, factor_prime_power, make_field
from .geometry import rref, space
from .groups import AffineMap

# permutations of F_3^2 and F_3^3 with 1-affinity 0
FIXTURES = {
    "f32": (3, 2, (0, 1, 8, 2, 3, 4, 5, 6, 7)),
    "f33": (3, 3, (0, 1, 24, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13,
                   14, 25, 15, 16, 17, 26, 18, 19, 23, 20, 21, 22)),
}


def identity(n: int, q: int) -> Permutation:
    return Permutation.identity(n, q)


def inverse_map(n: int) -> Permutation:
    """x -> x^(2^n - 2) on F_2^n, identified with F_{2^n} via the polynomial basis.

    Point index and field element share the same integer, so the bit of t^i is
    the i-th least significant coordinate.
    """
    if not 1 <= n <= 16:
        raise ValueError("inverse map is available for 1 <= n <= 16")
    F = make_field(2 ** n)
    images = np.zeros(2 ** n, dtype=np.int64)
    images[1:] = F.inv(np.arange(1, 2 ** n))
    return Permutation(n, 2, images, check=False)


def transposition(n: int, q: int, u: int = 0, v: int = 1) -> Permutation:
    if u == v:
        raise ValueError("a transposition needs two distinct points")
    return Permutation.identity(n, q).swapped(u, v)


def product_perm(f: Permutation, g: Permutation) -> Permutation:
    """(x, y) -> (f(x), g(y)) with the x block in the most significant coordinates."""
    if f.q != g.q:
        raise FieldMismatch(f"cannot form a product over F_{f.q} and F_{g.q}")
    size_g = len(g)
    images = (f.images[:, None] * size_g + g.images[None, :]).ravel()
    return Permutation(f.n + g.n, f.q, images, check=False)


def lift_perm(g: Permutation) -> Permutation:
    """(c, x) -> (c, g(x)) on F_2^(n+1), c the most significant coordinate."""
    if g.q != 2:
        raise FieldMismatch("lift is defined over F_2")
    return product_perm(Permutation.identity(1, 2), g)


def fixture(name: str) -> Permutation:
    try:
        q, n, images = FIXTURES[name]
    except KeyError:
        raise ValueError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return Permutation(n, q, images)


def random_invertible_matrix(n: int, q: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of GL(n,q) by rejection sampling."""
    F = make_field(q)
    while True:
        A = rng.integers(0, q, size=(n, n))
        if len(rref(A.tolist(), F)[0]) == n:
            return A


def random_semi_affine(n: int, q: int, seed=None, sigma: int | None = None) -> Permutation:
    """x -> sigma(x) A + b with random invertible A, vector b and automorphism sigma."""
    rng = np.random.default_rng(seed)
    _, m = factor_prime_power(q)
    j = int(rng.integers(0, m)) if sigma is None else sigma
    A = random_invertible_matrix(n, q, rng)
    b = int(rng.integers(0, q ** n))
    amap = AffineMap(n, q, tuple(tuple(int(v) for v in r) for r in A), b, j)
    return amap.to_permutation()


def random_affine(n: int, q: int, seed=None) -> Permutation:
    return random_semi_affine(n, q, seed, sigma=0)


def random_permutation(n: int, q: int, seed=None) -> Permutation:
    rng = np.random.default_rng(seed)
    return Permutation(n, q, rng.permutation(q ** n), check=False)


def frobenius_map(n: int, q: int, j: int = 1) -> Permutation:
    """Apply the j-th Frobenius power to every coordinate."""
    sp = space(n, q)
    auto = automorphisms(make_field(q))[j]
    return Permutation(n, q, sp.encode(auto[sp.coords]), check=False)


# -- recipes -------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructionRecipe:
    """A description of how to build a permutation; ``build(n, q)`` realizes it.

    kinds and args:
      identity; inverse; transposition (u, v); fixture (name,);
      affine (seed,); semi-affine (seed,); random (seed,); file (path,);
      lift (recipe,); product (recipe, n1, recipe)
    """
    kind: str
    args: tuple = ()

    def build(self, n: int | None, q: int | None) -> Permutation:
        k, a = self.kind, self.args
        if k == "fixture":
            return fixture(a[0])
        if k == "file":
            return read_permutation(a[0])
        if n is None or q is None:
            raise ValueError(f"recipe {k!r} needs --n and --q")
        if k == "identity":
            return identity(n, q)
        if k == "inverse":
            if q != 2:
                raise FieldMismatch("the inverse map is defined on F_2^n")
            return inverse_map(n)
        if k == "transposition":
            u, v = a if a else (0, 1)
            return transposition(n, q, u, v)
        if k == "affine":
            return random_affine(n, q, a[0] if a else None)
        if k == "semi-affine":
            return random_semi_affine(n, q, a[0] if a else None)
        if k == "random":
            return random_permutation(n, q, a[0] if a else None)
        if k == "lift":
            return lift_perm(a[0].build(n - 1, q))
        if k == "product":
            left, n1, right = a
            return product_perm(left.build(n1, q), right.build(n - n1, q))
        raise ValueError(f"unknown construction {k!r}")


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_recipe(text: str) -> ConstructionRecipe:
    """Parse e.g. ``inverse``, ``transposition:0,5``, ``fixture:f32``, ``affine:7``,
    ``lift(fixture:f32)`` or ``product(fixture:f32;2;fixture:f33)``."""
    text = text.strip()
    if "(" in text:
        head, rest = text.split("(", 1)
        if not rest.endswith(")"):
            raise ValueError(f"unbalanced parentheses in {text!r}")
        inner = rest[:-1]
        if head == "lift":
            return ConstructionRecipe("lift", (parse_recipe(inner),))
        if head == "product":
            parts = _split_top(inner, ";")
            if len(parts) != 3:
                raise ValueError("product needs (left;n_left;right)")
            return ConstructionRecipe("product",
                                      (parse_recipe(parts[0]), int(parts[1]), parse_recipe(parts[2])))
        raise ValueError(f"unknown construction {head!r}")
    head, _, arg = text.partition(":")
    if head == "transposition" and arg:
        u, v = (int(x) for x in arg.split(","))
        return ConstructionRecipe(head, (u, v))
    if head in ("affine", "semi-affine", "random") and arg:
        return ConstructionRecipe(head, (int(arg),))
    if head in ("fixture", "file"):
        if not arg:
            raise ValueError(f"{head} needs an argument")
        return ConstructionRecipe(head, (arg,))
    return ConstructionRecipe(head, ())


# -- file formats -------------------------------------------------------------------

def perm_to_json(perm: Permutation) -> dict:
    return {"q": perm.q, "n": perm.n, "images": [int(x) for x in perm.images]}


def perm_from_json(obj: dict) -> Permutation:
    return Permutation(int(obj["n"]), int(obj["q"]), obj["images"])


def perm_to_text(perm: Permutation) -> str:
    return f"{perm.q} {perm.n}\n" + " ".join(str(int(x)) for x in perm.images) + "\n"


def perm_from_text(text: str) -> Permutation:
    """Plain-text form: q, n, then the q^n images, all whitespace separated."""
    tok = text.split()
    if len(tok) < 2:
        raise ValueError("expected 'q n images...'")
    q, n = int(tok[0]), int(tok[1])
    return Permutation(n, q, [int(t) for t in tok[2:]])


def read_permutation(path) -> Permutation:
    """Read JSON or plain text (chosen by content); '-' reads stdin."""
    if str(path) == "-":
        import sys
        text = sys.stdin.read()
    else:
        text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return perm_from_json(json.loads(text))
    return perm_from_text(text)


def write_permutation(perm: Permutation, path, fmt: str = "json") -> None:
    """Write atomically: a temp file in the same directory, then rename."""
    body = json.dumps(perm_to_json(perm)) + "\n" if fmt == "json" else perm_to_text(perm)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(body)
    os.replace(tmp, path)
