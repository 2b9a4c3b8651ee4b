"""Exact checks of the q-binomial / binomial inequality chain behind the
existence of permutations with k-affinity 0.  Everything is a Fraction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .errors import BudgetExceeded
from .field import is_prime_power
from .geometry import qbinom

# largest q^k whose binomial coefficients we are willing to form
DEFAULT_MAX_QK = 1 << 16


@dataclass(frozen=True)
class IneqReport:
    name: str
    params: dict
    lhs: Fraction
    rhs: Fraction
    strict: bool = True
    margin: Fraction = field(init=False)
    holds: bool = field(init=False)

    def __post_init__(self):
        m = Fraction(self.rhs) - Fraction(self.lhs)
        object.__setattr__(self, "margin", m)
        object.__setattr__(self, "holds", m > 0 if self.strict else m >= 0)

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params), "lhs": _frac_str(self.lhs),
                "rhs": _frac_str(self.rhs), "margin": _frac_str(self.margin),
                "strict": self.strict, "holds": self.holds}


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _budget(q: int, k: int, max_qk: int):
    if q ** k > max_qk:
        raise BudgetExceeded(f"q^k = {q ** k} exceeds the binomial budget {max_qk}")


def ratio(q: int, n: int, k: int) -> Fraction:
    """qbinom(n,k,q)^2 / C(q^n, q^k)."""
    return Fraction(qbinom(n, k, q) ** 2, comb(q ** n, q ** k))


def _lemma31_range(q, n, k):
    return (q > 2 and n > k >= 1) or (q == 2 and n > k >= 2)


def _lemma32_range(q, k):
    return (q >= 4 and k >= 1) or (q == 3 and k >= 2) or (q == 2 and k >= 3)


def check_lemma31(q: int, n: int, k: int, max_qk: int = DEFAULT_MAX_QK) -> IneqReport:
    if not _lemma31_range(q, n, k):
        raise ValueError(f"(q={q}, n={n}, k={k}) is outside the range of the ratio recursion")
    _budget(q, k, max_qk)
    rhs = Fraction(q) ** (2 * k - q ** k) * ratio(q, n - 1, k)
    return IneqReport("lemma31", {"q": q, "n": n, "k": k}, ratio(q, n, k), rhs)


def check_lemma32(q: int, k: int, max_qk: int = DEFAULT_MAX_QK) -> IneqReport:
    if not _lemma32_range(q, k):
        raise ValueError(f"(q={q}, k={k}) is outside the stated range")
    _budget(q, k + 1, max_qk * q)
    return IneqReport("lemma32", {"q": q, "k": k}, ratio(q, k + 1, k),
                      Fraction(1, q ** (q ** k - k)))


def check_cor33(q: int, n: int, k: int, max_qk: int = DEFAULT_MAX_QK) -> IneqReport:
    if not (_lemma32_range(q, k) and n > k):
        raise ValueError(f"(q={q}, n={n}, k={k}) is outside the stated range")
    _budget(q, k, max_qk)
    e = (n - k) * (q ** k - 2 * k) + k
    return IneqReport("cor33", {"q": q, "n": n, "k": k}, ratio(q, n, k), Fraction(1, q ** e))


def check_lemma34(q: int, k: int) -> IneqReport:
    """q^k - 2k - 2 >= 0, reported as lhs = 0, rhs = q^k - 2k - 2 (non-strict)."""
    if not _lemma32_range(q, k):
        raise ValueError(f"(q={q}, k={k}) is outside the stated range")
    return IneqReport("lemma34", {"q": q, "k": k}, Fraction(0), Fraction(q ** k - 2 * k - 2),
                      strict=False)


def _theorem23_range(q, m):
    return (q == 2 and m == 3) or (q == 3 and m == 2) or (q >= 4 and m == 1)


def theorem23_sum(q: int, m: int, n: int, max_qk: int = DEFAULT_MAX_QK) -> Fraction:
    """sum_{k=m}^{n-1} q^(2(n-k)) qbinom(n,k,q)^2 / C(q^n, q^k).

    This is the summed factorial bound divided by q^n!, since
    q^k! (q^n - q^k)! / q^n! = 1 / C(q^n, q^k).
    """
    if not (_theorem23_range(q, m) and n > m):
        raise ValueError(f"(q={q}, m={m}, n={n}) is outside the stated range")
    _budget(q, n - 1, max_qk)
    return sum((q ** (2 * (n - k)) * ratio(q, n, k) for k in range(m, n)), Fraction(0))


def check_theorem23(q: int, m: int, n: int, max_qk: int = DEFAULT_MAX_QK) -> IneqReport:
    return IneqReport("theorem23", {"q": q, "m": m, "n": n}, theorem23_sum(q, m, n, max_qk),
                      Fraction(1))


def check_theorem23_partial(q: int, m: int, n: int, max_qk: int = DEFAULT_MAX_QK) -> IneqReport:
    """Every partial sum stays below 1/(q-1); terms are positive, so the full sum is the max."""
    return IneqReport("theorem23_partial", {"q": q, "m": m, "n": n},
                      theorem23_sum(q, m, n, max_qk), Fraction(1, q - 1))


def theorem23_factorial_form(q: int, m: int, n: int) -> bool:
    """The raw factorial inequality, for tiny cases only (cross-check of the ratio form)."""
    from math import factorial
    lhs = sum(q ** (2 * (n - k)) * qbinom(n, k, q) ** 2 * factorial(q ** k)
              * factorial(q ** n - q ** k) for k in range(m, n))
    return lhs < factorial(q ** n)


def default_m(q: int) -> int | None:
    return {2: 3, 3: 2}.get(q, 1 if q >= 4 else None)


def sweep(q_max: int = 16, n_max: int = 12, qk_max: int = 4096) -> list[IneqReport]:
    """Every check over prime powers q <= q_max, n <= n_max, q^k <= qk_max."""
    reports: list[IneqReport] = []
    for q in range(2, q_max + 1):
        if not is_prime_power(q):
            continue
        for k in range(1, n_max + 1):
            if q ** k > qk_max:
                break
            if _lemma32_range(q, k):
                reports.append(check_lemma34(q, k))
                if k + 1 <= n_max:
                    reports.append(check_lemma32(q, k))
            for n in range(k + 1, n_max + 1):
                if _lemma31_range(q, n, k):
                    reports.append(check_lemma31(q, n, k))
                if _lemma32_range(q, k):
                    reports.append(check_cor33(q, n, k))
        m = default_m(q)
        for n in range(m + 1, n_max + 1):
            if q ** (n - 1) > qk_max:
                break
            reports.append(check_theorem23(q, m, n))
            reports.append(check_theorem23_partial(q, m, n))
    return reports
