"""Exact arithmetic foundations.

Big rationals (via :class:`fractions.Fraction`), Bernoulli and Euler
numbers, integer partitions, the Newton polynomials converting power sums
to elementary/complete symmetric functions, truncated formal power series,
and the classical linear recurrences (Fibonacci, Lucas, Padovan).

Everything here is immutable after construction and exact; no floating
point enters this module.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable, Iterator, Sequence

__all__ = [
    "bernoulli",
    "euler_number",
    "Partition",
    "partitions_of",
    "newton_e_from_p",
    "newton_h_from_p",
    "PowerSeries",
    "linear_recurrence",
]


# ---------------------------------------------------------------------
# Bernoulli and Euler numbers
# ---------------------------------------------------------------------

_BERNOULLI_CACHE: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n as an exact Fraction, convention B_1 = -1/2.

    Uses the binomial recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0.  Only
    even indices matter downstream (odd B_n vanish for n >= 3), but the
    full sequence is produced so the recurrence can serve as its own
    cross-check against the e.g.f. oracle in the tests.
    """
    if n < 0:
        raise ValueError("Bernoulli index must be >= 0")
    while len(_BERNOULLI_CACHE) <= n:
        m = len(_BERNOULLI_CACHE)
        s = sum(Fraction(comb(m + 1, k)) * _BERNOULLI_CACHE[k] for k in range(m))
        _BERNOULLI_CACHE.append(-s / (m + 1))
    return _BERNOULLI_CACHE[n]


_EULER_CACHE: list[int] = [1]


def euler_number(n: int) -> int:
    """Euler number E_n for even n, from sec x = sum (-1)^j E_{2j} x^{2j}/(2j)!.

    With this sign convention E_0 = 1, E_2 = -1, E_4 = 5, E_6 = -61.
    Odd indices are rejected (they are zero and never consumed here).
    """
    if n < 0:
        raise ValueError("Euler index must be >= 0")
    if n % 2 != 0:
        raise ValueError("Euler index must be even")
    m = n // 2
    while len(_EULER_CACHE) <= m:
        j = len(_EULER_CACHE)
        # sum_{k=0}^{j} C(2j, 2k) E_{2k} = 0 for j >= 1
        s = sum(comb(2 * j, 2 * k) * _EULER_CACHE[k] for k in range(j))
        _EULER_CACHE.append(-s)
    return _EULER_CACHE[m]


# ---------------------------------------------------------------------
# Integer partitions
# ---------------------------------------------------------------------

class Partition:
    """A partition of a positive integer: weakly decreasing positive parts."""

    __slots__ = ("parts",)

    def __init__(self, parts: Sequence[int]):
        parts = tuple(parts)
        if not parts or any(p < 1 for p in parts):
            raise ValueError("partition parts must be positive")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError("partition parts must be weakly decreasing")
        self.parts = parts

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def multiplicity(self, i: int) -> int:
        """Number of parts equal to i."""
        return self.parts.count(i)

    def multiplicities(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for p in self.parts:
            out[p] = out.get(p, 0) + 1
        return out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Partition) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __repr__(self) -> str:
        return f"Partition({list(self.parts)})"


def partitions_of(k: int) -> list[Partition]:
    """All partitions of k in reverse-lexicographic order.

    partitions_of(4) yields (4), (3,1), (2,2), (2,1,1), (1,1,1,1).
    """
    if k < 1:
        raise ValueError("can only partition a positive integer")

    out: list[Partition] = []

    def descend(remaining: int, maxpart: int, prefix: list[int]) -> None:
        if remaining == 0:
            out.append(Partition(prefix))
            return
        for p in range(min(maxpart, remaining), 0, -1):
            prefix.append(p)
            descend(remaining - p, p, prefix)
            prefix.pop()

    descend(k, k, [])
    return out


# ---------------------------------------------------------------------
# Newton polynomials: e_k and h_k in terms of power sums
# ---------------------------------------------------------------------
#
# A polynomial in the abstract variables p_1, ..., p_k is represented as a
# dict mapping a partition (tuple of weakly decreasing indices, the
# monomial p_{l_1} p_{l_2} ... ) to its rational coefficient.

PPolynomial = dict[tuple[int, ...], Fraction]


def _power_sum_poly(k: int, signed: bool) -> PPolynomial:
    out: PPolynomial = {}
    for lam in partitions_of(k):
        denom = 1
        for i, m in lam.multiplicities().items():
            denom *= (i ** m) * _factorial(m)
        coeff = Fraction(1, denom)
        if signed and (k - lam.length) % 2 == 1:
            coeff = -coeff
        out[lam.parts] = coeff
    return out


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    return 1 if n <= 1 else n * _factorial(n - 1)


def newton_e_from_p(k: int) -> PPolynomial:
    """The polynomial P_k with e_k = P_k(p_1, ..., p_k).

    Keys are monomials in the p variables written as partitions, e.g.
    newton_e_from_p(2) == {(1, 1): 1/2, (2,): -1/2}.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return _power_sum_poly(k, signed=True)


def newton_h_from_p(k: int) -> PPolynomial:
    """The polynomial Q_k with h_k = Q_k(p_1, ..., p_k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return _power_sum_poly(k, signed=False)


def evaluate_ppoly(poly: PPolynomial, values: Callable[[int], object]):
    """Substitute values(i) for p_i.  Works for any commutative coefficient
    type supporting + and * with Fraction."""
    total = None
    for mono, coeff in poly.items():
        term = coeff
        for i in mono:
            term = term * values(i)
        total = term if total is None else total + term
    return total


# ---------------------------------------------------------------------
# Truncated formal power series
# ---------------------------------------------------------------------

class PowerSeries:
    """A truncated power series with explicit truncation order.

    Coefficients may be Fractions or any commutative ring elements
    supporting +, * and multiplication by Fraction (the identities module
    uses symbolic constant expressions here).  ``coeffs[n]`` is the
    coefficient of x^n; indices above ``order`` are absent and arithmetic
    never reads past them.  Binary operations truncate to the smaller
    order.
    """

    __slots__ = ("coeffs", "order")

    def __init__(self, coeffs: Iterable, order: int):
        if order < 0:
            raise ValueError("truncation order must be >= 0")
        cl = list(coeffs)
        if len(cl) > order + 1:
            cl = cl[: order + 1]
        while len(cl) < order + 1:
            cl.append(Fraction(0))
        self.coeffs = cl
        self.order = order

    @classmethod
    def zero(cls, order: int) -> "PowerSeries":
        return cls([], order)

    @classmethod
    def one(cls, order: int) -> "PowerSeries":
        return cls([Fraction(1)], order)

    @classmethod
    def x(cls, order: int) -> "PowerSeries":
        return cls([Fraction(0), Fraction(1)], order)

    def __getitem__(self, n: int):
        if n < 0 or n > self.order:
            raise IndexError(f"coefficient {n} beyond truncation order {self.order}")
        return self.coeffs[n]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PowerSeries):
            return NotImplemented
        n = min(self.order, other.order)
        return all(self.coeffs[i] == other.coeffs[i] for i in range(n + 1))

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries([self.coeffs[i] + other.coeffs[i] for i in range(n + 1)], n)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries([self.coeffs[i] - other.coeffs[i] for i in range(n + 1)], n)

    def __neg__(self) -> "PowerSeries":
        return PowerSeries([-c for c in self.coeffs], self.order)

    def scale(self, c) -> "PowerSeries":
        return PowerSeries([coeff * c for coeff in self.coeffs], self.order)

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        out = [Fraction(0)] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a == 0:
                continue
            for j in range(0, n + 1 - i):
                b = other.coeffs[j]
                if b == 0:
                    continue
                out[i + j] = out[i + j] + a * b
        return PowerSeries(out, n)

    def scale_argument(self, c) -> "PowerSeries":
        """Substitute x -> c*x for a rational (or symbolic) constant c."""
        out = []
        cn = Fraction(1)
        for a in self.coeffs:
            out.append(a * cn)
            cn = cn * c
        return PowerSeries(out, self.order)

    def reciprocal(self) -> "PowerSeries":
        c0 = self.coeffs[0]
        if c0 == 0:
            raise ValueError("reciprocal needs an invertible constant term")
        inv0 = Fraction(1) / c0 if isinstance(c0, (int, Fraction)) else c0.inverse()
        out = [inv0]
        for n in range(1, self.order + 1):
            s = None
            for i in range(1, n + 1):
                t = self.coeffs[i] * out[n - i]
                s = t if s is None else s + t
            out.append(-(s * inv0))
        return PowerSeries(out, self.order)

    def exp(self) -> "PowerSeries":
        """exp of a series with zero constant term (coefficient recursion
        e_n = (1/n) sum_{j=1}^{n} j a_j e_{n-j})."""
        if self.coeffs[0] != 0:
            raise ValueError("exp needs zero constant term")
        out = [Fraction(1)]
        for n in range(1, self.order + 1):
            s = None
            for j in range(1, n + 1):
                t = (Fraction(j, n) * self.coeffs[j]) * out[n - j]
                s = t if s is None else s + t
            out.append(s)
        return PowerSeries(out, self.order)

    def log(self) -> "PowerSeries":
        """log of a series with constant term 1."""
        if self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        out = [Fraction(0)]
        for n in range(1, self.order + 1):
            s = self.coeffs[n]
            for j in range(1, n):
                s = s - (Fraction(j, n) * out[j]) * self.coeffs[n - j]
            out.append(s)
        return PowerSeries(out, self.order)

    def __repr__(self) -> str:
        parts = [f"{c!r}*x^{i}" for i, c in enumerate(self.coeffs) if c != 0]
        body = " + ".join(parts) if parts else "0"
        return f"PowerSeries({body} + O(x^{self.order + 1}))"


def series_arith(a: PowerSeries, b: PowerSeries | None, op: str, c=None) -> PowerSeries:
    """Dispatch-style wrapper over the PowerSeries methods.

    op is one of add, mul, exp, log, scale_argument, reciprocal; the unary
    ops ignore b, and scale_argument takes the substitution constant c.
    """
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "exp":
        return a.exp()
    if op == "log":
        return a.log()
    if op == "reciprocal":
        return a.reciprocal()
    if op == "scale_argument":
        if c is None:
            raise ValueError("scale_argument needs the constant c")
        return a.scale_argument(c)
    raise ValueError(f"unknown series op {op!r}")


# ---------------------------------------------------------------------
# Linear recurrences
# ---------------------------------------------------------------------

def linear_recurrence(kind: str, n: int) -> int:
    """Fibonacci (F_0=0, F_1=1), Lucas (L_0=2, L_1=1) or Padovan value.

    Padovan follows the seeds P_1 = 0, P_2 = P_3 = 1 with
    P_n = P_{n-2} + P_{n-3}, and is only defined for n >= 1 here.
    """
    if kind == "fibonacci":
        if n < 0:
            raise ValueError("Fibonacci index must be >= 0")
        a, b = 0, 1
        for _ in range(n):
            a, b = b, a + b
        return a
    if kind == "lucas":
        if n < 0:
            raise ValueError("Lucas index must be >= 0")
        a, b = 2, 1
        for _ in range(n):
            a, b = b, a + b
        return a
    if kind == "padovan":
        if n < 1:
            raise ValueError("Padovan index must be >= 1")
        seq = [0, 1, 1]  # P_1, P_2, P_3
        while len(seq) < n:
            seq.append(seq[-2] + seq[-3])
        return seq[n - 1]
    raise ValueError(f"unknown recurrence kind {kind!r}")
