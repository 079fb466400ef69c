"""Symbolic closed-form identity generators.

Every function here produces exact :class:`~mtv.expr.ConstantExpression`
values (or exact word combinations): the even-argument evaluations, the
symmetric-sum and repeated-argument reductions, the generating-function
routes, the Euler-number closed forms for star values of even repeated
arguments, the alternating-word decompositions, the depth-2 theorems, and
the classical two-sided identities used as regression checks.

The extended convention t(1) = log2 is in force throughout: argument
strings may contain 1s, and a depth-one t(1) renders as the log2 symbol.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterator, Sequence

from .arith import PowerSeries, bernoulli, euler_number, linear_recurrence, partitions_of
from .expr import (CATALAN, LOG2, PI, ConstantExpression, t_sym, zeta_bar_sym)
from .words import Index, LinComb

__all__ = [
    "WordSum",
    "t_even_value",
    "zeta_even_value",
    "t_value_expr",
    "zeta_in_t",
    "resolve_even_t",
    "symmetric_sum",
    "rep_arg",
    "gf_rep",
    "closed_rep_even",
    "tstar_euler_closed",
    "to_alternating",
    "depth2",
    "NoClosedFormError",
    "classical_identities",
    "even_sum_gf",
    "d_dlog2",
    "PfqParams",
    "height_one_coeff",
]


class NoClosedFormError(ValueError):
    """Raised when the requested parameters have no closed form in scope."""


@dataclass(frozen=True)
class WordSum:
    """A linear combination of index words tagged with how to evaluate it:
    flavor "t" (strict odd sums), "tstar" (weak odd sums) or "zeta"
    (signed/colored words)."""
    flavor: str
    comb: LinComb

    def __post_init__(self):
        if self.flavor not in ("t", "tstar", "zeta"):
            raise ValueError(f"unknown flavor {self.flavor!r}")


# ---------------------------------------------------------------------
# Depth-one values
# ---------------------------------------------------------------------

def t_even_value(n: int) -> ConstantExpression:
    """t(2m) = (-1)^(m-1) B_{2m} (2^{2m}-1) pi^{2m} / (2 (2m)!), exact."""
    if n < 2 or n % 2 != 0:
        raise ValueError("t_even_value needs an even argument >= 2; odd "
                         "arguments stay symbolic")
    m = n // 2
    coeff = (Fraction((-1) ** (m - 1)) * bernoulli(n) * (2 ** n - 1)
             / (2 * factorial(n)))
    return ConstantExpression.pi_power(n, coeff)


def zeta_even_value(n: int) -> ConstantExpression:
    """zeta(2m) = (-1)^(m-1) B_{2m} (2 pi)^{2m} / (2 (2m)!), exact."""
    if n < 2 or n % 2 != 0:
        raise ValueError("zeta_even_value needs an even argument >= 2")
    m = n // 2
    coeff = (Fraction((-1) ** (m - 1)) * bernoulli(n) * (2 ** n)
             / (2 * factorial(n)))
    return ConstantExpression.pi_power(n, coeff)


def t_value_expr(n: int, resolve_even: bool = False) -> ConstantExpression:
    """The symbol t(n), with t(1) = log2, optionally resolving even n to
    its pi-power value."""
    if n < 1:
        raise ValueError("argument must be >= 1")
    if n == 1:
        return ConstantExpression.symbol(LOG2)
    if resolve_even and n % 2 == 0:
        return t_even_value(n)
    return ConstantExpression.symbol(t_sym(n))


def zeta_in_t(n: int) -> ConstantExpression:
    """zeta(n) rewritten over the t alphabet: zeta(n) = 2^n/(2^n - 1) t(n)."""
    if n < 2:
        raise ValueError("argument must be >= 2")
    return t_value_expr(n) * Fraction(2 ** n, 2 ** n - 1)


def resolve_even_t(e: ConstantExpression) -> ConstantExpression:
    """Replace every even-argument t symbol in e by its pi-power value."""
    out = e
    for sym in e.symbols():
        if sym.kind == "t" and sym.arg % 2 == 0:
            out = out.substitute_symbol(sym, t_even_value(sym.arg))
    return out


# ---------------------------------------------------------------------
# Symmetric sums and repeated arguments
# ---------------------------------------------------------------------

def _set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def symmetric_sum(parts: Sequence[int], star: bool = False) -> ConstantExpression:
    """The sum of t (or t-star) over all distinct rearrangements of the
    argument string, as a polynomial in depth-one values.

    The set-partition expansion carries sign (-1)^(k-l) and block factor
    prod (|B|-1)! in the plain case; the star case drops the sign.  The
    result of the full S_k sum is divided by the permutation stabilizer so
    that each distinct arrangement is counted once.
    """
    parts = [int(p) for p in parts]
    if not parts or any(p < 1 for p in parts):
        raise ValueError("parts must be positive integers")
    k = len(parts)
    total = ConstantExpression.zero()
    for blocks in _set_partitions(list(range(k))):
        l = len(blocks)
        coeff = Fraction(1)
        for b in blocks:
            coeff *= factorial(len(b) - 1)
        if not star and (k - l) % 2 == 1:
            coeff = -coeff
        term = ConstantExpression.from_rational(coeff)
        for b in blocks:
            term = term * t_value_expr(sum(parts[j] for j in b))
        total = total + term
    stabilizer = 1
    for v in set(parts):
        stabilizer *= factorial(parts.count(v))
    return total * Fraction(1, stabilizer)


def rep_arg(n: int, k: int, star: bool = False,
            resolve_even: bool = False) -> ConstantExpression:
    """t({n}_k), or t-star({n}_k), as a polynomial in t(n j).

    Plain: sum over partitions lambda of k of
    (-1)^(k - len(lambda)) / prod_i (m_i! i^{m_i}) * prod_j t(n lambda_j);
    the star variant drops the sign (multiplicity factorials retained in
    both cases -- the factorial-free variant fails numeric cross-checks
    already at k = 2).
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    total = ConstantExpression.zero()
    for lam in partitions_of(k):
        denom = 1
        for i, m in lam.multiplicities().items():
            denom *= factorial(m) * (i ** m)
        coeff = Fraction(1, denom)
        if not star and (k - lam.length) % 2 == 1:
            coeff = -coeff
        term = ConstantExpression.from_rational(coeff)
        for part in lam:
            term = term * t_value_expr(n * part, resolve_even)
        total = total + term
    return total


def gf_rep(n: int, k_max: int, star: bool = False,
           resolve_even: bool = False) -> PowerSeries:
    """Generating series whose x^{kn} coefficient is t({n}_k) (star:
    t-star), computed through the exponential of the power-sum series.

    Plain: exp(sum_k (-1)^(k-1) t(nk) x^{kn} / k); star drops the sign.
    Must agree coefficient-by-coefficient with :func:`rep_arg`.
    """
    if n < 2:
        raise ValueError("generating-function route needs n >= 2")
    order = n * k_max
    coeffs: list = [Fraction(0)] * (order + 1)
    for k in range(1, k_max + 1):
        c = Fraction(1, k)
        if not star and k % 2 == 0:
            c = -c
        coeffs[k * n] = t_value_expr(k * n, resolve_even) * c
    return PowerSeries(coeffs, order).exp()


# ---------------------------------------------------------------------
# Closed forms for repeated even arguments
# ---------------------------------------------------------------------

def _quad_power_trace(a: int, b: int, d: int, n: int) -> int:
    """(a + b sqrt(d))^n + (a - b sqrt(d))^n via exact integer powering."""
    x, y = 1, 0  # running value x + y sqrt(d)
    base_x, base_y = a, b
    e = n
    while e:
        if e & 1:
            x, y = x * base_x + y * base_y * d, x * base_y + y * base_x
        base_x, base_y = (base_x * base_x + base_y * base_y * d,
                          2 * base_x * base_y)
        e >>= 1
    return 2 * x


def closed_rep_even(m: int, k: int) -> ConstantExpression:
    """t({2m}_k) for m <= 6 as an exact rational multiple of pi^{2mk}.

    m = 4, 5, 6 use the quadratic-surd / Lucas closed forms; the surd
    powers are evaluated with integer pair powering so no irrationality
    ever leaks into the coefficient.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if m < 1 or m > 6:
        raise NoClosedFormError(f"no closed form in scope for t({{{2*m}}}_k), m={m}")
    w = 2 * m * k
    if m == 1:
        coeff = Fraction(1, 2 ** (2 * k) * factorial(2 * k))
    elif m == 2:
        coeff = Fraction(1, 2 ** (2 * k) * factorial(4 * k))
    elif m == 3:
        coeff = Fraction(3, 4 * factorial(6 * k))
    elif m == 4:
        tr = _quad_power_trace(3, 2, 2, 2 * k)
        coeff = Fraction(tr, 2 ** (2 * k + 1) * factorial(8 * k))
    elif m == 5:
        lucas = linear_recurrence("lucas", 10 * k)
        coeff = Fraction(5 * (lucas + 1), 16 * factorial(10 * k))
    else:
        tr = _quad_power_trace(2, 1, 3, 6 * k)
        coeff = Fraction(3 * (tr + 2 ** (6 * k) + 2 * (-1) ** k),
                         16 * factorial(12 * k))
    return ConstantExpression.pi_power(w, coeff)


# ---------------------------------------------------------------------
# Euler-number closed form for t-star of repeated even arguments
# ---------------------------------------------------------------------

def _cyclotomic(m: int) -> list[Fraction]:
    """Coefficients (ascending) of the m-th cyclotomic polynomial."""
    f = [Fraction(-1)] + [Fraction(0)] * (m - 1) + [Fraction(1)]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            f = _poly_div(f, _cyclotomic(d))
    return f


def _poly_div(num: list[Fraction], den: list[Fraction]) -> list[Fraction]:
    num = list(num)
    out = [Fraction(0)] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] / den[-1]
        out[i] = c
        for j, dc in enumerate(den):
            num[i + j] -= c * dc
    if any(c != 0 for c in num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


def _cyclotomic_rational(coeffs: list[Fraction], m: int) -> Fraction:
    """Reduce sum_e coeffs[e] zeta_m^e modulo the m-th cyclotomic
    polynomial and insist the result is a plain rational."""
    phi = _cyclotomic(m)
    rem = list(coeffs)
    deg_phi = len(phi) - 1
    for i in range(len(rem) - 1, deg_phi - 1, -1):
        c = rem[i] / phi[-1]
        for j in range(len(phi)):
            rem[i - deg_phi + j] -= c * phi[j]
    if any(c != 0 for c in rem[1:]):
        raise ArithmeticError(
            "cyclotomic reduction left an irrational part; the imaginary "
            "components failed to cancel")
    return rem[0]


def _compositions(total: int, m: int) -> Iterator[tuple[int, ...]]:
    if m == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, m - 1):
            yield (first,) + rest


def tstar_euler_closed(m: int, k: int) -> ConstantExpression:
    """t-star({2m}_k) as an exact rational multiple of pi^{2mk}.

    The defining sum runs over (n_1, ..., n_m) >= 0 with sum mk and reads
    multinomial(2mk; 2n_1..2n_m) prod_j e^{2 pi i (j-1) n_j / m} E_{2n_j};
    the roots of unity are handled in exact cyclotomic arithmetic and the
    reduction asserts that everything irrational cancels.
    """
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    total = m * k
    acc = [Fraction(0)] * m
    for ns in _compositions(total, m):
        c = Fraction(factorial(2 * total))
        for nj in ns:
            c /= factorial(2 * nj)
        for nj in ns:
            c *= euler_number(2 * nj)
        e = sum((j * ns[j]) % m for j in range(m)) % m
        acc[e] += c
    q = _cyclotomic_rational(acc, m)
    sign = Fraction((-1) ** (m * k))
    coeff = sign * q / (factorial(2 * total) * 2 ** (2 * total))
    return ConstantExpression.pi_power(2 * total, coeff)


# ---------------------------------------------------------------------
# Alternating-word decompositions
# ---------------------------------------------------------------------

def to_alternating(a: Index, compact: bool = False) -> LinComb:
    """Express t(a) as a rational combination of signed zeta words.

    Full form: 2^{-k} sum over all sign patterns with coefficient
    eps_1 ... eps_k.  Compact form: 2^{-weight} times the unsigned word
    minus 2^{-(k-1)} times the sum of all odd-bar-count patterns
    (2^{k-1} + 1 terms in total).
    """
    if not isinstance(a, Index):
        a = Index(a)
    if not a.admissible():
        raise ValueError(f"{a!r} is not admissible (first part must be >= 2)")
    k = a.depth
    parts = a.parts
    terms: dict[tuple[int, ...], Fraction] = {}
    if compact:
        terms[parts] = Fraction(1, 2 ** a.weight)
        for mask in range(1, 1 << k):
            bars = bin(mask).count("1")
            if bars % 2 == 0:
                continue
            word = tuple(-p if (mask >> i) & 1 else p for i, p in enumerate(parts))
            terms[word] = terms.get(word, Fraction(0)) - Fraction(1, 2 ** (k - 1))
    else:
        for mask in range(1 << k):
            bars = bin(mask).count("1")
            word = tuple(-p if (mask >> i) & 1 else p for i, p in enumerate(parts))
            coeff = Fraction((-1) ** bars, 2 ** k)
            terms[word] = terms.get(word, Fraction(0)) + coeff
    return LinComb(terms)


# ---------------------------------------------------------------------
# Depth 2
# ---------------------------------------------------------------------

def depth2(a: int, b: int) -> ConstantExpression:
    """Closed form for t(a, b).

    Odd weight with a, b >= 2 uses the binomial-coefficient formula
    N(a,b,i) = C(2i-2, a-1) + C(2i-2, b-1); the b = 1 column splits by
    parity of a into the log2 form (a even) and the signed-word form
    (a odd).  Even weight with a, b >= 2 has no closed form in scope.
    """
    if a < 2:
        raise ValueError("t(a, b) needs a >= 2 to converge")
    if b == 1:
        if a % 2 == 0:
            return _t_even_1(a)
        return _t_odd_1(a)
    if b < 1:
        raise ValueError("b must be >= 1")
    if (a + b) % 2 == 0:
        raise NoClosedFormError(
            f"t({a},{b}): even weight with both arguments >= 2 has no "
            "closed form in source")
    n = (a + b - 1) // 2
    out = t_value_expr(2 * n + 1) * Fraction(-1, 2)
    inner = ConstantExpression.zero()
    for i in range(2, n + 1):
        N = comb(2 * i - 2, a - 1) + comb(2 * i - 2, b - 1)
        if N == 0:
            continue
        inner = inner + (t_value_expr(2 * i - 1) * t_value_expr(2 * n - 2 * i + 2)
                         * Fraction(N, 2 ** (2 * i - 1) - 1))
    if a % 2 == 0:
        out = out + t_value_expr(a) * t_value_expr(b) - inner
    else:
        out = out + inner
    return out


def _t_even_1(a: int) -> ConstantExpression:
    """t(2n, 1) = t(2n) log2 - t(2n+1)/2 - sum_{i=2}^n t(2i-1)t(2n-2i+2)/(2^{2i-1}-1)."""
    n = a // 2
    out = (t_value_expr(a) * ConstantExpression.symbol(LOG2)
           - t_value_expr(a + 1) * Fraction(1, 2))
    for i in range(2, n + 1):
        out = out - (t_value_expr(2 * i - 1) * t_value_expr(2 * n - 2 * i + 2)
                     * Fraction(1, 2 ** (2 * i - 1) - 1))
    return out


def _t_odd_1(a: int) -> ConstantExpression:
    """t(p+1, 1) for even p = a - 1, involving the signed word z(-(p+1), 1)."""
    p = a - 1
    out = (t_value_expr(a) * ConstantExpression.symbol(LOG2)
           - ConstantExpression.symbol(zeta_bar_sym((-a, 1))) * Fraction(1, 2))
    num = (p + 1) * (1 - 2 ** (p + 1)) - 2 ** (p + 2)
    out = out + t_value_expr(p + 2) * Fraction(num, 4 * (2 ** (p + 2) - 1))
    for i in range(1, (p - 2) // 2 + 1):
        num_i = 2 ** (p + 1) - 2 ** (2 * i + 1) - 2 ** (p + 1 - 2 * i) + 1
        den_i = (2 ** (2 * i + 1) - 1) * (2 ** (p + 1 - 2 * i) - 1)
        out = out + (t_value_expr(2 * i + 1) * t_value_expr(p + 1 - 2 * i)
                     * Fraction(num_i, 2 * den_i))
    return out


# ---------------------------------------------------------------------
# Classical two-sided identities
# ---------------------------------------------------------------------

def classical_identities(name: str, n: int):
    """Return (lhs, rhs) for one of the classical regression identities.

    lhs is a ConstantExpression when it lives in the symbol alphabet, or a
    LinComb of index words (plain or signed) when it needs series
    evaluation; rhs is always a ConstantExpression.
    """
    if name == "nielsen_t":
        if n < 2:
            raise ValueError("nielsen_t needs n >= 2")
        lhs = ConstantExpression.zero()
        for i in range(1, n):
            lhs = lhs + t_value_expr(2 * i) * t_value_expr(2 * n - 2 * i)
        rhs = t_value_expr(2 * n) * Fraction(2 * n - 1, 2)
        return lhs, rhs
    if name == "nielsen_z":
        if n < 2:
            raise ValueError("nielsen_z needs n >= 2")
        lhs = ConstantExpression.zero()
        for i in range(1, n):
            lhs = lhs + zeta_in_t(2 * i) * zeta_in_t(2 * n - 2 * i)
        rhs = zeta_in_t(2 * n) * Fraction(2 * n + 1, 2)
        return lhs, rhs
    if name == "evpairsum":
        if n < 2:
            raise ValueError("evpairsum needs n >= 2")
        lhs = WordSum("t", LinComb({tuple((2 * i, 2 * n - 2 * i)): Fraction(1)
                                    for i in range(1, n)}))
        rhs = t_value_expr(2 * n) * Fraction(1, 4)
        return lhs, rhs
    if name == "euler_zp1":
        if n < 1:
            raise ValueError("euler_zp1 needs p >= 1")
        p = n
        lhs = WordSum("zeta", LinComb({(p + 1, 1): Fraction(1)}))
        rhs = zeta_in_t(p + 2) * Fraction(p + 1, 2)
        for r in range(2, p + 1):
            rhs = rhs - zeta_in_t(r) * zeta_in_t(p + 2 - r) * Fraction(1, 2)
        return lhs, rhs
    if name == "tp1":
        if n < 1 or n % 2 == 0:
            raise ValueError("tp1 requires odd p")
        p = n
        lhs = WordSum("t", LinComb({(p + 1, 1): Fraction(1)}))
        rhs = (t_value_expr(p + 1) * ConstantExpression.symbol(LOG2)
               - t_value_expr(p + 2) * Fraction(1, 2))
        for i in range(2, (p + 1) // 2 + 1):
            rhs = rhs - (t_value_expr(2 * i - 1) * t_value_expr(p + 3 - 2 * i)
                         * Fraction(1, 2 ** (2 * i - 1) - 1))
        return lhs, rhs
    raise ValueError(f"unknown identity name {name!r}")


# ---------------------------------------------------------------------
# Bivariate generating function for even-argument sums
# ---------------------------------------------------------------------

def _bivariate_ratio(series_coeff, n: int) -> dict[tuple[int, int], ConstantExpression]:
    """Expand F((1-v)u)/F(u) to u-order n, where F(x) = sum_j c_j x^j and
    series_coeff(j) returns c_j as a ConstantExpression."""
    cs = [series_coeff(j) for j in range(n + 1)]
    # numerator: c_j u^j (1-v)^j
    num: dict[tuple[int, int], ConstantExpression] = {}
    for j in range(n + 1):
        for l in range(j + 1):
            num[(j, l)] = cs[j] * Fraction((-1) ** l * comb(j, l))
    # reciprocal of the denominator as a univariate series in u
    den = PowerSeries(cs, n)
    inv = den.reciprocal()
    out: dict[tuple[int, int], ConstantExpression] = {}
    for (i, l), c in num.items():
        for i2 in range(0, n + 1 - i):
            ic = inv.coeffs[i2]
            if ic == 0:
                continue
            key = (i + i2, l)
            cur = out.get(key, ConstantExpression.zero())
            out[key] = cur + c * ic
    return out


def even_sum_gf(n: int, d: int, which: str = "t_side") -> ConstantExpression:
    """Coefficient extraction from the cosine (sine) ratio generating
    function: T(2n, d) = sum over i_1 + ... + i_d = n of t(2i_1, ..., 2i_d)
    (zeta version on the sine side), exact in pi powers.

    Asking for d > n returns exact zero (the coefficient vanishes).
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    if which not in ("t_side", "z_side"):
        raise ValueError("which must be 't_side' or 'z_side'")
    if d > n:
        return ConstantExpression.zero()

    if which == "t_side":
        # cos(pi sqrt(x)/2) = sum_j (-1)^j (pi/2)^{2j} x^j / (2j)!
        def coeff(j: int) -> ConstantExpression:
            return ConstantExpression.pi_power(
                2 * j, Fraction((-1) ** j, 4 ** j * factorial(2 * j)))
    else:
        # sin(pi sqrt(x)) / (pi sqrt(x)) = sum_j (-1)^j pi^{2j} x^j / (2j+1)!
        def coeff(j: int) -> ConstantExpression:
            return ConstantExpression.pi_power(
                2 * j, Fraction((-1) ** j, factorial(2 * j + 1)))

    table = _bivariate_ratio(coeff, n)
    val = table.get((n, d), ConstantExpression.zero())
    return val if isinstance(val, ConstantExpression) else ConstantExpression.from_rational(val)


# ---------------------------------------------------------------------
# log2 derivation and hypergeometric parameter packs
# ---------------------------------------------------------------------

def d_dlog2(e: ConstantExpression) -> ConstantExpression:
    """Formal differentiation with respect to log2."""
    return e.d_dlog2()


@dataclass(frozen=True)
class PfqParams:
    """Parameter pack for a generalized hypergeometric value pFq(...; z)."""
    upper: tuple[Fraction, ...]
    lower: tuple[Fraction, ...]
    z: Fraction = Fraction(1)

    def render(self) -> str:
        ups = ",".join(str(u) for u in self.upper)
        lows = ",".join(str(l) for l in self.lower)
        return f"{len(self.upper)}F{len(self.lower)}({ups};{lows};{self.z})"


def height_one_coeff(source: str, n: int) -> PfqParams:
    """Hypergeometric parameters for the height-one coefficients.

    t_n_as_pFq: t(n) = (n+1)F(n)(1, {1/2}_n; {3/2}_n; 1).
    row_sum_as_pFq: sum_j t(n, {1}_(j-1)) = (n+1)F(n)(1, 1, {1/2}_(n-1); {3/2}_n; 1).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    half = Fraction(1, 2)
    threehalf = Fraction(3, 2)
    if source == "t_n_as_pFq":
        return PfqParams((Fraction(1),) + (half,) * n, (threehalf,) * n)
    if source == "row_sum_as_pFq":
        return PfqParams((Fraction(1), Fraction(1)) + (half,) * (n - 1),
                         (threehalf,) * n)
    raise ValueError(f"unknown source {source!r}")
