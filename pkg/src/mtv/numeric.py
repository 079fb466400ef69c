"""High-precision numerical evaluation of all series objects.

The workhorse is a nested-sum engine: inner partial sums are tabulated in
one pass over the summation grid (odd integers, even integers, or all
integers, with strict or weak descent), and each level's cumulative sum is
given an asymptotic expansion in (log n)^j n^(-r) whose integration
constant is pinned against the tabulated value at the top of the grid.
Euler-Maclaurin supplies the expansion for monotone levels and Boole
summation the oscillating envelope for alternating ones, so multiple
t-values, t-star values and colored zeta words all evaluate far below the
package's verification tolerances at the default cutoff.

Beyond the nested engine there are dedicated evaluators for the modified
double (Tornheim-style) sums, generalized hypergeometric series at and
inside the unit disk, the height-one generating function, and gamma/psi
via the shifted Stirling expansion.  Error bounds are heuristic dominated
estimates (last correction term times a safety factor), not certified
intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr

from .arith import bernoulli
from .expr import ConstantExpression
from .identities import WordSum
from .words import Index, LinComb, SignedIndex
from . import tails
from .tails import (LogPoly, alt_power_tail, boole_envelope, em_cumulative,
                    lp_add, lp_eval, lp_max_term, lp_mul_power, lp_scale,
                    lp_shift, lp_tail, power_tail)

__all__ = ["BigFloat", "EvalContext", "eval_t_series", "eval_tstar_series",
           "eval_colored_mzv", "eval_zeta", "eval_tornheim",
           "eval_parity_double", "eval_pfq", "eval_height_one",
           "eval_gamma_digamma", "eval_expr", "eval_word_sum"]


# ---------------------------------------------------------------------
# Result and context types
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class BigFloat:
    """A high-precision real plus a heuristic error magnitude."""
    value: mpfr
    error_bound: mpfr | None = None

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        err = "?" if self.error_bound is None else f"{float(self.error_bound):.2e}"
        return f"BigFloat({self.value}, err<={err})"


class EvalContext:
    """Evaluation configuration plus the shared constant cache.

    The cache is filled during a single-writer initialization phase; call
    :meth:`freeze` before sharing a context across threads, after which
    any attempt to grow the cache raises.
    """

    def __init__(self, precision_bits: int = 256, cutoff: int = 100_000,
                 em_order: int = 6, extrapolation_levels: int = 4):
        if precision_bits < 64:
            raise ValueError("precision must be at least 64 bits")
        if cutoff < 64:
            raise ValueError("cutoff is unusably small")
        if em_order < 1 or extrapolation_levels < 1:
            raise ValueError("orders must be positive")
        self.precision_bits = precision_bits
        self.cutoff = cutoff
        self.em_order = em_order
        # controls how many inverse powers the tail expansions keep; the
        # moral descendant of the (log N)^j / N^r extrapolation model
        self.extrapolation_levels = extrapolation_levels
        self._cache: dict = {}
        self._frozen = False

    # -- precision plumbing  -------------------------------------------

    @property
    def guard_bits(self) -> int:
        return self.precision_bits + 32

    def working(self):
        return gmpy2.context(precision=self.guard_bits)

    @property
    def expansion_order(self) -> int:
        return max(4, self.extrapolation_levels + 2)

    @property
    def boole_order(self) -> int:
        return max(10, 2 * self.em_order + 4)

    def eps(self) -> mpfr:
        return mpfr(2) ** (-self.precision_bits)

    # -- cache ----------------------------------------------------------

    def freeze(self) -> None:
        self._frozen = True

    def _cached(self, key, builder):
        hit = self._cache.get(key)
        if hit is not None and hit[1] >= self.precision_bits:
            return hit[0]
        if self._frozen:
            raise RuntimeError(
                f"constant cache is frozen; missing entry for {key!r}")
        val = builder()
        self._cache[key] = (val, self.precision_bits)
        return val

    # -- constants ------------------------------------------------------

    def pi(self) -> mpfr:
        return self._cached(("pi",), lambda: _machin_pi())

    def log2(self) -> mpfr:
        return self._cached(("log2",), lambda: _atanh_log2())

    def euler_gamma(self) -> mpfr:
        return self._cached(("gamma",), lambda: _harmonic_gamma(self))

    def catalan(self) -> mpfr:
        def build():
            half = Fraction(1, 2)
            v = eval_pfq((Fraction(1), Fraction(1), half),
                         (Fraction(3, 2), Fraction(3, 2)), Fraction(1), self)
            return v.value / 2
        return self._cached(("catalan",), build)

    def zeta(self, n: int) -> mpfr:
        if n < 2:
            raise ValueError("zeta cache takes integer arguments >= 2")
        return self._cached(("zeta", n), lambda: _zeta_em(n, self))

    def t_const(self, n: int) -> mpfr:
        if n < 2:
            raise ValueError("t cache takes integer arguments >= 2")

        def build():
            with self.working():
                return (1 - mpfr(2) ** (-n)) * self.zeta(n)
        return self._cached(("t", n), build)

    def zeta_bar(self, word: tuple[int, ...]) -> mpfr:
        def build():
            return eval_colored_mzv(SignedIndex(word), self).value
        return self._cached(("zbar", tuple(word)), build)


# ---------------------------------------------------------------------
# Constant builders
# ---------------------------------------------------------------------

def _machin_pi() -> mpfr:
    # pi = 16 atan(1/5) - 4 atan(1/239)
    def atan_inv(x: int) -> mpfr:
        total = mpfr(0)
        term = 1 / mpfr(x)
        x2 = mpfr(x) * x
        k = 0
        eps = mpfr(2) ** (-gmpy2.get_context().precision - 8)
        while abs(term) > eps:
            total += term / (2 * k + 1) if k % 2 == 0 else -term / (2 * k + 1)
            term = term / x2
            k += 1
        return total
    return 16 * atan_inv(5) - 4 * atan_inv(239)


def _atanh_log2() -> mpfr:
    # log 2 = 2 atanh(1/3) = 2 sum_k (1/3)^(2k+1) / (2k+1)
    total = mpfr(0)
    term = mpfr(1) / 3
    nine = mpfr(9)
    k = 0
    eps = mpfr(2) ** (-gmpy2.get_context().precision - 8)
    while term > eps:
        total += term / (2 * k + 1)
        term = term / nine
        k += 1
    return 2 * total


def _harmonic_gamma(ctx: EvalContext) -> mpfr:
    # gamma = H_N - log N - 1/(2N) + sum_r B_2r / (2r N^2r), N = 2^e
    with ctx.working():
        prec = gmpy2.get_context().precision
        e = max(13, (prec + 16) // 24)
        N = 1 << e
        h = mpfr(0)
        for n in range(1, N + 1):
            h += mpfr(1) / n
        total = h - e * ctx.log2() - mpfr(1) / (2 * N)
        eps = mpfr(2) ** (-prec - 8)
        r = 1
        while True:
            b = bernoulli(2 * r)
            term = (mpfr(b.numerator) / b.denominator) / (2 * r * mpfr(N) ** (2 * r))
            if abs(term) < eps or r > 64:
                break
            total += term
            r += 1
        return total


def _zeta_em(n: int, ctx: EvalContext) -> mpfr:
    with ctx.working():
        prec = gmpy2.get_context().precision
        N0 = max(64, prec // 3)
        total = mpfr(0)
        for m in range(1, N0 + 1):
            total += mpfr(m) ** (-n)
        # adaptive Euler-Maclaurin tail for f = x^(-n)
        x = mpfr(N0)
        tail = x ** (1 - n) / (n - 1) - x ** (-n) / 2
        poch = mpfr(n)
        eps = mpfr(2) ** (-prec - 8)
        prev = None
        for r in range(1, 80):
            b = bernoulli(2 * r)
            term = (mpfr(b.numerator) / b.denominator / tails._fact(2 * r)) \
                * poch * x ** (1 - n - 2 * r)
            if abs(term) < eps:
                tail += term
                break
            if prev is not None and abs(term) > prev:
                break  # asymptotic divergence; stop at the smallest term
            tail += term
            prev = abs(term)
            poch = poch * (n + 2 * r - 1) * (n + 2 * r)
        return total + tail


# ---------------------------------------------------------------------
# The nested-sum engine
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class _Level:
    exponent: int
    alternating: bool = False
    modulus: int = 2
    residue: int = 1
    start: int = 1
    gap: int = 2  # inner cumulative is evaluated at n - gap


def _tabulate(levels: Sequence[_Level], N: int, weak: bool):
    """One pass over the grid; returns final cumulatives and pin points."""
    k = len(levels)
    a = [mpfr(0)] * k + [mpfr(1)]
    pins = [0] * k
    order = list(range(k)) if not weak else list(range(k - 1, -1, -1))
    exps = sorted({lvl.exponent for lvl in levels})
    max_exp = exps[-1]
    all_odd = all(lvl.modulus == 2 and lvl.residue == 1 for lvl in levels)
    grid: Iterable[int] = range(1, N + 1, 2) if all_odd else range(1, N + 1)
    pow_cache: list = [mpfr(0)] * (max_exp + 1)
    for n in grid:
        inv = 1 / mpfr(n)
        p = mpfr(1)
        for e in range(1, max_exp + 1):
            p = p * inv
            pow_cache[e] = p
        negate = bool(n & 1)
        for j in order:
            lvl = levels[j]
            if n < lvl.start:
                continue
            if not all_odd and (n - lvl.residue) % lvl.modulus:
                continue
            term = pow_cache[lvl.exponent] * a[j + 1]
            if lvl.alternating and negate:
                a[j] -= term
            else:
                a[j] += term
            pins[j] = n
    return a, pins


def _nested_sum(levels: Sequence[_Level], ctx: EvalContext) -> BigFloat:
    k = len(levels)
    weak = levels[0].gap == 0
    if any((lvl.gap == 0) != weak for lvl in levels):
        raise ValueError("mixed strict/weak descent is not supported")
    with ctx.working():
        a, pins = _tabulate(levels, ctx.cutoff, weak)
        rmax = ctx.expansion_order
        K = mpfr(1)
        P: LogPoly = {}
        Q: LogPoly = {}
        err = mpfr(0)
        for j in range(k - 1, -1, -1):
            lvl = levels[j]
            gap = lvl.gap
            Ps = lp_shift(P, -gap, rmax)
            Qs = lp_shift(Q, -gap, rmax)
            base = lp_add({(0, 0): K}, Ps)
            osc = lp_scale(Qs, (-1) ** gap)
            f_base = lp_mul_power(base, lvl.exponent)
            f_osc = lp_mul_power(osc, lvl.exponent)
            if lvl.alternating:
                if lvl.modulus != 1:
                    raise ValueError("alternation is only defined on unit-step levels")
                f_non, f_alt = f_osc, f_base
            else:
                f_non, f_alt = f_base, f_osc
            P, last_em = em_cumulative(f_non, lvl.modulus, ctx.em_order, rmax)
            if f_alt:
                if lvl.modulus != 1:
                    raise ValueError("alternation is only defined on unit-step levels")
                Q = boole_envelope(f_alt, ctx.boole_order, rmax)
            else:
                Q = {}
            npin = pins[j]
            if npin == 0:
                raise ValueError("cutoff too small: a level never activated")
            kj = a[j] - lp_eval(P, npin)
            if Q:
                parity = -1 if npin % 2 else 1
                kj -= parity * lp_eval(Q, npin)
            # error heuristics: first omitted Euler-Maclaurin correction and
            # the first truncated expansion order, both at the pin point
            if last_em:
                err += abs(lp_eval(last_em, npin))
            edge = {key: c for key, c in P.items() if key[1] == rmax}
            if edge:
                err += lp_max_term(edge, npin) / npin
            K = kj
        rounding = mpfr(2) ** (-ctx.precision_bits) * (ctx.cutoff * k)
        total_err = err * 10 + rounding * max(mpfr(1), abs(K))
        return BigFloat(K, total_err)


# ---------------------------------------------------------------------
# Public series evaluators
# ---------------------------------------------------------------------

def eval_t_series(a, ctx: EvalContext) -> BigFloat:
    """Multiple t-value t(a) by direct nested summation over odd
    denominators with Euler-Maclaurin tails at every depth."""
    idx = a if isinstance(a, Index) else Index(a)
    if not idx.admissible():
        raise ValueError(f"{idx!r} is not admissible (needs first part >= 2)")
    levels = [_Level(exponent=e, gap=2) for e in idx.parts]
    return _nested_sum(levels, ctx)


def eval_tstar_series(a, ctx: EvalContext) -> BigFloat:
    """t-star value: weak inequalities between successive denominators."""
    idx = a if isinstance(a, Index) else Index(a)
    if idx.parts[0] < 2:
        raise ValueError(f"{idx!r} diverges (needs first part >= 2)")
    levels = [_Level(exponent=e, gap=0) for e in idx.parts]
    return _nested_sum(levels, ctx)


def eval_colored_mzv(w, ctx: EvalContext) -> BigFloat:
    """Colored (alternating) multiple zeta value of a signed word."""
    word = w if isinstance(w, SignedIndex) else SignedIndex(w)
    if not word.convergent():
        raise ValueError(f"{word!r} diverges (leading unbarred 1)")
    levels = [_Level(exponent=abs(e), alternating=(e < 0), modulus=1,
                     residue=0, start=1, gap=1) for e in word.entries]
    return _nested_sum(levels, ctx)


def eval_zeta(n: int, ctx: EvalContext) -> BigFloat:
    """Riemann zeta at an integer n >= 2 (Euler-Maclaurin)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    with ctx.working():
        v = ctx.zeta(n)
        return BigFloat(v, ctx.eps() * 16 * abs(v))


def eval_parity_double(kind: str, a: int, b: int, ctx: EvalContext) -> BigFloat:
    """The even/odd double sums: EO is sum over even n of n^-a times the
    partial odd sums below n; OE swaps the roles."""
    if a < 2:
        raise ValueError("outer exponent must be >= 2 for convergence")
    if b < 1:
        raise ValueError("inner exponent must be >= 1")
    if kind == "EO":
        levels = [_Level(exponent=a, modulus=2, residue=0, start=2, gap=1),
                  _Level(exponent=b, modulus=2, residue=1, start=1, gap=1)]
    elif kind == "OE":
        levels = [_Level(exponent=a, modulus=2, residue=1, start=1, gap=1),
                  _Level(exponent=b, modulus=2, residue=0, start=2, gap=1)]
    else:
        raise ValueError("kind must be 'EO' or 'OE'")
    return _nested_sum(levels, ctx)


# ---------------------------------------------------------------------
# Modified Tornheim double sums
# ---------------------------------------------------------------------

def _pf_terms(beta: int, gamma: int, D: int):
    """Exact partial fractions of 1/(u^beta (u+D)^gamma):
    returns (a_s for u^-s, b_s for v^-s) as Fraction lists indexed by s."""
    a = [Fraction(0)] * (beta + 1)
    for m in range(beta):
        s = beta - m
        a[s] = Fraction((-1) ** m * comb(gamma + m - 1, m), D ** (gamma + m))
    b = [Fraction(0)] * (gamma + 1)
    for m in range(gamma):
        s = gamma - m
        b[s] = Fraction((-1) ** beta * comb(beta + m - 1, m), D ** (beta + m))
    return a, b


class _TwoPower:
    """sum of coeff * (2j+1)^-beta * (2j+2i+1)^-gamma terms, closed under
    d/dj; supports Euler-Maclaurin tails with exact integrals."""

    def __init__(self, terms: dict[tuple[int, int], mpfr]):
        self.terms = terms

    def derivative(self) -> "_TwoPower":
        out: dict[tuple[int, int], mpfr] = {}
        for (be, ga), c in self.terms.items():
            if be:
                key = (be + 1, ga)
                out[key] = out.get(key, mpfr(0)) - 2 * be * c
            if ga:
                key = (be, ga + 1)
                out[key] = out.get(key, mpfr(0)) - 2 * ga * c
        return _TwoPower(out)

    def eval(self, j, twoi: int) -> mpfr:
        u = mpfr(2 * j + 1)
        v = u + twoi
        total = mpfr(0)
        for (be, ga), c in self.terms.items():
            total += c * u ** (-be) * v ** (-ga)
        return total

    def integral_to_inf(self, j, twoi: int) -> mpfr:
        """int_J^inf (in j) of the term set, via partial fractions."""
        total = mpfr(0)
        u0 = mpfr(2 * j + 1)
        v0 = u0 + twoi
        for (be, ga), c in self.terms.items():
            if ga == 0:
                if be < 2:
                    raise ValueError("divergent integral")
                total += c * u0 ** (1 - be) / (2 * (be - 1))
                continue
            if be == 0:
                if ga < 2:
                    raise ValueError("divergent integral")
                total += c * v0 ** (1 - ga) / (2 * (ga - 1))
                continue
            a, b = _pf_terms(be, ga, twoi)
            piece = mpfr(0)
            for s in range(2, be + 1):
                if a[s]:
                    piece += mpfr(a[s].numerator) / a[s].denominator \
                        * u0 ** (1 - s) / (s - 1)
            for s in range(2, ga + 1):
                if b[s]:
                    piece += mpfr(b[s].numerator) / b[s].denominator \
                        * v0 ** (1 - s) / (s - 1)
            if a[1]:
                # a_1 log u + b_1 log v with a_1 = -b_1
                piece += (mpfr(a[1].numerator) / a[1].denominator) \
                    * gmpy2.log(v0 / u0)
            total += c * piece / 2
        return total


def _tornheim_inner(b: int, c: int, i: int, J: int, em_order: int) -> mpfr:
    """G(i) = sum_{j>=0} (2j+1)^-b (2j+2i+1)^-c, summed to J-1 directly
    plus an Euler-Maclaurin tail from j = J."""
    twoi = 2 * i
    total = mpfr(0)
    for j in range(J):
        total += mpfr(2 * j + 1) ** (-b) * mpfr(2 * j + 1 + twoi) ** (-c)
    f = _TwoPower({(b, c): mpfr(1)})
    total += f.integral_to_inf(J, twoi)
    total += f.eval(J, twoi) / 2
    deriv = f
    for r in range(1, em_order + 1):
        deriv = deriv.derivative()
        coeff = bernoulli(2 * r) / Fraction(tails._fact(2 * r))
        total -= (mpfr(coeff.numerator) / coeff.denominator) * deriv.eval(J, twoi)
        deriv = deriv.derivative()
    return total


def _solve_linear(A: list[list[mpfr]], rhs: list[mpfr]) -> list[mpfr]:
    n = len(A)
    M = [row[:] + [rhs[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise ZeroDivisionError("singular fit system")
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r == col:
                continue
            f = M[r][col] / M[col][col]
            if f == 0:
                continue
            for cc in range(col, n + 1):
                M[r][cc] -= f * M[col][cc]
    return [M[i][n] / M[i][i] for i in range(n)]


def eval_tornheim(a: int, b: int, c: int, ctx: EvalContext) -> BigFloat:
    """Modified Tornheim sum over even first and odd second denominators,
    coupled through their sum.

    Direct double summation with Euler-Maclaurin tails on the inner index
    (exact partial-fraction integrals) and, for the outer index, a fitted
    log-power asymptotic model whose tail is summed exactly.
    """
    if min(a, b, c) < 0:
        raise ValueError("exponents must be nonnegative")
    if a + c < 2 or b + c < 2 or a + b + c < 3:
        raise ValueError(f"M({a},{b},{c}) diverges")
    with ctx.working():
        em = max(8, ctx.em_order)
        if c == 0:
            # inner sum is i-independent: G = t(b); outer is a pure even sum
            N0 = max(400, ctx.cutoff // 100)
            G = mpfr(0)
            for j in range(N0):
                G += mpfr(2 * j + 1) ** (-b)
            G += lp_tail({(0, b): mpfr(1)}, 2 * N0 - 1, 2, em)
            S = mpfr(0)
            for i in range(1, N0 + 1):
                S += mpfr(2 * i) ** (-a)
            S += lp_tail({(0, a): mpfr(1)}, 2 * N0, 2, em)
            return BigFloat(S * G, ctx.eps() * 64 * abs(S * G))

        I = max(500, min(2500, ctx.cutoff // 80))
        J0 = 400
        partial = mpfr(0)
        samples: list[tuple[int, mpfr]] = []
        sample_is = sorted({int(I * (0.55 + 0.45 * t / 7)) for t in range(8)})
        for i in range(1, I + 1):
            G = _tornheim_inner(b, c, i, J0 + i, em)
            if a:
                partial += mpfr(2 * i) ** (-a) * G
            else:
                partial += G
            if i in sample_is:
                samples.append((i, G))
        # fit G(i) (2i)^c ~ sum_s (alpha_s + beta_s log(2i)) (2i)^-s
        Sf = 3
        A_rows, rhs = [], []
        for i, G in samples:
            x = mpfr(2 * i)
            lx = gmpy2.log(x)
            row = []
            for s in range(Sf + 1):
                row.append(x ** (-s))
                row.append(lx * x ** (-s))
            A_rows.append(row)
            rhs.append(G * x ** c)
        coeffs = _solve_linear(A_rows, rhs)
        tail_poly: LogPoly = {}
        for s in range(Sf + 1):
            al, be = coeffs[2 * s], coeffs[2 * s + 1]
            q = a + c + s
            if al:
                tail_poly[(0, q)] = tail_poly.get((0, q), mpfr(0)) + al
            if be:
                tail_poly[(1, q)] = tail_poly.get((1, q), mpfr(0)) + be
        tail = lp_tail(tail_poly, 2 * I, 2, em)
        # error: next model order at the boundary
        err = (abs(coeffs[2 * Sf]) + abs(coeffs[2 * Sf + 1]) * gmpy2.log(mpfr(2 * I))) \
            * mpfr(2 * I) ** (-(a + c + Sf)) / max(1, (a + c + Sf - 1))
        value = partial + tail
        return BigFloat(value, abs(err) * 10 + ctx.eps() * 64 * max(mpfr(1), abs(value)))


# ---------------------------------------------------------------------
# Generalized hypergeometric series
# ---------------------------------------------------------------------

def _pfq_asymptotic_coeffs(upper: Sequence[Fraction], lower: Sequence[Fraction],
                           R: int) -> list[Fraction]:
    """Exact 1/s-expansion coefficients of the term ratio solution:
    T_s ~ const * s^-(1+e) (1 + chat_1/s + ... ).  Solved order by order
    from T_{s+1}/T_s = prod(a+s)/(prod(b+s)(1+s))."""
    # rational power series in w = 1/s, represented as coefficient lists
    def series_mul(x, y):
        out = [Fraction(0)] * (R + 2)
        for i, xi in enumerate(x):
            if xi == 0:
                continue
            for j in range(0, R + 2 - i):
                out[i + j] += xi * y[j]
        return out

    def series_inv(x):
        out = [Fraction(0)] * (R + 2)
        out[0] = 1 / x[0]
        for n in range(1, R + 2):
            s = Fraction(0)
            for i in range(1, n + 1):
                s += x[i] * out[n - i]
            out[n] = -s * out[0]
        return out

    def binom_series(exponent: Fraction):
        # (1+w)^exponent
        out = [Fraction(1)]
        for s in range(1, R + 2):
            out.append(out[-1] * (exponent - s + 1) / s)
        return out

    e = sum(lower) - sum(upper)
    ratio = [Fraction(1)] + [Fraction(0)] * (R + 1)
    for aa in upper:
        ratio = series_mul(ratio, [Fraction(1), aa] + [Fraction(0)] * R)
    den = [Fraction(1), Fraction(1)] + [Fraction(0)] * R
    for bb in lower:
        den = series_mul(den, [Fraction(1), bb] + [Fraction(0)] * R)
    ratio = series_mul(ratio, series_inv(den))

    chat = [Fraction(1)] + [Fraction(0)] * R
    pref = binom_series(-(1 + e))  # (1+w)^-(1+e)
    # w' = w/(1+w) as a series in w
    wprime = series_mul([Fraction(0), Fraction(1)] + [Fraction(0)] * R,
                        binom_series(Fraction(-1)))
    wprime_pow = [[Fraction(1)] + [Fraction(0)] * (R + 1)]
    for _ in range(R):
        wprime_pow.append(series_mul(wprime_pow[-1], wprime))

    for r in range(1, R + 1):
        # model with chat_r = 0, then read the order-(r+1) defect
        num = [Fraction(0)] * (R + 2)
        for m in range(r):
            for i, c in enumerate(wprime_pow[m]):
                num[i] += chat[m] * c
        denser = list(chat) + [Fraction(0)]
        model = series_mul(series_mul(pref, num), series_inv(denser))
        defect = ratio[r + 1] - model[r + 1]
        chat[r] = -defect / r
    return chat


def eval_pfq(upper: Sequence[Fraction], lower: Sequence[Fraction], z,
             ctx: EvalContext) -> BigFloat:
    """pFq(upper; lower; z) = sum_s prod(upper)_s / prod(lower)_s z^s / s!.

    Supports |z| < 1 (geometric tail bound), z = 1 with positive parameter
    excess (algebraic tails via the exact term asymptotics), and z = -1.
    Terminating series (a nonpositive integer upper parameter) are summed
    exactly for any z.
    """
    upper = [Fraction(u) for u in upper]
    lower = [Fraction(l) for l in lower]
    z = Fraction(z)
    for l in lower:
        if l <= 0 and l.denominator == 1:
            raise ValueError(f"lower parameter {l} is a nonpositive integer")
    with ctx.working():
        terminates = any(u <= 0 and u.denominator == 1 for u in upper)
        if terminates:
            smax = max(int(-u) for u in upper if u <= 0 and u.denominator == 1)
            total = mpfr(0)
            term = mpfr(1)
            zf = mpfr(z.numerator) / z.denominator
            for s in range(smax + 1):
                total += term
                ratio = mpfr(1)
                for u in upper:
                    ratio *= (mpfr(u.numerator) / u.denominator + s)
                for l in lower:
                    ratio /= (mpfr(l.numerator) / l.denominator + s)
                term = term * ratio * zf / (s + 1)
            return BigFloat(total, ctx.eps() * 8 * max(mpfr(1), abs(total)))
        if abs(z) > 1:
            raise ValueError("|z| > 1 is outside the circle of convergence")
        if abs(z) == 1 and len(upper) > len(lower) + 1:
            raise ValueError("series diverges on |z| = 1 (too many upper parameters)")

        zf = mpfr(z.numerator) / z.denominator
        if abs(z) < 1:
            total = mpfr(0)
            term = mpfr(1)
            s = 0
            eps = ctx.eps() / 16
            bound = mpfr(1)
            while True:
                total += term
                ratio = mpfr(1)
                for u in upper:
                    ratio *= (mpfr(u.numerator) / u.denominator + s)
                for l in lower:
                    ratio /= (mpfr(l.numerator) / l.denominator + s)
                term = term * ratio * zf / (s + 1)
                s += 1
                bound = abs(term) / (1 - abs(zf))
                if bound < eps * max(mpfr(1), abs(total)) or s > 10_000_000:
                    break
            return BigFloat(total, bound + ctx.eps() * 8 * max(mpfr(1), abs(total)))

        # |z| = 1
        e = sum(lower) - sum(upper)
        if len(upper) <= len(lower):
            # terms decay faster than any power; direct summation
            total = mpfr(0)
            term = mpfr(1)
            s = 0
            eps = ctx.eps() / 16
            while abs(term) > eps * max(mpfr(1), abs(total)) or s < 8:
                total += term
                ratio = mpfr(1)
                for u in upper:
                    ratio *= (mpfr(u.numerator) / u.denominator + s)
                for l in lower:
                    ratio /= (mpfr(l.numerator) / l.denominator + s)
                term = term * ratio * zf / (s + 1)
                s += 1
                if s > 10_000_000:
                    break
            return BigFloat(total, abs(term) * 4 + ctx.eps() * 8 * max(mpfr(1), abs(total)))
        if z == 1 and e <= 0:
            raise ValueError(
                f"pFq diverges at z=1: parameter excess {e} is not positive")
        if z == -1 and e <= -1:
            raise ValueError(
                f"pFq diverges at z=-1: parameter excess {e} <= -1")

        S = max(2000, 8 * ctx.precision_bits // 3)
        R = 12
        total = mpfr(0)
        term = mpfr(1)
        t_at: dict[int, mpfr] = {}
        for s in range(S + 1):
            total += term
            if s in (S // 2, S):
                t_at[s] = term
            ratio = mpfr(1)
            for u in upper:
                ratio *= (mpfr(u.numerator) / u.denominator + s)
            for l in lower:
                ratio /= (mpfr(l.numerator) / l.denominator + s)
            term = term * ratio * zf / (s + 1)
        t_next = term  # T_{S+1}
        chat = _pfq_asymptotic_coeffs(upper, lower, R)
        ef = mpfr(e.numerator) / e.denominator

        def c0_at(s: int, ts: mpfr) -> mpfr:
            model = mpfr(0)
            for r, ch in enumerate(chat):
                model += (mpfr(ch.numerator) / ch.denominator) * mpfr(s) ** (-r)
            return ts / (mpfr(s) ** (-(1 + ef)) * model)

        sign = 1 if z == 1 else (1 if (S + 1) % 2 == 0 else -1)
        c0 = c0_at(S + 1, t_next * (1 if z == 1 else sign))
        c0_check = c0_at(S // 2, t_at[S // 2] * (1 if z == 1 else
                                                 (1 if (S // 2) % 2 == 0 else -1)))
        tail = mpfr(0)
        for r, ch in enumerate(chat):
            chv = mpfr(ch.numerator) / ch.denominator
            if z == 1:
                tail += chv * power_tail(1 + ef + r, S, mu=1,
                                         em_order=max(12, ctx.em_order))
            else:
                tail += chv * alt_power_tail(1 + ef + r, S)
        tail *= c0
        value = total + tail
        err = (abs(c0 - c0_check) * mpfr(S) ** (-ef) / max(ef, mpfr("0.5"))
               + ctx.eps() * 16 * max(mpfr(1), abs(value)))
        return BigFloat(value, err)


# ---------------------------------------------------------------------
# Height-one generating function
# ---------------------------------------------------------------------

def eval_height_one(x, y, ctx: EvalContext, mode: str = "double_series") -> BigFloat:
    """H(x, y) = sum_{i,j>=1} t(i+1, 1^{j-1}) x^i y^j.

    double_series: absolutely convergent resummation over the outermost
    odd denominator m, using x/(m-x) for the geometric inner x-series and
    the subset product prod_{odd n<m} (1 + y/n) for the trailing-ones
    block; the tail uses a fitted m^{y/2} asymptotic.  hypergeometric:
    x y/(1-x) * 3F2(1/2+y/2, 1/2-x/2, 1; 3/2, 3/2-x/2; 1).
    """
    x = Fraction(x)
    y = Fraction(y)
    if mode == "hypergeometric":
        if x == 1:
            raise ValueError("x = 1 is a pole of the prefactor")
        if y >= 2:
            raise ValueError("series diverges for y >= 2")
        half = Fraction(1, 2)
        v = eval_pfq((half + y / 2, half - x / 2, Fraction(1)),
                     (Fraction(3, 2), Fraction(3, 2) - x / 2), Fraction(1), ctx)
        with ctx.working():
            pref = (mpfr(x.numerator) / x.denominator) \
                * (mpfr(y.numerator) / y.denominator) \
                / (1 - mpfr(x.numerator) / x.denominator)
            return BigFloat(pref * v.value,
                            abs(pref) * (v.error_bound or mpfr(0)))
    if mode != "double_series":
        raise ValueError("mode must be 'double_series' or 'hypergeometric'")
    if abs(x) >= 1 or abs(y) >= 1:
        raise ValueError("double series needs |x| < 1 and |y| < 1")
    with ctx.working():
        xf = mpfr(x.numerator) / x.denominator
        yf = mpfr(y.numerator) / y.denominator
        N = max(10_001, min(40_001, ctx.cutoff // 2 + 1))
        if N % 2 == 0:
            N += 1
        total = mpfr(0)
        prod = mpfr(1)  # prod over odd n < m of (1 + y/n)
        samples: dict[int, mpfr] = {}
        sample_points = {N, _odd_near(N * 2 // 3), _odd_near(N // 2)}
        for m in range(1, N + 1, 2):
            total += xf / (m - xf) / m * prod
            if m in sample_points:
                samples[m] = prod * (1 + yf / m)  # P(m+2) boundary; see below
            prod = prod * (1 + yf / m)
        # fit P(m) = prod_{odd n < m}(1+y/n) ~ A m^{y/2}(1 + d1/m + d2/m^2),
        # sampling P at m+2 (the product after including m)
        rows, rhs = [], []
        for m, p in samples.items():
            mm = mpfr(m + 2)
            rows.append([mpfr(1), 1 / mm, 1 / (mm * mm)])
            rhs.append(p / mm ** (yf / 2))
        A0, A1, A2 = _solve_linear(rows, rhs)
        # tail: sum_{odd m > N} x/(m(m-x)) * A m^{y/2} (1 + d1/m + d2/m^2)
        # with x/(m(m-x)) = sum_{s>=0} x^{s+1} m^{-2-s}
        tail = mpfr(0)
        for s in range(0, 8):
            xpow = xf ** (s + 1)
            for dshift, coeff in ((0, A0), (1, A1), (2, A2)):
                q = 2 + s + dshift - yf / 2
                tail += xpow * coeff * power_tail(q, N, mu=2,
                                                  em_order=max(10, ctx.em_order))
        value = (total + tail) * yf
        err = (abs(xf) ** 9 / (1 - abs(xf)) * mpfr(N) ** (-2 + float(y) / 2)
               + ctx.eps() * 32 * max(mpfr(1), abs(value)))
        return BigFloat(value, err)


def _odd_near(n: int) -> int:
    return n if n % 2 == 1 else n + 1


# ---------------------------------------------------------------------
# Gamma and digamma by shifted Stirling
# ---------------------------------------------------------------------

def eval_gamma_digamma(x, ctx: EvalContext, which: str = "gamma") -> BigFloat:
    """Gamma(x) or psi(x) for rational x in (0, 2), by shifting the
    argument upward and applying the Stirling / asymptotic psi series with
    Bernoulli-number corrections."""
    x = Fraction(x)
    if not (0 < x < 2):
        raise ValueError("argument must lie in (0, 2)")
    with ctx.working():
        prec = gmpy2.get_context().precision
        shift = max(16, int(0.36 * prec))
        xf = mpfr(x.numerator) / x.denominator
        zf = xf + shift
        eps = mpfr(2) ** (-prec - 8)
        if which == "gamma":
            # ln Gamma(z) = (z - 1/2) ln z - z + ln(2 pi)/2 + sum B_2r/(2r(2r-1) z^(2r-1))
            ln2pi = gmpy2.log(2 * ctx.pi())
            total = (zf - mpfr(1) / 2) * gmpy2.log(zf) - zf + ln2pi / 2
            prev = None
            for r in range(1, 200):
                b = bernoulli(2 * r)
                term = (mpfr(b.numerator) / b.denominator) \
                    / ((2 * r) * (2 * r - 1) * zf ** (2 * r - 1))
                if abs(term) < eps:
                    total += term
                    break
                if prev is not None and abs(term) > prev:
                    break
                total += term
                prev = abs(term)
            val = gmpy2.exp(total)
            for k in range(shift):
                val = val / (xf + k)
            return BigFloat(val, ctx.eps() * 32 * abs(val))
        if which == "digamma":
            total = gmpy2.log(zf) - 1 / (2 * zf)
            prev = None
            for r in range(1, 200):
                b = bernoulli(2 * r)
                term = (mpfr(b.numerator) / b.denominator) / (2 * r * zf ** (2 * r))
                if abs(term) < eps:
                    total -= term
                    break
                if prev is not None and abs(term) > prev:
                    break
                total -= term
                prev = abs(term)
            for k in range(shift):
                total -= 1 / (xf + k)
            return BigFloat(total, ctx.eps() * 32 * max(mpfr(1), abs(total)))
        raise ValueError("which must be 'gamma' or 'digamma'")


# ---------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------

def _symbol_value(sym, ctx: EvalContext) -> mpfr:
    if sym.kind == "pi":
        return ctx.pi()
    if sym.kind == "log2":
        return ctx.log2()
    if sym.kind == "G":
        return ctx.catalan()
    if sym.kind == "t":
        return ctx.t_const(sym.arg)
    if sym.kind == "zbar":
        return ctx.zeta_bar(sym.arg)
    raise ValueError(f"unresolvable symbol {sym!r}")


def eval_expr(e: ConstantExpression, ctx: EvalContext) -> BigFloat:
    """Numeric value of a constant expression from the cached constants."""
    with ctx.working():
        total = mpfr(0)
        scale = mpfr(0)
        for mono, coeff in e.terms.items():
            prod = mpfr(coeff.numerator) / coeff.denominator
            for sym in mono:
                prod = prod * _symbol_value(sym, ctx)
            total += prod
            scale += abs(prod)
        err = ctx.eps() * 32 * max(mpfr(1), scale) * (1 + len(e.terms))
        return BigFloat(total, err)


def eval_word_sum(ws, ctx: EvalContext) -> BigFloat:
    """Evaluate a tagged word combination (or a bare index / expression).

    Accepts WordSum("t"|"tstar"|"zeta", comb), a LinComb of signed words
    (zeta flavor), an Index (t flavor), or a ConstantExpression.
    """
    if isinstance(ws, ConstantExpression):
        return eval_expr(ws, ctx)
    if isinstance(ws, Index):
        return eval_t_series(ws, ctx)
    if isinstance(ws, SignedIndex):
        return eval_colored_mzv(ws, ctx)
    if isinstance(ws, LinComb):
        ws = WordSum("zeta", ws)
    if not isinstance(ws, WordSum):
        raise TypeError(f"cannot evaluate {ws!r}")
    evaluator = {"t": eval_t_series, "tstar": eval_tstar_series,
                 "zeta": eval_colored_mzv}[ws.flavor]
    with ctx.working():
        total = mpfr(0)
        err = mpfr(0)
        for word, coeff in ws.comb.items():
            r = evaluator(word, ctx)
            cf = mpfr(coeff.numerator) / coeff.denominator
            total += cf * r.value
            err += abs(cf) * (r.error_bound or mpfr(0))
        return BigFloat(total, err)
