"""Symbolic log-power expansions and Euler-Maclaurin / Boole tails.

The nested-series engine carries, per summation level, an asymptotic
expansion of the partial sums in the basis (log n)^j * n^(-r) with mpfr
coefficients (j, r nonnegative integers).  This module supplies the
algebra on those expansions -- shifting the argument, differentiating,
integrating -- plus the two summation transforms:

* Euler-Maclaurin, for sums of a smooth term over an arithmetic
  progression, giving the variable part of the cumulative sum (the
  integration constant is pinned numerically by the caller);
* Boole summation, for sums with an alternating sign, giving the
  oscillating envelope (-1)^m * Phi(m) of the cumulative sum.

All formulas are asymptotic; their truncation orders are chosen by the
caller, and accuracy is validated in the tests against closed forms.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb

import gmpy2
from gmpy2 import mpfr

from .arith import bernoulli

__all__ = [
    "LogPoly",
    "lp_add",
    "lp_scale",
    "lp_mul_power",
    "lp_shift",
    "lp_derivative",
    "lp_integral",
    "lp_eval",
    "lp_max_term",
    "em_cumulative",
    "boole_envelope",
    "lp_tail",
    "power_tail",
    "alt_power_tail",
    "euler_poly_at_zero",
]

#: terms: {(log power j, inverse power r): mpfr coefficient}
LogPoly = dict


def lp_add(a: LogPoly, b: LogPoly) -> LogPoly:
    out = dict(a)
    for key, c in b.items():
        cur = out.get(key)
        out[key] = c if cur is None else cur + c
    return {k: c for k, c in out.items() if c != 0}


def lp_scale(a: LogPoly, c) -> LogPoly:
    if c == 0:
        return {}
    return {k: v * c for k, v in a.items()}


def lp_mul_power(a: LogPoly, i: int) -> LogPoly:
    """Multiply by n^(-i)."""
    return {(j, r + i): c for (j, r), c in a.items()}


def _inv_powers_of_shift(h: int, rmax: int) -> tuple[list, list]:
    """Series in w = 1/n for log(1+h w) and, per power, binomials for
    (1+h w)^(-r) are computed on demand by the caller; here we just return
    the log series coefficients [0, h, -h^2/2, ...] up to w^rmax."""
    logser = [mpfr(0)] * (rmax + 1)
    hp = mpfr(h)
    for s in range(1, rmax + 1):
        logser[s] = (mpfr(-1) ** (s + 1)) * hp / s
        hp = hp * h
    return logser, []


def _series_mul(a: list, b: list, rmax: int) -> list:
    out = [mpfr(0)] * (rmax + 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(0, rmax + 1 - i):
            bj = b[j]
            if bj == 0:
                continue
            out[i + j] += ai * bj
    return out


def lp_shift(a: LogPoly, h: int, rmax: int) -> LogPoly:
    """Re-expand f(n + h) in (log n, 1/n), truncating inverse powers at
    rmax.  h may be negative (inner sums are evaluated at n - gap) or
    positive (Boole envelopes are evaluated at m + 1)."""
    if h == 0 or not a:
        return {k: v for k, v in a.items() if k[1] <= rmax}
    logser, _ = _inv_powers_of_shift(h, rmax)
    # powers of the log-shift series, computed lazily
    logpows: list[list] = [[mpfr(1)] + [mpfr(0)] * rmax]
    out: LogPoly = {}
    max_j = max(j for j, _ in a)
    for _ in range(max_j):
        logpows.append(_series_mul(logpows[-1], logser, rmax))
    for (j, r), c in a.items():
        if r > rmax:
            continue
        # (n+h)^(-r) = n^(-r) sum_s binom(-r, s) (h/n)^s
        binser = [mpfr(0)] * (rmax + 1)
        hp = mpfr(1)
        for s in range(0, rmax + 1 - r if r <= rmax else 0):
            binser[s] = mpfr(comb(r + s - 1, s) * (-1) ** s) * hp if r > 0 else (
                mpfr(1) if s == 0 else mpfr(0))
            hp = hp * h
        # (log(n) + L)^j = sum_i C(j, i) log(n)^(j-i) L^i
        for i in range(j + 1):
            piece = _series_mul(logpows[i], binser, rmax)
            base = c * comb(j, i)
            for s, coeff in enumerate(piece):
                if coeff == 0:
                    continue
                key = (j - i, r + s)
                if key[1] > rmax:
                    continue
                cur = out.get(key)
                val = base * coeff
                out[key] = val if cur is None else cur + val
    return {k: v for k, v in out.items() if v != 0}


def lp_derivative(a: LogPoly) -> LogPoly:
    out: LogPoly = {}
    for (j, r), c in a.items():
        if j > 0:
            key = (j - 1, r + 1)
            out[key] = out.get(key, mpfr(0)) + c * j
        if r > 0:
            key = (j, r + 1)
            out[key] = out.get(key, mpfr(0)) - c * r
    return {k: v for k, v in out.items() if v != 0}


def lp_integral(a: LogPoly) -> LogPoly:
    """An antiderivative, dropping all integration constants (the caller
    pins them numerically).  Terms with r = 0 are rejected: level summands
    always carry at least one inverse power."""
    out: LogPoly = {}

    def add(key, val):
        out[key] = out.get(key, mpfr(0)) + val

    for (j, r), c in a.items():
        if r == 0:
            raise ValueError("cannot integrate a term without inverse power")
        if r == 1:
            add((j + 1, 0), c / (j + 1))
            continue
        # repeated integration by parts:
        # I(j, r) = log^j n * n^(1-r)/(1-r) - j/(1-r) I(j-1, r)
        coeff = c
        jj = j
        while jj >= 0:
            add((jj, r - 1), coeff / (1 - r))
            if jj == 0:
                break
            coeff = coeff * (-Fraction(jj) / (1 - r))
            jj -= 1
    return {k: v for k, v in out.items() if v != 0}


def lp_eval(a: LogPoly, n) -> mpfr:
    """Evaluate at the point n (exact integer or mpfr)."""
    if not a:
        return mpfr(0)
    x = mpfr(n)
    logx = gmpy2.log(x)
    maxj = max(j for j, _ in a)
    maxr = max(r for _, r in a)
    logp = [mpfr(1)]
    for _ in range(maxj):
        logp.append(logp[-1] * logx)
    invx = 1 / x
    invp = [mpfr(1)]
    for _ in range(maxr):
        invp.append(invp[-1] * invx)
    total = mpfr(0)
    for (j, r), c in a.items():
        total += c * logp[j] * invp[r]
    return total


def lp_max_term(a: LogPoly, n) -> mpfr:
    """max |c (log n)^j n^(-r)| over the terms; a crude magnitude gauge."""
    if not a:
        return mpfr(0)
    x = mpfr(n)
    logx = gmpy2.log(x)
    best = mpfr(0)
    for (j, r), c in a.items():
        mag = abs(c) * logx ** j / x ** r
        if mag > best:
            best = mag
    return best


def em_cumulative(f: LogPoly, mu: int, em_order: int, rmax: int) -> tuple[LogPoly, LogPoly]:
    """Variable part of sum_{n <= m, n in a residue class mod mu} f(n).

    Returns (expansion, last_term) where expansion(m) is
    (1/mu) int f + f(m)/2 + sum_{r=1}^{M} B_{2r} mu^{2r-1} / (2r)! f^{(2r-1)}(m)
    and last_term is the first omitted correction, kept for error
    estimates.  The integration constant is the caller's to pin.
    """
    if not f:
        return {}, {}
    out = lp_scale(lp_integral(f), Fraction(1, mu))
    out = lp_add(out, lp_scale(f, Fraction(1, 2)))
    deriv = f
    for r in range(1, em_order + 1):
        deriv = lp_derivative(deriv)
        coeff = bernoulli(2 * r) * Fraction(mu ** (2 * r - 1), _fact(2 * r))
        out = lp_add(out, lp_scale(deriv, coeff))
        deriv = lp_derivative(deriv)
    last = lp_derivative(deriv)
    coeff = bernoulli(2 * em_order + 2) * Fraction(
        mu ** (2 * em_order + 1), _fact(2 * em_order + 2))
    last = lp_scale(last, coeff)
    return ({k: v for k, v in out.items() if k[1] <= rmax},
            {k: v for k, v in last.items() if k[1] <= rmax + 2})


_EULER_POLY_AT_ZERO: list[Fraction] = []


def euler_poly_at_zero(s: int) -> Fraction:
    """E_s(0) = 2 (1 - 2^{s+1}) B_{s+1} / (s+1)."""
    while len(_EULER_POLY_AT_ZERO) <= s:
        k = len(_EULER_POLY_AT_ZERO)
        _EULER_POLY_AT_ZERO.append(
            Fraction(2) * (1 - 2 ** (k + 1)) * bernoulli(k + 1) / (k + 1))
    return _EULER_POLY_AT_ZERO[s]


def boole_envelope(f: LogPoly, order: int, rmax: int) -> LogPoly:
    """Envelope Phi with sum_{n <= m} (-1)^n f(n) = K + (-1)^m Phi(m):
    Phi(m) = (1/2) sum_{s=0}^{order} E_s(0)/s! f^{(s)}(m+1).

    Only unit-step (mod-1) progressions alternate in this package.
    """
    if not f:
        return {}
    out: LogPoly = {}
    deriv = f
    fact = 1
    for s in range(order + 1):
        if s > 0:
            deriv = lp_derivative(deriv)
            fact *= s
        e = euler_poly_at_zero(s)
        if e != 0:
            out = lp_add(out, lp_scale(deriv, e / (2 * fact)))
    return lp_shift(out, 1, rmax)


def lp_tail(f: LogPoly, n0, mu: int, em_order: int) -> mpfr:
    """sum over n > n0 (n in the class, n0 itself a class point) of f(n),
    for decaying f (all inverse powers >= 2)."""
    if not f:
        return mpfr(0)
    if any(r < 2 for _, r in f):
        raise ValueError("lp_tail needs every term to decay like n^-2 or faster")
    F = lp_integral(f)
    total = -lp_eval(F, n0) / mu
    total -= lp_eval(f, n0) / 2
    deriv = f
    for r in range(1, em_order + 1):
        deriv = lp_derivative(deriv)
        coeff = bernoulli(2 * r) * Fraction(mu ** (2 * r - 1), _fact(2 * r))
        total -= lp_eval(lp_scale(deriv, coeff), n0)
        deriv = lp_derivative(deriv)
    return total


def power_tail(q, n0, mu: int = 1, em_order: int = 12) -> mpfr:
    """sum_{n > n0, n in class} n^(-q) for real q > 1, n0 a class point."""
    q = mpfr(q)
    x = mpfr(n0)
    total = x ** (1 - q) / ((q - 1) * mu)
    total -= x ** (-q) / 2
    poch = q  # (q)_{2r-1} running product
    for r in range(1, em_order + 1):
        coeff = bernoulli(2 * r) * Fraction(mu ** (2 * r - 1), _fact(2 * r))
        total += mpfr(coeff.numerator) / coeff.denominator * poch * x ** (1 - q - 2 * r)
        poch = poch * (q + 2 * r - 1) * (q + 2 * r)
    return total


def alt_power_tail(q, n0, order: int = 24) -> mpfr:
    """sum_{n > n0} (-1)^n n^(-q) for real q > 0 (unit steps)."""
    q = mpfr(q)
    x = mpfr(n0 + 1)
    sign = -1 if (n0 + 1) % 2 else 1
    total = mpfr(0)
    poch = mpfr(1)  # (q)_s
    fact = 1
    for s in range(order + 1):
        if s > 0:
            poch = poch * (q + s - 1)
            fact *= s
        e = euler_poly_at_zero(s)
        if e != 0:
            term = (mpfr(e.numerator) / e.denominator) / (2 * fact)
            total += term * ((-1) ** s) * poch * x ** (-q - s)
    return sign * total


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out
