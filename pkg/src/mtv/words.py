"""Harmonic (quasi-shuffle) algebras on index words.

Plain words model nested sums with strictly decreasing odd denominators;
signed words model alternating ("colored") nested sums, with a bar on a
coordinate written as a negative entry.  Both carry the recursive
quasi-shuffle product in which adjacent letters may merge, magnitudes
adding and signs multiplying.

Conventions:

* An index is a nonempty string of positive integers i_1, ..., i_k with
  weight i_1 + ... + i_k and depth k; it is admissible when i_1 >= 2.
  Index strings are strictly decreasing in the summation variable,
  n_1 > n_2 > ... > n_k >= 1 (the star variant with weak inequalities
  lives in the numeric module).
* A signed index is a nonempty string of nonzero integers; entry -n means
  the coordinate of magnitude n carries the alternating twist (-1)^m.
  It is convergent unless the first entry is +1.

Linear combinations are exact: rational coefficients, no floats.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Index",
    "SignedIndex",
    "LinComb",
    "stuffle",
    "signed_stuffle",
    "stuffle_power",
    "regularize_z1",
    "expand_regularization",
    "dilate",
    "map_S_A",
    "a_minus",
    "WEIGHT_CAP",
]

#: Words above this weight are refused; the quasi-shuffle expansion of two
#: weight-32 words already has astronomically many terms.
WEIGHT_CAP = 64


class Index:
    """A composition of positive integers, the argument string of a
    multiple t-value."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int]):
        parts = tuple(int(p) for p in parts)
        if not parts:
            raise ValueError("index needs at least one part")
        if any(p < 1 for p in parts):
            raise ValueError("index parts must be positive integers")
        self.parts = parts

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def depth(self) -> int:
        return len(self.parts)

    def admissible(self) -> bool:
        return self.parts[0] >= 2

    def trailing_ones(self) -> int:
        n = 0
        for p in reversed(self.parts):
            if p != 1:
                break
            n += 1
        return n

    def render(self, head: str = "t") -> str:
        return f"{head}({','.join(str(p) for p in self.parts)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Index) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash(("Index", self.parts))

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __repr__(self) -> str:
        return self.render()


class SignedIndex:
    """A composition with per-entry sign; negative entries are barred."""

    __slots__ = ("entries",)

    def __init__(self, entries: Iterable[int]):
        entries = tuple(int(e) for e in entries)
        if not entries:
            raise ValueError("signed index needs at least one entry")
        if any(e == 0 for e in entries):
            raise ValueError("signed index entries must be nonzero")
        self.entries = entries

    @property
    def weight(self) -> int:
        return sum(abs(e) for e in self.entries)

    @property
    def depth(self) -> int:
        return len(self.entries)

    def convergent(self) -> bool:
        """The defining series converges unless the outer coordinate is an
        unbarred 1."""
        return self.entries[0] != 1

    def render(self) -> str:
        return f"z({','.join(str(e) for e in self.entries)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SignedIndex) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(("SignedIndex", self.entries))

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __repr__(self) -> str:
        return self.render()


# Internal word keys are bare tuples of ints: all-positive tuples for plain
# words, possibly-negative tuples for signed words, and () for the unit.
Word = tuple[int, ...]
WordLike = Union["Index", "SignedIndex", Word, "LinComb"]


def _word_key(w: WordLike) -> Word:
    if isinstance(w, Index):
        return w.parts
    if isinstance(w, SignedIndex):
        return w.entries
    if isinstance(w, tuple):
        return w
    raise TypeError(f"not a word: {w!r}")


def _word_weight(w: Word) -> int:
    return sum(abs(e) for e in w)


class LinComb:
    """Finite formal sum of words with nonzero rational coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[WordLike, Fraction] | None = None):
        clean: dict[Word, Fraction] = {}
        if terms:
            for w, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                key = _word_key(w)
                clean[key] = clean.get(key, Fraction(0)) + c
        self.terms = {w: c for w, c in clean.items() if c != 0}

    @classmethod
    def unit(cls) -> "LinComb":
        return cls({(): Fraction(1)})

    @classmethod
    def word(cls, w: WordLike, coeff: Fraction | int = 1) -> "LinComb":
        return cls({_word_key(w): Fraction(coeff)})

    def __add__(self, other: "LinComb") -> "LinComb":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) + c
        return LinComb(out)

    def __sub__(self, other: "LinComb") -> "LinComb":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) - c
        return LinComb(out)

    def __neg__(self) -> "LinComb":
        return LinComb({w: -c for w, c in self.terms.items()})

    def scale(self, c: Fraction | int) -> "LinComb":
        c = Fraction(c)
        return LinComb({w: c * v for w, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LinComb) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, w: WordLike) -> bool:
        return _word_key(w) in self.terms

    def __getitem__(self, w: WordLike) -> Fraction:
        return self.terms.get(_word_key(w), Fraction(0))

    def items(self):
        return self.terms.items()

    def max_weight(self) -> int:
        return max((_word_weight(w) for w in self.terms), default=0)

    def sorted_terms(self) -> list[tuple[Word, Fraction]]:
        """Deterministic order: by (weight, depth, parts) so printed output
        is reproducible."""
        return sorted(self.terms.items(),
                      key=lambda it: (_word_weight(it[0]), len(it[0]), it[0]))

    def render(self, head: str = "t") -> str:
        if not self.terms:
            return "0"
        chunks: list[str] = []
        for w, c in self.sorted_terms():
            body = "1" if not w else f"{head}({','.join(str(e) for e in w)})"
            mag = abs(c)
            if mag == 1 and w:
                piece = body
            else:
                piece = f"{mag}*{body}" if w else str(mag)
            if not chunks:
                chunks.append(piece if c > 0 else f"-{piece}")
            else:
                chunks.append(f"+ {piece}" if c > 0 else f"- {piece}")
        return " ".join(chunks)

    def __repr__(self) -> str:
        return self.render()


def _as_lincomb(u: WordLike) -> LinComb:
    if isinstance(u, LinComb):
        return u
    return LinComb.word(u)


# ---------------------------------------------------------------------
# The quasi-shuffle product
# ---------------------------------------------------------------------

def _merge_plain(a: int, b: int) -> int:
    return a + b


def _merge_signed(a: int, b: int) -> int:
    # magnitudes add, bars multiply: two bars cancel
    mag = abs(a) + abs(b)
    return mag if (a > 0) == (b > 0) else -mag


@lru_cache(maxsize=200_000)
def _stuffle_words(w1: Word, w2: Word, signed: bool) -> tuple[tuple[Word, int], ...]:
    if not w1:
        return ((w2, 1),)
    if not w2:
        return ((w1, 1),)
    merge = _merge_signed if signed else _merge_plain
    a, rest1 = w1[0], w1[1:]
    b, rest2 = w2[0], w2[1:]
    acc: dict[Word, int] = {}
    for w, c in _stuffle_words(rest1, w2, signed):
        key = (a,) + w
        acc[key] = acc.get(key, 0) + c
    for w, c in _stuffle_words(w1, rest2, signed):
        key = (b,) + w
        acc[key] = acc.get(key, 0) + c
    ab = merge(a, b)
    for w, c in _stuffle_words(rest1, rest2, signed):
        key = (ab,) + w
        acc[key] = acc.get(key, 0) + c
    return tuple(acc.items())


def _stuffle_lincomb(u: LinComb, v: LinComb, signed: bool) -> LinComb:
    out: dict[Word, Fraction] = {}
    for w1, c1 in u.terms.items():
        for w2, c2 in v.terms.items():
            if _word_weight(w1) + _word_weight(w2) > WEIGHT_CAP:
                raise ValueError(
                    f"stuffle of weights {_word_weight(w1)} and {_word_weight(w2)} "
                    f"exceeds the weight cap {WEIGHT_CAP}")
            c = c1 * c2
            for w, mult in _stuffle_words(w1, w2, signed):
                out[w] = out.get(w, Fraction(0)) + c * mult
    return LinComb(out)


def stuffle(u: WordLike, v: WordLike) -> LinComb:
    """Quasi-shuffle product of plain words, extended bilinearly.

    The defining recursion on basis words is
    z_i w1 * z_j w2 = z_i(w1 * z_j w2) + z_j(z_i w1 * w2) + z_{i+j}(w1 * w2)
    with the empty word as unit.
    """
    u, v = _as_lincomb(u), _as_lincomb(v)
    for lc in (u, v):
        for w in lc.terms:
            if any(e < 1 for e in w):
                raise ValueError("stuffle is for plain (unsigned) words; "
                                 "use signed_stuffle for barred entries")
    return _stuffle_lincomb(u, v, signed=False)


def signed_stuffle(u: WordLike, v: WordLike) -> LinComb:
    """Quasi-shuffle product of signed words: merging letters adds
    magnitudes and multiplies signs (bar * bar = unbarred)."""
    return _stuffle_lincomb(_as_lincomb(u), _as_lincomb(v), signed=True)


def stuffle_power(w: WordLike, m: int) -> LinComb:
    """m-th stuffle power of a plain word (m >= 0)."""
    if m < 0:
        raise ValueError("power must be >= 0")
    out = LinComb.unit()
    for _ in range(m):
        out = stuffle(out, _as_lincomb(w))
    return out


# ---------------------------------------------------------------------
# Regularization: every word is a polynomial in z_1 over admissible words
# ---------------------------------------------------------------------

def _leading_ones(w: Word) -> int:
    n = 0
    for e in w:
        if e != 1:
            break
        n += 1
    return n


@lru_cache(maxsize=50_000)
def _regularize_word(w: Word) -> tuple[tuple[int, tuple[tuple[Word, Fraction], ...]], ...]:
    """Express the word w as sum_j c_j T^j with admissible c_j, where T is
    the single-letter word z_1 and T^j means the j-fold stuffle power.

    Returned as nested tuples for cacheability.
    """
    if not w or w[0] >= 2:
        return ((0, ((w, Fraction(1)),)),)
    m = _leading_ones(w)
    u = w[m:]
    mfact = _factorial_int(m)
    # z_1^{*m} * u contains the word w = 1^m u with coefficient m!, and
    # every other term has strictly fewer leading ones.
    p = stuffle_power((1,), m)
    if u:
        p = stuffle(p, LinComb.word(u))
    poly: dict[int, dict[Word, Fraction]] = {m: {u: Fraction(1, mfact)}}
    rest = p - LinComb.word(w, mfact)
    for tau, c in rest.terms.items():
        assert _leading_ones(tau) < m, "leading-one count failed to decrease"
        for j, sub in _regularize_word(tau):
            bucket = poly.setdefault(j, {})
            for ww, cc in sub:
                bucket[ww] = bucket.get(ww, Fraction(0)) - Fraction(c, mfact) * cc
    out = []
    for j in sorted(poly):
        terms = tuple((ww, cc) for ww, cc in sorted(poly[j].items()) if cc != 0)
        if terms:
            out.append((j, terms))
    return tuple(out)


def _factorial_int(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def regularize_z1(w: WordLike) -> dict[int, LinComb]:
    """Rewrite w uniquely as sum_j c_j * z_1^{*j} with admissible c_j.

    Returns {j: c_j} with zero coefficients dropped; expanding the result
    with :func:`expand_regularization` recovers w exactly.
    """
    u = _as_lincomb(w)
    poly: dict[int, LinComb] = {}
    for word, coeff in u.terms.items():
        if any(e < 1 for e in word):
            raise ValueError("regularization applies to plain words")
        for j, terms in _regularize_word(word):
            cur = poly.get(j, LinComb())
            poly[j] = cur + LinComb(dict(terms)).scale(coeff)
    return {j: c for j, c in poly.items() if c}


def expand_regularization(poly: Mapping[int, LinComb]) -> LinComb:
    """Substitute z_1 back for T and expand with the stuffle product."""
    out = LinComb()
    for j, c in poly.items():
        out = out + stuffle(c, stuffle_power((1,), j))
    return out


# ---------------------------------------------------------------------
# Index dilation, the sign maps, and the trailing-one derivation
# ---------------------------------------------------------------------

def dilate(n: int, u: WordLike) -> LinComb:
    """Multiply every part of every word by n (coefficients unchanged)."""
    if n < 1:
        raise ValueError("dilation factor must be >= 1")
    lc = _as_lincomb(u)
    out: dict[Word, Fraction] = {}
    for w, c in lc.terms.items():
        if any(e < 1 for e in w):
            raise ValueError("dilate applies to plain words")
        key = tuple(n * e for e in w)
        out[key] = out.get(key, Fraction(0)) + c
    return LinComb(out)


def map_S_A(u: WordLike, which: str) -> LinComb:
    """Expand plain words into all 2^k signed words.

    which = "S": every sign pattern with coefficient +1 (totally symmetric
    image); which = "A": coefficient (-1)^{number of bars} (totally
    antisymmetric image).
    """
    if which not in ("S", "A"):
        raise ValueError("which must be 'S' or 'A'")
    lc = _as_lincomb(u)
    out: dict[Word, Fraction] = {}
    for w, c in lc.terms.items():
        if any(e < 1 for e in w):
            raise ValueError("map_S_A applies to plain words")
        k = len(w)
        for mask in range(1 << k):
            signed = tuple(-e if (mask >> i) & 1 else e for i, e in enumerate(w))
            sign = 1
            if which == "A" and bin(mask).count("1") % 2 == 1:
                sign = -1
            out[signed] = out.get(signed, Fraction(0)) + sign * c
    return LinComb(out)


def a_minus(u: WordLike) -> LinComb:
    """The derivation dropping a trailing 1: words not ending in 1 (and the
    unit) are sent to 0."""
    lc = _as_lincomb(u)
    out: dict[Word, Fraction] = {}
    for w, c in lc.terms.items():
        if w and w[-1] == 1:
            key = w[:-1]
            out[key] = out.get(key, Fraction(0)) + c
    return LinComb(out)
