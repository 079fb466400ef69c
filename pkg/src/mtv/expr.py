"""Polynomial expressions in the closed-form constant alphabet.

The alphabet is pi, log2, Catalan's G, the depth-one values t(n) for
n >= 2, and convergent signed zeta words (rendered ``z(...)``, negative
entry = bar).  A ConstantExpression is a finite rational linear
combination of monomials in these symbols; every right-hand side of a
closed-form identity in this package is one of these.

The grading assigns weight 1 to pi and log2, weight 2 to G, weight n to
t(n) and the word weight to a signed zeta symbol, so identities are
weight-homogeneous and transcription slips are mechanically detectable.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

__all__ = ["ConstantSymbol", "ConstantExpression", "PI", "LOG2", "CATALAN",
           "t_sym", "zeta_bar_sym", "rational_expr"]

_KIND_ORDER = {"t": 0, "zbar": 1, "G": 2, "pi": 3, "log2": 4}


class ConstantSymbol:
    """One letter of the constant alphabet."""

    __slots__ = ("kind", "arg")

    def __init__(self, kind: str, arg=None):
        if kind in ("pi", "log2", "G"):
            if arg is not None:
                raise ValueError(f"{kind} takes no argument")
        elif kind == "t":
            if not isinstance(arg, int) or arg < 2:
                raise ValueError("t symbols need an integer argument >= 2 "
                                 "(t(1) is written log2)")
        elif kind == "zbar":
            arg = tuple(int(e) for e in arg)
            if not arg or any(e == 0 for e in arg):
                raise ValueError("zeta word entries must be nonzero")
            if arg[0] == 1:
                raise ValueError("divergent zeta word (leading unbarred 1)")
        else:
            raise ValueError(f"unknown symbol kind {kind!r}")
        self.kind = kind
        self.arg = arg

    @property
    def weight(self) -> int:
        if self.kind in ("pi", "log2"):
            return 1
        if self.kind == "G":
            return 2
        if self.kind == "t":
            return self.arg
        return sum(abs(e) for e in self.arg)

    def sort_key(self):
        if self.kind == "t":
            return (_KIND_ORDER["t"], self.arg, ())
        if self.kind == "zbar":
            return (_KIND_ORDER["zbar"], self.weight, self.arg)
        return (_KIND_ORDER[self.kind], 0, ())

    def render(self) -> str:
        if self.kind == "pi":
            return "pi"
        if self.kind == "log2":
            return "log2"
        if self.kind == "G":
            return "G"
        if self.kind == "t":
            return f"t({self.arg})"
        return f"z({','.join(str(e) for e in self.arg)})"

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, ConstantSymbol)
                and self.kind == other.kind and self.arg == other.arg)

    def __hash__(self) -> int:
        return hash((self.kind, self.arg))

    def __lt__(self, other: "ConstantSymbol") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return self.render()


PI = ConstantSymbol("pi")
LOG2 = ConstantSymbol("log2")
CATALAN = ConstantSymbol("G")


def t_sym(n: int) -> ConstantSymbol:
    return ConstantSymbol("t", n)


def zeta_bar_sym(entries: Iterable[int]) -> ConstantSymbol:
    return ConstantSymbol("zbar", tuple(entries))


#: A monomial is a multiset of symbols, stored as a sorted tuple.
Monomial = tuple[ConstantSymbol, ...]

Number = Union[int, Fraction]


def _as_monomial(symbols: Iterable[ConstantSymbol]) -> Monomial:
    return tuple(sorted(symbols, key=ConstantSymbol.sort_key))


class ConstantExpression:
    """A polynomial with exact rational coefficients in the constant
    alphabet.  Monomials are kept canonically sorted so equality is
    syntactic; zero coefficients are never stored."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                c = Fraction(c)
                if c == 0:
                    continue
                key = _as_monomial(mono)
                clean[key] = clean.get(key, Fraction(0)) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls) -> "ConstantExpression":
        return cls()

    @classmethod
    def from_rational(cls, c: Number) -> "ConstantExpression":
        return cls({(): Fraction(c)})

    @classmethod
    def symbol(cls, sym: ConstantSymbol, coeff: Number = 1) -> "ConstantExpression":
        return cls({(sym,): Fraction(coeff)})

    @classmethod
    def pi_power(cls, n: int, coeff: Number = 1) -> "ConstantExpression":
        return cls({(PI,) * n: Fraction(coeff)})

    # -- ring operations ----------------------------------------------

    @staticmethod
    def _coerce(other) -> "ConstantExpression":
        if isinstance(other, ConstantExpression):
            return other
        if isinstance(other, (int, Fraction)):
            return ConstantExpression.from_rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return ConstantExpression(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) - c
        return ConstantExpression(out)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return ConstantExpression({m: -c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return ConstantExpression({m: c * v for m, v in self.terms.items()})
        if not isinstance(other, ConstantExpression):
            return NotImplemented
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                key = _as_monomial(m1 + m2)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return ConstantExpression(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = ConstantExpression.from_rational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def inverse(self) -> "ConstantExpression":
        c = self.rational_value()
        if c == 0:
            raise ZeroDivisionError("inverse of zero expression")
        return ConstantExpression.from_rational(Fraction(1) / c)

    # -- queries --------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ConstantExpression.from_rational(other)
        if not isinstance(other, ConstantExpression):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_rational(self) -> bool:
        return all(not m for m in self.terms)

    def rational_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_rational():
            raise ValueError("expression is not a bare rational")
        return self.terms[()]

    def coefficient(self, symbols: Iterable[ConstantSymbol]) -> Fraction:
        return self.terms.get(_as_monomial(symbols), Fraction(0))

    def weight(self) -> int:
        """The common weight of all monomials; raises if inhomogeneous."""
        weights = {sum(s.weight for s in m) for m in self.terms}
        if not weights:
            return 0
        if len(weights) > 1:
            raise ValueError(f"expression is not weight-homogeneous: {sorted(weights)}")
        return weights.pop()

    def symbols(self) -> set[ConstantSymbol]:
        out: set[ConstantSymbol] = set()
        for m in self.terms:
            out.update(m)
        return out

    def d_dlog2(self) -> "ConstantExpression":
        """Formal partial derivative treating log2 as the variable."""
        out: dict[Monomial, Fraction] = {}
        for mono, c in self.terms.items():
            e = sum(1 for s in mono if s.kind == "log2")
            if e == 0:
                continue
            reduced = list(mono)
            reduced.remove(LOG2)
            key = _as_monomial(reduced)
            out[key] = out.get(key, Fraction(0)) + c * e
        return ConstantExpression(out)

    def substitute_symbol(self, sym: ConstantSymbol,
                          value: "ConstantExpression") -> "ConstantExpression":
        """Replace every occurrence of sym by the given expression."""
        out = ConstantExpression.zero()
        for mono, c in self.terms.items():
            term = ConstantExpression.from_rational(c)
            for s in mono:
                if s == sym:
                    term = term * value
                else:
                    term = term * ConstantExpression.symbol(s)
            out = out + term
        return out

    # -- rendering ------------------------------------------------------

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        def key(item):
            mono, _ = item
            return (sum(s.weight for s in mono), len(mono),
                    tuple(s.sort_key() for s in mono))
        return sorted(self.terms.items(), key=key)

    @staticmethod
    def _render_monomial(mono: Monomial) -> str:
        pieces: list[str] = []
        i = 0
        while i < len(mono):
            j = i
            while j < len(mono) and mono[j] == mono[i]:
                j += 1
            e = j - i
            pieces.append(mono[i].render() if e == 1 else f"{mono[i].render()}^{e}")
            i = j
        return "*".join(pieces)

    def render(self) -> str:
        if not self.terms:
            return "0"
        chunks: list[str] = []
        for mono, c in self.sorted_terms():
            mag = abs(c)
            if not mono:
                piece = str(mag)
            elif mag == 1:
                piece = self._render_monomial(mono)
            else:
                piece = f"{mag}*{self._render_monomial(mono)}"
            if not chunks:
                chunks.append(piece if c > 0 else
                              (f"-{piece}" if not mono or mag != 1
                               else f"-1*{piece}"))
            else:
                chunks.append(f"+ {piece}" if c > 0 else f"- {piece}")
        return " ".join(chunks)

    def __repr__(self) -> str:
        return self.render()


def rational_expr(num, den: int = 1) -> ConstantExpression:
    return ConstantExpression.from_rational(Fraction(num, den))
