"""Expression grammar, identity tables, verification, and conjecture checks.

Table files hold one identity per line, ``lhs = rhs``, in a small exact
grammar::

    expr     := term (('+'|'-') term)*
    term     := [rational '*'] factor ('*' factor)*
    factor   := atom ['^' uint]
    atom     := 't(' uints ')' | 'ts(' uints ')' | 'z(' ints ')'
              | 'pi' | 'log2' | 'G'
    rational := int ['/' uint]

Whitespace is insignificant, ``#`` starts a comment, files are UTF-8 with
LF line endings.  Negative entries inside ``z(...)`` mark alternating
(barred) coordinates.  A bare rational is additionally accepted as a term
so that rendered constants round-trip.

The left side of a record must be a plain or star index; the right side a
constant expression of the same weight (weight mixing is rejected at load,
which catches transcription slips before any numerics run).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Sequence

from gmpy2 import mpfr

from .arith import linear_recurrence
from .expr import (CATALAN, LOG2, PI, ConstantExpression, ConstantSymbol,
                   t_sym, zeta_bar_sym)
from .numeric import BigFloat, EvalContext, eval_expr, eval_t_series, eval_tstar_series
from .words import Index

__all__ = [
    "ParseError", "StarIndex", "parse_expr", "render",
    "IdentityRecord", "load_table", "TolerancePolicy",
    "ReportRow", "VerificationReport", "verify_identity", "verify_table",
    "RankReport", "rank_weight", "DerivationReport", "derivation_check",
    "builtin_table_paths", "builtin_policy_path",
]


class ParseError(ValueError):
    """Syntax or semantic error, annotated with a character position."""

    def __init__(self, message: str, pos: int, where: str = ""):
        self.pos = pos
        self.where = where
        prefix = f"{where}: " if where else ""
        super().__init__(f"{prefix}col {pos + 1}: {message}")


@dataclass(frozen=True)
class StarIndex:
    """A t-star argument string (weak-inequality series)."""
    index: Index

    def render(self) -> str:
        return self.index.render("ts")


# ---------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "#":
            break
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(("NUM", text[i:j], i))
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            out.append(("NAME", text[i:j], i))
            i = j
            continue
        if c in _OPS:
            out.append((c, c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    return out


class _Parser:
    def __init__(self, tokens, textlen: int):
        self.tokens = tokens
        self.i = 0
        self.end = textlen

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][2] if self.i < len(self.tokens) else self.end

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        if self.peek() != kind:
            raise ParseError(f"expected {kind!r}", self.pos())
        return self.next()

    def uint(self) -> int:
        if self.peek() != "NUM":
            raise ParseError("expected a number", self.pos())
        return int(self.next()[1])

    def int_(self) -> int:
        sign = 1
        if self.peek() == "-":
            self.next()
            sign = -1
        return sign * self.uint()

    # -- grammar --------------------------------------------------------

    def atom_args(self) -> list[int]:
        self.expect("(")
        vals = [self.int_()]
        while self.peek() == ",":
            self.next()
            vals.append(self.int_())
        self.expect(")")
        return vals

    def atom(self) -> ConstantExpression:
        kind, value, pos = self.next() if self.peek() == "NAME" else (None, None, self.pos())
        if kind != "NAME":
            raise ParseError("expected a symbol", pos)
        if value == "pi":
            return ConstantExpression.symbol(PI)
        if value == "log2":
            return ConstantExpression.symbol(LOG2)
        if value == "G":
            return ConstantExpression.symbol(CATALAN)
        if value in ("t", "ts"):
            args = self.atom_args()
            if value == "ts":
                raise ParseError("star values are series, not constants; "
                                 "ts(...) may only stand alone", pos)
            if len(args) != 1:
                raise ParseError("multi-argument t is a series, not a constant; "
                                 "only depth-one t(n) appears in expressions", pos)
            if any(a < 0 for a in args):
                raise ParseError("t arguments must be positive", pos)
            if args[0] == 1:
                raise ParseError("t(1) is written log2", pos)
            return ConstantExpression.symbol(t_sym(args[0]))
        if value == "z":
            args = self.atom_args()
            if args and args[0] == 1:
                raise ParseError("divergent zeta word (leading unbarred 1)", pos)
            try:
                sym = zeta_bar_sym(args)
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
            return ConstantExpression.symbol(sym)
        raise ParseError(f"unknown symbol {value!r}", pos)

    def factor(self) -> ConstantExpression:
        base = self.atom()
        if self.peek() == "^":
            self.next()
            return base ** self.uint()
        return base

    def term(self, first: bool) -> ConstantExpression:
        coeff = None
        if self.peek() == "-" and first:
            self.next()
            if self.peek() != "NUM":
                raise ParseError("a leading minus must start a rational "
                                 "(write -1*...)", self.pos())
            coeff = Fraction(-self.uint())
        elif self.peek() == "NUM":
            coeff = Fraction(self.uint())
        if coeff is not None:
            if self.peek() == "/":
                self.next()
                den = self.uint()
                if den == 0:
                    raise ParseError("zero denominator", self.pos())
                coeff = coeff / den
            if self.peek() != "*":
                return ConstantExpression.from_rational(coeff)
            self.next()
        out = self.factor()
        while self.peek() == "*":
            self.next()
            out = out * self.factor()
        if coeff is not None:
            out = out * coeff
        return out

    def expression(self) -> ConstantExpression:
        total = self.term(first=True)
        while self.peek() in ("+", "-"):
            op = self.next()[0]
            t = self.term(first=False)
            total = total + t if op == "+" else total - t
        if self.peek() is not None:
            raise ParseError("trailing input", self.pos())
        return total


def parse_expr(text: str, where: str = ""):
    """Parse grammar text into an Index, a StarIndex, or a
    ConstantExpression.  A bare ``t(...)`` (or ``ts(...)``) atom is an
    index; anything else is an expression."""
    try:
        tokens = _tokenize(text)
    except ParseError as exc:
        raise ParseError(str(exc).split("col ")[-1].split(": ", 1)[-1],
                         exc.pos, where) from None
    if not tokens:
        raise ParseError("empty input", 0, where)
    # whole-input index forms
    if tokens[0][0] == "NAME" and tokens[0][1] in ("t", "ts"):
        shape = [t[0] for t in tokens]
        if (len(shape) >= 4 and shape[1] == "(" and shape[-1] == ")"
                and all(shape[i] == ("NUM" if i % 2 == 0 else ",")
                        for i in range(2, len(shape) - 1))):
            parts = [int(v) for k, v, _ in tokens if k == "NUM"]
            try:
                idx = Index(parts)
            except ValueError as exc:
                raise ParseError(str(exc), tokens[0][2], where) from None
            return StarIndex(idx) if tokens[0][1] == "ts" else idx
    parser = _Parser(tokens, len(text))
    try:
        return parser.expression()
    except ParseError as exc:
        if where and not exc.where:
            raise ParseError(str(exc).split(": ", 1)[-1], exc.pos, where) from None
        raise


def render(obj) -> str:
    """Inverse of parse_expr on all objects this package emits."""
    if isinstance(obj, Index):
        return obj.render("t")
    if isinstance(obj, StarIndex):
        return obj.render()
    if isinstance(obj, ConstantExpression):
        return obj.render()
    raise TypeError(f"cannot render {obj!r}")


# ---------------------------------------------------------------------
# Identity records and tables
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityRecord:
    lhs: object            # Index | StarIndex | ConstantExpression
    rhs: ConstantExpression
    weight: int
    source_tag: str

    def tag(self) -> str:
        return render(self.lhs)

    def lhs_index(self) -> Index | None:
        if isinstance(self.lhs, Index):
            return self.lhs
        if isinstance(self.lhs, StarIndex):
            return self.lhs.index
        return None


def _record_weight(lhs, rhs: ConstantExpression, where: str, pos: int) -> int:
    try:
        rw = rhs.weight()
    except ValueError as exc:
        raise ParseError(f"right side mixes weights ({exc})", pos, where) from None
    if isinstance(lhs, (Index, StarIndex)):
        lw = lhs.weight if isinstance(lhs, Index) else lhs.index.weight
    else:
        lw = lhs.weight()
    if lw != rw:
        raise ParseError(f"weight mismatch: left {lw} vs right {rw}", pos, where)
    return lw


def load_table(path) -> list[IdentityRecord]:
    """Parse a table file; the first malformed line aborts with location."""
    path = Path(path)
    records: list[IdentityRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            if line.count("=") != 1:
                raise ParseError("expected exactly one '='",
                                 raw.find("=") if "=" in raw else 0, where)
            lhs_text, rhs_text = line.split("=")
            lhs = parse_expr(lhs_text.strip(), where)
            rhs = parse_expr(rhs_text.strip(), where)
            if not isinstance(rhs, ConstantExpression):
                raise ParseError("right side must be a constant expression",
                                 raw.find("=") + 1, where)
            weight = _record_weight(lhs, rhs, where, 0)
            records.append(IdentityRecord(lhs, rhs, weight, where))
    return records


def builtin_table_paths() -> list[Path]:
    base = resources.files("mtv") / "tables"
    return sorted(Path(str(p)) for p in base.iterdir()
                  if p.name.endswith(".mtv"))


def builtin_policy_path() -> Path:
    return Path(str(resources.files("mtv") / "tables" / "tolerances.json"))


# ---------------------------------------------------------------------
# Tolerance policy
# ---------------------------------------------------------------------

@dataclass
class TolerancePolicy:
    """Per-weight, per-shape tolerances; relaxations are explicit data."""
    default: float
    overrides: list[dict] = field(default_factory=list)

    @classmethod
    def load(cls, path) -> "TolerancePolicy":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(default=float(data["default"]),
                   overrides=list(data.get("overrides", [])))

    @classmethod
    def for_table(cls, table_path) -> "TolerancePolicy":
        local = Path(table_path).parent / "tolerances.json"
        if local.exists():
            return cls.load(local)
        return cls.load(builtin_policy_path())

    def tolerance_for(self, record: IdentityRecord) -> float:
        idx = record.lhs_index()
        trailing = idx.trailing_ones() if idx is not None else 0
        tol = self.default
        for ov in self.overrides:
            if "weight" in ov and record.weight != ov["weight"]:
                continue
            if "min_trailing_ones" in ov and trailing < ov["min_trailing_ones"]:
                continue
            tol = float(ov["tolerance"])
        return tol


# ---------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------

@dataclass
class ReportRow:
    tag: str
    lhs_value: mpfr
    rhs_value: mpfr
    diff: mpfr
    tolerance: float
    passed: bool

    def machine_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.tag} {status} {self.lhs_value} {self.rhs_value} "
                f"{float(self.diff):.3e} {self.tolerance:.1e}")

    def text_line(self) -> str:
        status = "ok  " if self.passed else "FAIL"
        return (f"[{status}] {self.tag:<22} |lhs-rhs| = {float(self.diff):.3e}"
                f"  (tol {self.tolerance:.1e})")


@dataclass
class VerificationReport:
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.rows)

    @property
    def failed(self) -> int:
        return sum(not r.passed for r in self.rows)

    def ok(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        return f"{self.passed} passed, {self.failed} failed, {len(self.rows)} total"

    def text(self) -> str:
        lines = [r.text_line() for r in self.rows]
        lines.append(self.summary())
        return "\n".join(lines)

    def machine(self) -> str:
        return "\n".join(r.machine_line() for r in self.rows)


def _eval_lhs(lhs, ctx: EvalContext) -> BigFloat:
    if isinstance(lhs, Index):
        return eval_t_series(lhs, ctx)
    if isinstance(lhs, StarIndex):
        return eval_tstar_series(lhs.index, ctx)
    if isinstance(lhs, ConstantExpression):
        return eval_expr(lhs, ctx)
    raise TypeError(f"cannot evaluate {lhs!r}")


def verify_identity(record: IdentityRecord, ctx: EvalContext,
                    tolerance: float) -> ReportRow:
    with ctx.working():
        lhs = _eval_lhs(record.lhs, ctx)
        rhs = eval_expr(record.rhs, ctx)
        diff = abs(lhs.value - rhs.value)
        return ReportRow(record.tag(), lhs.value, rhs.value, diff,
                         tolerance, bool(diff <= tolerance))


def verify_table(path, ctx: EvalContext, tolerance: float | None = None,
                 policy: TolerancePolicy | None = None) -> VerificationReport:
    """Verify every record of a table file at its policy tolerance."""
    records = load_table(path)
    if policy is None:
        policy = TolerancePolicy.for_table(path)
    report = VerificationReport()
    for rec in records:
        tol = tolerance if tolerance is not None else policy.tolerance_for(rec)
        report.rows.append(verify_identity(rec, ctx, tol))
    return report


# ---------------------------------------------------------------------
# Rank of the weight-n span
# ---------------------------------------------------------------------

def _admissible_compositions(n: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, prefix: list[int]):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        lo = 2 if not prefix else 1
        for p in range(lo, remaining + 1):
            prefix.append(p)
            rec(remaining - p, prefix)
            prefix.pop()

    rec(n, [])
    return out


@dataclass
class RankReport:
    weight: int
    rank: int
    fibonacci: int
    row_labels: list[str]
    monomials: list[str]
    missing: list[str]

    def ok(self) -> bool:
        return self.rank <= self.fibonacci

    def text(self) -> str:
        lines = [f"weight {self.weight}: rank {self.rank} over "
                 f"{len(self.monomials)} monomials from {len(self.row_labels)} "
                 f"values; F_{self.weight} = {self.fibonacci} "
                 f"({'<= bound holds' if self.ok() else 'BOUND VIOLATED'})"]
        if self.missing:
            lines.append("missing records: " + ", ".join(self.missing))
        return "\n".join(lines)


def rank_weight(n: int, records: Sequence[IdentityRecord]) -> RankReport:
    """Exact rational rank of the span of all weight-n values over the
    monomial basis of their closed forms.  Depth-one t(n) enters as its own
    basis row; odd depth-one values are irreducible symbols here."""
    rows: list[ConstantExpression] = []
    labels: list[str] = []
    seen: set[tuple[int, ...]] = set()
    for rec in records:
        idx = rec.lhs_index()
        if idx is None or isinstance(rec.lhs, StarIndex) or rec.weight != n:
            continue
        rows.append(rec.rhs)
        labels.append(rec.tag())
        seen.add(idx.parts)
    rows.append(ConstantExpression.symbol(t_sym(n)))
    labels.append(Index([n]).render())
    seen.add((n,))
    missing = [Index(c).render() for c in _admissible_compositions(n)
               if c not in seen]
    monomials = sorted({m for e in rows for m in e.terms},
                       key=lambda m: tuple(s.sort_key() for s in m))
    col = {m: i for i, m in enumerate(monomials)}
    matrix = [[Fraction(0)] * len(monomials) for _ in rows]
    for r, e in enumerate(rows):
        for m, c in e.terms.items():
            matrix[r][col[m]] = c
    rank = _rational_rank(matrix)
    return RankReport(n, rank, linear_recurrence("fibonacci", n), labels,
                      [ConstantExpression._render_monomial(m) or "1"
                       for m in monomials], missing)


def _rational_rank(matrix: list[list[Fraction]]) -> int:
    if not matrix or not matrix[0]:
        return 0
    m = [row[:] for row in matrix]
    nrows, ncols = len(m), len(m[0])
    rank = 0
    for col in range(ncols):
        piv = None
        for r in range(rank, nrows):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(nrows):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank


# ---------------------------------------------------------------------
# The log2-derivation conjecture check
# ---------------------------------------------------------------------

@dataclass
class DerivationReport:
    checked: list[tuple[str, str]] = field(default_factory=list)
    mismatched: list[tuple[str, str]] = field(default_factory=list)
    missing: list[tuple[str, str]] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.mismatched

    def text(self) -> str:
        lines = [f"derivation pairs checked: {len(self.checked)}, "
                 f"mismatched: {len(self.mismatched)}, "
                 f"missing images: {len(self.missing)}"]
        for a, b in self.mismatched:
            lines.append(f"MISMATCH d{a} != {b}")
        for a, b in self.missing:
            lines.append(f"missing record for {b} (image of {a})")
        return "\n".join(lines)


def derivation_check(records: Sequence[IdentityRecord]) -> DerivationReport:
    """For every record whose index ends in 1, formally differentiate its
    closed form with respect to log2 and compare with the closed form of
    the index with the trailing 1 removed (exact expression equality)."""
    by_index: dict[tuple[int, ...], ConstantExpression] = {}
    for rec in records:
        idx = rec.lhs_index()
        if idx is not None and isinstance(rec.lhs, Index):
            by_index[idx.parts] = rec.rhs
    report = DerivationReport()
    for rec in records:
        idx = rec.lhs_index()
        if idx is None or not isinstance(rec.lhs, Index):
            continue
        if idx.parts[-1] != 1:
            continue
        image = idx.parts[:-1]
        image_tag = Index(image).render()
        if len(image) == 1:
            expected = ConstantExpression.symbol(t_sym(image[0]))
        elif image in by_index:
            expected = by_index[image]
        else:
            report.missing.append((rec.tag(), image_tag))
            continue
        if rec.rhs.d_dlog2() == expected:
            report.checked.append((rec.tag(), image_tag))
        else:
            report.mismatched.append((rec.tag(), image_tag))
    return report
