"""Metric temporal logic with point-based semantics over finite path prefixes.

Core constructors are ``Atom``, ``FALSE``, ``Implies``, ``Next`` and
``Until``; negation, conjunction, disjunction and truth are sugar that is
normalized into the core at construction and parse time.

Verdicts are three-valued: a truncated prefix that cannot settle a
formula yields ``Verdict.UNKNOWN``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .model import Interval, SmmModel, TimedPath, as_fraction, format_number


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def of(cls, b: bool) -> "Verdict":
        return cls.TRUE if b else cls.FALSE

    def __invert__(self) -> "Verdict":
        return _not(self)

    def __and__(self, other: "Verdict") -> "Verdict":
        if Verdict.FALSE in (self, other):
            return Verdict.FALSE
        if Verdict.UNKNOWN in (self, other):
            return Verdict.UNKNOWN
        return Verdict.TRUE

    def __or__(self, other: "Verdict") -> "Verdict":
        return ~(~self & ~other)


# ---------------------------------------------------------------------------
# formulas

class Formula:
    __slots__ = ()

    def atoms(self) -> Iterator[str]:
        for child in getattr(self, "children", ()):
            yield from child.atoms()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def atoms(self):
        yield self.name


@dataclass(frozen=True)
class _False(Formula):
    pass


FALSE = _False()


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


def _check_interval(lo, hi) -> Interval:
    lo, hi = as_fraction(lo), as_fraction(hi)
    if lo > hi:
        raise ValueError(f"interval bounds out of order: [{lo}, {hi}]")
    return Interval.closed(lo, hi)


@dataclass(frozen=True)
class Next(Formula):
    interval: Interval
    sub: Formula

    @property
    def children(self):
        return (self.sub,)


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula

    @property
    def children(self):
        return (self.left, self.right)


def next_(lo, hi, sub: Formula) -> Next:
    return Next(_check_interval(lo, hi), sub)


def until(left: Formula, lo, hi, right: Formula) -> Until:
    return Until(_check_interval(lo, hi), left, right)


def Not(f: Formula) -> Formula:
    return Implies(f, FALSE)


TRUE = Not(FALSE)


def And(*fs: Formula) -> Formula:
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = Not(Implies(out, Not(f)))
    return out


def Or(*fs: Formula) -> Formula:
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Implies(Not(out), f)
    return out


def to_text(f: Formula) -> str:
    """Core-syntax rendering; :func:`parse` reads it back to an equal formula."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, _False):
        return "false"
    if isinstance(f, Implies):
        return f"({to_text(f.left)} -> {to_text(f.right)})"
    if isinstance(f, Next):
        iv = f.interval
        return f"X[{format_number(iv.lo)},{format_number(iv.hi)}] {to_text(f.sub)}"
    if isinstance(f, Until):
        iv = f.interval
        return (f"({to_text(f.left)} U[{format_number(iv.lo)},{format_number(iv.hi)}] "
                f"{to_text(f.right)})")
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<op>->|[()!&|,\]])
    | (?P<temporal>[XU])\[
    | (?P<num>-?\d+(?:/\d+|\.\d+(?:[eE][-+]?\d+)?)?)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    )""", re.VERBOSE)


class MtlSyntaxError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MtlSyntaxError(f"unexpected input at offset {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise MtlSyntaxError(f"expected {value or 'a token'}, got {tok[1]!r}")
        self.i += 1
        return tok

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Implies(left, self.formula())
        return left

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek()[1] == "|":
            self.take()
            parts.append(self.conj())
        return Or(*parts)

    def conj(self) -> Formula:
        parts = [self.until()]
        while self.peek()[1] == "&":
            self.take()
            parts.append(self.until())
        return And(*parts)

    def until(self) -> Formula:
        left = self.unary()
        if self.peek() == ("temporal", "U"):
            self.take()
            lo, hi = self.bounds()
            return until(left, lo, hi, self.unary())
        return left

    def bounds(self):
        lo = self.take()[1]
        self.take(",")
        hi = self.take()[1]
        self.take("]")
        try:
            return as_fraction(lo), as_fraction(hi)
        except (ValueError, ZeroDivisionError) as exc:
            raise MtlSyntaxError(f"bad interval bound: {exc}") from None

    def unary(self) -> Formula:
        kind, val = self.peek()
        if val == "!":
            self.take()
            return Not(self.unary())
        if (kind, val) == ("temporal", "X"):
            self.take()
            lo, hi = self.bounds()
            return next_(lo, hi, self.unary())
        if val == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if kind == "ident":
            self.take()
            if val == "false":
                return FALSE
            if val == "true":
                return TRUE
            return Atom(val)
        raise MtlSyntaxError(f"unexpected token {val!r}")


def parse(text: str) -> Formula:
    """Parse the text syntax: ``p``, ``false``, ``(f -> g)``, ``X[a,b] f``,
    ``(f U[a,b] g)``, plus ``!``, ``&``, ``|`` and ``true``."""
    p = _Parser(text)
    f = p.formula()
    if p.peek()[0] is not None:
        raise MtlSyntaxError(f"trailing input starting at {p.peek()[1]!r}")
    return f


# ---------------------------------------------------------------------------
# evaluation

_T, _F, _U = Verdict.TRUE, Verdict.FALSE, Verdict.UNKNOWN


def _not(v):
    return _F if v is _T else _T if v is _F else _U


def _compile(model: SmmModel, f: Formula):
    """Closure ``(path, j) -> Verdict`` evaluating ``f`` at position ``j``."""
    if isinstance(f, Atom):
        name = f.name
        label = model.label

        def ev(path, j):
            if j >= len(path.states):
                return _U
            return _T if name in label(path.states[j]) else _F
    elif isinstance(f, _False):
        def ev(path, j):
            return _F
    elif isinstance(f, Implies):
        left, right = _compile(model, f.left), _compile(model, f.right)

        def ev(path, j):
            a = left(path, j)
            if a is _F:
                return _T
            b = right(path, j)
            if b is _T:
                return _T
            return _F if (a is _T and b is _F) else _U
    elif isinstance(f, Next):
        contains, sub = f.interval.contains, _compile(model, f.sub)

        def ev(path, j):
            last = len(path.states) - 1
            if j >= last:
                return _F if (path.terminated and j == last) else _U
            if not contains(path.delays[j]):
                return _F
            return sub(path, j + 1)
    elif isinstance(f, Until):
        ev = _compile_until(model, f)
    else:
        raise TypeError(f"not a formula: {f!r}")
    return ev


def _compile_until(model, f: Until):
    left, right = _compile(model, f.left), _compile(model, f.right)
    contains, hi = f.interval.contains, f.interval.hi

    def ev(path, j):
        last = len(path.states) - 1
        if j > last:
            return _U
        result = _F
        prefix = _T  # left holds on positions j..i-1
        elapsed = 0
        for i in range(j + 1, last + 1):
            a = left(path, i - 1)
            if a is _F:
                return result
            if a is _U:
                prefix = _U
            elapsed = elapsed + path.delays[i - 1]
            if elapsed > hi:
                return result
            if contains(elapsed):
                b = right(path, i)
                if b is _T and prefix is _T:
                    return _T
                if b is not _F:
                    result = _U
        if path.terminated:
            return result
        # a witness beyond the prefix still needs the left side at the last position
        if left(path, last) is _F:
            return result
        return _U
    return ev


def check_atoms(model: SmmModel, f: Formula) -> None:
    unknown = sorted(set(f.atoms()) - model.atomic_props)
    if unknown:
        raise ValueError(f"unknown atomic proposition(s): {', '.join(unknown)}")


def compile_mtl(model: SmmModel, phi: Formula):
    """Checked evaluator ``path -> Verdict`` for repeated use on one model."""
    check_atoms(model, phi)
    ev = _compile(model, phi)
    return lambda path: ev(path, 0)


def mtl_eval(model: SmmModel, path: TimedPath, phi: Formula) -> Verdict:
    """Three-valued satisfaction of ``phi`` by the path prefix at position 0."""
    return compile_mtl(model, phi)(path)


def temporal_depth(f: Formula) -> int | None:
    """Positions past the first that ``f`` can inspect; None if unbounded."""
    if isinstance(f, (Atom, _False)):
        return 0
    if isinstance(f, Implies):
        a, b = temporal_depth(f.left), temporal_depth(f.right)
        return None if a is None or b is None else max(a, b)
    if isinstance(f, Next):
        d = temporal_depth(f.sub)
        return None if d is None else d + 1
    return None
