"""Deterministic timed automata over label sets, read as path specifications."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .model import SmmModel, TimedPath, as_fraction, format_number
from .mtl import Verdict

OPS = ("<", "<=", ">", ">=")


class DeterminismError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    clock: str
    op: str
    const: Fraction
    # float copy of const when exact, so float clock values compare fast
    _fconst: float | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown comparison {self.op!r}")
        c = as_fraction(self.const)
        object.__setattr__(self, "const", c)
        if Fraction(float(c)) == c:
            object.__setattr__(self, "_fconst", float(c))

    def holds(self, value) -> bool:
        c = self._fconst if (self._fconst is not None and type(value) is float) else self.const
        op = self.op
        if op == "<=":
            return value <= c
        if op == ">=":
            return value >= c
        if op == "<":
            return value < c
        return value > c

    def __str__(self):
        return f"{self.clock} {self.op} {format_number(self.const)}"


@dataclass(frozen=True)
class Edge:
    """``symbol`` is a label set, or None to read any symbol."""

    src: str
    symbol: frozenset | None
    guard: tuple[Constraint, ...]
    reset: frozenset
    dst: str

    def reads(self, label: frozenset) -> bool:
        return self.symbol is None or self.symbol == label

    def enabled(self, valuation: dict) -> bool:
        return all(c.holds(valuation[c.clock]) for c in self.guard)


def _clock_bounds(guard, clock):
    """Feasible set of one clock under a guard: ``(lo, lo_strict, hi, hi_strict)``."""
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for c in guard:
        if c.clock != clock:
            continue
        if c.op in (">", ">="):
            strict = c.op == ">"
            if lo is None or c.const > lo or (c.const == lo and strict):
                lo, lo_strict = c.const, strict
        else:
            strict = c.op == "<"
            if hi is None or c.const < hi or (c.const == hi and strict):
                hi, hi_strict = c.const, strict
    return lo, lo_strict, hi, hi_strict


def _empty(lo, lo_strict, hi, hi_strict) -> bool:
    if lo is None or hi is None:
        return False
    return lo > hi or (lo == hi and (lo_strict or hi_strict))


def orthogonal(g1, g2) -> bool:
    """No valuation satisfies both guards: some clock's intersection is empty."""
    both = tuple(g1) + tuple(g2)
    return any(_empty(*_clock_bounds(both, x)) for x in {c.clock for c in both})


def satisfiable(guard) -> bool:
    return not any(_empty(*_clock_bounds(guard, x)) for x in {c.clock for c in guard})


@dataclass(frozen=True)
class Dta:
    locations: tuple[str, ...]
    initial: str
    final: frozenset
    clocks: tuple[str, ...]
    edges: tuple[Edge, ...]
    _out: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        locs = set(self.locations)
        if self.initial not in locs:
            raise ValueError("initial location is not a location")
        if not set(self.final) <= locs:
            raise ValueError("final locations must be locations")
        out = defaultdict(list)
        for e in self.edges:
            if e.src not in locs or e.dst not in locs:
                raise ValueError(f"edge {e.src}->{e.dst} uses an unknown location")
            bad = ({c.clock for c in e.guard} | set(e.reset)) - set(self.clocks)
            if bad:
                raise ValueError(f"edge {e.src}->{e.dst} uses unknown clocks {sorted(bad)}")
            out[e.src].append(e)
        object.__setattr__(self, "_out", dict(out))

    def outgoing(self, q: str) -> list[Edge]:
        return self._out.get(q, [])

    def nondeterministic_pairs(self) -> list[tuple[Edge, Edge]]:
        """Edge pairs that can read one symbol under overlapping guards."""
        bad = []
        for q in self.locations:
            es = self.outgoing(q)
            for i, e in enumerate(es):
                for f in es[i + 1:]:
                    shares_symbol = e.symbol is None or f.symbol is None or e.symbol == f.symbol
                    if shares_symbol and e != f and not orthogonal(e.guard, f.guard):
                        bad.append((e, f))
        return bad

    def is_deterministic(self) -> bool:
        return not self.nondeterministic_pairs()

    def is_1rdta(self) -> bool:
        return len(self.clocks) == 1 and all(set(e.reset) == set(self.clocks) for e in self.edges)

    # -- JSON ---------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "locations": list(self.locations),
            "initial": self.initial,
            "final": sorted(self.final),
            "clocks": list(self.clocks),
            "edges": [
                {"from": e.src,
                 "symbol": None if e.symbol is None else sorted(e.symbol),
                 "guard": [[c.clock, c.op, format_number(c.const)] for c in e.guard],
                 "reset": sorted(e.reset),
                 "to": e.dst}
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "Dta":
        edges = tuple(
            Edge(e["from"],
                 None if e.get("symbol") is None else frozenset(e["symbol"]),
                 tuple(Constraint(x, op, c) for x, op, c in e.get("guard", [])),
                 frozenset(e.get("reset", [])),
                 e["to"])
            for e in obj["edges"]
        )
        return cls(tuple(obj["locations"]), obj["initial"], frozenset(obj.get("final", [])),
                   tuple(obj.get("clocks", [])), edges)

    @classmethod
    def load(cls, path) -> "Dta":
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")


def _fire(e: Edge, valuation: dict) -> dict:
    return {x: (0 if x in e.reset else v) for x, v in valuation.items()}


def dta_accepts(model: SmmModel, path: TimedPath, aut: Dta) -> Verdict:
    """Run ``aut`` on the label sequence and delays of ``path``.

    Acceptance happens on the first visit to a final location. Where the
    prefix has no delay for a position (its last one), only unguarded edges
    can fire; guarded ones leave a truncated path undecided and cannot fire
    on a terminated one.
    """
    q = aut.initial
    val: dict = {x: 0 for x in aut.clocks}
    if q in aut.final:
        return Verdict.TRUE
    last = len(path.states) - 1
    for i, s in enumerate(path.states):
        label = model.label(s)
        cands = [e for e in aut.outgoing(q) if e.reads(label)]
        if i < last:
            delayed = {x: v + path.delays[i] for x, v in val.items()}
            enabled = [e for e in cands if e.enabled(delayed)]
        else:
            delayed = None
            enabled = [e for e in cands if not e.guard]
            if not enabled and any(satisfiable(e.guard) for e in cands) and not path.terminated:
                return Verdict.UNKNOWN
        if len(enabled) > 1:
            raise DeterminismError(f"{len(enabled)} edges enabled at location {q!r}, position {i}")
        if not enabled:
            return Verdict.FALSE
        e = enabled[0]
        if delayed is None:
            # clocks not reset now hold an unknown value; only the location matters below
            val = {x: None for x in aut.clocks}
        else:
            val = _fire(e, delayed)
        q = e.dst
        if q in aut.final:
            return Verdict.TRUE
    return Verdict.FALSE if path.terminated else Verdict.UNKNOWN
