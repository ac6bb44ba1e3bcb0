"""Trace cylinders over label classes and their MTL and 1-RDTA encodings."""
from __future__ import annotations

from dataclasses import dataclass

from .dta import Constraint, Dta, Edge
from .model import Cylinder, Interval, SmmModel
from .mtl import TRUE, And, Atom, Formula, Not, next_

CLOCK = "x"


@dataclass(frozen=True)
class TraceCylinder:
    """Paths whose label word starts ``labels[0], ..., labels[n]`` with the
    ``i``-th delay in ``intervals[i]``."""

    labels: tuple[frozenset, ...]
    intervals: tuple[Interval, ...]
    atomic_props: frozenset

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(frozenset(x) for x in self.labels))
        object.__setattr__(self, "intervals", tuple(self.intervals))
        object.__setattr__(self, "atomic_props", frozenset(self.atomic_props))
        if len(self.labels) != len(self.intervals) + 1:
            raise ValueError("a cylinder alternates n+1 label sets with n intervals")
        for lab in self.labels:
            if not lab <= self.atomic_props:
                raise ValueError(f"label {sorted(lab)} uses unknown propositions")

    def __len__(self):
        return len(self.intervals)

    def to_cylinder(self, model: SmmModel) -> Cylinder:
        """The same cylinder over state sets of ``model``."""
        return Cylinder(tuple(model.states_with_label(lab) for lab in self.labels),
                        self.intervals)

    def _require_closed(self):
        for iv in self.intervals:
            if not iv.is_closed_bounded:
                raise ValueError(f"interval {iv} is not closed and bounded")


def _literal(a: str, label: frozenset) -> Formula:
    return Atom(a) if a in label else Not(Atom(a))


def _ap(a: str | None, labels, intervals) -> Formula:
    head = TRUE if a is None else _literal(a, labels[0])
    if not intervals:
        return head
    iv = intervals[0]
    return And(head, next_(iv.lo, iv.hi, _ap(a, labels[1:], intervals[1:])))


def encode_cylinder_mtl(cyl: TraceCylinder) -> Formula:
    """Conjunction over every proposition ``a`` of the per-proposition chain
    ``lit_a(l_0) & X_I0 (lit_a(l_1) & X_I1 (...))``.

    With no propositions at all the chain still carries the timing
    constraints, with ``true`` in place of the literals.
    """
    cyl._require_closed()
    props = sorted(cyl.atomic_props)
    if not props:
        return _ap(None, cyl.labels, cyl.intervals)
    return And(*(_ap(a, cyl.labels, cyl.intervals) for a in props))


def encode_cylinder_dta(cyl: TraceCylinder) -> Dta:
    """Linear single-clock resetting automaton accepting exactly ``cyl``.

    Locations ``q0 .. q{n+1}``: edge ``i < n`` reads ``labels[i]`` under
    ``lo_i <= x <= hi_i``, edge ``n`` reads ``labels[n]`` unguarded, and the
    final location ``q{n+1}`` loops on every symbol. Every edge resets ``x``.
    """
    cyl._require_closed()
    n = len(cyl)
    locs = tuple(f"q{i}" for i in range(n + 2))
    reset = frozenset([CLOCK])
    edges = []
    for i in range(n + 1):
        if i < n:
            iv = cyl.intervals[i]
            guard = (Constraint(CLOCK, ">=", iv.lo), Constraint(CLOCK, "<=", iv.hi))
        else:
            guard = ()
        edges.append(Edge(locs[i], cyl.labels[i], guard, reset, locs[i + 1]))
    edges.append(Edge(locs[-1], None, (), reset, locs[-1]))
    return Dta(locs, locs[0], frozenset([locs[-1]]), (CLOCK,), tuple(edges))
