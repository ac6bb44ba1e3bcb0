"""Bisimilarity on SMMs by partition refinement with exact block masses."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .model import SmmModel
from .residence import tv


@dataclass(frozen=True)
class StatePartition:
    """Blocks of a partition of the state space, in canonical order.

    Blocks are ordered by their lowest-indexed state, and states inside a
    block follow model order, so equal partitions compare equal.
    """

    blocks: tuple[tuple[str, ...], ...]
    block_of: dict

    @classmethod
    def from_blocks(cls, model: SmmModel, blocks: Iterable[Iterable[str]]) -> "StatePartition":
        order = {s: i for i, s in enumerate(model.states)}
        canon = sorted((tuple(sorted(b, key=order.__getitem__)) for b in blocks if b),
                       key=lambda b: order[b[0]])
        block_of = {s: i for i, b in enumerate(canon) for s in b}
        if len(block_of) != len(model.states) or set(block_of) != set(model.states):
            raise ValueError("blocks do not partition the state space")
        return cls(tuple(canon), block_of)

    def related(self, s: str, t: str) -> bool:
        return self.block_of[s] == self.block_of[t]

    def __len__(self):
        return len(self.blocks)


def _same_residence(model: SmmModel, s: str, t: str) -> bool:
    # tv returns exact 0 only for identical parameters, which for the supported
    # variants is exactly equality of measures
    r = tv(model.residence[s], model.residence[t])
    return r.exact and r.value == 0


def initial_partition(model: SmmModel) -> StatePartition:
    """Classes of: equal labels, equal absorbing status, equal residence law."""
    blocks: list[list[str]] = []
    for s in model.states:
        for b in blocks:
            t = b[0]
            if model.equiv(s, t) and (s in model.absorbing or _same_residence(model, s, t)):
                b.append(s)
                break
        else:
            blocks.append([s])
    return StatePartition.from_blocks(model, blocks)


def block_masses(model: SmmModel, s: str, part: StatePartition) -> tuple[Fraction, ...]:
    """``tau(s)(C)`` for every block ``C``; all zero for absorbing ``s``."""
    mass = [Fraction(0)] * len(part.blocks)
    for t, p in model.transitions.get(s, {}).items():
        mass[part.block_of[t]] += p
    return tuple(mass)


def refine_once(model: SmmModel, part: StatePartition) -> StatePartition:
    """Split every block by the exact masses its states send to each block."""
    pieces = []
    for block in part.blocks:
        groups: dict[tuple, list[str]] = {}
        for s in block:
            groups.setdefault(block_masses(model, s, part), []).append(s)
        pieces.extend(groups.values())
    return StatePartition.from_blocks(model, pieces)


def bisimilarity(model: SmmModel) -> StatePartition:
    """Coarsest bisimulation: refine the initial partition until stable."""
    part = initial_partition(model)
    while True:
        nxt = refine_once(model, part)
        if len(nxt) == len(part):
            return nxt
        part = nxt


def is_bisimulation(model: SmmModel, part: StatePartition) -> bool:
    """Check the bisimulation conditions for the equivalence ``part`` directly."""
    for block in part.blocks:
        s = block[0]
        for t in block[1:]:
            if not model.equiv(s, t):
                return False
            if s in model.absorbing:
                continue
            if not _same_residence(model, s, t):
                return False
            if block_masses(model, s, part) != block_masses(model, t, part):
                return False
    return True
