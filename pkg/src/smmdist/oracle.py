"""Exact trace distance for models whose live states share one residence law.

On that class the distance is half the L1 gap between the distributions of
absorbed label words, which is enumerated here in exact rationals.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .model import SmmModel, format_number

Word = tuple  # of frozensets of atomic propositions


class SharedResidenceError(ValueError):
    pass


@dataclass
class WordDistribution:
    """Probabilities of absorbed label words plus the mass still unabsorbed."""

    probs: dict = field(default_factory=dict)
    residual: Fraction = Fraction(0)

    def total(self) -> Fraction:
        return sum(self.probs.values(), Fraction(0)) + self.residual

    def to_json(self) -> dict:
        return {
            "words": [{"word": [sorted(c) for c in w], "prob": format_number(p)}
                      for w, p in sorted(self.probs.items(), key=lambda kv: _word_key(kv[0]))],
            "residual": format_number(self.residual),
        }


def _word_key(w: Word):
    return [sorted(c) for c in w]


def shared_residence(model: SmmModel):
    """The residence law shared by every live state; raises otherwise."""
    laws = {model.residence[s] for s in model.states if s not in model.absorbing}
    if len(laws) > 1:
        raise SharedResidenceError("live states do not share one residence distribution")
    return next(iter(laws), None)


def word_distribution(model: SmmModel, start: str, depth_cap: int = 64) -> WordDistribution:
    """Distribution of label words of paths from ``start`` absorbed within
    ``depth_cap`` transitions.

    Paths with equal words and equal current state are merged while
    unfolding, so the frontier is keyed by ``(word, state)``.
    """
    shared_residence(model)
    model.index(start)
    if depth_cap < 0:
        raise ValueError("depth_cap must be non-negative")
    label = model.label
    done: dict = defaultdict(Fraction)
    frontier: dict = {((label(start),), start): Fraction(1)}
    for depth in range(depth_cap + 1):
        live: dict = defaultdict(Fraction)
        for (w, s), p in frontier.items():
            if s in model.absorbing:
                done[w] += p
            else:
                live[w, s] += p
        if depth == depth_cap or not live:
            frontier = live
            break
        frontier = defaultdict(Fraction)
        for (w, s), p in live.items():
            for t, q in model.transitions[s].items():
                if q:
                    frontier[w + (label(t),), t] += p * q
    return WordDistribution(dict(done), sum(frontier.values(), Fraction(0)))


def l1_half(a: WordDistribution, b: WordDistribution) -> Fraction:
    words = set(a.probs) | set(b.probs)
    return sum((abs(a.probs.get(w, Fraction(0)) - b.probs.get(w, Fraction(0))) for w in words),
               Fraction(0)) / 2


def exact_delta(model: SmmModel, s: str, s2: str, depth_cap: int = 64) -> tuple[Fraction, Fraction]:
    """``(lower, upper)`` enclosing the trace distance; equal when both
    residuals vanish."""
    a = word_distribution(model, s, depth_cap)
    b = word_distribution(model, s2, depth_cap)
    v = l1_half(a, b)
    return v, v + max(a.residual, b.residual)
