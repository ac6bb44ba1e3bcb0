"""Seeded random models and graphs for tests, benchmarks and the CLI."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .encode import TraceCylinder
from .model import Dirac, Exponential, Interval, ResidenceDist, SmmModel, Uniform

# small pool so that equal residence laws (and hence bisimilar pairs) are common
RESIDENCE_POOL: tuple[ResidenceDist, ...] = (
    Dirac(0), Dirac(1),
    Exponential(1), Exponential(2), Exponential(Fraction(1, 2)),
    Uniform(0, 1), Uniform(0, 2), Uniform(Fraction(1, 2), 3),
)


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_distribution(rng, targets: list[str], denom: int = 8) -> dict[str, Fraction]:
    """Random rational distribution over a nonempty subset of ``targets``."""
    k = int(rng.integers(1, min(len(targets), 3) + 1))
    support = [targets[i] for i in rng.choice(len(targets), size=k, replace=False)]
    # compositions of denom into k positive parts
    cuts = sorted(rng.choice(np.arange(1, denom), size=k - 1, replace=False)) if k > 1 else []
    parts = np.diff([0, *cuts, denom])
    return {t: Fraction(int(p), denom) for t, p in zip(support, parts)}


def random_model(seed=None, max_states: int = 10, props=("p", "q"),
                 pool=RESIDENCE_POOL, copy_fraction: float = 0.3) -> SmmModel:
    """Random model with mixed residence laws and some lumped copies.

    A copy duplicates a state's label, residence law and outgoing row, and
    shares the incoming mass of the original, so it is bisimilar to it.
    """
    rng = _rng(seed)
    n = int(rng.integers(2, max_states + 1))
    n_copies = min(int(round(copy_fraction * n * rng.random())), n - 1)
    base = n - n_copies
    states = [f"s{i}" for i in range(base)]
    n_abs = int(rng.integers(1, max(2, base // 3) + 1)) if base > 1 else 0
    absorbing = set(states[base - n_abs:])
    labels, residence, trans = {}, {}, {}
    for s in states:
        labels[s] = frozenset(p for p in props if rng.random() < 0.5)
        if s not in absorbing:
            residence[s] = pool[int(rng.integers(len(pool)))]
            trans[s] = random_distribution(rng, states)
    if base == 1:
        # a lone live state must loop
        trans[states[0]] = {states[0]: Fraction(1)}
    for c in range(n_copies):
        orig = states[int(rng.integers(base))]
        new = f"c{c}"
        labels[new] = labels[orig]
        if orig in absorbing:
            absorbing.add(new)
        else:
            residence[new] = residence[orig]
            trans[new] = dict(trans[orig])
        # split every transition into orig between orig and its copy
        for row in list(trans.values()):
            p = row.get(orig)
            if p:
                row[orig] = p / 2
                row[new] = row.get(new, Fraction(0)) + p / 2
        states.append(new)
    return SmmModel.build(states, absorbing, trans, residence, labels, props)


def random_dag_model(seed=None, max_states: int = 8, props=("p", "q"),
                     residence: ResidenceDist | None = None) -> SmmModel:
    """Acyclic model whose live states all share one residence law.

    Every path is absorbed within ``|S|`` steps, so word distributions are
    exact at that depth.
    """
    rng = _rng(seed)
    n = int(rng.integers(2, max_states + 1))
    n_abs = int(rng.integers(1, max(2, n // 3) + 1))
    states = [f"s{i}" for i in range(n)]
    shared = residence if residence is not None else RESIDENCE_POOL[int(rng.integers(len(RESIDENCE_POOL)))]
    labels, res, trans = {}, {}, {}
    for i, s in enumerate(states):
        labels[s] = frozenset(p for p in props if rng.random() < 0.5)
        if i < n - n_abs:
            res[s] = shared
            trans[s] = random_distribution(rng, states[i + 1:])
    return SmmModel.build(states, states[n - n_abs:], trans, res, labels, props)


def random_graph(seed=None, n: int | None = None, max_n: int = 8,
                 p: float | None = None) -> tuple[int, set]:
    """Erdos-Renyi graph on vertices ``1..n``; returns ``(n, edges)``."""
    rng = _rng(seed)
    n = int(rng.integers(1, max_n + 1)) if n is None else n
    p = float(rng.uniform(0.2, 0.9)) if p is None else p
    edges = {(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if rng.random() < p}
    return n, edges


def random_trace_cylinder(model: SmmModel, start: str, seed=None, max_len: int = 4) -> TraceCylinder:
    """Closed-interval trace cylinder along a random walk from ``start``.

    Walking the model keeps the cylinder's probability from being trivially
    zero; interval endpoints are small rationals.
    """
    rng = _rng(seed)
    length = int(rng.integers(0, max_len + 1))
    labels, intervals = [model.label(start)], []
    s = start
    for _ in range(length):
        if s in model.absorbing:
            break
        row = model.transitions[s]
        targets = sorted(row)
        s = targets[int(rng.choice(len(targets), p=[float(row[t]) for t in targets]))]
        lo = Fraction(int(rng.integers(0, 5)), 4)
        hi = lo + Fraction(int(rng.integers(0, 9)), 4)
        intervals.append(Interval.closed(lo, hi))
        labels.append(model.label(s))
    return TraceCylinder(tuple(labels), tuple(intervals), model.atomic_props)
