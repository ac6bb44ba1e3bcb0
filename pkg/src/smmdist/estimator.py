"""Monte-Carlo satisfaction estimates with Hoeffding confidence bounds."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dta import Dta, dta_accepts
from .model import SmmModel, format_number, sample_paths
from .mtl import Formula, Verdict, compile_mtl, temporal_depth

DEFAULT_SAMPLES = 100_000
DEFAULT_CONFIDENCE = 0.99
DEFAULT_HORIZON = 1000
BATCH = 2000


@dataclass(frozen=True)
class Estimate:
    """Interval estimate of a satisfaction probability.

    ``lower`` counts only paths decided True, ``upper`` also counts the
    undecided ones; both are widened by the Hoeffding radius.
    """

    point: float
    lower: float
    upper: float
    samples: int
    unknown_fraction: float
    confidence: float
    true_count: int = 0
    false_count: int = 0

    def to_json(self) -> dict:
        return {k: (format_number(v) if isinstance(v, float) else v)
                for k, v in self.__dict__.items()}


def hoeffding_radius(n: int, confidence: float) -> float:
    """Radius ``eps`` so that both one-sided deviations exceed ``eps`` with
    total probability at most ``1 - confidence``."""
    if not 0 < confidence < 1:
        raise ValueError("confidence must lie in (0, 1)")
    return math.sqrt(math.log(2 / (1 - confidence)) / (2 * n))


def _evaluator(model: SmmModel, spec):
    if isinstance(spec, Formula):
        return compile_mtl(model, spec)
    if isinstance(spec, Dta):
        return lambda path: dta_accepts(model, path, spec)
    raise TypeError(f"unsupported specification {type(spec).__name__}")


def _effective_horizon(spec, horizon: int) -> int:
    if isinstance(spec, Formula):
        depth = temporal_depth(spec)
        if depth is not None:
            return min(horizon, depth)
    return horizon


def _child(root: np.random.SeedSequence, i: int) -> np.random.SeedSequence:
    # what root.spawn would hand out, without advancing root's spawn counter
    return np.random.SeedSequence(root.entropy, spawn_key=root.spawn_key + (i,),
                                  pool_size=root.pool_size)


def _root(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def _batch_seeds(seed, n: int) -> list[tuple[np.random.SeedSequence, int]]:
    root = _root(seed)
    sizes = [BATCH] * (n // BATCH) + ([n % BATCH] if n % BATCH else [])
    return [(_child(root, i), size) for i, size in enumerate(sizes)]


def _count(model, start, spec, n, horizon, seed, threads):
    ev = _evaluator(model, spec)
    horizon = _effective_horizon(spec, horizon)

    def run(job):
        ss, size = job
        tally = [0, 0, 0]
        for path in sample_paths(model, start, horizon, size, ss):
            v = ev(path)
            tally[0 if v is Verdict.TRUE else 1 if v is Verdict.FALSE else 2] += 1
        return tally

    jobs = _batch_seeds(seed, n)
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            tallies = list(pool.map(run, jobs))
    else:
        tallies = [run(j) for j in jobs]
    return tuple(int(sum(t[k] for t in tallies)) for k in range(3))


def estimate_sat(model: SmmModel, start: str, spec, n: int = DEFAULT_SAMPLES,
                 horizon: int = DEFAULT_HORIZON, seed=None,
                 confidence: float = DEFAULT_CONFIDENCE, threads: int = 1) -> Estimate:
    """Estimate the probability that a path from ``start`` satisfies ``spec``.

    ``spec`` is an MTL formula or a DTA. Paths are sampled in fixed-size
    batches whose seeds are spawned from ``seed``, so the result does not
    depend on ``threads``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    model.index(start)
    eps = hoeffding_radius(n, confidence)
    t, f, u = _count(model, start, spec, n, horizon, seed, threads)
    point = t / (t + f) if t + f else 0.5
    lower = max(0.0, t / n - eps)
    upper = min(1.0, (t + u) / n + eps)
    return Estimate(point, lower, upper, n, u / n, confidence, t, f)


def delta_lower_bound(model: SmmModel, s: str, s2: str, specs: Sequence, n: int = DEFAULT_SAMPLES,
                      horizon: int = DEFAULT_HORIZON, seed=None,
                      confidence: float = DEFAULT_CONFIDENCE, threads: int = 1) -> float:
    """Lower bound on the trace distance of ``s`` and ``s2`` at ``confidence``.

    For every spec the gap between one state's lower bound and the other's
    upper bound is a lower bound on the distance. The per-estimate
    confidence is Bonferroni-adjusted over ``2 * len(specs)`` estimates so the
    maximum is sound as a whole. Both states of a spec share a seed.
    """
    return delta_lower_bound_details(model, s, s2, specs, n, horizon, seed, confidence,
                                     threads)[0]


def delta_lower_bound_details(model, s, s2, specs, n=DEFAULT_SAMPLES, horizon=DEFAULT_HORIZON,
                              seed=None, confidence=DEFAULT_CONFIDENCE, threads=1):
    """As :func:`delta_lower_bound`, also returning each spec's pair of estimates."""
    model.index(s)
    model.index(s2)
    if not specs:
        return 0.0, []
    each = 1 - (1 - confidence) / (2 * len(specs))
    root = _root(seed)
    seeds = [_child(root, i) for i in range(len(specs))]
    best, rows = 0.0, []
    for spec, ss in zip(specs, seeds):
        a = estimate_sat(model, s, spec, n, horizon, ss, each, threads)
        b = estimate_sat(model, s2, spec, n, horizon, ss, each, threads)
        rows.append((a, b))
        best = max(best, a.lower - b.upper, b.lower - a.upper)
    return best, rows
