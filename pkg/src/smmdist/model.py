"""Stochastic Markov models: data types, validation, cylinder measures, sampling.

A model is the tuple ``(S, A, tau, rho, ell)``: states, absorbing states,
per-state discrete successor distributions, per-state residence-time
distributions and label sets. Transition probabilities are exact
:class:`~fractions.Fraction` values.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Union

import numpy as np

Number = Union[Fraction, float]


def as_fraction(value) -> Fraction:
    """Parse ``"p/q"`` strings, ints and Fractions into a Fraction.

    Floats are accepted but converted through their shortest decimal
    representation, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational")


def format_number(value) -> str:
    """Render exact rationals as ``p/q`` and reals with 17 significant digits."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


# ---------------------------------------------------------------------------
# intervals

@dataclass(frozen=True)
class Interval:
    """A real interval with rational endpoints; ``hi=None`` means +infinity."""

    lo: Fraction = Fraction(0)
    hi: Fraction | None = None
    lo_closed: bool = True
    hi_closed: bool = True
    # float copies of the endpoints when they convert exactly, for fast tests
    _fbounds: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", as_fraction(self.hi))
            if self.hi < self.lo:
                raise ValueError(f"empty interval: lo={self.lo} > hi={self.hi}")
        flo = float(self.lo)
        fhi = math.inf if self.hi is None else float(self.hi)
        if Fraction(flo) == self.lo and (self.hi is None or Fraction(fhi) == self.hi):
            object.__setattr__(self, "_fbounds", (flo, fhi))

    @classmethod
    def closed(cls, lo, hi) -> "Interval":
        return cls(as_fraction(lo), as_fraction(hi), True, True)

    @property
    def is_closed_bounded(self) -> bool:
        return self.hi is not None and self.lo_closed and self.hi_closed

    @property
    def is_full(self) -> bool:
        return self.hi is None and self.lo <= 0

    def contains(self, x) -> bool:
        if self._fbounds is not None and type(x) is float:
            lo, hi = self._fbounds
            return ((lo < x or (x == lo and self.lo_closed))
                    and (x < hi or (x == hi and self.hi_closed)))
        if x < self.lo or (x == self.lo and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        return x < self.hi or (x == self.hi and self.hi_closed)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed and self.hi is not None else ")"
        hi = "inf" if self.hi is None else format_number(self.hi)
        return f"{left}{format_number(self.lo)},{hi}{right}"


NONNEG = Interval()


# ---------------------------------------------------------------------------
# residence-time distributions

class ResidenceDist:
    """Base class of the residence-time distribution variants."""

    kind: str = ""

    def mass(self, interval: Interval) -> Number:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def problems(self) -> list[str]:
        return []

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(obj: Mapping) -> "ResidenceDist":
        if not isinstance(obj, Mapping) or len(obj) != 1:
            raise ValueError(f"residence entry must have exactly one key, got {obj!r}")
        (kind, value), = obj.items()
        if kind == "dirac":
            return Dirac(as_fraction(value))
        if kind == "exp":
            return Exponential(as_fraction(value))
        if kind == "uniform":
            lo, hi = value
            return Uniform(as_fraction(lo), as_fraction(hi))
        raise ValueError(f"unknown residence kind {kind!r}")


@dataclass(frozen=True)
class Dirac(ResidenceDist):
    point: Fraction = Fraction(0)
    kind = "dirac"

    def __post_init__(self):
        object.__setattr__(self, "point", as_fraction(self.point))

    def mass(self, interval):
        return Fraction(1) if interval.contains(self.point) else Fraction(0)

    def sample(self, rng, size):
        return np.full(size, float(self.point))

    def problems(self):
        return [] if self.point >= 0 else [f"Dirac point {self.point} is negative"]

    def to_json(self):
        return {"dirac": format_number(self.point)}

    def __str__(self):
        return f"Dirac({format_number(self.point)})"


@dataclass(frozen=True)
class Exponential(ResidenceDist):
    rate: Fraction = Fraction(1)
    kind = "exp"

    def __post_init__(self):
        object.__setattr__(self, "rate", as_fraction(self.rate))

    def mass(self, interval):
        lam = float(self.rate)
        lo = max(float(interval.lo), 0.0)
        if interval.hi is None:
            return math.exp(-lam * lo)
        hi = float(interval.hi)
        if hi <= lo:
            return 0.0
        # e^{-l lo} - e^{-l hi}, without cancellation for short intervals
        return -math.exp(-lam * lo) * math.expm1(-lam * (hi - lo))

    def sample(self, rng, size):
        u = rng.random(size)
        return -np.log1p(-u) / float(self.rate)

    def problems(self):
        return [] if self.rate > 0 else [f"exponential rate {self.rate} is not positive"]

    def to_json(self):
        return {"exp": format_number(self.rate)}

    def __str__(self):
        return f"Exp({format_number(self.rate)})"


@dataclass(frozen=True)
class Uniform(ResidenceDist):
    lo: Fraction = Fraction(0)
    hi: Fraction = Fraction(1)
    kind = "uniform"

    def __post_init__(self):
        object.__setattr__(self, "lo", as_fraction(self.lo))
        object.__setattr__(self, "hi", as_fraction(self.hi))

    def mass(self, interval):
        a = max(self.lo, interval.lo)
        b = self.hi if interval.hi is None else min(self.hi, interval.hi)
        if b <= a:
            return Fraction(0)
        return (b - a) / (self.hi - self.lo)

    def sample(self, rng, size):
        lo, hi = float(self.lo), float(self.hi)
        return lo + rng.random(size) * (hi - lo)

    def problems(self):
        out = []
        if self.lo < 0:
            out.append(f"uniform lower bound {self.lo} is negative")
        if self.hi <= self.lo:
            out.append(f"uniform bounds [{self.lo}, {self.hi}] are not increasing")
        return out

    def to_json(self):
        return {"uniform": [format_number(self.lo), format_number(self.hi)]}

    def __str__(self):
        return f"Uniform({format_number(self.lo)},{format_number(self.hi)})"


# ---------------------------------------------------------------------------
# the model

@dataclass(frozen=True)
class SmmModel:
    """A stochastic Markov model ``(S, A, tau, rho, ell)`` over ``atomic_props``.

    Use :meth:`build` for convenient construction from loose inputs; the
    dataclass fields themselves are expected to be normalized already.
    """

    states: tuple[str, ...]
    absorbing: frozenset[str]
    transitions: Mapping[str, Mapping[str, Fraction]]
    residence: Mapping[str, ResidenceDist]
    labels: Mapping[str, frozenset[str]]
    atomic_props: frozenset[str]
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @classmethod
    def build(cls, states, absorbing=(), transitions=None, residence=None,
              labels=None, atomic_props=None) -> "SmmModel":
        states = tuple(str(s) for s in states)
        labels = {str(s): frozenset(v) for s, v in (labels or {}).items()}
        for s in states:
            labels.setdefault(s, frozenset())
        if atomic_props is None:
            atomic_props = frozenset().union(*labels.values()) if labels else frozenset()
        trans = {
            str(s): {str(t): as_fraction(p) for t, p in row.items()}
            for s, row in (transitions or {}).items()
        }
        res = {str(s): r for s, r in (residence or {}).items()}
        return cls(states, frozenset(str(a) for a in absorbing), trans, res,
                   labels, frozenset(atomic_props))

    # -- accessors --------------------------------------------------------
    def index(self, state: str) -> int:
        try:
            return self._index[state]
        except KeyError:
            raise KeyError(f"unknown state {state!r}") from None

    def __contains__(self, state) -> bool:
        return state in self._index

    def __len__(self) -> int:
        return len(self.states)

    def is_absorbing(self, state: str) -> bool:
        return state in self.absorbing

    def label(self, state: str) -> frozenset[str]:
        return self.labels.get(state, frozenset())

    def equiv(self, s: str, t: str) -> bool:
        """Equal labels and equal absorbing status."""
        return self.label(s) == self.label(t) and self.is_absorbing(s) == self.is_absorbing(t)

    def transition_matrix(self) -> np.ndarray:
        """Dense float matrix of tau; absorbing rows are zero."""
        n = len(self.states)
        out = np.zeros((n, n))
        for s, row in self.transitions.items():
            i = self.index(s)
            for t, p in row.items():
                out[i, self.index(t)] = float(p)
        return out

    def label_classes(self) -> list[frozenset[str]]:
        """Distinct label sets in order of first appearance."""
        seen = []
        for s in self.states:
            lab = self.label(s)
            if lab not in seen:
                seen.append(lab)
        return seen

    def states_with_label(self, labelset) -> frozenset[str]:
        labelset = frozenset(labelset)
        return frozenset(s for s in self.states if self.label(s) == labelset)

    # -- (de)serialization -------------------------------------------------
    def to_json(self) -> dict:
        used = frozenset().union(*self.labels.values()) if self.labels else frozenset()
        extra = {} if self.atomic_props == used else {"atomic_props": sorted(self.atomic_props)}
        return {
            **extra,
            "states": list(self.states),
            "absorbing": [s for s in self.states if s in self.absorbing],
            "labels": {s: sorted(self.label(s)) for s in self.states},
            "transitions": {
                s: {t: format_number(p) for t, p in self.transitions[s].items()}
                for s in self.states if s in self.transitions
            },
            "residence": {
                s: self.residence[s].to_json() for s in self.states if s in self.residence
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "SmmModel":
        residence = {s: ResidenceDist.from_json(r) for s, r in obj.get("residence", {}).items()}
        props = obj.get("atomic_props")
        return cls.build(
            obj["states"],
            obj.get("absorbing", ()),
            obj.get("transitions", {}),
            residence,
            obj.get("labels", {}),
            None if props is None else frozenset(props),
        )

    @classmethod
    def load(cls, path) -> "SmmModel":
        return cls.from_json(json.loads(Path(path).read_text()))

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n")


@dataclass(frozen=True)
class Violation:
    state: str | None
    message: str

    def __str__(self):
        return f"{self.state}: {self.message}" if self.state is not None else self.message


def validate(model: SmmModel) -> list[Violation]:
    """Return every broken model invariant; an empty list means well-formed."""
    out: list[Violation] = []
    if not model.states:
        out.append(Violation(None, "model has no states"))
    if len(set(model.states)) != len(model.states):
        out.append(Violation(None, "duplicate state ids"))
    known = set(model.states)
    for a in sorted(model.absorbing - known):
        out.append(Violation(a, "absorbing state is not a model state"))
    for s in list(model.transitions) + list(model.residence) + list(model.labels):
        if s not in known:
            out.append(Violation(s, "entry refers to an unknown state"))

    for s in model.states:
        row = model.transitions.get(s)
        res = model.residence.get(s)
        if s in model.absorbing:
            if row is not None:
                out.append(Violation(s, "absorbing state has a transition distribution"))
            if res is not None:
                out.append(Violation(s, "absorbing state has a residence distribution"))
        else:
            if row is None:
                out.append(Violation(s, "non-absorbing state has no transition distribution"))
            else:
                for t, p in row.items():
                    if t not in known:
                        out.append(Violation(s, f"transition to unknown state {t!r}"))
                    if not isinstance(p, Fraction):
                        out.append(Violation(s, f"probability to {t!r} is not rational"))
                    elif not 0 <= p <= 1:
                        out.append(Violation(s, f"probability to {t!r} is outside [0,1]"))
                total = sum(row.values(), Fraction(0))
                if total != 1:
                    out.append(Violation(s, f"transition probabilities sum to {format_number(total)}, not 1"))
            if res is None:
                out.append(Violation(s, "non-absorbing state has no residence distribution"))
            elif not isinstance(res, ResidenceDist):
                out.append(Violation(s, "residence entry is not a residence distribution"))
            else:
                out.extend(Violation(s, msg) for msg in res.problems())
        extra = model.label(s) - model.atomic_props
        if extra:
            out.append(Violation(s, f"labels {sorted(extra)} are not atomic propositions"))
    return out


# ---------------------------------------------------------------------------
# paths and cylinders

@dataclass(frozen=True)
class TimedPath:
    """Finite prefix ``s_0, t_0, ..., t_{n-1}, s_n`` of a timed path.

    ``terminated`` is set when ``s_n`` is absorbing, i.e. the path has no
    continuation. Delays of Dirac states are stored as exact Fractions.
    """

    states: tuple[str, ...]
    delays: tuple = ()
    terminated: bool = False

    def __post_init__(self):
        if len(self.delays) != len(self.states) - 1:
            raise ValueError("a path with n delays needs n+1 states")

    def __len__(self):
        return len(self.delays)


@dataclass(frozen=True)
class Cylinder:
    """``C(X_0, R_0, ..., R_{n-1}, X_n)`` over state sets and delay intervals."""

    state_sets: tuple[frozenset, ...]
    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "state_sets", tuple(frozenset(x) for x in self.state_sets))
        object.__setattr__(self, "intervals", tuple(self.intervals))
        if len(self.state_sets) != len(self.intervals) + 1:
            raise ValueError("a cylinder alternates n+1 state sets with n intervals")

    def __len__(self):
        return len(self.intervals)

    def contains(self, path: TimedPath) -> bool | None:
        """Membership of a path prefix; None when the prefix is too short to tell."""
        n = len(self.intervals)
        for i, x in enumerate(self.state_sets):
            if i >= len(path.states):
                return False if path.terminated else None
            if path.states[i] not in x:
                return False
            if i < n:
                if i >= len(path.delays):
                    return False if path.terminated else None
                if not self.intervals[i].contains(path.delays[i]):
                    return False
        return True


def cylinder_prob(model: SmmModel, start: str, cyl: Cylinder) -> Number:
    """Exact measure ``Pr_start(cyl)`` by forward propagation through the prefix.

    The result is a Fraction when every interval mass is rational (Dirac and
    Uniform residence); exponential masses make it a float.
    """
    model.index(start)
    for x in cyl.state_sets:
        for s in x:
            model.index(s)
    if start not in cyl.state_sets[0]:
        return Fraction(0)
    mass: dict[str, Number] = {start: Fraction(1)}
    for i, interval in enumerate(cyl.intervals):
        target = cyl.state_sets[i + 1]
        nxt: dict[str, Number] = defaultdict(Fraction)
        for s, p in mass.items():
            if s in model.absorbing:
                continue
            r = model.residence[s].mass(interval)
            if r == 0:
                continue
            for t, q in model.transitions[s].items():
                if t in target and q:
                    nxt[t] += p * r * q
        mass = nxt
        if not mass:
            return Fraction(0)
    return sum(mass.values(), Fraction(0))


# ---------------------------------------------------------------------------
# sampling

def _delay_value(dist: ResidenceDist, sampled: float):
    if isinstance(dist, Dirac):
        return dist.point
    return float(sampled)


def sample_path(model: SmmModel, start: str, horizon: int, rng_seed: int) -> TimedPath:
    """Sample one timed path from ``start`` for at most ``horizon`` steps."""
    return sample_paths(model, start, horizon, 1, rng_seed)[0]


def sample_paths(model: SmmModel, start: str, horizon: int, n: int,
                 rng_seed) -> list[TimedPath]:
    """Sample ``n`` independent paths, vectorized over the batch.

    Every path stops at its first absorbing state or after ``horizon`` steps.
    Delays use inverse-CDF sampling. Output is a pure function of the seed.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    rng = np.random.default_rng(rng_seed)
    k = len(model.states)
    s0 = model.index(start)
    absorbing = np.array([s in model.absorbing for s in model.states])
    cum = np.cumsum(model.transition_matrix(), axis=1)
    cum[:, -1] = np.where(absorbing, 0.0, 1.0)  # guard against float shortfall
    dists = [model.residence.get(s) for s in model.states]

    cur = np.full(n, s0, dtype=np.int64)
    state_cols = [cur.copy()]
    delay_cols = []
    length = np.zeros(n, dtype=np.int64)
    alive = ~absorbing[cur]
    for _ in range(horizon):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        here = cur[idx]
        delays = np.empty(idx.size)
        for st in np.unique(here):
            sel = here == st
            delays[sel] = dists[st].sample(rng, int(sel.sum()))
        u = rng.random(idx.size)
        nxt = (u[:, None] >= cum[here]).sum(axis=1)
        nxt = np.minimum(nxt, k - 1)
        cur[idx] = nxt
        col_d = np.zeros(n)
        col_d[idx] = delays
        col_s = np.full(n, -1, dtype=np.int64)
        col_s[idx] = nxt
        delay_cols.append(col_d)
        state_cols.append(col_s)
        length[idx] += 1
        alive[idx] = ~absorbing[nxt]
    states_hist = np.stack(state_cols, axis=1)
    delay_hist = np.stack(delay_cols, axis=1) if delay_cols else np.zeros((n, 0))

    names = model.states
    out = []
    for row in range(n):
        m = int(length[row])
        sts = states_hist[row, : m + 1]
        out.append(TimedPath(
            tuple(names[j] for j in sts),
            tuple(_delay_value(dists[sts[j]], delay_hist[row, j]) for j in range(m)),
            bool(absorbing[sts[-1]]),
        ))
    return out

