"""Max-Clique reduction: graph gadgets, the distance-based linear system and
clique-size recovery.

Gadgets are model fragments between a source and a sink link point. Link
points exist only while gadgets are being glued; emitted models contain
ordinary states only.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .model import Dirac, ResidenceDist, SmmModel
from .oracle import exact_delta

ALPHA, OMEGA, BETA = "alpha", "omega", "beta"
SINK = "sink"  # entry key for mass that goes straight from source to sink


def vertex_prop(v: int) -> str:
    return f"v{v}"


# ---------------------------------------------------------------------------
# graphs

@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset = frozenset()

    def __post_init__(self):
        norm = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u}, {v}) leaves the vertex range 1..{self.n}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    @property
    def gamma(self) -> int:
        return sum(2 ** self.degree(v) for v in self.vertices)

    def is_clique(self, vs) -> bool:
        return all(self.adjacent(u, v) for u, v in itertools.combinations(vs, 2))

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    @classmethod
    def from_json(cls, obj) -> "UndirectedGraph":
        return cls(int(obj["n"]), frozenset(tuple(e) for e in obj.get("edges", [])))

    @classmethod
    def load(cls, path) -> "UndirectedGraph":
        return cls.from_json(json.loads(Path(path).read_text()))


def max_clique_bruteforce(graph: UndirectedGraph) -> int:
    """Largest clique size by exhaustive search (small graphs only)."""
    best = 1 if graph.n else 0
    for k in range(2, graph.n + 1):
        if any(graph.is_clique(c) for c in itertools.combinations(graph.vertices, k)):
            best = k
        else:
            break
    return best


# ---------------------------------------------------------------------------
# gadgets

@dataclass(frozen=True)
class Gadget:
    """Fragment over states ``0..len(labels)-1``.

    ``entry`` maps successor states of the source link (or ``SINK``) to
    probabilities, ``exit`` gives each state's probability of moving to the
    sink link.
    """

    labels: tuple[frozenset, ...] = ()
    trans: dict = field(default_factory=dict)
    entry: dict = field(default_factory=lambda: {SINK: Fraction(1)})
    exit: dict = field(default_factory=dict)

    def problems(self) -> list[str]:
        out = []
        if sum(self.entry.values(), Fraction(0)) != 1:
            out.append("source probabilities do not sum to 1")
        for s in range(len(self.labels)):
            total = sum(self.trans.get(s, {}).values(), Fraction(0)) + self.exit.get(s, Fraction(0))
            if total != 1:
                out.append(f"state {s} has outgoing mass {total}")
        # every state reachable from the source must reach the sink
        reach_sink = {s for s, p in self.exit.items() if p}
        changed = True
        while changed:
            changed = False
            for s, row in self.trans.items():
                if s not in reach_sink and any(p and t in reach_sink for t, p in row.items()):
                    reach_sink.add(s)
                    changed = True
        stuck = set(range(len(self.labels))) - reach_sink
        if stuck:
            out.append(f"states {sorted(stuck)} cannot reach the sink")
        return out

    def to_model(self, kappa: ResidenceDist | None = None, prefix: str = "") -> SmmModel:
        """Close the fragment with an ``alpha`` start state and an absorbing
        ``omega`` end state."""
        return _close([(self, prefix)], kappa)[0]


def _shift(g: Gadget, off: int):
    trans = {s + off: {t + off: p for t, p in row.items()} for s, row in g.trans.items()}
    entry = {(o if o == SINK else o + off): p for o, p in g.entry.items()}
    exit_ = {s + off: p for s, p in g.exit.items()}
    return trans, entry, exit_


def _add(d: dict, k, p: Fraction):
    if p:
        d[k] = d.get(k, Fraction(0)) + p


def identity_gadget() -> Gadget:
    """A bare link: the source passes straight to the sink."""
    return Gadget()


def state_gadget(label: frozenset, p: Fraction = Fraction(1)) -> Gadget:
    """One state entered with probability ``p``, bypassed otherwise."""
    p = Fraction(p)
    entry = {}
    _add(entry, 0, p)
    _add(entry, SINK, 1 - p)
    return Gadget((frozenset(label),), {}, entry, {0: Fraction(1)})


def compose_seq(g1: Gadget, g2: Gadget) -> Gadget:
    """Glue the sink of ``g1`` to the source of ``g2``; crossing
    probabilities multiply."""
    off = len(g1.labels)
    t2, e2, x2 = _shift(g2, off)
    trans = {s: dict(row) for s, row in g1.trans.items()}
    trans.update({s: dict(row) for s, row in t2.items()})
    exit_ = dict(x2)
    for s, a in g1.exit.items():
        for o, b in e2.items():
            if o == SINK:
                _add(exit_, s, a * b)
            else:
                _add(trans.setdefault(s, {}), o, a * b)
    entry = {}
    for o, a in g1.entry.items():
        if o == SINK:
            for o2, b in e2.items():
                _add(entry, o2, a * b)
        else:
            _add(entry, o, a)
    return Gadget(g1.labels + g2.labels, trans, entry, exit_)


def compose_all(gadgets) -> Gadget:
    out = identity_gadget()
    for g in gadgets:
        out = compose_seq(out, g)
    return out


def choice(gadgets, probs) -> Gadget:
    """Source enters ``gadgets[k]`` with probability ``probs[k]``; all sinks merge."""
    labels, trans, entry, exit_ = (), {}, {}, {}
    for g, p in zip(gadgets, probs):
        t, e, x = _shift(g, len(labels))
        labels += g.labels
        trans.update(t)
        exit_.update(x)
        for o, q in e.items():
            _add(entry, o, Fraction(p) * q)
    return Gadget(labels, trans, entry, exit_)


def rescale(g: Gadget, eps) -> Gadget:
    """Enter ``g`` with probability ``eps``; otherwise pass one ``beta`` state."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    if any(BETA in lab for lab in g.labels):
        raise ValueError("the gadget already uses the beta label")
    return choice([g, state_gadget(frozenset([BETA]))], [eps, 1 - eps])


def build_H(graph: UndirectedGraph, v: int, u: int) -> Gadget:
    if u == v:
        return state_gadget(frozenset([vertex_prop(v)]))
    if graph.adjacent(u, v):
        return state_gadget(frozenset([vertex_prop(u)]), Fraction(1, 2))
    return identity_gadget()


def build_L(graph: UndirectedGraph, v: int) -> Gadget:
    """``H_v(1) ... H_v(n)``: ``2^deg(v)`` equiprobable increasing paths through ``v``."""
    if v not in graph.vertices:
        raise ValueError(f"vertex {v} is not in 1..{graph.n}")
    return compose_all(build_H(graph, v, u) for u in graph.vertices)


def mg_gadget(graph: UndirectedGraph) -> Gadget:
    gamma = graph.gamma
    return choice([build_L(graph, v) for v in graph.vertices],
                  [Fraction(2 ** graph.degree(v), gamma) for v in graph.vertices])


def mv_gadget(n: int) -> Gadget:
    return compose_all(state_gadget(frozenset([vertex_prop(u)]), Fraction(1, 2))
                       for u in range(1, n + 1))


def _close(parts, kappa):
    """Union of closed gadgets as one model; returns ``(model, start_states)``."""
    kappa = kappa or Dirac(0)
    states, absorbing, trans, res, labels, starts = [], [], {}, {}, {}, []
    for g, prefix in parts:
        name = [f"{prefix}{k}" for k in range(len(g.labels))]
        start, end = f"{prefix}{ALPHA}", f"{prefix}{OMEGA}"
        states += [start, *name, end]
        absorbing.append(end)
        labels[start], labels[end] = {ALPHA}, {OMEGA}
        for k, lab in enumerate(g.labels):
            labels[name[k]] = lab
        for s in [start, *name]:
            res[s] = kappa

        def target(o):
            return end if o == SINK else name[o]
        trans[start] = {}
        for o, p in g.entry.items():
            _add(trans[start], target(o), p)
        for k in range(len(g.labels)):
            row = {}
            for t, p in g.trans.get(k, {}).items():
                _add(row, name[t], p)
            _add(row, end, g.exit.get(k, Fraction(0)))
            trans[name[k]] = row
        starts.append(start)
    return SmmModel.build(states, absorbing, trans, res, labels), starts


def _props(graph_n: int) -> frozenset:
    return frozenset([ALPHA, OMEGA, BETA, *(vertex_prop(v) for v in range(1, graph_n + 1))])


def build_MG(graph: UndirectedGraph, kappa: ResidenceDist | None = None) -> SmmModel:
    m, _ = _close([(mg_gadget(graph), "")], kappa)
    return _with_props(m, graph.n)


def build_MV(n: int, kappa: ResidenceDist | None = None) -> SmmModel:
    m, _ = _close([(mv_gadget(n), "")], kappa)
    return _with_props(m, n)


def _with_props(m: SmmModel, n: int) -> SmmModel:
    return SmmModel(m.states, m.absorbing, m.transitions, m.residence, m.labels, _props(n))


def mi_epsilon(graph: UndirectedGraph, i: int) -> tuple[int, Fraction]:
    """``(case, eps)``: case 1 rescales the vertex model, case 2 the graph model."""
    scale = i * 2 ** graph.n
    if scale <= graph.gamma:
        return 1, Fraction(scale, graph.gamma)
    return 2, Fraction(graph.gamma, scale)


def build_Mi(graph: UndirectedGraph, i: int, kappa: ResidenceDist | None = None):
    """Disjoint union of the (possibly rescaled) graph and vertex models.

    Returns ``(model, s, s2)`` with ``s`` the graph side's start state.
    """
    if not 1 <= i <= graph.n:
        raise ValueError(f"i must lie in 1..{graph.n}")
    case, eps = mi_epsilon(graph, i)
    mg, mv = mg_gadget(graph), mv_gadget(graph.n)
    if case == 1:
        mv = rescale(mv, eps)
    else:
        mg = rescale(mg, eps)
    m, (s, s2) = _close([(mg, "G."), (mv, "V.")], kappa)
    return _with_props(m, graph.n), s, s2


# ---------------------------------------------------------------------------
# recovering the clique size

def solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination with exact rationals; raises on a singular matrix."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular system")
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] / m[r][r] for r in range(n)]


def toeplitz_rhs(graph: UndirectedGraph, i: int, delta: Fraction) -> Fraction:
    """``sum_j x_j |j - i|`` (over ``j = 0..n``) recovered from the distance of ``M_i``."""
    case, _ = mi_epsilon(graph, i)
    p2 = 2 ** graph.n
    if case == 1:
        return 2 * graph.gamma * delta + i * p2 - graph.gamma
    return i * 2 * p2 * delta + graph.gamma - i * p2


def recover_max_clique(graph: UndirectedGraph, delta_values) -> tuple[list[int], int]:
    """Solve for ``x_j``, the number of increasing vertex words of probability
    ``j / gamma`` in the graph model, and return ``(x, max{j >= 1 : x_j != 0})``.

    ``delta_values[i-1]`` is the exact distance of the start pair of ``M_i``.
    Words of probability 0 (``j = 0``) are unknowns too, which together with
    ``sum_j x_j = 2^n`` gives a square, invertible system.
    """
    n = graph.n
    if len(delta_values) != n:
        raise ValueError(f"need {n} distance values, got {len(delta_values)}")
    a = [[Fraction(abs(j - i)) for j in range(n + 1)] for i in range(1, n + 1)]
    b = [toeplitz_rhs(graph, i, Fraction(d)) for i, d in enumerate(delta_values, start=1)]
    a.append([Fraction(1)] * (n + 1))
    b.append(Fraction(2 ** n))
    x = solve_exact(a, b)
    if any(v.denominator != 1 or v < 0 for v in x):
        raise ValueError("distance values are inconsistent with any graph: "
                         f"non-integral or negative counts {[str(v) for v in x]}")
    counts = [int(v) for v in x]
    size = max((j for j in range(1, n + 1) if counts[j]), default=0)
    return counts, size


def clique_deltas(graph: UndirectedGraph, kappa: ResidenceDist | None = None,
                  threads: int = 1) -> list[Fraction]:
    """Exact distances of the start pairs of ``M_1 .. M_n``."""
    def one(i):
        m, s, s2 = build_Mi(graph, i, kappa)
        lo, hi = exact_delta(m, s, s2, len(m.states))
        if lo != hi:
            raise RuntimeError("word enumeration did not terminate")  # acyclic by construction
        return lo

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, graph.vertices))
    return [one(i) for i in graph.vertices]


def max_clique_via_distance(graph: UndirectedGraph, kappa: ResidenceDist | None = None,
                            threads: int = 1) -> tuple[list[int], int, list[Fraction]]:
    """Full pipeline: build every ``M_i``, compute its distance, solve."""
    deltas = clique_deltas(graph, kappa, threads)
    x, size = recover_max_clique(graph, deltas)
    return x, size, deltas


def inapprox_bound(n: int, alpha):
    """Absolute error ``(n-1)/(n 2^n) (alpha-1)`` under which a distance
    approximation would give an ``alpha``-approximate clique size."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not alpha > 1:
        raise ValueError("alpha must exceed 1")
    return Fraction(n - 1, n * 2 ** n) * (alpha - 1)
