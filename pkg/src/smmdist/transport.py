"""Discrete transportation problem / Kantorovich pseudometric.

The solver is the transportation simplex (network simplex on the bipartite
supply/demand graph): north-west corner start, node potentials for reduced
costs, Bland's rule for both entering and leaving cells. It runs in exact
rational arithmetic when every input is a Fraction and in floats otherwise.
Returned plans are basic, i.e. vertices of the transportation polytope.
"""
from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

import numpy as np

FLOAT_EPS = 1e-12
MARGINAL_TOL = 1e-9


class TransportError(ValueError):
    pass


@dataclass
class TransportPlan:
    """A coupling of two discrete distributions with its transport cost."""

    entries: dict = field(default_factory=dict)
    cost: float | Fraction = 0

    def mass(self, u, v):
        return self.entries.get((u, v), 0)

    def row_sums(self) -> dict:
        out: dict = {}
        for (u, _), m in self.entries.items():
            out[u] = out.get(u, 0) + m
        return out

    def col_sums(self) -> dict:
        out: dict = {}
        for (_, v), m in self.entries.items():
            out[v] = out.get(v, 0) + m
        return out

    def support_is_forest(self) -> bool:
        """True when the positive-mass cells form an acyclic bipartite graph."""
        parent: dict = {}

        def find(x):
            while parent.setdefault(x, x) != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (u, v), m in self.entries.items():
            if m == 0:
                continue
            a, b = find(("r", u)), find(("c", v))
            if a == b:
                return False
            parent[a] = b
        return True


def _exact(*arrays) -> bool:
    return all(isinstance(x, (Fraction, int)) and not isinstance(x, bool)
               for arr in arrays for x in arr)


def _tree_path(basic_adj, m, src_row, dst_col):
    """Cells on the tree path from row ``src_row`` to column ``dst_col``."""
    # nodes: rows 0..m-1, columns m..m+k-1
    start, goal = src_row, m + dst_col
    prev = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            break
        for nb in basic_adj[node]:
            if nb not in prev:
                prev[nb] = node
                queue.append(nb)
    cells = []
    node = goal
    while prev[node] is not None:
        p = prev[node]
        cells.append((p, node - m) if p < m else (node, p - m))
        node = p
    cells.reverse()
    return cells


def solve_transport(supply: Sequence, demand: Sequence, cost, eps=None):
    """Optimal basic plan for strictly positive ``supply`` and ``demand``.

    Returns ``(x, basis)`` where ``x`` is an ``m x k`` list of lists and
    ``basis`` the set of ``m + k - 1`` basic cells (a spanning tree).
    """
    m, k = len(supply), len(demand)
    exact = eps is None
    zero = Fraction(0) if exact else 0.0
    tol = 0 if exact else eps
    x = [[zero] * k for _ in range(m)]
    basic = [[False] * k for _ in range(m)]

    # north-west corner: exactly m + k - 1 cells, one index advances per step
    ra, rb = list(supply), list(demand)
    i = j = 0
    while True:
        q = ra[i] if ra[i] <= rb[j] else rb[j]
        x[i][j] = q
        basic[i][j] = True
        ra[i] -= q
        rb[j] -= q
        if i == m - 1 and j == k - 1:
            break
        if j == k - 1 or (i < m - 1 and ra[i] == 0):
            i += 1
        else:
            j += 1

    max_iter = 50 * (m + k) ** 2 + 100
    for _ in range(max_iter):
        adj = [[] for _ in range(m + k)]
        for a in range(m):
            for b in range(k):
                if basic[a][b]:
                    adj[a].append(m + b)
                    adj[m + b].append(a)
        # potentials u_i + v_j = c_ij on basic cells
        pot: list = [None] * (m + k)
        pot[0] = zero
        stack = [0]
        while stack:
            node = stack.pop()
            for nb in adj[node]:
                if pot[nb] is None:
                    if node < m:
                        pot[nb] = cost[node][nb - m] - pot[node]
                    else:
                        pot[nb] = cost[nb][node - m] - pot[node]
                    stack.append(nb)
        entering = None
        for a in range(m):
            for b in range(k):
                if not basic[a][b] and cost[a][b] - pot[a] - pot[m + b] < -tol:
                    entering = (a, b)
                    break
            if entering:
                break
        if entering is None:
            return x, {(a, b) for a in range(m) for b in range(k) if basic[a][b]}
        ea, eb = entering
        path = _tree_path(adj, m, ea, eb)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(x[a][b] for a, b in minus)
        leaving = min((a * k + b, (a, b)) for a, b in minus if x[a][b] == theta)[1]
        for a, b in minus:
            x[a][b] -= theta
        for a, b in plus:
            x[a][b] += theta
        x[ea][eb] += theta
        la, lb = leaving
        x[la][lb] = zero
        basic[la][lb] = False
        basic[ea][eb] = True
    raise TransportError("transportation simplex did not terminate")


def _as_rows(cost, n):
    if isinstance(cost, np.ndarray):
        return cost.tolist()
    if hasattr(cost, "values") and isinstance(getattr(cost, "values"), np.ndarray):
        return cost.values.tolist()
    return [list(cost[i]) for i in range(n)]


def kantorovich(mu: Sequence, nu: Sequence, cost, support: Sequence[Hashable] | None = None):
    """``min sum cost(u,v) w(u,v)`` over couplings ``w`` of ``mu`` and ``nu``.

    ``mu`` and ``nu`` are indexed by the same ordered support; ``cost`` is a
    square matrix over it. Plan entries are keyed by ``support`` elements
    (indices by default). Exact when all inputs are rationals.
    """
    n = len(mu)
    if len(nu) != n:
        raise TransportError("mu and nu must share one support")
    rows = _as_rows(cost, n)
    exact = _exact(mu, nu, *rows)
    if exact:
        mu = [Fraction(v) for v in mu]
        nu = [Fraction(v) for v in nu]
        rows = [[Fraction(v) for v in r] for r in rows]
    total_mu, total_nu = sum(mu), sum(nu)
    if exact:
        if total_mu != 1 or total_nu != 1:
            raise TransportError("marginals must each sum to 1")
    elif abs(total_mu - 1) > MARGINAL_TOL or abs(total_nu - 1) > MARGINAL_TOL:
        raise TransportError("marginals must each sum to 1")
    if any(v < 0 for v in mu) or any(v < 0 for v in nu):
        raise TransportError("marginals must be non-negative")
    labels = list(range(n)) if support is None else list(support)

    # zero-mass rows and columns do not take part in the solve
    ri = [i for i in range(n) if mu[i] > 0]
    ci = [j for j in range(n) if nu[j] > 0]
    sub = [[rows[i][j] for j in ci] for i in ri]
    x, basis = solve_transport([mu[i] for i in ri], [nu[j] for j in ci], sub,
                               None if exact else FLOAT_EPS)
    entries = {}
    value = Fraction(0) if exact else 0.0
    for a, b in sorted(basis):
        m_ab = x[a][b]
        if m_ab:
            entries[labels[ri[a]], labels[ci[b]]] = m_ab
            value += sub[a][b] * m_ab
    return value, TransportPlan(entries, value)


def discrete_cost(n: int, exact: bool = True):
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    return [[zero if i == j else one for j in range(n)] for i in range(n)]


def min_discrepancy_coupling(mu: Sequence, nu: Sequence, support=None):
    """Coupling minimizing the mass off the diagonal; its value is TV(mu, nu)."""
    exact = _exact(mu, nu)
    return kantorovich(mu, nu, discrete_cost(len(mu), exact), support)


# ---------------------------------------------------------------------------
# brute-force vertex enumeration (oracle)

def transport_vertices(supply: Sequence[Fraction], demand: Sequence[Fraction]) -> list[dict]:
    """All vertices of the transportation polytope, exactly.

    Every vertex has a row or column whose whole mass sits in one cell (a
    leaf of its support forest); fixing that cell and recursing enumerates
    every vertex and nothing else. Cells are ``(row, col)`` over the given
    (positive) supply and demand indices.
    """
    supply = [Fraction(v) for v in supply]
    demand = [Fraction(v) for v in demand]

    @functools.lru_cache(maxsize=None)
    def rec(rows: tuple, cols: tuple) -> frozenset:
        # set of vertex plans (frozensets of (cell, mass)) of the subproblem
        if not rows and not cols:
            return frozenset([frozenset()])
        if not rows or not cols:
            return frozenset()
        plans = set()
        for ri, (i, a) in enumerate(rows):
            for ci, (j, b) in enumerate(cols):
                if a <= b:  # row i is a leaf attached to column j
                    new_cols = list(cols)
                    if a == b:
                        del new_cols[ci]
                    else:
                        new_cols[ci] = (j, b - a)
                    for rest in rec(rows[:ri] + rows[ri + 1:], tuple(new_cols)):
                        plans.add(rest | {((i, j), a)})
                if b < a:  # column j is a leaf attached to row i
                    new_rows = list(rows)
                    new_rows[ri] = (i, a - b)
                    for rest in rec(tuple(new_rows), cols[:ci] + cols[ci + 1:]):
                        plans.add(rest | {((i, j), b)})
        return frozenset(plans)

    found = rec(tuple((i, a) for i, a in enumerate(supply) if a > 0),
                tuple((j, b) for j, b in enumerate(demand) if b > 0))
    return [dict(sorted(plan)) for plan in sorted(found, key=sorted)]


def kantorovich_bruteforce(mu: Sequence, nu: Sequence, cost):
    """Minimum cost over all vertices of the polytope (small supports only)."""
    n = len(mu)
    rows = _as_rows(cost, n)
    best = None
    for vert in transport_vertices(mu, nu):
        val = sum(rows[i][j] * m for (i, j), m in vert.items())
        if best is None or val < best:
            best = val
    return best
