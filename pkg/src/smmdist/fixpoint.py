"""The bisimilarity pseudometric as the fixed point of the distance operator.

``theta`` runs value iteration from the zero matrix with the operator that
pins bisimilar pairs to 0; ``theta_exact_lp`` solves the equivalent linear
program over all transportation-polytope vertices and serves as the audit
on small models.
"""
from __future__ import annotations

import csv
import io
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from . import _accel
from .bisim import StatePartition, bisimilarity
from .model import SmmModel, format_number
from .residence import tv_matrix
from .transport import TransportPlan, kantorovich, transport_vertices

MONOTONE_SLACK = 1e-12
LP_STATE_CAP = 8


class FixpointError(RuntimeError):
    pass


@dataclass
class PseudometricMatrix:
    """Symmetric ``[0, 1]``-valued matrix over ``states`` with zero diagonal."""

    states: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.states = tuple(self.states)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.states),) * 2:
            raise ValueError("matrix shape does not match the state count")

    @classmethod
    def zeros(cls, states) -> "PseudometricMatrix":
        return cls(tuple(states), np.zeros((len(states), len(states))))

    def _ix(self, s):
        return self.states.index(s) if isinstance(s, str) else s

    def __getitem__(self, pair) -> float:
        s, t = pair
        return float(self.values[self._ix(s), self._ix(t)])

    def problems(self, tol: float = 1e-9) -> list[str]:
        """Violations of symmetry, zero diagonal and the ``[0, 1]`` range."""
        v = self.values
        out = []
        if not np.allclose(v, v.T, atol=tol, rtol=0):
            out.append("matrix is not symmetric")
        if np.any(np.abs(np.diag(v)) > tol):
            out.append("diagonal is not zero")
        if np.any(v < -tol) or np.any(v > 1 + tol):
            out.append("entries outside [0, 1]")
        return out

    def triangle_violations(self, tol: float = 1e-9) -> list[tuple[str, str, str]]:
        """Triples ``(s, u, t)`` with ``d(s,t) > d(s,u) + d(u,t) + tol``."""
        v = self.values
        bad = []
        for i, k, j in itertools.product(range(len(self.states)), repeat=3):
            if v[i, j] > v[i, k] + v[k, j] + tol:
                bad.append((self.states[i], self.states[k], self.states[j]))
        return bad

    def to_json(self) -> dict:
        return {"states": list(self.states),
                "values": [[format_number(float(x)) for x in row] for row in self.values]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *self.states])
        for s, row in zip(self.states, self.values):
            w.writerow([s, *(format_number(float(x)) for x in row)])
        return buf.getvalue()


@dataclass
class FixpointReport:
    distance: PseudometricMatrix
    iterations: int
    residual: float
    converged: bool
    witness_couplings: dict = field(default_factory=dict)
    monotone: bool = True
    # most negative entrywise change between successive iterates
    min_step: float = 0.0
    backend: str = ""

    def to_json(self) -> dict:
        return {
            "distance": self.distance.to_json(),
            "iterations": self.iterations,
            "residual": format_number(self.residual),
            "converged": self.converged,
            "monotone": self.monotone,
            "backend": self.backend,
            "witness_couplings": [
                {"pair": [s, t],
                 "cost": format_number(plan.cost),
                 "entries": [[u, v, format_number(m)] for (u, v), m in plan.entries.items()]}
                for (s, t), plan in self.witness_couplings.items()
            ],
        }


# ---------------------------------------------------------------------------
# operator plumbing

_PIN_ONE, _PIN_ZERO, _FREE = 0, 1, 2


def _pair_kinds(model: SmmModel, bisim: StatePartition | None) -> np.ndarray:
    n = len(model.states)
    kind = np.full((n, n), _FREE, dtype=np.intc)
    for i, s in enumerate(model.states):
        for j, t in enumerate(model.states):
            if i == j:
                kind[i, j] = _PIN_ZERO
            elif not model.equiv(s, t):
                kind[i, j] = _PIN_ONE
            elif s in model.absorbing:
                kind[i, j] = _PIN_ZERO
            elif bisim is not None and bisim.related(s, t):
                kind[i, j] = _PIN_ZERO
    return kind


def _alpha_matrix(model: SmmModel, tvm: Mapping) -> np.ndarray:
    n = len(model.states)
    alpha = np.zeros((n, n))
    for (s, t), r in tvm.items():
        alpha[model.index(s), model.index(t)] = float(r.value)
    return alpha


class _Operator:
    """Dense arrays for repeated sweeps of F (``bisim=None``) or G."""

    def __init__(self, model, tvm=None, bisim=None, kernels=None, threads=1):
        self.model = model
        self.kernels = kernels or _accel.kernels
        self.tau = np.ascontiguousarray(model.transition_matrix())
        self.alpha = np.ascontiguousarray(_alpha_matrix(model, tvm if tvm is not None
                                                        else tv_matrix(model)))
        self.kind = np.ascontiguousarray(_pair_kinds(model, bisim))
        self.threads = max(1, int(threads))

    def __call__(self, d: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        d = np.ascontiguousarray(d, dtype=float)
        if out is None:
            out = np.empty_like(d)
        k = self.kernels
        if self.threads == 1 or len(d) < 2 * self.threads:
            k.g_sweep(self.tau, self.alpha, self.kind, d, out)
        else:
            with ThreadPoolExecutor(self.threads) as pool:
                list(pool.map(lambda r: k.g_sweep(self.tau, self.alpha, self.kind, d, out,
                                                  r, self.threads),
                              range(self.threads)))
        return out


def _check_input(model, d: PseudometricMatrix):
    if tuple(d.states) != tuple(model.states):
        raise ValueError("matrix states do not match the model")
    if np.any(d.values < 0) or np.any(d.values > 1):
        raise ValueError("d entries must lie in [0, 1]")


def apply_F(model: SmmModel, tv=None, d: PseudometricMatrix | None = None) -> PseudometricMatrix:
    """One application of F to ``d`` (zero matrix by default).

    ``tv`` is the output of :func:`tv_matrix`; it is computed when omitted.
    """
    d = d or PseudometricMatrix.zeros(model.states)
    _check_input(model, d)
    return PseudometricMatrix(model.states, _Operator(model, tv)(d.values))


def apply_G(model: SmmModel, tv=None, bisim: StatePartition | None = None,
            d: PseudometricMatrix | None = None) -> PseudometricMatrix:
    """F with every bisimilar pair pinned to 0."""
    d = d or PseudometricMatrix.zeros(model.states)
    _check_input(model, d)
    bisim = bisim or bisimilarity(model)
    return PseudometricMatrix(model.states, _Operator(model, tv, bisim)(d.values))


def witness_couplings(model: SmmModel, d: PseudometricMatrix) -> dict:
    """Optimal transport plan for every equivalent non-absorbing pair under ``d``."""
    out = {}
    cost = d.values
    tau = model.transition_matrix()
    live = [s for s in model.states if s not in model.absorbing]
    for a, s in enumerate(live):
        for t in live[a + 1:]:
            if model.equiv(s, t):
                _, plan = kantorovich(tau[model.index(s)], tau[model.index(t)], cost,
                                      model.states)
                out[s, t] = plan
    return out


def theta(model: SmmModel, tolerance: float = 1e-9, max_iter: int = 100_000, *,
          threads: int = 1, kernels=None) -> FixpointReport:
    """Iterate ``d_{k+1} = G(d_k)`` from ``d_0 = 0`` until the sup-norm step is
    at most ``tolerance`` or ``max_iter`` sweeps have run.

    The iterates must be pointwise nondecreasing; a decrease beyond rounding
    slack raises :class:`FixpointError`.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    op = _Operator(model, None, bisimilarity(model), kernels, threads)
    n = len(model.states)
    d = np.zeros((n, n))
    nxt = np.empty_like(d)
    residual = float("inf")
    min_step = 0.0
    it = 0
    converged = False
    while it < max_iter:
        op(d, nxt)
        it += 1
        step = nxt - d
        low = float(step.min()) if n else 0.0
        if low < -MONOTONE_SLACK:
            raise FixpointError(f"iterate decreased by {-low:.3g} at sweep {it}")
        min_step = min(min_step, low)
        residual = float(np.abs(step).max()) if n else 0.0
        d, nxt = nxt, d
        if residual <= tolerance:
            converged = True
            break
    dist = PseudometricMatrix(model.states, d.copy())
    return FixpointReport(dist, it, residual, converged, witness_couplings(model, dist),
                          True, min_step, op.kernels.BACKEND)


# ---------------------------------------------------------------------------
# LP audit

def theta_exact_lp(model: SmmModel, cap: int = LP_STATE_CAP) -> PseudometricMatrix:
    """Maximize the sum of distances subject to ``d <= alpha + (1-alpha) <d, w>``
    for every vertex ``w`` of every transportation polytope involved.

    The constraint set grows exponentially with the support size, hence
    the state cap.
    """
    n = len(model.states)
    if n > cap:
        raise ValueError(f"model has {n} states; theta_exact_lp is capped at {cap}")
    bisim = bisimilarity(model)
    kind = _pair_kinds(model, bisim)
    alpha = _alpha_matrix(model, tv_matrix(model))
    free = [(i, j) for i in range(n) for j in range(i + 1, n) if kind[i, j] == _FREE]
    var = {p: k for k, p in enumerate(free)}
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if kind[i, j] == _PIN_ONE:
                out[i, j] = 1.0
    if not free:
        return PseudometricMatrix(model.states, out)

    rows_a, rows_b = [], []
    for (i, j) in free:
        a = alpha[i, j]
        mu = [model.transitions.get(model.states[i], {}).get(t, Fraction(0)) for t in model.states]
        nu = [model.transitions.get(model.states[j], {}).get(t, Fraction(0)) for t in model.states]
        for vert in transport_vertices(mu, nu):
            row = np.zeros(len(free))
            row[var[i, j]] += 1.0
            rhs = a
            for (x, y), w in vert.items():
                p = (min(x, y), max(x, y))
                coef = (1.0 - a) * float(w)
                if p in var:
                    row[var[p]] -= coef
                elif kind[x, y] == _PIN_ONE:
                    rhs += coef
            rows_a.append(row)
            rows_b.append(rhs)
    res = linprog(-np.ones(len(free)), A_ub=np.array(rows_a), b_ub=np.array(rows_b),
                  bounds=[(0.0, 1.0)] * len(free), method="highs")
    if res.status != 0:
        raise FixpointError(f"linear program failed: {res.message}")
    for (i, j), k in var.items():
        out[i, j] = out[j, i] = res.x[k]
    return PseudometricMatrix(model.states, out)


# ---------------------------------------------------------------------------
# coupling models

def _lookup(table: Mapping, s, t):
    if (s, t) in table:
        return table[s, t], False
    if (t, s) in table:
        return table[t, s], True
    raise ValueError(f"no coupling given for pair ({s}, {t})")


def _check_marginals(model, s, t, plan: TransportPlan, flipped: bool):
    rows, cols = plan.row_sums(), plan.col_sums()
    if flipped:
        rows, cols = cols, rows
    for state, got in ((s, rows), (t, cols)):
        want = model.transitions.get(state, {})
        for u in set(want) | set(got):
            diff = got.get(u, 0) - want.get(u, 0)
            if abs(float(diff)) > 1e-9:
                raise ValueError(f"coupling for ({s}, {t}) has the wrong marginal at {u}")


def product_couplings(model: SmmModel) -> dict:
    """Independent couplings ``tau(s) x tau(t)`` for every equivalent live pair."""
    out = {}
    live = [s for s in model.states if s not in model.absorbing]
    for a, s in enumerate(live):
        for t in live[a + 1:]:
            if model.equiv(s, t):
                rs, rt = model.transitions.get(s, {}), model.transitions.get(t, {})
                out[s, t] = TransportPlan({(u, v): p * q for u, p in rs.items()
                                           for v, q in rt.items()})
    return out


def _gamma_arrays(model, coupling_tau, coupling_alpha):
    tvm = tv_matrix(model)
    n = len(model.states)
    kind = _pair_kinds(model, None)
    terms = {}
    for i in range(n):
        for j in range(i + 1, n):
            if kind[i, j] != _FREE:
                continue
            s, t = model.states[i], model.states[j]
            plan, flipped = _lookup(coupling_tau, s, t)
            _check_marginals(model, s, t, plan, flipped)
            a, _ = _lookup(coupling_alpha, s, t)
            a = float(a)
            if a < float(tvm[s, t].value) - 1e-12 or a > 1:
                raise ValueError(f"coupling alpha for ({s}, {t}) must lie in [tv, 1]")
            cells = [((model.index(v), model.index(u)) if flipped else
                      (model.index(u), model.index(v)), float(m))
                     for (u, v), m in plan.entries.items()]
            terms[i, j] = (a, cells)
    return kind, terms


def _gamma_step(kind, terms, d):
    out = np.where(kind == _PIN_ONE, 1.0, 0.0)
    for (i, j), (a, cells) in terms.items():
        out[i, j] = out[j, i] = a + (1 - a) * sum(m * d[x, y] for (x, y), m in cells)
    return out


def apply_Gamma(model: SmmModel, coupling_tau: Mapping, coupling_alpha: Mapping,
                d: PseudometricMatrix | None = None) -> PseudometricMatrix:
    """One application of the coupling-model operator.

    ``coupling_tau[s, t]`` couples ``tau(s)`` and ``tau(t)``;
    ``coupling_alpha[s, t]`` is the residence discrepancy mass of the coupling.
    """
    d = d or PseudometricMatrix.zeros(model.states)
    _check_input(model, d)
    kind, terms = _gamma_arrays(model, coupling_tau, coupling_alpha)
    return PseudometricMatrix(model.states, _gamma_step(kind, terms, d.values))


def gamma_fixpoint(model: SmmModel, coupling_tau: Mapping, coupling_alpha: Mapping,
                   tolerance: float = 1e-9, max_iter: int = 100_000) -> PseudometricMatrix:
    """Least fixed point of the coupling-model operator, iterated from 0."""
    kind, terms = _gamma_arrays(model, coupling_tau, coupling_alpha)
    d = np.zeros(kind.shape)
    for _ in range(max_iter):
        nxt = _gamma_step(kind, terms, d)
        done = float(np.abs(nxt - d).max(initial=0.0)) <= tolerance
        d = nxt
        if done:
            break
    return PseudometricMatrix(model.states, d)
