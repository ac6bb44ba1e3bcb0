"""Total variation distance between residence-time distributions."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize

from .model import Dirac, Exponential, ResidenceDist, SmmModel, Uniform


class TvMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_INTEGRATION = "numeric_integration"


@dataclass(frozen=True)
class TvResult:
    value: float | Fraction
    exact: bool
    method: TvMethod

    def __float__(self):
        return float(self.value)


def _closed(value, exact):
    return TvResult(value, exact, TvMethod.CLOSED_FORM)


def _exp_exp(a: Exponential, b: Exponential) -> float:
    # sup_A |P(A) - Q(A)| is the CDF gap at the density crossing point
    l1, l2 = a.rate, b.rate
    log_ratio = math.log1p(float((l1 - l2) / l2))  # ln(l1/l2), stable near 1
    x_star = log_ratio / float(l1 - l2)
    return abs(math.exp(-float(l2) * x_star) - math.exp(-float(l1) * x_star))


def _exp_uniform(e: Exponential, u: Uniform) -> float:
    # 1 - integral of min(f, g); f decreasing so min is g left of the crossing
    lam = float(e.rate)
    lo, hi = float(u.lo), float(u.hi)
    width = hi - lo
    cross = math.log(lam * width) / lam
    c = min(max(cross, lo), hi)
    overlap = (c - lo) / width + (math.exp(-lam * c) - math.exp(-lam * hi))
    return min(1.0, max(0.0, 1.0 - overlap))


def tv(a: ResidenceDist, b: ResidenceDist) -> TvResult:
    """Total variation distance between two residence-time distributions."""
    if a == b:
        return _closed(Fraction(0), True)
    if isinstance(a, Dirac) or isinstance(b, Dirac):
        # two distinct atoms, or an atom against an atomless law
        return _closed(Fraction(1), True)
    if isinstance(a, Uniform) and isinstance(b, Uniform):
        overlap = max(Fraction(0), min(a.hi, b.hi) - max(a.lo, b.lo))
        return _closed(1 - overlap / max(a.hi - a.lo, b.hi - b.lo), True)
    if isinstance(a, Exponential) and isinstance(b, Exponential):
        return _closed(_exp_exp(a, b), False)
    if isinstance(a, Exponential) and isinstance(b, Uniform):
        return _closed(_exp_uniform(a, b), False)
    if isinstance(a, Uniform) and isinstance(b, Exponential):
        return _closed(_exp_uniform(b, a), False)
    return tv_numeric(a, b)


# ---------------------------------------------------------------------------
# integration oracle

_TAIL = 1e-15


def _density(d: ResidenceDist):
    if isinstance(d, Exponential):
        lam = float(d.rate)
        return lambda x: lam * math.exp(-lam * x)
    if isinstance(d, Uniform):
        lo, hi = float(d.lo), float(d.hi)
        h = 1.0 / (hi - lo)
        return lambda x: h if lo <= x <= hi else 0.0
    return lambda x: 0.0


def _support_end(d: ResidenceDist) -> float:
    if isinstance(d, Exponential):
        return -math.log(_TAIL) / float(d.rate)
    if isinstance(d, Uniform):
        return float(d.hi)
    return 0.0


def _breakpoints(d: ResidenceDist) -> list[float]:
    if isinstance(d, Uniform):
        return [float(d.lo), float(d.hi)]
    return []


def _scale(d: ResidenceDist) -> float:
    if isinstance(d, Exponential):
        return 1.0 / float(d.rate)
    if isinstance(d, Uniform):
        return float(d.hi - d.lo)
    return math.inf


def _crossings(h, cuts) -> list[float]:
    """Roots of ``h`` strictly inside grid cells where it changes sign.

    ``|h|`` has a kink at each root, which adaptive quadrature handles badly
    unless the root is an endpoint.
    """
    out = []
    for lo, hi in zip(cuts, cuts[1:]):
        # sample just inside the cell so jumps at the endpoints do not count
        a, b = lo + (hi - lo) * 1e-9, hi - (hi - lo) * 1e-9
        if hi > lo and h(a) * h(b) < 0:
            out.append(optimize.brentq(h, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return out


def tv_numeric(a: ResidenceDist, b: ResidenceDist) -> TvResult:
    """Atom discrepancy plus half the L1 distance of the densities.

    Integrated adaptively (absolute tolerance 1e-12) over ``[0, T]`` where
    ``T`` is past the point both tails drop below 1e-15. Independent of the
    closed forms in :func:`tv`; used to audit them.
    """
    atoms: dict[Fraction, list[float]] = {}
    for i, d in enumerate((a, b)):
        if isinstance(d, Dirac):
            atoms.setdefault(d.point, [0.0, 0.0])[i] += 1.0
    atom_part = sum(abs(p - q) for p, q in atoms.values())

    fa, fb = _density(a), _density(b)
    end = max(_support_end(a), _support_end(b))
    # geometric grid from the distributions' own scales keeps each piece smooth
    # enough for quad without knowing where the densities cross
    first = min(_scale(a), _scale(b)) * 1e-4
    grid = np.geomspace(first, end, 256) if 0 < first < end else []
    cuts = sorted({0.0, end, *grid, *_breakpoints(a), *_breakpoints(b)})
    cuts = [c for c in cuts if 0.0 <= c <= end]
    cuts = sorted(cuts + _crossings(lambda x: fa(x) - fb(x), cuts))
    cont = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(lambda x: abs(fa(x) - fb(x)), lo, hi,
                                epsabs=1e-13, epsrel=1e-12, limit=400)
        cont += val
    value = 0.5 * (atom_part + cont)
    return TvResult(min(1.0, max(0.0, value)), False, TvMethod.NUMERIC_INTEGRATION)


def tv_matrix(model: SmmModel) -> dict[tuple[str, str], TvResult]:
    """``tv(rho(s), rho(t))`` for every ordered pair of non-absorbing states."""
    live = [s for s in model.states if s not in model.absorbing]
    out: dict[tuple[str, str], TvResult] = {}
    for i, s in enumerate(live):
        out[s, s] = _closed(Fraction(0), True)
        for t in live[i + 1:]:
            r = tv(model.residence[s], model.residence[t])
            out[s, t] = out[t, s] = r
    return out
