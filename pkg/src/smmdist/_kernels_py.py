"""Pure-Python kernels; same API as the compiled ``_kernels`` extension."""
from __future__ import annotations

import numpy as np

from .transport import FLOAT_EPS, solve_transport

BACKEND = "python"

# pair kinds shared with the compiled kernel
PINNED_ONE = 0
PINNED_ZERO = 1
FREE = 2


def kantorovich_value(mu, nu, cost) -> float:
    """Optimal transport cost between float marginals over one support."""
    ri = [i for i in range(len(mu)) if mu[i] > 0]
    ci = [j for j in range(len(nu)) if nu[j] > 0]
    sub = [[float(cost[i][j]) for j in ci] for i in ri]
    x, basis = solve_transport([float(mu[i]) for i in ri], [float(nu[j]) for j in ci],
                               sub, FLOAT_EPS)
    return sum(sub[a][b] * x[a][b] for a, b in basis)


def g_sweep(tau, alpha, kind, d, out, start=0, step=1) -> None:
    """One synchronous application of the distance operator into ``out``.

    ``kind[i, j]`` pins a pair to 1 or 0 or marks it free, in which case
    ``out = alpha + (1 - alpha) * K_d(tau_i, tau_j)``. Only rows
    ``start, start + step, ...`` and their mirrored entries are written.
    """
    n = tau.shape[0]
    cost = np.asarray(d).tolist()
    for i in range(start, n, step):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            kd = kind[i, j]
            if kd == PINNED_ONE:
                v = 1.0
            elif kd == PINNED_ZERO:
                v = 0.0
            else:
                a = alpha[i, j]
                v = 1.0 if a >= 1.0 else a + (1.0 - a) * kantorovich_value(tau[i], tau[j], cost)
            out[i, j] = v
            out[j, i] = v
