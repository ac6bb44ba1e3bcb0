import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smmdist import _kernels_py, available_backends
from smmdist.transport import kantorovich

compiled = available_backends().get("cython")
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


@st.composite
def float_instance(draw):
    n = draw(st.integers(1, 6))
    w = lambda: np.array(draw(st.lists(st.integers(0, 9), min_size=n, max_size=n).filter(any)),
                         dtype=float)
    mu, nu = w(), w()
    cost = np.array(draw(st.lists(st.floats(0, 1), min_size=n * n, max_size=n * n))).reshape(n, n)
    return mu / mu.sum(), nu / nu.sum(), cost


@given(float_instance())
def test_python_kernel_matches_transport_solver(inst):
    mu, nu, cost = inst
    want, _ = kantorovich(mu, nu, cost)
    assert _kernels_py.kantorovich_value(mu, nu, cost) == pytest.approx(want, abs=1e-9)


@needs_ext
@given(float_instance())
def test_compiled_kernel_matches_python(inst):
    mu, nu, cost = inst
    assert compiled.kantorovich_value(mu, nu, cost) == pytest.approx(
        _kernels_py.kantorovich_value(mu, nu, cost), abs=1e-9)


@needs_ext
@given(st.integers(0, 1000))
def test_sweeps_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    tau = rng.random((n, n))
    tau /= tau.sum(axis=1, keepdims=True)
    alpha = rng.random((n, n))
    alpha = (alpha + alpha.T) / 2
    kind = rng.integers(0, 3, (n, n)).astype(np.intc)
    kind = np.triu(kind) + np.triu(kind, 1).T
    d = rng.random((n, n))
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0)
    a, b = np.empty_like(d), np.empty_like(d)
    _kernels_py.g_sweep(tau, alpha, kind, d, a)
    compiled.g_sweep(tau, alpha, kind, d, b)
    assert np.allclose(a, b, atol=1e-12, rtol=0)


def test_pure_python_switch():
    env = {**os.environ, "SMMDIST_PURE_PYTHON": "1"}
    out = subprocess.run([sys.executable, "-c", "import smmdist; print(smmdist.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
