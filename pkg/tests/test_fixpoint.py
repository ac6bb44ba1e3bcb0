from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smmdist.bisim import bisimilarity
from smmdist.fixpoint import (PseudometricMatrix, apply_F, apply_G, apply_Gamma, gamma_fixpoint,
                              product_couplings, theta, theta_exact_lp)
from smmdist.generators import random_model
from smmdist.model import Dirac, Exponential, SmmModel
from smmdist.residence import tv_matrix

seeds = st.integers(0, 10_000)


def chain_pair():
    # s -> a (labelled p), t -> b (labelled q); s and t differ only in rate
    return SmmModel.build(["s", "t", "a", "b"], ["a", "b"], {"s": {"a": 1}, "t": {"b": 1}},
                          {"s": Exponential(1), "t": Exponential(2)},
                          {"a": {"p"}, "b": {"q"}})


def test_all_bisimilar_is_zero_after_one_sweep(kernels):
    m = SmmModel.build(["a", "b"], [], {"a": {"b": 1}, "b": {"a": 1}},
                       {"a": Dirac(1), "b": Dirac(1)})
    r = theta(m, kernels=kernels)
    assert r.iterations == 1 and r.converged
    assert not r.distance.values.any()


def test_differently_labelled_absorbing_pair_is_one():
    m = SmmModel.build(["a", "b"], ["a", "b"], labels={"a": {"p"}})
    assert theta(m).distance["a", "b"] == 1


def test_chain_pair_hand_unrolled(kernels):
    m = chain_pair()
    alpha = 0.25  # tv(Exp(1), Exp(2))
    f = apply_F(m, d=PseudometricMatrix(m.states, np.where(np.eye(4), 0.0, 1.0)))
    assert f["s", "t"] == pytest.approx(alpha + (1 - alpha) * 1)
    assert theta(m, kernels=kernels).distance["s", "t"] == pytest.approx(1.0)


def test_F_cases():
    m = SmmModel.build(["a", "b", "c", "x"], ["x"],
                       {"a": {"x": 1}, "b": {"x": 1}, "c": {"x": 1}},
                       {"a": Exponential(1), "b": Exponential(1), "c": Dirac(0)},
                       {"c": {"p"}})
    f = apply_F(m)
    assert f["a", "b"] == 0
    assert f["a", "c"] == 1
    # alpha = 1 pins the output at 1 whatever d is
    m2 = SmmModel.build(["a", "b", "x"], ["x"], {"a": {"x": 1}, "b": {"a": 1}},
                        {"a": Exponential(1), "b": Dirac(0)})
    assert apply_F(m2)["a", "b"] == 1


@given(seeds)
def test_G_below_F(seed):
    m = random_model(seed)
    rng = np.random.default_rng(seed)
    v = rng.random((len(m), len(m)))
    v = (v + v.T) / 2
    np.fill_diagonal(v, 0)
    d = PseudometricMatrix(m.states, v)
    tvm = tv_matrix(m)
    assert np.all(apply_G(m, tvm, d=d).values <= apply_F(m, tvm, d=d).values + 1e-15)


@given(seeds)
def test_theta_is_a_pseudometric_with_bisimilarity_kernel(seed):
    m = random_model(seed)
    r = theta(m)
    d = r.distance
    assert r.converged and r.monotone and r.min_step >= -1e-12
    assert d.problems() == [] and d.triangle_violations() == []
    part = bisimilarity(m)
    for s in m.states:
        for t in m.states:
            if part.related(s, t):
                assert d[s, t] == 0
            else:
                assert d[s, t] > 1e-4


@given(seeds)
def test_backends_and_threads_agree(seed):
    from smmdist import available_backends
    m = random_model(seed)
    base = theta(m, threads=1).distance.values
    for k in available_backends().values():
        for threads in (1, 3):
            got = theta(m, threads=threads, kernels=k).distance.values
            assert np.allclose(got, base, atol=1e-12, rtol=0)


@given(st.integers(0, 10_000))
def test_fixed_point_is_stable_under_G(seed):
    m = random_model(seed)
    d = theta(m, tolerance=1e-12).distance
    again = apply_G(m, d=d)
    assert np.abs(again.values - d.values).max() <= 1e-9


@given(seeds)
def test_lp_matches_iteration_on_small_models(seed):
    m = random_model(seed, max_states=4)
    assert np.allclose(theta_exact_lp(m).values, theta(m, 1e-12).distance.values, atol=1e-6)


def test_lp_refuses_large_models():
    m = SmmModel.build([f"s{i}" for i in range(9)], [f"s{i}" for i in range(9)])
    with pytest.raises(ValueError):
        theta_exact_lp(m)


def test_non_convergence_is_reported():
    r = theta(chain_pair(), max_iter=1)
    assert r.iterations == 1 and not r.converged


@given(seeds)
def test_witness_couplings_reproduce_theta(seed):
    m = random_model(seed)
    r = theta(m, tolerance=1e-12)
    tvm = tv_matrix(m)
    alpha = {p: tvm[p].value for p in r.witness_couplings}
    got = gamma_fixpoint(m, r.witness_couplings, alpha, tolerance=1e-13)
    assert np.allclose(got.values, r.distance.values, atol=1e-7)


@given(seeds)
def test_product_couplings_over_approximate(seed):
    m = random_model(seed)
    coup = product_couplings(m)
    tvm = tv_matrix(m)
    got = gamma_fixpoint(m, coup, {p: tvm[p].value for p in coup})
    assert np.all(got.values >= theta(m).distance.values - 1e-9)


def test_gamma_with_alpha_one_is_one():
    m = chain_pair()
    m = SmmModel.build(m.states, m.absorbing, m.transitions, m.residence, {})
    coup = product_couplings(m)
    d = apply_Gamma(m, coup, {p: 1 for p in coup})
    assert d["s", "t"] == 1


def test_gamma_rejects_wrong_marginals_and_alpha():
    m = chain_pair()
    m = SmmModel.build(m.states, m.absorbing, m.transitions, m.residence, {})
    coup = product_couplings(m)
    with pytest.raises(ValueError):
        apply_Gamma(m, coup, {p: Fraction(1, 10) for p in coup})
    from smmdist.transport import TransportPlan
    bad = {("s", "t"): TransportPlan({("a", "a"): Fraction(1)})}
    with pytest.raises(ValueError):
        apply_Gamma(m, bad, {("s", "t"): 1})


def test_report_json_shape():
    j = theta(chain_pair()).to_json()
    assert {"distance", "iterations", "residual", "converged", "witness_couplings"} <= set(j)
