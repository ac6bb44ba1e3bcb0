from fractions import Fraction

import numpy as np
from hypothesis import given, strategies as st

from smmdist.fixpoint import theta
from smmdist.generators import random_dag_model
from smmdist.hardness import UndirectedGraph, build_MV
from smmdist.model import Dirac, Exponential, SmmModel
from smmdist.oracle import SharedResidenceError, exact_delta, l1_half, word_distribution

import pytest

seeds = st.integers(0, 10_000)


def test_absorbing_start_is_empty_word():
    m = SmmModel.build(["x"], ["x"], labels={"x": {"p"}})
    wd = word_distribution(m, "x")
    assert wd.probs == {(frozenset(["p"]),): 1} and wd.residual == 0


def test_single_vertex_vertex_model():
    m = build_MV(1)
    wd = word_distribution(m, "alpha")
    a, o, v = frozenset(["alpha"]), frozenset(["omega"]), frozenset(["v1"])
    assert wd.probs == {(a, o): Fraction(1, 2), (a, v, o): Fraction(1, 2)}


@given(seeds)
def test_mass_is_conserved_and_dags_finish(seed):
    m = random_dag_model(seed)
    for s in m.states:
        wd = word_distribution(m, s, len(m.states))
        assert wd.total() == 1 and wd.residual == 0
        short = word_distribution(m, s, 1)
        assert short.total() == 1


def test_cyclic_model_reports_residual():
    m = SmmModel.build(["s", "x"], ["x"], {"s": {"s": "1/2", "x": "1/2"}}, {"s": Dirac(0)})
    lo, hi = exact_delta(m, "s", "x", 10)
    assert hi - lo == Fraction(1, 2 ** 10)


def test_same_state_and_disjoint_alphabets():
    m = SmmModel.build(["a", "b", "x", "y"], ["x", "y"], {"a": {"x": 1}, "b": {"y": 1}},
                       {"a": Dirac(0), "b": Dirac(0)},
                       {"a": {"p"}, "x": {"p"}, "b": {"q"}, "y": {"q"}})
    assert exact_delta(m, "a", "a") == (0, 0)
    assert exact_delta(m, "a", "b") == (1, 1)


def test_mixed_residence_is_refused():
    m = SmmModel.build(["a", "b", "x"], ["x"], {"a": {"x": 1}, "b": {"x": 1}},
                       {"a": Dirac(0), "b": Exponential(1)})
    with pytest.raises(SharedResidenceError):
        word_distribution(m, "a")


@given(seeds)
def test_symmetric_and_triangle(seed):
    m = random_dag_model(seed)
    d = {(s, t): exact_delta(m, s, t, len(m.states))[0] for s in m.states for t in m.states}
    for s in m.states:
        for t in m.states:
            assert d[s, t] == d[t, s]
            for u in m.states:
                assert d[s, t] <= d[s, u] + d[u, t]


@given(seeds)
def test_invariant_under_shared_residence_choice(seed):
    a = random_dag_model(seed, residence=Dirac(0))
    b = random_dag_model(seed, residence=Exponential(1))
    for s in a.states:
        for t in a.states:
            assert exact_delta(a, s, t) == exact_delta(b, s, t)


@given(seeds)
def test_below_bisimilarity_distance(seed):
    m = random_dag_model(seed)
    th = theta(m).distance
    for s in m.states:
        for t in m.states:
            assert float(exact_delta(m, s, t, len(m.states))[0]) <= th[s, t] + 1e-9


def test_l1_half_of_identical_is_zero():
    wd = word_distribution(build_MV(2), "alpha")
    assert l1_half(wd, wd) == 0
