from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smmdist.transport import (TransportError, discrete_cost, kantorovich, kantorovich_bruteforce,
                               min_discrepancy_coupling, solve_transport, transport_vertices)


@st.composite
def instance(draw, max_n=4):
    n = draw(st.integers(1, max_n))

    def dist():
        w = draw(st.lists(st.integers(0, 6), min_size=n, max_size=n).filter(any))
        return [Fraction(x, sum(w)) for x in w]

    cost = [[Fraction(draw(st.integers(0, 8)), 8) for _ in range(n)] for _ in range(n)]
    return dist(), dist(), cost


def test_equal_marginals_cost_zero_on_diagonal():
    mu = [Fraction(1, 3), Fraction(2, 3)]
    value, plan = kantorovich(mu, mu, discrete_cost(2))
    assert value == 0 and set(plan.entries) == {(0, 0), (1, 1)}


def test_half_mass_moves():
    value, _ = kantorovich([Fraction(1, 2), Fraction(1, 2)], [1, 0], discrete_cost(2))
    assert value == Fraction(1, 2)


def test_min_discrepancy_values():
    assert min_discrepancy_coupling([0.7, 0.3], [0.4, 0.6])[0] == pytest.approx(0.3, abs=1e-12)
    assert min_discrepancy_coupling([1, 0], [0, 1])[0] == 1


def test_bad_marginals_raise():
    with pytest.raises(TransportError):
        kantorovich([Fraction(1, 2), Fraction(1, 3)], [1, 0], discrete_cost(2))


def test_support_labels_key_the_plan():
    _, plan = kantorovich([1, 0], [0, 1], discrete_cost(2), support=["a", "b"])
    assert plan.entries == {("a", "b"): 1}


@given(instance())
def test_matches_vertex_enumeration(inst):
    mu, nu, cost = inst
    value, plan = kantorovich(mu, nu, cost)
    assert value == kantorovich_bruteforce(mu, nu, cost)
    assert plan.row_sums() == {i: m for i, m in enumerate(mu) if m}
    assert plan.col_sums() == {j: m for j, m in enumerate(nu) if m}
    assert plan.support_is_forest()


@given(instance())
def test_float_inputs_agree_with_exact(inst):
    mu, nu, cost = inst
    exact, _ = kantorovich(mu, nu, cost)
    approx, _ = kantorovich([float(x) for x in mu], [float(x) for x in nu],
                            np.array(cost, dtype=float))
    assert approx == pytest.approx(float(exact), abs=1e-9)


@given(instance())
def test_discrete_cost_gives_half_l1(inst):
    mu, nu, _ = inst
    value, _ = kantorovich(mu, nu, discrete_cost(len(mu)))
    assert value == sum(abs(a - b) for a, b in zip(mu, nu)) / 2


def test_vertices_of_two_by_two():
    half = Fraction(1, 2)
    verts = transport_vertices([half, half], [half, half])
    assert verts == [{(0, 0): half, (1, 1): half}, {(0, 1): half, (1, 0): half}]


def test_solve_transport_balanced():
    x, basis = solve_transport([Fraction(1)], [Fraction(1, 4), Fraction(3, 4)],
                               [[Fraction(0), Fraction(1)]])
    assert x[0] == [Fraction(1, 4), Fraction(3, 4)]
