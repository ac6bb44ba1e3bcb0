import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from smmdist.encode import TraceCylinder, encode_cylinder_dta, encode_cylinder_mtl
from smmdist.estimator import (delta_lower_bound, delta_lower_bound_details, estimate_sat,
                               hoeffding_radius)
from smmdist.generators import random_model, random_trace_cylinder
from smmdist.hardness import UndirectedGraph, build_Mi
from smmdist.model import Cylinder, Dirac, Exponential, Interval, SmmModel, Uniform, cylinder_prob
from smmdist.mtl import FALSE, TRUE, Atom, until
from smmdist.oracle import exact_delta, word_distribution

BRANCH = SmmModel.build(["s", "a", "b"], ["a", "b"], {"s": {"a": "1/3", "b": "2/3"}},
                        {"s": Uniform(0, 2)}, {"a": {"p"}})


def test_radius_formula():
    assert hoeffding_radius(1000, 0.99) == pytest.approx(math.sqrt(math.log(200) / 2000))


def test_false_and_true():
    eps = hoeffding_radius(5000, 0.99)
    lo = estimate_sat(BRANCH, "s", FALSE, n=5000, seed=1)
    assert lo.point == 0 and lo.upper <= eps + 1e-15
    assert estimate_sat(BRANCH, "s", TRUE, n=5000, seed=1).point == 1


def test_branch_cylinder_one_sixth():
    tc = TraceCylinder((frozenset(), frozenset(["p"])), (Interval.closed(0, 1),), {"p"})
    assert cylinder_prob(BRANCH, "s", tc.to_cylinder(BRANCH)) == Fraction(1, 6)
    for spec in (encode_cylinder_mtl(tc), encode_cylinder_dta(tc)):
        est = estimate_sat(BRANCH, "s", spec, n=100_000, seed=11)
        assert est.lower <= 1 / 6 <= est.upper
        assert est.point == pytest.approx(1 / 6, abs=0.01)


def test_result_does_not_depend_on_threads():
    phi = until(TRUE, 0, 1, Atom("p"))
    a = estimate_sat(BRANCH, "s", phi, n=9000, seed=4, threads=1)
    b = estimate_sat(BRANCH, "s", phi, n=9000, seed=4, threads=4)
    assert a == b


def test_truncation_widens_the_interval():
    loop = SmmModel.build(["s", "t"], ["t"], {"s": {"s": "1/2", "t": "1/2"}},
                          {"s": Exponential(1)}, {"t": {"p"}})
    phi = until(TRUE, 0, 1000, Atom("p"))
    est = estimate_sat(loop, "s", phi, n=4000, horizon=1, seed=2)
    assert est.unknown_fraction > 0.3
    assert est.lower < 0.5 < est.upper


def test_same_state_gives_zero():
    specs = [Atom("p"), until(TRUE, 0, 1, Atom("p"))]
    assert delta_lower_bound(BRANCH, "s", "s", specs, n=2000, seed=3) == 0


def test_distinguishing_atom_near_one():
    m = SmmModel.build(["a", "b"], ["a", "b"], labels={"a": {"p"}})
    assert delta_lower_bound(m, "a", "b", [Atom("p")], n=20_000, seed=0) > 0.97


def word_formula(word):
    # Dirac(0) residence: every delay is exactly 0
    props = sorted(set().union(*word))
    cyl = TraceCylinder(word, (Interval.closed(0, 0),) * (len(word) - 1), props)
    return encode_cylinder_mtl(cyl)


def test_gadget_pair_bound_below_exact_distance():
    g = UndirectedGraph(3, {(1, 2), (2, 3), (1, 3)})
    m, s, s2 = build_Mi(g, 1)
    lo, hi = exact_delta(m, s, s2, len(m.states))
    assert lo == hi
    wd = word_distribution(m, s, len(m.states))
    words = sorted(wd.probs, key=lambda w: -wd.probs[w])[:4]
    # cylinder formulas cannot read absorbing status, so the bound stays below delta
    best, rows = delta_lower_bound_details(m, s, s2, [word_formula(w) for w in words],
                                           n=20_000, seed=8)
    assert 0 < best <= lo
    assert len(rows) == 4


def test_dirac_delays_match_closed_interval_bounds():
    m = SmmModel.build(["s", "t"], ["t"], {"s": {"t": 1}}, {"s": Dirac(Fraction(1, 3))},
                       {"t": {"p"}})
    tc = TraceCylinder((frozenset(), frozenset(["p"])),
                       (Interval.closed(Fraction(1, 3), Fraction(1, 3)),), {"p"})
    assert estimate_sat(m, "s", encode_cylinder_mtl(tc), n=100, seed=0).point == 1
    assert cylinder_prob(m, "s", Cylinder([{"s"}, {"t"}], tc.intervals)) == 1


@given(st.integers(0, 10_000), st.integers(0, 3))
def test_point_lies_between_bounds(seed, horizon):
    m = random_model(seed, max_states=5)
    start = m.states[0]
    phi = until(TRUE, 0, 2, Atom("p"))
    est = estimate_sat(m, start, phi, n=300, horizon=horizon, seed=seed)
    assert 0 <= est.lower <= est.point <= est.upper <= 1
    assert est.true_count + est.false_count + round(est.unknown_fraction * 300) == 300


def test_bounds_cover_exact_cylinder_probability():
    covered = 0
    for trial in range(100):
        m = random_model(500 + trial, max_states=6)
        start = m.states[trial % len(m.states)]
        tc = random_trace_cylinder(m, start, trial)
        exact = float(cylinder_prob(m, start, tc.to_cylinder(m)))
        est = estimate_sat(m, start, encode_cylinder_mtl(tc), n=2000, seed=trial)
        covered += est.lower <= exact <= est.upper
    assert covered >= 99
