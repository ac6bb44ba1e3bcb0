from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smmdist.generators import random_model
from smmdist.model import (Cylinder, Dirac, Exponential, Interval, SmmModel, TimedPath, Uniform,
                           as_fraction, cylinder_prob, format_number, sample_path, sample_paths,
                           validate)


def two_state(p="1"):
    return SmmModel.build(["s", "t"], ["t"], {"s": {"t": p}}, {"s": Exponential(1)},
                          {"s": {"a"}, "t": set()})


def test_well_formed_model_has_no_violations():
    assert validate(two_state()) == []


def test_row_summing_below_one_is_reported_at_that_state():
    bad = validate(two_state("9/10"))
    assert [v.state for v in bad] == ["s"]


def test_absorbing_state_with_residence_is_reported():
    m = SmmModel.build(["s", "t"], ["t"], {"s": {"t": 1}},
                       {"s": Dirac(0), "t": Dirac(0)})
    assert any(v.state == "t" for v in validate(m))


def test_unknown_label_and_bad_rate():
    m = SmmModel.build(["s", "t"], ["t"], {"s": {"t": 1}}, {"s": Exponential(0)},
                       {"s": {"zz"}}, atomic_props={"a"})
    msgs = " ".join(str(v) for v in validate(m))
    assert "zz" in msgs and "rate" in msgs


@pytest.mark.parametrize("value, text", [(Fraction(1, 3), "1/3"), (Fraction(4), "4"),
                                         (0.1, "0.10000000000000001"), (2.0, "2")])
def test_format_number(value, text):
    assert format_number(value) == text


def test_as_fraction_reads_rational_strings():
    assert as_fraction("3/6") == Fraction(1, 2)
    assert as_fraction("0.25") == Fraction(1, 4)


@given(st.integers(0, 20), st.integers(1, 20), st.integers(0, 20))
def test_interval_contains_agrees_with_exact_comparison(a, b, x):
    lo, hi = Fraction(a, 4), Fraction(a, 4) + Fraction(b, 4)
    iv = Interval.closed(lo, hi)
    xf = Fraction(x, 8)
    assert iv.contains(float(xf)) == iv.contains(xf) == (lo <= xf <= hi)


def test_json_round_trip(tmp_path):
    m = random_model(4)
    path = tmp_path / "m.json"
    m.dump(path)
    assert SmmModel.load(path) == m


def test_cylinder_of_start_alone_has_mass_one():
    m = two_state()
    assert cylinder_prob(m, "s", Cylinder([{"s"}])) == 1
    assert cylinder_prob(m, "s", Cylinder([{"t"}])) == 0


def test_uniform_interval_mass_half():
    m = SmmModel.build(["s", "t"], ["t"], {"s": {"t": 1}}, {"s": Uniform(0, 2)})
    cyl = Cylinder([{"s"}, {"t"}], [Interval.closed(0, 1)])
    assert cylinder_prob(m, "s", cyl) == Fraction(1, 2)
    paths = sample_paths(m, "s", 5, 20000, 1)
    freq = np.mean([cyl.contains(p) for p in paths])
    assert abs(freq - 0.5) < 4 * np.sqrt(0.25 / 20000)


def test_absorbing_start_gives_terminated_single_state_path():
    p = sample_path(two_state(), "t", 10, 0)
    assert p.states == ("t",) and p.terminated


def test_dirac_delays_are_exact():
    m = SmmModel.build(["s"], [], {"s": {"s": 1}}, {"s": Dirac(0)})
    p = sample_path(m, "s", 6, 0)
    assert p.delays == (0,) * 6 and not p.terminated


def test_branch_frequency_within_three_sigma():
    m = SmmModel.build(["s", "a", "b"], ["a", "b"],
                       {"s": {"a": "3/10", "b": "7/10"}}, {"s": Exponential(1)})
    n = 100_000
    freq = np.mean([p.states[1] == "a" for p in sample_paths(m, "s", 3, n, 5)])
    assert abs(freq - 0.3) < 3 * np.sqrt(0.3 * 0.7 / n)


@given(st.integers(0, 2**32 - 1))
def test_sampling_is_a_function_of_the_seed(seed):
    m = random_model(seed % 50)
    start = m.states[0]
    assert sample_paths(m, start, 8, 30, seed) == sample_paths(m, start, 8, 30, seed)


def test_path_shape_is_checked():
    with pytest.raises(ValueError):
        TimedPath(("s", "t"), ())
