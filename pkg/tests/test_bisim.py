from fractions import Fraction

from hypothesis import given, strategies as st

from smmdist.bisim import StatePartition, bisimilarity, is_bisimulation
from smmdist.generators import random_model
from smmdist.hardness import UndirectedGraph, build_MG
from smmdist.model import Exponential, SmmModel


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for k in range(len(part)):
            yield part[:k] + [[first, *part[k]]] + part[k + 1:]
        yield [[first], *part]


def respects(model, blocks):
    """Bisimulation conditions checked from scratch, without the library."""
    block_of = {s: k for k, b in enumerate(blocks) for s in b}

    def masses(s):
        out = [Fraction(0)] * len(blocks)
        for t, p in model.transitions.get(s, {}).items():
            out[block_of[t]] += p
        return out

    for b in blocks:
        for s in b[1:]:
            t = b[0]
            if model.label(s) != model.label(t):
                return False
            if (s in model.absorbing) != (t in model.absorbing):
                return False
            if s in model.absorbing:
                continue
            if model.residence[s] != model.residence[t] or masses(s) != masses(t):
                return False
    return True


def brute_force_bisimilarity(model):
    related = set()
    for blocks in set_partitions(list(model.states)):
        if respects(model, blocks):
            related |= {(s, t) for b in blocks for s in b for t in b}
    return related


@given(st.integers(0, 10_000))
def test_matches_brute_force_on_small_models(seed):
    m = random_model(seed, max_states=6)
    part = bisimilarity(m)
    got = {(s, t) for s in m.states for t in m.states if part.related(s, t)}
    assert got == brute_force_bisimilarity(m)
    assert is_bisimulation(m, part)


def test_uniform_model_is_one_block():
    m = SmmModel.build(["a", "b", "c"], [], {s: {"a": "1/3", "b": "1/3", "c": "1/3"}
                                              for s in "abc"},
                       {s: Exponential(1) for s in "abc"})
    assert len(bisimilarity(m)) == 1


def test_rate_difference_separates():
    m = SmmModel.build(["a", "b"], [], {"a": {"a": 1}, "b": {"b": 1}},
                       {"a": Exponential(1), "b": Exponential(2)})
    assert len(bisimilarity(m)) == 2


def test_equal_block_mass_merges():
    m = SmmModel.build(
        ["s", "t", "u1", "u2", "x"], ["x"],
        {"s": {"u1": "1/2", "u2": "1/2"}, "t": {"u1": "1/3", "u2": "2/3"},
         "u1": {"x": 1}, "u2": {"x": 1}},
        {k: Exponential(1) for k in ["s", "t", "u1", "u2"]})
    part = bisimilarity(m)
    assert part.related("s", "t") and part.related("u1", "u2")


def test_glued_copies_are_bisimilar():
    row = {"a": {"b": 1}, "b": {"z": 1}}
    trans = {**row, **{k + "'": {v + "'": p for v, p in r.items()} for k, r in row.items()}}
    m = SmmModel.build(["a", "b", "z", "a'", "b'", "z'"], ["z", "z'"], trans,
                       {k: Exponential(2) for k in ["a", "b", "a'", "b'"]},
                       {"a": {"p"}, "a'": {"p"}})
    part = bisimilarity(m)
    assert all(part.related(s, s + "'") for s in "abz")


def test_different_labels_never_merge():
    m = SmmModel.build(["a", "b"], ["a", "b"], labels={"a": {"p"}})
    assert not bisimilarity(m).related("a", "b")


def test_gadget_blocks_split_by_label():
    m = build_MG(UndirectedGraph(3, {(1, 2), (2, 3), (1, 3)}))
    part = bisimilarity(m)
    for b in part.blocks:
        assert len({m.label(s) for s in b}) == 1


def test_canonical_block_order():
    m = random_model(3)
    p = bisimilarity(m)
    assert p == StatePartition.from_blocks(m, reversed(p.blocks))
