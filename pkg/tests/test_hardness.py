import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from smmdist.generators import random_graph
from smmdist.hardness import (SINK, UndirectedGraph, build_Mi, build_MG, build_MV, choice,
                              compose_seq, identity_gadget, inapprox_bound, max_clique_bruteforce,
                              max_clique_via_distance, mi_epsilon, recover_max_clique, rescale,
                              state_gadget, toeplitz_rhs)
from smmdist.oracle import exact_delta, word_distribution

K3 = UndirectedGraph(3, {(1, 2), (2, 3), (1, 3)})
A, O, B = frozenset(["alpha"]), frozenset(["omega"]), frozenset(["beta"])


def v(*ks):
    return tuple(frozenset([f"v{k}"]) for k in ks)


def words(gadget):
    m = gadget.to_model()
    return word_distribution(m, "alpha", len(m.states)).probs


def two_branch(x, y, p):
    return choice([state_gadget(frozenset([x])), state_gadget(frozenset([y]))], [p, 1 - p])


def test_identity_composition_is_neutral():
    g = two_branch("a", "b", Fraction(1, 3))
    assert words(compose_seq(identity_gadget(), g)) == words(g)
    assert words(compose_seq(g, identity_gadget())) == words(g)


def test_product_rule():
    g = compose_seq(two_branch("a", "b", Fraction(1, 2)), two_branch("c", "d", Fraction(1, 3)))
    got = sorted(words(g).values())
    assert got == sorted([Fraction(1, 6), Fraction(1, 3), Fraction(1, 6), Fraction(1, 3)])
    assert g.problems() == []


def test_associativity():
    g1, g2, g3 = (two_branch(x, y, Fraction(1, k)) for (x, y), k in
                  [(("a", "b"), 2), (("c", "d"), 3), (("e", "f"), 4)])
    assert words(compose_seq(compose_seq(g1, g2), g3)) == words(compose_seq(g1, compose_seq(g2, g3)))


def test_rescale_bounds_and_quarter():
    g = two_branch("a", "b", Fraction(1, 3))
    base = words(g)
    assert words(rescale(g, 1)) == base
    assert words(rescale(g, 0)) == {(A, B, O): 1}
    quarter = words(rescale(g, Fraction(1, 4)))
    for w, p in base.items():
        assert quarter[w] == p / 4
    assert quarter[A, B, O] == Fraction(3, 4)


def test_single_vertex_graph_model():
    g = UndirectedGraph(1, set())
    m = build_MG(g)
    assert word_distribution(m, "alpha").probs == {(A, *v(1), O): 1}


def test_vertex_model_n2():
    m = build_MV(2)
    wd = word_distribution(m, "alpha").probs
    q = Fraction(1, 4)
    assert wd == {(A, O): q, (A, *v(1), O): q, (A, *v(2), O): q, (A, *v(1, 2), O): q}


def subset_probability(graph, s):
    """Probability of the increasing word over vertex set ``s`` in the graph model."""
    owners = [u for u in s if all(w == u or graph.adjacent(u, w) for w in s)]
    return Fraction(len(owners), graph.gamma)


@given(st.integers(0, 10_000))
def test_word_probabilities_encode_cliques(seed):
    n, edges = random_graph(seed, max_n=6)
    g = UndirectedGraph(n, edges)
    m = build_MG(g)
    wd = word_distribution(m, "alpha", len(m.states)).probs
    for k in range(1, n + 1):
        for s in itertools.combinations(range(1, n + 1), k):
            p = wd.get((A, *v(*s), O), Fraction(0))
            assert p == subset_probability(g, s)
            assert (p == Fraction(k, g.gamma)) == g.is_clique(s)


def test_k3_edge_words():
    wd = word_distribution(build_MG(K3), "alpha").probs
    assert K3.gamma == 12
    for e in [(1, 2), (1, 3), (2, 3)]:
        assert wd[(A, *v(*e), O)] == Fraction(2, 12)


def test_epsilon_cases():
    assert mi_epsilon(K3, 1) == (1, Fraction(8, 12))
    assert mi_epsilon(UndirectedGraph(1, set()), 1) == (2, Fraction(1, 2))
    # one edge: gamma = 2 + 2 = 2^2, so i = 1 needs no beta mass
    g = UndirectedGraph(2, {(1, 2)})
    assert mi_epsilon(g, 1) == (1, Fraction(1))


def test_k3_first_distance_matches_word_counts():
    m, s, s2 = build_Mi(K3, 1)
    delta, hi = exact_delta(m, s, s2, len(m.states))
    assert delta == hi
    x = [0] * 4
    for k in range(4):
        for sub in itertools.combinations(range(1, 4), k):
            x[int(subset_probability(K3, sub) * K3.gamma)] += 1
    assert x == [1, 3, 3, 1]
    assert toeplitz_rhs(K3, 1, delta) == sum(xj * abs(j - 1) for j, xj in enumerate(x))


@pytest.mark.parametrize("graph, size", [
    (UndirectedGraph(1, set()), 1),
    (K3, 3),
    (UndirectedGraph(4, {(1, 2), (2, 3), (3, 4)}), 2),
    (UndirectedGraph(4, {(a, b) for a in range(1, 5) for b in range(a + 1, 5)}), 4),
    (UndirectedGraph(5, {(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)}), 2),
    (UndirectedGraph(3, set()), 1),
])
def test_pipeline_named_graphs(graph, size):
    x, got, _ = max_clique_via_distance(graph)
    assert got == size == max_clique_bruteforce(graph)
    assert sum(x) == 2 ** graph.n


@given(st.integers(0, 10_000))
def test_pipeline_random_graphs(seed):
    n, edges = random_graph(seed, max_n=6)
    g = UndirectedGraph(n, edges)
    assert max_clique_via_distance(g)[1] == max_clique_bruteforce(g)


def test_inconsistent_distances_rejected():
    with pytest.raises(ValueError):
        recover_max_clique(K3, [Fraction(1, 7)] * 3)
    with pytest.raises(ValueError):
        recover_max_clique(K3, [0, 0])


def test_inapprox_bound():
    assert inapprox_bound(2, 2) == Fraction(1, 8)
    with pytest.raises(ValueError):
        inapprox_bound(1, 2)


def test_graph_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        UndirectedGraph(2, {(1, 1)})
    with pytest.raises(ValueError):
        UndirectedGraph(2, {(1, 3)})
    import json
    (tmp_path / "g.json").write_text(json.dumps(K3.to_json()))
    assert UndirectedGraph.load(tmp_path / "g.json") == K3


def test_gadget_problems_detects_bad_mass():
    g = state_gadget(frozenset(["a"]))
    bad = type(g)(g.labels, g.trans, {0: Fraction(1, 2)}, g.exit)
    assert bad.problems()
    assert SINK == "sink"
