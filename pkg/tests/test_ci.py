import random
from itertools import combinations

import pytest

from markovprune import fixtures
from markovprune.ci import d_separated, implied_independencies, markov_blanket
from markovprune.errors import SeparationError
from markovprune.graph import CausalGraph
from markovprune.sim import fill_coefficients, simulate

from conftest import all_paths, brute_separated, partial_corr, random_admg, random_dag

CHAIN = CausalGraph("ABC", [("A", "B"), ("B", "C")])
COLLIDER = CausalGraph("ABC", [("A", "B"), ("C", "B")])


def test_chain_blocked_by_middle():
    assert d_separated(CHAIN, {"A"}, {"C"}, {"B"})
    assert not d_separated(CHAIN, {"A"}, {"C"}, set())


def test_collider_opens_when_conditioned():
    assert d_separated(COLLIDER, {"A"}, {"C"}, set())
    assert not d_separated(COLLIDER, {"A"}, {"C"}, {"B"})


def test_collider_descendant_opens():
    g = CausalGraph("ABCD", [("A", "B"), ("C", "B"), ("B", "D")])
    assert not d_separated(g, {"A"}, {"C"}, {"D"})


def test_ex3_language_score_opens_latent_path():
    g = fixtures.load("ex3").graph
    assert not d_separated(g, {"C"}, {"M"}, {"S", "H", "Q", "L"})
    # without the direct and mediated paths, L alone still connects C and M
    cut = g.with_edges(directed=[e for e in g.directed_edges if e[0] != "C" or e[1] == "L"])
    assert d_separated(cut, "C", "M", {"S", "Q"})
    assert not d_separated(cut, "C", "M", {"S", "Q", "L"})


def test_bidirected_acts_as_latent_fork():
    g = CausalGraph("AB", [], [("A", "B")])
    assert not d_separated(g, "A", "B")
    g2 = CausalGraph("ABC", [("A", "C")], [("B", "C")])
    assert d_separated(g2, "A", "B")
    assert not d_separated(g2, "A", "B", "C")


def test_errors():
    with pytest.raises(SeparationError):
        d_separated(CHAIN, {"A"}, {"A"}, set())
    with pytest.raises(SeparationError):
        d_separated(CHAIN, {"A"}, {"C"}, {"A"})
    g = CausalGraph("UAB", [("U", "A"), ("U", "B")], latent=["U"])
    assert not d_separated(g, "A", "B")
    assert d_separated(g, "U", "B", "A") is False
    with pytest.raises(SeparationError):
        d_separated(g, "A", "B", {"U"})


def test_oracle_agreement_sample():
    rng = random.Random(3)
    for _ in range(60):
        g = random_admg(rng)
        for x, y in combinations(g.nodes, 2):
            paths = all_paths(g, x, y)
            rest = [v for v in g.observed if v not in (x, y)]
            for k in range(3):
                for z in combinations(rest, k):
                    assert d_separated(g, x, y, z) == brute_separated(g, x, y, z, paths)


def test_set_valued_queries_match_pairwise():
    rng = random.Random(8)
    for _ in range(50):
        g = random_admg(rng, max_nodes=6)
        obs = list(g.observed)
        if len(obs) < 4:
            continue
        a, b = obs[:2], obs[2:3]
        z = obs[3:4]
        expected = all(d_separated(g, x, y, z) for x in a for y in b)
        assert d_separated(g, a, b, z) == expected


def statements(g, k):
    return {(min(s.left), min(s.right), frozenset(s.given)) for s in implied_independencies(g, k)}


def test_implied_independencies_chain():
    assert statements(CHAIN, 1) == {("A", "C", frozenset({"B"}))}
    assert str(implied_independencies(CHAIN, 1)[0]) == "A _||_ C | B"


def test_implied_independencies_collider():
    assert statements(COLLIDER, 1) == {("A", "C", frozenset())}
    assert str(implied_independencies(COLLIDER, 1)[0]) == "A _||_ C"


def test_complete_dag_has_none():
    g = CausalGraph("ABC", [("A", "B"), ("A", "C"), ("B", "C")])
    assert implied_independencies(g, 3) == []


def test_implied_skips_latents():
    g = fixtures.load("ex4").graph
    assert all("U" not in s.left | s.right | s.given for s in implied_independencies(g, 2))


def test_markov_blanket_examples():
    assert markov_blanket(CHAIN, {"B"}) == {"A", "C"}
    assert markov_blanket(COLLIDER, {"A"}) == {"B", "C"}
    ex1 = fixtures.load("ex1").graph
    mb = markov_blanket(ex1, {"X"})
    assert mb == {"A", "C", "M"}
    assert d_separated(ex1, {"X"}, {"Y"}, mb)


def test_markov_blanket_requires_observed_dag():
    with pytest.raises(SeparationError):
        markov_blanket(fixtures.load("ex4").graph, {"S"})
    with pytest.raises(SeparationError):
        markov_blanket(CausalGraph("AB", [], [("A", "B")]), {"A"})


def test_markov_blanket_separates_on_random_dags():
    rng = random.Random(21)
    for _ in range(300):
        g = random_dag(rng)
        for size in (1, 2):
            if len(g.nodes) <= size:
                continue
            s = set(rng.sample(g.nodes, size))
            mb = markov_blanket(g, s)
            rest = set(g.nodes) - s - mb
            assert not (mb & s)
            if rest:
                assert d_separated(g, s, rest, mb)


def test_faithfulness_on_ex1():
    """Implied independencies vanish in data; one implied dependence does not."""
    model = fixtures.load("ex1")
    a = fill_coefficients(model, 0)
    data = simulate(model.graph, a, 50_000, 1)
    cols = list(data.columns)
    for s in implied_independencies(model.graph, 2):
        r = partial_corr(data.data, cols.index(min(s.left)), cols.index(min(s.right)),
                         [cols.index(v) for v in s.given])
        assert abs(r) < 0.02, str(s)
    # X and Y given C are dependent (mediated path)
    r = partial_corr(data.data, cols.index("X"), cols.index("Y"), [cols.index("C")])
    assert abs(r) > 0.05
