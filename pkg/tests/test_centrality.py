import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from citepredict.centrality import (
    BetweennessSeries,
    betweenness_all,
    betweenness_series,
    closeness_all,
    constraint_all,
    degree_all,
    node_metrics,
    read_metrics,
    rotating_leadership,
    write_metrics,
)
from citepredict.graph import WeightedGraph


def graph_suite(count=50, max_n=12, p=0.3, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        ids, edges = oracles.random_graph_edges(rng, n, p)
        yield ids, edges


@pytest.mark.parametrize("case", range(10))
def test_betweenness_matches_path_enumeration(case):
    ids, edges = list(graph_suite(10, seed=case))[case]
    got = betweenness_all(WeightedGraph(ids, edges))
    want = oracles.betweenness(ids, edges)
    for x in ids:
        assert got[x] == pytest.approx(want[x], abs=1e-12)


def test_closeness_and_constraint_match_direct_formulas():
    for ids, edges in graph_suite(30, seed=5):
        g = WeightedGraph(ids, edges)
        clo, con = closeness_all(g), constraint_all(g)
        oc, ok = oracles.closeness(ids, edges), oracles.constraint(ids, edges)
        for x in ids:
            assert clo[x] == pytest.approx(oc[x], abs=1e-12)
            assert con[x] == pytest.approx(ok[x], abs=1e-12)


def test_known_small_graphs():
    tri = WeightedGraph("abc", [("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 1.0)])
    assert constraint_all(tri) == {"a": 1.125, "b": 1.125, "c": 1.125}
    dyad = WeightedGraph("ab", [("a", "b", 3.0)])
    assert constraint_all(dyad) == {"a": 1.0, "b": 1.0}
    star = WeightedGraph("cxyz", [("c", "x", 1.0), ("c", "y", 1.0), ("c", "z", 1.0)])
    assert betweenness_all(star)["c"] == 1.0
    assert closeness_all(star)["c"] == 1.0
    assert degree_all(star)["c"] == 3.0


def test_isolated_node_conventions():
    g = WeightedGraph(["a", "b", "c", "solo"], [("a", "b", 1.0), ("b", "c", 1.0)])
    m = node_metrics(g)["solo"]
    assert (m.betweenness_norm, m.closeness_norm, m.constraint, m.degree_w) == (0.0, 0.0, 1.0, 0.0)


def test_fewer_than_three_nodes_score_zero_betweenness():
    assert betweenness_all(WeightedGraph(["a"])) == {"a": 0.0}
    assert betweenness_all(WeightedGraph("ab", [("a", "b", 1.0)])) == {"a": 0.0, "b": 0.0}


def test_closeness_component_scaling():
    # two disjoint edges: each node reaches 1 of n-1 = 3 others at distance 1
    g = WeightedGraph("abcd", [("a", "b", 1.0), ("c", "d", 1.0)])
    assert closeness_all(g)["a"] == pytest.approx(1 / 3)


def test_results_independent_of_thread_count():
    rng = np.random.default_rng(3)
    ids, edges = oracles.random_graph_edges(rng, 700, 0.01)
    g = WeightedGraph(ids, edges)
    one = node_metrics(g, threads=1)
    many = node_metrics(g, threads=8)
    assert one == many


def test_betweenness_scale_check_against_networkx():
    nx = pytest.importorskip("networkx")
    rng = np.random.default_rng(11)
    ids, edges = oracles.random_graph_edges(rng, 300, 0.02)
    G = nx.Graph()
    G.add_nodes_from(ids)
    G.add_weighted_edges_from(edges)
    want = nx.betweenness_centrality(G, normalized=True)
    got = betweenness_all(WeightedGraph(ids, edges))
    assert max(abs(got[x] - want[x]) for x in ids) < 1e-12


def test_constraint_drops_when_a_hole_opens():
    # ego e with a 3-clique neighborhood, equal weights
    nodes = ["e", "a", "b", "c"]
    full = [(u, v, 1.0) for u, v in itertools.combinations(nodes, 2)]
    base = constraint_all(WeightedGraph(nodes, full))["e"]
    for drop in [("a", "b"), ("a", "c"), ("b", "c")]:
        holed = [x for x in full if (x[0], x[1]) != drop]
        assert constraint_all(WeightedGraph(nodes, holed))["e"] <= base


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 5), st.data())
def test_enumerated_clique_hole_property(k, data):
    nodes = ["e"] + [f"n{i}" for i in range(k - 1)]
    clique = [(u, v, 1.0) for u, v in itertools.combinations(nodes, 2)]
    removable = [x for x in clique if x[0] != "e" and x[1] != "e"]
    drop = data.draw(st.sampled_from(removable))
    before = constraint_all(WeightedGraph(nodes, clique))["e"]
    after = constraint_all(WeightedGraph(nodes, [x for x in clique if x is not drop]))["e"]
    assert after <= before + 1e-15


@pytest.mark.parametrize(
    "series,expected",
    [
        ([0.0, 0.5, 0.0], 1),
        ([0.5, 0.0, 0.5], 1),
        ([0.1, 0.2, 0.3], 0),
        ([0.5, 0.52, 0.5], 0),
        ([0.0, 0.3, 0.1, 0.4, 0.0], 3),
        ([0.2], 0),
        ([0.0, 0.0, 0.0], 0),
    ],
)
def test_rotating_leadership_counts(series, expected):
    assert rotating_leadership(series) == expected


def test_rotating_leadership_inputs():
    s = BetweennessSeries("a", {2012: 0.0, 2010: 0.0, 2011: 0.4})
    assert rotating_leadership(s) == 1
    assert rotating_leadership({2011: 0.4, 2010: 0.0, 2012: 0.0}) == 1
    with pytest.raises(ValueError):
        rotating_leadership([])
    with pytest.raises(ValueError):
        rotating_leadership([0.1, 0.2, 0.1], epsilon=-1)
    # a larger epsilon can only remove extrema
    assert rotating_leadership([0.5, 0.6, 0.5], epsilon=0.5) == 0


def test_betweenness_series_fills_absent_years():
    y1 = WeightedGraph("abc", [("a", "b", 1.0), ("b", "c", 1.0)])
    y2 = WeightedGraph("ab", [("a", "b", 1.0)])
    s = betweenness_series({2010: y1, 2011: y2}, ["b", "c"])
    assert s["b"].values == {2010: 1.0, 2011: 0.0}
    assert s["c"].values == {2010: 0.0, 2011: 0.0}


def test_metric_dump_round_trip(tmp_path):
    g = WeightedGraph("bac", [("a", "b", 2.0), ("b", "c", 1.0)])
    m = node_metrics(g)
    path = tmp_path / "m.txt"
    write_metrics(m, path, ["seed=0"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed=0"
    assert [ln.split()[0] for ln in lines[1:]] == ["a", "b", "c"]
    assert lines[2] == "b 3 1 1 0.555555555556"
    back = read_metrics(path)
    assert back["b"].constraint == pytest.approx(m["b"].constraint, rel=1e-11)
