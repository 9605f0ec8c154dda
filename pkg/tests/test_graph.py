import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citepredict.corpus import Corpus, PublicationRecord
from citepredict.graph import (
    WeightedGraph,
    build_author_network,
    build_publication_network,
    read_edgelist,
    write_edgelist,
    yearly_author_networks,
)


def rec(pid, year, *authors):
    return PublicationRecord(pid, year, tuple(authors), "text", 1.0, 0)


def brute_author_weights(records):
    w = {}
    for r in records:
        for a, b in itertools.combinations(sorted(r.author_ids), 2):
            w[(a, b)] = w.get((a, b), 0) + 1
    return w


def brute_pub_weights(records):
    w = {}
    for r, s in itertools.combinations(sorted(records, key=lambda r: r.pub_id), 2):
        shared = len(set(r.author_ids) & set(s.author_ids))
        if shared:
            w[(r.pub_id, s.pub_id)] = shared
    return w


def test_three_shared_authors_weight_three():
    c = Corpus.from_records([rec("p1", 2010, "a", "b", "c", "d"), rec("p2", 2010, "a", "b", "c", "e")])
    g = build_publication_network(c, [2010])
    assert g.weight("p1", "p2") == 3


def test_author_network_counts_coauthored_papers():
    c = Corpus.from_records([rec("p1", 2010, "a", "b"), rec("p2", 2011, "a", "b", "c"), rec("p3", 2011, "d")])
    g = build_author_network(c, [2010, 2011])
    assert g.weight("a", "b") == 2
    assert g.weight("b", "c") == 1
    assert g.n == 4 and "d" in g and g.degree(g.index("d")) == 0


def test_empty_or_out_of_window_selection_raises():
    c = Corpus.from_records([rec("p1", 2010, "a")])
    with pytest.raises(ValueError):
        build_author_network(c, [])
    with pytest.raises(ValueError):
        build_author_network(c, [1999])


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        WeightedGraph(["a"], [("a", "a", 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph(["a", "b"], [("a", "b", 0.0)])
    with pytest.raises(ValueError):
        WeightedGraph(["a", "b"], [("a", "b", 1.0), ("b", "a", 1.0)])


def test_adjacency_sorted():
    g = WeightedGraph(["c", "a", "b"], [("c", "a", 1.0), ("b", "c", 2.0), ("a", "b", 1.0)])
    assert g.node_ids == ("a", "b", "c")
    for i in range(g.n):
        nb = g.indices[g.indptr[i]:g.indptr[i + 1]]
        assert list(nb) == sorted(nb)


corpus_st = st.lists(
    st.tuples(st.integers(2010, 2012), st.sets(st.sampled_from("abcdefgh"), min_size=1, max_size=5)),
    min_size=1,
    max_size=25,
).map(lambda rows: Corpus.from_records([rec(f"p{i:02d}", y, *sorted(a)) for i, (y, a) in enumerate(rows)]))


@settings(max_examples=80, deadline=None)
@given(corpus_st)
def test_weights_match_pairwise_intersection(c):
    years = c.years
    ga = build_author_network(c, years)
    gp = build_publication_network(c, years)
    assert {(u, v): w for u, v, w in ga.edges()} == brute_author_weights(c.records)
    assert {(u, v): w for u, v, w in gp.edges()} == brute_pub_weights(c.records)
    assert ga.n == len({a for r in c for a in r.author_ids})
    assert gp.n == len(c)
    sizes = {r.pub_id: r.n_authors for r in c}
    for u, v, w in gp.edges():
        assert w <= min(sizes[u], sizes[v])


@settings(max_examples=50, deadline=None)
@given(corpus_st)
def test_multi_year_weight_is_sum_of_yearly(c):
    total = build_author_network(c, c.years)
    yearly = yearly_author_networks(c)
    summed = {}
    for g in yearly.values():
        for u, v, w in g.edges():
            summed[(u, v)] = summed.get((u, v), 0) + w
    assert {(u, v): w for u, v, w in total.edges()} == summed


def test_edgelist_round_trip_keeps_isolates(tmp_path):
    g = WeightedGraph(["a", "b", "c", "z"], [("b", "a", 2.0), ("b", "c", 0.5)])
    path = tmp_path / "g.edges"
    write_edgelist(g, path, ["seed=0"])
    text = path.read_text().splitlines()
    assert text == ["# seed=0", "a b 2", "b c 0.5"]
    assert read_edgelist(path, g.node_ids) == g
    assert read_edgelist(path).n == 3


def test_edgelist_rejects_whitespace_ids(tmp_path):
    g = WeightedGraph(["a b", "c"], [("a b", "c", 1.0)])
    with pytest.raises(ValueError):
        write_edgelist(g, tmp_path / "g.edges")


def test_csr_arrays_are_read_only():
    g = WeightedGraph(["a", "b"], [("a", "b", 1.0)])
    with pytest.raises(ValueError):
        g.weights[0] = 5.0
    assert np.all(g.weights == 1.0)
