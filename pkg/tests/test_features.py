import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citepredict.centrality import NodeMetrics
from citepredict.corpus import Corpus, PublicationRecord
from citepredict.features import (
    COLUMNS,
    PREDICTORS,
    FeatureRow,
    assemble,
    compute_inputs,
    label_top_quantile,
    nearest_rank_quantile,
    read_feature_table,
    write_feature_table,
)
from citepredict.textmetrics import TextMetrics, default_lexicon, default_stopwords


def row(pid, citations, sjr=1.0, **kw):
    vals = {f"x{i}": 0.0 for i in range(1, 15)}
    vals.update(kw)
    return FeatureRow(pub_id=pid, label=False, citations=citations, sjr=sjr, n_authors=1, **vals)


def rows_from(cites):
    return [row(f"p{i:05d}", c) for i, c in enumerate(cites)]


def test_feature_roster():
    assert PREDICTORS == ("sjr", "n_authors", *[f"x{i}" for i in range(1, 15)])
    assert COLUMNS[0] == "citations"


def test_quartile_label_strict_top_element():
    t = label_top_quantile(rows_from([0, 1, 2, 3]), 0.25)
    assert [r.label for r in t.rows] == [False, False, False, True]
    assert t.threshold == 2


def test_all_equal_citations_warns():
    with pytest.warns(RuntimeWarning, match="degenerate"):
        t = label_top_quantile(rows_from([5] * 8), 0.25)
    assert not any(r.label for r in t.rows)


def test_label_share_matches_sorting_oracle():
    rng = np.random.default_rng(0)
    cites = np.floor(np.exp(rng.normal(3, 1.2, 10_000))).astype(int).tolist()
    t = label_top_quantile(rows_from(cites), 0.25)
    s = sorted(cites)
    thr = s[int(np.ceil(0.75 * len(s))) - 1]
    expected = [c > thr for c in cites]
    assert [r.label for r in t.rows] == expected
    share = sum(expected) / len(cites)
    assert 0.23 <= share <= 0.27


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=2, max_size=40))
def test_label_invariant_under_increasing_transform(cites):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = label_top_quantile(rows_from(cites), 0.25)
        b = label_top_quantile(rows_from([c**2 + 3 for c in cites]), 0.25)
        wider = label_top_quantile(rows_from(cites), 0.40)
    assert [r.label for r in a.rows] == [r.label for r in b.rows]
    assert all(w or not x.label for x, w in zip(a.rows, [r.label for r in wider.rows]))


def test_nearest_rank_quantile():
    assert nearest_rank_quantile([4, 1, 3, 2], 0.5) == 2
    assert nearest_rank_quantile([4, 1, 3, 2], 0.75) == 3
    with pytest.raises(ValueError):
        nearest_rank_quantile([], 0.5)


def _fixture():
    recs = [
        PublicationRecord("p1", 2011, ("a", "b"), "x", 2.0, 10),
        PublicationRecord("p2", 2011, ("b",), "x", 1.0, 3),
        PublicationRecord("p0", 2010, ("a",), "x", 1.0, 1),
        PublicationRecord("p3", 2011, ("c",), "", 1.0, 1),
    ]
    corpus = Corpus.from_records(recs)
    pm = {r.pub_id: NodeMetrics(r.pub_id, 1.0, 0.1, 0.2, 0.3) for r in recs}
    am = {
        "a": NodeMetrics("a", 2.0, 0.0, 0.5, 1.0),
        "b": NodeMetrics("b", 4.0, 0.5, 1.0, 0.5),
        "c": NodeMetrics("c", 0.0, 0.0, 0.0, 1.0),
    }
    rot = {"a": 1, "b": 2, "c": 0}
    tm = TextMetrics(100, 0.5, 0.0, 1.0, 3.0)
    text = {"p0": tm, "p1": tm, "p2": tm, "p3": TextMetrics(0, 0.0, 0.0, None, 0.0)}
    return corpus, pm, am, rot, text


def test_assemble_aggregations_and_filters():
    corpus, pm, am, rot, text = _fixture()
    t = assemble(corpus, pm, am, rot, text, 2011)
    assert [r.pub_id for r in t.rows] == ["p1", "p2"]
    p1 = t.rows[0]
    assert p1.x5 == 3.0 and p1.x6 == 0.75 and p1.x8 == 0.25
    assert p1.x9 == 3.0
    t_max = assemble(corpus, pm, am, rot, text, 2011, aggregation="max", rotating_aggregation="mean")
    assert t_max.rows[0].x5 == 4.0 and t_max.rows[0].x9 == 1.5
    assert t_max.metadata["aggregation"] == "max"


def test_assemble_missing_author_raises():
    corpus, pm, am, rot, text = _fixture()
    del am["b"]
    with pytest.raises(KeyError, match="'b'"):
        assemble(corpus, pm, am, rot, text, 2011)


def test_assemble_deterministic_csv(tmp_path):
    corpus, pm, am, rot, text = _fixture()
    paths = []
    for k in range(2):
        t = label_top_quantile(assemble(corpus, pm, am, rot, text, 2011).rows, 0.5)
        p = tmp_path / f"f{k}.csv"
        write_feature_table(t, p, ["seed=0"])
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    back = read_feature_table(paths[0])
    assert [r.label for r in back.rows] == [True, False]
    assert back.threshold == 3.0
    header = [ln for ln in paths[0].read_text().splitlines() if not ln.startswith("#")][0]
    assert header == "pub_id,label,citations,sjr,n_authors," + ",".join(f"x{i}" for i in range(1, 15))


def test_compute_inputs_covers_every_node():
    recs = [
        PublicationRecord("p1", 2010, ("a", "b"), "Good networks grow.", 1.0, 1),
        PublicationRecord("p2", 2011, ("b", "c"), "Networks are not bad.", 1.0, 2),
        PublicationRecord("p3", 2012, ("a", "c"), "Growth of networks.", 1.0, 3),
    ]
    c = Corpus.from_records(recs)
    inp = compute_inputs(c, default_lexicon(), default_stopwords())
    assert set(inp.pub_metrics) == {"p1", "p2", "p3"}
    assert set(inp.author_metrics) == set(inp.rotating) == {"a", "b", "c"}
    t = assemble(c, inp.pub_metrics, inp.author_metrics, inp.rotating, inp.text, 2012)
    assert len(t) == 1 and t.rows[0].x1 == 2.0
