import numpy as np
import pytest

from citepredict.corpus import filter_complete, parse_corpus, serialize_corpus
from citepredict.features import COLUMNS, assemble, compute_inputs, FeatureTable
from citepredict.stats import spearman
from citepredict.synth import SynthConfig, generate, normal_scores
from citepredict.textmetrics import default_lexicon, default_stopwords

SMALL = dict(n_authors=500, pubs_per_year=(150, 160, 170))


def test_same_seed_same_bytes():
    a = serialize_corpus(generate(SynthConfig(**SMALL, seed=4)))
    b = serialize_corpus(generate(SynthConfig(**SMALL, seed=4)))
    c = serialize_corpus(generate(SynthConfig(**SMALL, seed=5)))
    assert a == b
    assert a != c


def test_corpus_invariants_hold():
    corpus = generate(SynthConfig(**SMALL))
    assert parse_corpus(serialize_corpus(corpus)) == corpus
    kept, drops = filter_complete(corpus)
    assert len(kept) == len(corpus) and sum(drops.values()) == 0
    for r in corpus:
        assert len(set(r.author_ids)) == len(r.author_ids) >= 1
        assert r.sjr > 0 and r.citations >= 0 and r.abstract
    assert [len(corpus.select([y])) for y in corpus.years] == [150, 160, 170]


def test_byline_mean_close_to_config():
    cfg = SynthConfig(n_authors=3000, pubs_per_year=(2500, 2600), byline_mean=4.0, coefficients={})
    sizes = [r.n_authors for r in generate(cfg)]
    assert abs(np.mean(sizes) - 4.0) / 4.0 < 0.05


def test_citations_capped_and_heavy_tailed():
    corpus = generate(SynthConfig(**SMALL, coefficients={"sjr": 1.0}, citation_cap=200))
    cites = np.array([r.citations for r in corpus])
    assert cites.max() <= 200
    assert cites.std() > 0.5 * cites.mean()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_authors=10, byline_max=20),
        dict(pubs_per_year=(10, 0)),
        dict(coefficients={"unknown": 1.0}),
        dict(coefficients={"sjr": float("inf")}),
    ],
)
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(ValueError):
        SynthConfig(**kwargs)


def test_normal_scores_are_rank_based():
    z = normal_scores([10.0, 1.0, 5.0, 5.0])
    assert z[1] < z[2] == z[3] < z[0]
    assert np.allclose(normal_scores([1, 2, 3]), -normal_scores([3, 2, 1]))


def test_null_model_has_no_feature_citation_correlation():
    corpus = generate(SynthConfig(coefficients={}, seed=11))
    assert len(corpus) == 10_000
    inp = compute_inputs(corpus, default_lexicon(), default_stopwords())
    rows = []
    for y in corpus.years:
        rows += assemble(corpus, inp.pub_metrics, inp.author_metrics, inp.rotating, inp.text, y).rows
    table = FeatureTable(tuple(rows))
    assert len(table) == 10_000
    cites = table.column("citations")
    for name in COLUMNS[1:]:
        rho, _ = spearman(table.column(name), cites)
        assert abs(rho) <= 0.05, name
