"""Synthetic corpora with preferential-attachment bylines and planted citation signal.

Citations are ``floor(exp(latent))`` capped at ``citation_cap``, where

    latent = intercept + sum_f coef_f * z_f + noise * eps

and ``z_f`` is the normal score (rank-based standardization over all
publications) of feature ``f`` as the pipeline itself measures it. Planting
an effect on e.g. rotating leadership therefore plants it on exactly the
column the model later sees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import ndtri

from .centrality import betweenness_series, node_metrics, rotating_leadership_all
from .corpus import Corpus, PublicationRecord
from .features import AGGREGATIONS, PREDICTORS
from .graph import build_author_network, build_publication_network, yearly_author_networks
from .stats import rankdata
from .textmetrics import (
    NEGATORS,
    CorpusTermTable,
    default_lexicon,
    default_stopwords,
    preprocess,
    text_metrics,
)

__all__ = ["SynthConfig", "generate", "normal_scores"]

_ONSETS = "b c d f g h k l m n p r s t v w z br cr dr fl gr pl pr st tr".split()
_NUCLEI = "a e i o u ai ea io ou".split()
_CODAS = ["", "", "n", "r", "s", "l", "t", "m"]
_SUFFIXES = ["", "", "", "s", "ing", "ed", "ation", "ity", "al", "ness", "ment", "ive", "ize", "er"]
_FUNCTION_WORDS = ("the", "of", "and", "in", "to", "is", "for", "with", "by", "on", "was", "are", "this", "that", "we", "from", "as", "at")


@dataclass(frozen=True)
class SynthConfig:
    n_authors: int = 8000
    pubs_per_year: tuple[int, ...] = (3200, 3350, 3450)
    first_year: int = 2010
    byline_mean: float = 4.35
    byline_max: int = 40
    attachment_strength: float = 1.0
    attachment_floor: float = 1.0
    n_journals: int = 300
    sjr_log_mean: float = 0.2
    sjr_log_sd: float = 0.7
    vocab_size: int = 3000
    zipf_exponent: float = 1.1
    abstract_words_mean: float = 170.0
    abstract_words_sd: float = 60.0
    stopword_rate: float = 0.3
    sentiment_rate: float = 0.04
    negation_rate: float = 0.2
    coefficients: Mapping[str, float] = field(default_factory=lambda: {"sjr": 1.5, "x9": 0.8})
    intercept: float = 3.0
    noise: float = 0.6
    citation_cap: int = 10000
    seed: int = 0

    def __post_init__(self):
        if self.n_authors < 1 or not self.pubs_per_year or min(self.pubs_per_year) < 1:
            raise ValueError("author and publication counts must be positive")
        if self.byline_mean < 1 or self.byline_max < 1:
            raise ValueError("byline sizes must be at least 1")
        if self.byline_max > self.n_authors:
            raise ValueError(f"byline_max {self.byline_max} exceeds n_authors {self.n_authors}")
        if self.n_journals < 1 or self.vocab_size < 1:
            raise ValueError("n_journals and vocab_size must be positive")
        unknown = set(self.coefficients) - set(PREDICTORS)
        if unknown:
            raise ValueError(f"unknown planted features {sorted(unknown)}")
        if not all(math.isfinite(c) for c in self.coefficients.values()):
            raise ValueError("planted coefficients must be finite")

    @property
    def years(self) -> list[int]:
        return [self.first_year + i for i in range(len(self.pubs_per_year))]


def normal_scores(values) -> np.ndarray:
    """Rank-based standardization: Phi^-1((rank - 0.5) / n), ties averaged."""
    r = rankdata(values)
    return ndtri((r - 0.5) / len(r))


def _vocabulary(rng, size):
    words = []
    seen = set()
    while len(words) < size:
        n_syl = int(rng.integers(1, 4))
        w = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _NUCLEI[rng.integers(len(_NUCLEI))] + _CODAS[rng.integers(len(_CODAS))]
            for _ in range(n_syl)
        )
        w += _SUFFIXES[rng.integers(len(_SUFFIXES))]
        if len(w) >= 3 and w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _abstract(rng, cfg, vocab, zipf_cdf, sentiment_words, stop_words):
    n_words = max(20, int(round(rng.normal(cfg.abstract_words_mean, cfg.abstract_words_sd))))
    u = rng.random(n_words)
    content = np.searchsorted(zipf_cdf, rng.random(n_words), side="right")
    picks = rng.integers(0, 1 << 30, size=n_words)
    negate = rng.random(n_words) < cfg.negation_rate
    out = []
    for i in range(n_words):
        if u[i] < cfg.stopword_rate:
            out.append(stop_words[picks[i] % len(stop_words)])
        elif u[i] < cfg.stopword_rate + cfg.sentiment_rate:
            if negate[i]:
                out.append("not")
            out.append(sentiment_words[picks[i] % len(sentiment_words)])
        else:
            out.append(vocab[min(content[i], len(vocab) - 1)])
    sentences = []
    pos = 0
    while pos < len(out):
        k = int(rng.integers(10, 21))
        chunk = out[pos:pos + k]
        pos += k
        sentences.append(" ".join(chunk).capitalize() + ".")
    return " ".join(sentences)


def _bylines(rng, cfg):
    weights = np.zeros(cfg.n_authors)
    out = []
    for year, n_pubs in zip(cfg.years, cfg.pubs_per_year):
        for _ in range(n_pubs):
            k = 1 + int(rng.poisson(cfg.byline_mean - 1.0))
            k = min(k, cfg.byline_max)
            p = cfg.attachment_strength * weights + cfg.attachment_floor
            chosen = rng.choice(cfg.n_authors, size=k, replace=False, p=p / p.sum())
            weights[chosen] += 1.0
            out.append((year, tuple(f"a{a:06d}" for a in chosen)))
    return out


def generate(cfg: SynthConfig = SynthConfig()) -> Corpus:
    """Draw a complete synthetic corpus; identical configs give identical corpora."""
    rng = np.random.default_rng(cfg.seed)
    lexicon = default_lexicon()
    stop = default_stopwords()
    sent_pool = sorted(w for w in lexicon if w.isalpha() and w not in stop and w not in NEGATORS and len(w) > 3)
    sentiment_words = [sent_pool[i] for i in sorted(rng.choice(len(sent_pool), size=min(200, len(sent_pool)), replace=False))]
    vocab = [w for w in _vocabulary(rng, cfg.vocab_size + 50) if w not in stop and w not in lexicon][: cfg.vocab_size]
    ranks = np.arange(1, len(vocab) + 1, dtype=np.float64)
    zipf = ranks ** -cfg.zipf_exponent
    zipf_cdf = np.cumsum(zipf / zipf.sum())
    sjr_by_journal = np.round(np.maximum(rng.lognormal(cfg.sjr_log_mean, cfg.sjr_log_sd, cfg.n_journals), 0.1), 3)

    bylines = _bylines(rng, cfg)
    n = len(bylines)
    journals = rng.integers(0, cfg.n_journals, size=n)
    eps = rng.standard_normal(n)
    abstracts = [_abstract(rng, cfg, vocab, zipf_cdf, sentiment_words, _FUNCTION_WORDS) for _ in range(n)]

    counters = {}
    records = []
    for (year, authors), j, text in zip(bylines, journals, abstracts):
        counters[year] = counters.get(year, 0) + 1
        pid = f"p{year}-{counters[year]:06d}"
        records.append(PublicationRecord(pid, year, authors, text, float(sjr_by_journal[j]), 0))
    provisional = Corpus.from_records(records, (cfg.years[0], cfg.years[-1]))

    latent = cfg.intercept + cfg.noise * eps
    active = {f: c for f, c in cfg.coefficients.items() if c != 0.0}
    if active:
        values = _feature_values(provisional, lexicon, stop, sorted(active))
        for f in sorted(active):
            latent = latent + active[f] * normal_scores(values[f])
    cites = np.minimum(np.floor(np.exp(latent)), cfg.citation_cap).astype(np.int64)
    final = [PublicationRecord(r.pub_id, r.year, r.author_ids, r.abstract, r.sjr, int(c)) for r, c in zip(records, cites)]
    return Corpus.from_records(final, provisional.year_window)


def _feature_values(corpus: Corpus, lexicon, stop, names) -> dict[str, np.ndarray]:
    """Per-feature values aligned with corpus record order.

    Only the network and text metrics that some planted feature needs are
    computed; values match what :func:`assemble` would produce with the
    default aggregations.
    """
    recs = corpus.records
    groups = {
        "pub": {"x1", "x2", "x3", "x4"},
        "author": {"x5", "x6", "x7", "x8"},
        "rotating": {"x9"},
        "text": {"x10", "x11", "x12", "x13", "x14"},
    }
    need = {k for k, cols in groups.items() if cols & set(names)}
    out: dict[str, np.ndarray] = {}
    if "sjr" in names:
        out["sjr"] = np.array([r.sjr for r in recs])
    if "n_authors" in names:
        out["n_authors"] = np.array([float(r.n_authors) for r in recs], dtype=np.float64)
    if "pub" in need:
        pm = node_metrics(build_publication_network(corpus, corpus.years))
        for col, attr in zip(("x1", "x2", "x3", "x4"), _METRIC_ATTRS):
            out[col] = np.array([getattr(pm[r.pub_id], attr) for r in recs])
    if "author" in need:
        am = node_metrics(build_author_network(corpus, corpus.years))
        for col, attr in zip(("x5", "x6", "x7", "x8"), _METRIC_ATTRS):
            out[col] = np.array([AGGREGATIONS["mean"]([getattr(am[a], attr) for a in r.author_ids]) for r in recs])
    if "rotating" in need:
        rl = rotating_leadership_all(betweenness_series(yearly_author_networks(corpus)))
        out["x9"] = np.array([float(sum(rl[a] for a in r.author_ids)) for r in recs])
    if "text" in need:
        tok = [preprocess(r.abstract, stop) for r in recs]
        table = CorpusTermTable.from_tokens(t.tokens for t in tok)
        tm = [text_metrics(t, lexicon, table) for t in tok]
        out["x10"] = np.array([float(m.length_chars) for m in tm])
        out["x11"] = np.array([m.sentiment for m in tm])
        out["x12"] = np.array([m.complexity for m in tm])
        out["x13"] = np.array([m.diversity if m.diversity is not None else 0.0 for m in tm])
        out["x14"] = np.array([m.commonness for m in tm])
    return {f: out[f] for f in names}


_METRIC_ATTRS = ("degree_w", "constraint", "closeness_norm", "betweenness_norm")
