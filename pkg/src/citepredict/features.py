"""Feature table assembly and top-quantile labeling.

Columns, in canonical order::

    citations, sjr, n_authors,
    x1..x4   degree, constraint, closeness, betweenness (publication network)
    x5..x8   degree, constraint, closeness, betweenness (author network,
             aggregated over the byline)
    x9       rotating leadership (aggregated over the byline)
    x10..x14 abstract length, sentiment, complexity, diversity, commonness

``sjr``, ``n_authors`` and ``x1..x14`` are the 16 predictors; ``citations``
is the outcome the label is derived from.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .centrality import (
    DEFAULT_EPSILON,
    NodeMetrics,
    betweenness_series,
    node_metrics,
    rotating_leadership_all,
)
from .corpus import Corpus
from .graph import build_author_network, build_publication_network, yearly_author_networks
from .textmetrics import CorpusTermTable, TextMetrics, preprocess, text_metrics

__all__ = [
    "PREDICTORS",
    "COLUMNS",
    "FEATURE_LABELS",
    "AGGREGATIONS",
    "FeatureRow",
    "FeatureTable",
    "FeatureInputs",
    "compute_inputs",
    "assemble",
    "nearest_rank_quantile",
    "label_top_quantile",
    "write_feature_table",
    "read_feature_table",
]

PREDICTORS = ("sjr", "n_authors", *[f"x{i}" for i in range(1, 15)])
COLUMNS = ("citations", *PREDICTORS)

FEATURE_LABELS = {
    "citations": "Citations",
    "sjr": "SJR",
    "n_authors": "Number of Authors",
    "x1": "Degree - publication network",
    "x2": "Constraint - publication network",
    "x3": "Closeness - publication network",
    "x4": "Betweenness - publication network",
    "x5": "Degree - author network",
    "x6": "Constraint - author network",
    "x7": "Closeness - author network",
    "x8": "Betweenness - author network",
    "x9": "Rotating Leadership",
    "x10": "Abstract Length",
    "x11": "Sentiment",
    "x12": "Complexity",
    "x13": "Diversity",
    "x14": "Commonness",
}

AGGREGATIONS: dict[str, Callable[[Sequence[float]], float]] = {
    "mean": lambda v: math.fsum(v) / len(v),
    "max": max,
    "sum": math.fsum,
}


@dataclass(frozen=True)
class FeatureRow:
    pub_id: str
    label: bool
    citations: int
    sjr: float
    n_authors: int
    x1: float
    x2: float
    x3: float
    x4: float
    x5: float
    x6: float
    x7: float
    x8: float
    x9: float
    x10: float
    x11: float
    x12: float
    x13: float
    x14: float

    def predictors(self) -> list[float]:
        return [float(getattr(self, c)) for c in PREDICTORS]


@dataclass(frozen=True)
class FeatureTable:
    rows: tuple[FeatureRow, ...]
    threshold: float | None = None
    metadata: Mapping[str, str] = field(default_factory=dict)

    feature_names = PREDICTORS

    def __len__(self):
        return len(self.rows)

    def matrix(self) -> np.ndarray:
        """Predictor matrix, shape (rows, 16)."""
        if not self.rows:
            return np.zeros((0, len(PREDICTORS)))
        return np.array([r.predictors() for r in self.rows], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows], dtype=bool)

    def column(self, name: str) -> np.ndarray:
        return np.array([float(getattr(r, name)) for r in self.rows], dtype=np.float64)

    def subset(self, idx) -> "FeatureTable":
        return replace(self, rows=tuple(self.rows[i] for i in idx))


@dataclass(frozen=True)
class FeatureInputs:
    """Everything :func:`assemble` joins, computed once per corpus."""

    pub_metrics: Mapping[str, NodeMetrics]
    author_metrics: Mapping[str, NodeMetrics]
    rotating: Mapping[str, int]
    text: Mapping[str, TextMetrics]


def compute_inputs(
    corpus: Corpus,
    lexicon: Mapping[str, float],
    stopwords: Iterable[str],
    epsilon: float = DEFAULT_EPSILON,
    threads: int = 1,
) -> FeatureInputs:
    """Build both networks over the full window and score every node and abstract."""
    years = corpus.years
    pub_net = build_publication_network(corpus, years)
    author_net = build_author_network(corpus, years)
    series = betweenness_series(yearly_author_networks(corpus), author_net.node_ids, threads)
    stop = frozenset(stopwords)
    tokenized = {r.pub_id: preprocess(r.abstract, stop) for r in corpus}
    table = CorpusTermTable.from_tokens(t.tokens for t in tokenized.values())
    return FeatureInputs(
        pub_metrics=node_metrics(pub_net, threads),
        author_metrics=node_metrics(author_net, threads),
        rotating=rotating_leadership_all(series, epsilon),
        text={p: text_metrics(t, lexicon, table) for p, t in tokenized.items()},
    )


def _complete(rec, text: TextMetrics | None) -> bool:
    return (
        bool(rec.author_ids)
        and bool(rec.abstract.strip())
        and rec.citations is not None
        and rec.sjr is not None
        and rec.sjr > 0
        and text is not None
        and text.diversity is not None
    )


def assemble(
    corpus: Corpus,
    pub_metrics: Mapping[str, NodeMetrics],
    author_metrics: Mapping[str, NodeMetrics],
    rotating: Mapping[str, int],
    text: Mapping[str, TextMetrics],
    prediction_year: int,
    aggregation: str = "mean",
    rotating_aggregation: str = "sum",
) -> FeatureTable:
    """Join network and text metrics into one row per prediction-year publication.

    Author-level metrics (x5-x8) are combined over the byline with
    ``aggregation``; rotating leadership (x9) with ``rotating_aggregation``.
    Publications with incomplete data are skipped. Rows are sorted by
    ``pub_id`` and left unlabeled.

    Raises
    ------
    KeyError
        If a publication or one of its authors has no network metrics.
    """
    agg = AGGREGATIONS[aggregation]
    ragg = AGGREGATIONS[rotating_aggregation]
    rows = []
    for rec in sorted(corpus.select([prediction_year]), key=lambda r: r.pub_id):
        tm = text.get(rec.pub_id)
        if not _complete(rec, tm):
            continue
        try:
            pm = pub_metrics[rec.pub_id]
        except KeyError:
            raise KeyError(f"publication {rec.pub_id!r} missing from the publication network") from None
        missing = [a for a in rec.author_ids if a not in author_metrics or a not in rotating]
        if missing:
            raise KeyError(f"author {missing[0]!r} of {rec.pub_id!r} missing from the author network")
        am = [author_metrics[a] for a in rec.author_ids]
        rows.append(
            FeatureRow(
                pub_id=rec.pub_id,
                label=False,
                citations=rec.citations,
                sjr=rec.sjr,
                n_authors=rec.n_authors,
                x1=pm.degree_w,
                x2=pm.constraint,
                x3=pm.closeness_norm,
                x4=pm.betweenness_norm,
                x5=agg([m.degree_w for m in am]),
                x6=agg([m.constraint for m in am]),
                x7=agg([m.closeness_norm for m in am]),
                x8=agg([m.betweenness_norm for m in am]),
                x9=float(ragg([rotating[a] for a in rec.author_ids])),
                x10=float(tm.length_chars),
                x11=tm.sentiment,
                x12=tm.complexity,
                x13=tm.diversity,
                x14=tm.commonness,
            )
        )
    meta = {
        "prediction_year": str(prediction_year),
        "aggregation": aggregation,
        "rotating_aggregation": rotating_aggregation,
    }
    return FeatureTable(tuple(rows), None, meta)


def nearest_rank_quantile(values: Sequence[float], p: float) -> float:
    """Smallest value with at least a fraction ``p`` of the data at or below it."""
    if not len(values):
        raise ValueError("quantile of an empty sequence")
    s = sorted(values)
    rank = max(1, math.ceil(p * len(s)))
    return s[min(rank, len(s)) - 1]


def label_top_quantile(rows, q: float = 0.25, on: str = "citations", strict: bool = True) -> FeatureTable:
    """Mark the top ``q`` fraction of rows by ``on`` as positive.

    The threshold is the nearest-rank (1 - q) quantile; a row is positive
    when its value exceeds it (or equals it, with ``strict=False``). Ties at
    the threshold make the positive share fall below ``q``.
    """
    table = rows if isinstance(rows, FeatureTable) else FeatureTable(tuple(rows))
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if not table.rows:
        raise ValueError("cannot label an empty table")
    vals = [getattr(r, on) for r in table.rows]
    thr = nearest_rank_quantile(vals, 1 - q)
    labeled = tuple(replace(r, label=bool(v > thr if strict else v >= thr)) for r, v in zip(table.rows, vals))
    if len({r.label for r in labeled}) == 1:
        warnings.warn(f"degenerate labeling: every row labeled {labeled[0].label}", RuntimeWarning, stacklevel=2)
    meta = {**table.metadata, "label_quantile": repr(q), "label_on": on, "label_strict": str(strict).lower()}
    return FeatureTable(labeled, float(thr), meta)


def _fmt(x) -> str:
    return format(float(x), ".12g")


def write_feature_table(table: FeatureTable, path, header_lines: Sequence[str] = ()) -> None:
    """CSV with ``#`` comment lines for metadata, then ``pub_id,label,citations,...``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        for k in sorted(table.metadata):
            fh.write(f"# {k}={table.metadata[k]}\n")
        if table.threshold is not None:
            fh.write(f"# label_threshold={_fmt(table.threshold)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pub_id", "label", *COLUMNS])
        for r in sorted(table.rows, key=lambda r: r.pub_id):
            w.writerow([r.pub_id, int(r.label), r.citations, _fmt(r.sjr), r.n_authors, *[_fmt(getattr(r, f"x{i}")) for i in range(1, 15)]])


def read_feature_table(path) -> FeatureTable:
    meta = {}
    body = []
    with open(path, encoding="utf-8", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, sep, val = line[1:].strip().partition("=")
                if sep:
                    meta[key.strip()] = val.strip()
            elif line.strip():
                body.append(line)
    reader = csv.DictReader(body)
    expected = ["pub_id", "label", *COLUMNS]
    if reader.fieldnames != expected:
        raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
    rows = []
    for rec in reader:
        vals = {k: float(rec[k]) for k in COLUMNS}
        if not all(math.isfinite(v) for v in vals.values()):
            raise ValueError(f"{path}: non-finite value in row {rec['pub_id']}")
        vals["citations"] = int(vals["citations"])
        vals["n_authors"] = int(vals["n_authors"])
        rows.append(FeatureRow(pub_id=rec["pub_id"], label=rec["label"] == "1", **vals))
    thr = meta.pop("label_threshold", None)
    return FeatureTable(tuple(rows), float(thr) if thr is not None else None, meta)
