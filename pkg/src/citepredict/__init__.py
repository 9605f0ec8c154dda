"""Citation-impact prediction from co-authorship networks and abstract text.

Build author and publication networks from a bibliographic corpus, score
network centralities and abstract text metrics, label top-cited papers and
explain a boosted-tree classifier with exact SHAP values.
"""

from .centrality import (
    NodeMetrics,
    betweenness_all,
    closeness_all,
    constraint_all,
    degree_all,
    node_metrics,
    rotating_leadership,
)
from .corpus import Corpus, CorpusError, PublicationRecord, describe, filter_complete, parse_corpus, read_corpus
from .features import FeatureRow, FeatureTable, assemble, label_top_quantile
from .graph import WeightedGraph, build_author_network, build_publication_network
from .pipeline import RunConfig, load_config, run_all
from .synth import SynthConfig, generate

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusError",
    "PublicationRecord",
    "parse_corpus",
    "read_corpus",
    "filter_complete",
    "describe",
    "WeightedGraph",
    "build_author_network",
    "build_publication_network",
    "NodeMetrics",
    "degree_all",
    "betweenness_all",
    "closeness_all",
    "constraint_all",
    "node_metrics",
    "rotating_leadership",
    "FeatureRow",
    "FeatureTable",
    "assemble",
    "label_top_quantile",
    "SynthConfig",
    "generate",
    "RunConfig",
    "load_config",
    "run_all",
]
