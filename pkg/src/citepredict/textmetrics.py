"""Abstract-level text metrics: length, sentiment, complexity, lexical
diversity and commonness.

Text is lowercased and split on every non-alphanumeric character; tokens
shorter than two characters are discarded. Complexity, diversity and
commonness use stop-word-filtered Porter stems. Sentiment uses the
unfiltered lowercase words so negators such as "not" survive.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping, Sequence

from .porter import stem

__all__ = [
    "TokenizedAbstract",
    "CorpusTermTable",
    "TextMetrics",
    "LexiconError",
    "NEGATORS",
    "tokenize",
    "preprocess",
    "abstract_length",
    "sentiment",
    "complexity",
    "diversity",
    "commonness",
    "load_lexicon",
    "load_stopwords",
    "default_lexicon",
    "default_stopwords",
    "text_metrics",
]

_SPLIT = re.compile(r"[\W_]+")

# "don't" splits into "don" + "t", so contraction heads are listed too
NEGATORS = frozenset(
    """no not never none nobody nothing neither nor nowhere nope cannot cant without
    rarely seldom despite aint arent couldnt darent didnt doesnt dont hadnt hasnt havent
    isnt mightnt mustnt neednt oughtnt shant shouldnt wasnt werent wont wouldnt uhuh
    ain aren couldn didn doesn don hadn hasn haven isn mightn mustn needn shan shouldn
    wasn weren wouldn""".split()
)
NEGATION_WINDOW = 3
SENTIMENT_ALPHA = 15.0


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class TokenizedAbstract:
    raw_char_count: int
    tokens: tuple[str, ...]
    raw_tokens: tuple[str, ...]


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if len(t) >= 2]


def preprocess(abstract: str, stopwords: Iterable[str]) -> TokenizedAbstract:
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else frozenset(stopwords)
    raw = tokenize(abstract)
    tokens = tuple(stem(t) for t in raw if t not in stop)
    return TokenizedAbstract(abstract_length(abstract), tokens, tuple(raw))


def abstract_length(abstract: str) -> int:
    """Number of Unicode code points in the raw abstract."""
    return len(abstract)


def sentiment(raw_tokens: Sequence[str], lexicon: Mapping[str, float]) -> float:
    """Lexicon sum with negation, squashed into (-1, 1) by s / sqrt(s^2 + 15).

    A hit's valence is negated when any of the three preceding tokens is a
    negator.
    """
    s = 0.0
    for i, tok in enumerate(raw_tokens):
        v = lexicon.get(tok)
        if v is None:
            continue
        if any(t in NEGATORS for t in raw_tokens[max(0, i - NEGATION_WINDOW):i]):
            v = -v
        s += v
    if s == 0.0:
        return 0.0
    return s / math.sqrt(s * s + SENTIMENT_ALPHA)


def complexity(tokens: Sequence[str]) -> float:
    """Population standard deviation of the within-abstract stem counts."""
    if not tokens:
        return 0.0
    counts = list(Counter(tokens).values())
    mean = math.fsum(counts) / len(counts)
    return math.sqrt(math.fsum((c - mean) ** 2 for c in counts) / len(counts))


def diversity(tokens: Sequence[str]) -> float | None:
    """Unique stems over total tokens; ``None`` when there are no tokens."""
    if not tokens:
        return None
    return len(set(tokens)) / len(tokens)


class CorpusTermTable(Counter):
    """Corpus-wide occurrence count of every stem."""

    @classmethod
    def from_tokens(cls, token_lists: Iterable[Sequence[str]]) -> "CorpusTermTable":
        table = cls()
        for toks in token_lists:
            table.update(toks)
        return table

    def merge(self, other: "CorpusTermTable") -> "CorpusTermTable":
        out = CorpusTermTable(self)
        out.update(other)
        return out


def commonness(tokens: Sequence[str], table: Mapping[str, int]) -> float:
    """Mean corpus frequency over the abstract's token occurrences.

    Raises
    ------
    KeyError
        If a token is missing from ``table``, which means the table was not
        built from the corpus the abstract belongs to.
    """
    if not tokens:
        return 0.0
    total = 0
    for t in tokens:
        c = table.get(t, 0)
        if c < 1:
            raise KeyError(f"stem {t!r} missing from the corpus term table")
        total += c
    return total / len(tokens)


@dataclass(frozen=True)
class TextMetrics:
    length_chars: int
    sentiment: float
    complexity: float
    diversity: float | None
    commonness: float


def text_metrics(tok: TokenizedAbstract, lexicon, table) -> TextMetrics:
    return TextMetrics(
        length_chars=tok.raw_char_count,
        sentiment=sentiment(tok.raw_tokens, lexicon),
        complexity=complexity(tok.tokens),
        diversity=diversity(tok.tokens),
        commonness=commonness(tok.tokens, table),
    )


def _parse_lexicon(lines: Iterable[str], source: str) -> dict[str, float]:
    lex = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2 or not parts[0]:
            raise LexiconError(f"{source}:{lineno}: expected 'token<TAB>valence'")
        try:
            v = float(parts[1])
        except ValueError:
            raise LexiconError(f"{source}:{lineno}: valence {parts[1]!r} is not a number") from None
        if not -4.0 <= v <= 4.0:
            raise LexiconError(f"{source}:{lineno}: valence {v} outside [-4, 4]")
        lex[parts[0].lower()] = v
    return lex


def load_lexicon(path) -> dict[str, float]:
    with open(path, encoding="utf-8") as fh:
        return _parse_lexicon(fh, str(path))


def _parse_stopwords(lines):
    return frozenset(w.strip().lower() for w in lines if w.strip() and not w.startswith("#"))


def load_stopwords(path) -> frozenset:
    with open(path, encoding="utf-8") as fh:
        return _parse_stopwords(fh)


def default_lexicon() -> dict[str, float]:
    """The bundled VADER-derived word lexicon (MIT licensed, see data/)."""
    text = resources.files("citepredict.data").joinpath("lexicon.tsv").read_text(encoding="utf-8")
    return _parse_lexicon(text.splitlines(), "lexicon.tsv")


def default_stopwords() -> frozenset:
    text = resources.files("citepredict.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return _parse_stopwords(text.splitlines())
