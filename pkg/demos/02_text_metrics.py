"""Abstract text metrics on two short abstracts.

Run with ``python3 demos/02_text_metrics.py``.
"""

from citepredict.porter import stem
from citepredict.textmetrics import (
    CorpusTermTable,
    default_lexicon,
    default_stopwords,
    preprocess,
    text_metrics,
)

abstracts = {
    "a": "We propose a simple and effective method. Results are good, not bad.",
    "b": "Networks of networks: growth, decline and failure of scientific networks.",
}

print([stem(w) for w in ("networks", "growth", "failure", "relational", "generalizations")])

stop = default_stopwords()
lexicon = default_lexicon()
tokens = {k: preprocess(v, stop) for k, v in abstracts.items()}
for k, t in tokens.items():
    print(k, t.tokens)

# commonness needs corpus-wide stem counts
table = CorpusTermTable.from_tokens(t.tokens for t in tokens.values())
for k, t in tokens.items():
    m = text_metrics(t, lexicon, table)
    print(f"{k}: length {m.length_chars}  sentiment {m.sentiment:+.3f}  complexity {m.complexity:.3f}"
          f"  diversity {m.diversity:.3f}  commonness {m.commonness:.3f}")
