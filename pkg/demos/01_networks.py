"""Co-authorship and publication networks on a hand-made corpus.

Run with ``python3 demos/01_networks.py``.
"""

from citepredict import (
    Corpus,
    PublicationRecord,
    build_author_network,
    build_publication_network,
    node_metrics,
    rotating_leadership,
)
from citepredict.centrality import betweenness_series
from citepredict.graph import yearly_author_networks

# six papers over three years; "ana" and "bo" keep writing together
# and "bo" bridges two otherwise separate people in 2011
records = [
    PublicationRecord("p1", 2010, ("ana", "bo", "cy"), "", 1.2, 4),
    PublicationRecord("p2", 2010, ("ana", "bo"), "", 0.8, 1),
    PublicationRecord("p3", 2011, ("bo", "dee"), "", 2.0, 9),
    PublicationRecord("p4", 2012, ("ana", "bo", "cy", "eli"), "", 1.1, 3),
    PublicationRecord("p5", 2012, ("eli",), "", 0.5, 0),
    PublicationRecord("p6", 2011, ("bo", "fay"), "", 0.9, 2),
]
corpus = Corpus.from_records(records)

# author network: weight = number of papers written together
authors = build_author_network(corpus, corpus.years)
for u, v, w in authors.edges():
    print(f"{u:>4} -- {v:<4} {w:g}")

# publication network: weight = number of shared authors
pubs = build_publication_network(corpus, corpus.years)
print("p1-p4 share", pubs.weight("p1", "p4"), "authors")

# degree, betweenness, closeness and constraint in one pass
for a, m in node_metrics(authors).items():
    print(f"{a:>4}  deg {m.degree_w:3g}  btw {m.betweenness_norm:.3f}  clo {m.closeness_norm:.3f}  con {m.constraint:.3f}")

# rotating leadership: swings in yearly betweenness
series = betweenness_series(yearly_author_networks(corpus))
for a, s in series.items():
    print(a, [round(v, 3) for v in s.ordered()], "->", rotating_leadership(s))
