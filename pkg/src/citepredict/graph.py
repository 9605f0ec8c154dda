"""Weighted undirected co-authorship graphs.

Two constructions share one representation:

* the author network: authors are nodes, an edge's weight is the number of
  selected publications both authors appear on;
* the publication network: publications are nodes, an edge's weight is the
  number of authors the two bylines share.

Graphs are stored in compressed sparse row form with node ids sorted
lexicographically and each adjacency row sorted by neighbor index, so
iteration order (and every metric downstream) is reproducible.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus

__all__ = [
    "WeightedGraph",
    "build_author_network",
    "build_publication_network",
    "yearly_author_networks",
    "write_edgelist",
    "read_edgelist",
]


class WeightedGraph:
    """Immutable undirected graph with positive edge weights.

    Parameters
    ----------
    node_ids : sequence of str
        Node labels; stored in sorted order.
    edges : iterable of (str, str, float)
        Each undirected edge listed once. Self-loops, non-positive weights
        and repeated pairs are rejected.
    """

    def __init__(self, node_ids: Sequence[str], edges: Iterable[tuple[str, str, float]] = ()):
        ids = sorted(set(node_ids))
        if len(ids) != len(node_ids):
            raise ValueError("duplicate node id")
        pos = {v: i for i, v in enumerate(ids)}
        us, vs, ws = [], [], []
        for u, v, w in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if not w > 0:
                raise ValueError(f"edge ({u!r}, {v!r}) has non-positive weight {w}")
            us.append(pos[u])
            vs.append(pos[v])
            ws.append(float(w))
        self._init_arrays(tuple(ids), np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64), np.asarray(ws, dtype=np.float64))

    @classmethod
    def _from_index_pairs(cls, ids: Sequence[str], u, v, w) -> "WeightedGraph":
        g = cls.__new__(cls)
        g._init_arrays(tuple(ids), np.asarray(u, dtype=np.int64), np.asarray(v, dtype=np.int64), np.asarray(w, dtype=np.float64))
        return g

    def _init_arrays(self, ids, u, v, w):
        n = len(ids)
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys = lo * max(n, 1) + hi
        if len(np.unique(keys)) != len(keys):
            raise ValueError("repeated edge")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        wt = np.concatenate([w, w])
        order = np.lexsort((dst, src))
        src, dst, wt = src[order], dst[order], wt[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        self._ids = ids
        self._pos = {x: i for i, x in enumerate(ids)}
        self.indptr = indptr
        self.indices = dst
        self.weights = wt
        for arr in (self.indptr, self.indices, self.weights):
            arr.setflags(write=False)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def n(self) -> int:
        return len(self._ids)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def index(self, node_id: str) -> int:
        return self._pos[node_id]

    def __contains__(self, node_id) -> bool:
        return node_id in self._pos

    def neighbors(self, i: int):
        """(neighbor indices, weights) of node index ``i``, sorted by neighbor."""
        a, b = self.indptr[i], self.indptr[i + 1]
        return self.indices[a:b], self.weights[a:b]

    def weight(self, u: str, v: str) -> float:
        """Weight of edge (u, v), or 0.0 when absent."""
        i, j = self._pos[u], self._pos[v]
        nbr, w = self.neighbors(i)
        k = np.searchsorted(nbr, j)
        if k < len(nbr) and nbr[k] == j:
            return float(w[k])
        return 0.0

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])

    def edges(self):
        """Yield (u_id, v_id, weight) once per edge with u_id < v_id."""
        for i in range(self.n):
            nbr, w = self.neighbors(i)
            for j, x in zip(nbr.tolist(), w.tolist()):
                if j > i:
                    yield self._ids[i], self._ids[j], x

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self._ids == other._ids
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


@lru_cache(maxsize=None)
def _triu(k: int):
    return np.triu_indices(k, 1)


def _pair_counts(groups: Iterable[np.ndarray], n: int):
    """Count, over all groups, how often each unordered index pair co-occurs."""
    us, vs = [], []
    for grp in groups:
        k = len(grp)
        if k < 2:
            continue
        grp = np.sort(grp)
        a, b = _triu(k)
        us.append(grp[a])
        vs.append(grp[b])
    if not us:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    keys = np.concatenate(us) * n + np.concatenate(vs)
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq // n, uniq % n, counts.astype(np.float64)


def _check_years(corpus: Corpus, years) -> set:
    years = set(years)
    if not years:
        raise ValueError("empty year selection")
    window = set(corpus.years)
    if window and not years <= window:
        raise ValueError(f"years {sorted(years - window)} outside corpus window {corpus.year_window}")
    return years


def build_author_network(corpus: Corpus, years: Iterable[int]) -> WeightedGraph:
    """Co-authorship graph over the publications of the selected years.

    Every author of a selected publication is a node, including solo
    authors with no collaborators.
    """
    years = _check_years(corpus, years)
    recs = corpus.select(years)
    ids = sorted({a for r in recs for a in r.author_ids})
    pos = {a: i for i, a in enumerate(ids)}
    groups = (np.fromiter((pos[a] for a in r.author_ids), dtype=np.int64, count=r.n_authors) for r in recs)
    u, v, w = _pair_counts(groups, len(ids))
    return WeightedGraph._from_index_pairs(ids, u, v, w)


def build_publication_network(corpus: Corpus, years: Iterable[int]) -> WeightedGraph:
    """Publication graph: weight = number of authors shared by two bylines."""
    years = _check_years(corpus, years)
    recs = corpus.select(years)
    ids = sorted(r.pub_id for r in recs)
    pos = {p: i for i, p in enumerate(ids)}
    by_author: dict[str, list[int]] = {}
    for r in recs:
        for a in r.author_ids:
            by_author.setdefault(a, []).append(pos[r.pub_id])
    groups = (np.asarray(p, dtype=np.int64) for p in by_author.values())
    u, v, w = _pair_counts(groups, len(ids))
    return WeightedGraph._from_index_pairs(ids, u, v, w)


def yearly_author_networks(corpus: Corpus) -> dict[int, WeightedGraph]:
    """One author network per calendar year of the corpus window."""
    return {y: build_author_network(corpus, [y]) for y in corpus.years}


def _fmt(w: float) -> str:
    return format(w, ".12g")


def write_edgelist(g: WeightedGraph, path, header_lines: Sequence[str] = ()) -> None:
    """Write ``u v w`` lines in lexicographic (u, v) order with u < v."""
    for x in g.node_ids:
        if not x or any(c.isspace() for c in x):
            raise ValueError(f"node id {x!r} cannot be written to an edge list")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        for u, v, w in g.edges():
            fh.write(f"{u} {v} {_fmt(w)}\n")


def read_edgelist(path, nodes: Iterable[str] | None = None) -> WeightedGraph:
    """Load an edge list; ``nodes`` adds ids (e.g. isolates) absent from it."""
    ids = set(nodes or ())
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'u v w'")
            u, v, w = parts[0], parts[1], float(parts[2])
            ids.update((u, v))
            edges.append((u, v, w))
    return WeightedGraph(sorted(ids), edges)
