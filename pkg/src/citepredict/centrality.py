"""Network metrics: weighted degree, betweenness, closeness, Burt constraint
and rotating leadership.

Shortest paths count hops; edge weights are tie strengths and only enter
the degree and constraint scores. All metrics are pure functions of an
immutable :class:`~citepredict.graph.WeightedGraph`. Passing ``threads > 1``
spreads the per-source work over a thread pool; results are identical for
every thread count because the work is split into fixed-size chunks that are
reduced in chunk order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .graph import WeightedGraph

__all__ = [
    "NodeMetrics",
    "BetweennessSeries",
    "degree_all",
    "betweenness_all",
    "closeness_all",
    "constraint_all",
    "node_metrics",
    "betweenness_series",
    "rotating_leadership",
    "rotating_leadership_all",
    "write_metrics",
    "read_metrics",
    "DEFAULT_EPSILON",
]

DEFAULT_EPSILON = 0.10
_ABS_FLOOR = 1e-12
_CHUNK = 256
_WAVE = 16


def _lanes(n: int) -> int:
    # per-thread scratch is 2 * n * lanes doubles
    return 64 if n <= 65536 else 16


@dataclass(frozen=True)
class NodeMetrics:
    node_id: str
    degree_w: float
    betweenness_norm: float
    closeness_norm: float
    constraint: float


def _chunks(n: int):
    return [(a, min(a + _CHUNK, n)) for a in range(0, n, _CHUNK)]


def _run_chunks(fn, chunks, threads):
    """Apply ``fn`` to every chunk; yields results in chunk order, one wave at a time."""
    if threads <= 1 or len(chunks) <= 1:
        for c in chunks:
            yield fn(c)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for w in range(0, len(chunks), _WAVE):
            yield from pool.map(fn, chunks[w:w + _WAVE])


def _bfs_pass(g: WeightedGraph, threads: int = 1):
    n = g.n
    raw = np.zeros(n)
    dist_sum = np.zeros(n)
    reached = np.ones(n, dtype=np.int64)
    indptr, indices = g.indptr, g.indices
    lanes = _lanes(n)

    def work(c):
        return c, _kernels.brandes_chunk(indptr, indices, c[0], c[1], lanes)

    for (a, b), (bc, ds, rc) in _run_chunks(work, _chunks(n), threads):
        raw += bc
        dist_sum[a:b] = ds
        reached[a:b] = rc
    return raw / 2.0, dist_sum, reached


def degree_all(g: WeightedGraph) -> dict[str, float]:
    """Sum of incident edge weights per node."""
    deg = _degree_array(g)
    return dict(zip(g.node_ids, deg.tolist()))


def _degree_array(g):
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    return np.bincount(src, weights=g.weights, minlength=g.n).astype(np.float64)


def _normalize_betweenness(raw, n):
    if n < 3:
        return np.zeros(n)
    return raw / ((n - 1) * (n - 2) / 2.0)


def _normalize_closeness(dist_sum, reached, n):
    out = np.zeros(n)
    ok = (reached > 1) & (dist_sum > 0)
    nc = reached[ok] - 1.0
    out[ok] = (nc / dist_sum[ok]) * (nc / (n - 1))
    return out


def betweenness_all(g: WeightedGraph, threads: int = 1) -> dict[str, float]:
    """Betweenness over hop-count shortest paths, divided by (n-1)(n-2)/2.

    Uses Brandes' dependency accumulation, O(nm). Graphs with fewer than
    three nodes score zero everywhere.
    """
    raw, _, _ = _bfs_pass(g, threads)
    return dict(zip(g.node_ids, _normalize_betweenness(raw, g.n).tolist()))


def closeness_all(g: WeightedGraph, threads: int = 1) -> dict[str, float]:
    """Closeness within each node's component, rescaled by (n_c - 1)/(n - 1).

    On a connected graph this is (n - 1) / sum of hop distances. Isolated
    nodes score 0.
    """
    _, ds, rc = _bfs_pass(g, threads)
    return dict(zip(g.node_ids, _normalize_closeness(ds, rc, g.n).tolist()))


def _constraint_array(g, threads=1):
    strength = _degree_array(g)
    out = np.empty(g.n)

    def work(c):
        return c, _kernels.constraint_chunk(g.indptr, g.indices, g.weights, strength, c[0], c[1])

    for (a, b), vals in _run_chunks(work, _chunks(g.n), threads):
        out[a:b] = vals
    return out


def constraint_all(g: WeightedGraph, threads: int = 1) -> dict[str, float]:
    r"""Burt's network constraint of every node.

    .. math::

       c_i = \sum_{j \in N(i)} \Big(p_{ij} + \sum_{q \in N(i) \cap N(j)} p_{iq} p_{qj}\Big)^2

    with :math:`p_{ij} = w_{ij} / \sum_k w_{ik}`. Isolated nodes get 1.0.
    """
    return dict(zip(g.node_ids, _constraint_array(g, threads).tolist()))


def node_metrics(g: WeightedGraph, threads: int = 1) -> dict[str, NodeMetrics]:
    """All four per-node metrics from a single BFS pass."""
    raw, ds, rc = _bfs_pass(g, threads)
    bet = _normalize_betweenness(raw, g.n)
    clo = _normalize_closeness(ds, rc, g.n)
    deg = _degree_array(g)
    con = _constraint_array(g, threads)
    return {
        x: NodeMetrics(x, float(deg[i]), float(bet[i]), float(clo[i]), float(con[i]))
        for i, x in enumerate(g.node_ids)
    }


@dataclass(frozen=True)
class BetweennessSeries:
    author_id: str
    values: Mapping[int, float]

    def ordered(self) -> list[float]:
        return [self.values[y] for y in sorted(self.values)]


def betweenness_series(
    yearly: Mapping[int, WeightedGraph],
    authors: Iterable[str] | None = None,
    threads: int = 1,
) -> dict[str, BetweennessSeries]:
    """Yearly normalized betweenness per author, 0 in years the author is absent."""
    per_year = {y: betweenness_all(g, threads) for y, g in sorted(yearly.items())}
    if authors is None:
        authors = sorted({a for b in per_year.values() for a in b})
    return {
        a: BetweennessSeries(a, {y: b.get(a, 0.0) for y, b in per_year.items()})
        for a in authors
    }


def _significant(a: float, b: float, epsilon: float) -> bool:
    return abs(a - b) > epsilon * max(a, b, _ABS_FLOOR)


def rotating_leadership(series, epsilon: float = DEFAULT_EPSILON) -> int:
    """Count significant local extrema in a chronological betweenness series.

    An interior point counts when it is a strict local maximum or minimum
    and the changes from both neighbors exceed ``epsilon`` times the larger
    of the two values involved.

    ``series`` may be a :class:`BetweennessSeries`, a year -> value mapping
    or a plain sequence already in chronological order.
    """
    if isinstance(series, BetweennessSeries):
        values = series.ordered()
    elif isinstance(series, Mapping):
        values = [series[y] for y in sorted(series)]
    else:
        values = list(series)
    if not values:
        raise ValueError("empty betweenness series")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    count = 0
    for t in range(1, len(values) - 1):
        prev, cur, nxt = values[t - 1], values[t], values[t + 1]
        extremum = (cur > prev and cur > nxt) or (cur < prev and cur < nxt)
        if extremum and _significant(cur, prev, epsilon) and _significant(cur, nxt, epsilon):
            count += 1
    return count


def rotating_leadership_all(series: Mapping[str, BetweennessSeries], epsilon: float = DEFAULT_EPSILON) -> dict[str, int]:
    return {a: rotating_leadership(s, epsilon) for a, s in series.items()}


def _fmt(x: float) -> str:
    return format(x, ".12g")


def write_metrics(metrics: Mapping[str, NodeMetrics], path, header_lines: Sequence[str] = ()) -> None:
    """Dump ``id degree betweenness closeness constraint``, ids in lexicographic order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        for x in sorted(metrics):
            m = metrics[x]
            fh.write(f"{x} {_fmt(m.degree_w)} {_fmt(m.betweenness_norm)} {_fmt(m.closeness_norm)} {_fmt(m.constraint)}\n")


def read_metrics(path) -> dict[str, NodeMetrics]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields")
            vals = [float(p) for p in parts[1:]]
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"{path}:{lineno}: non-finite metric")
            out[parts[0]] = NodeMetrics(parts[0], *vals)
    return out
