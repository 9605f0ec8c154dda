"""Second-order gradient boosting of regression trees under logistic loss.

Each round grows one tree greedily. A node splits on the (feature,
threshold) pair with the largest

    G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)

provided it exceeds ``gamma``; leaves get weight -G/(H+lambda). Candidate
thresholds are midpoints between consecutive distinct values; ties go to
the lowest feature index, then the lowest threshold. Rows with equal
feature value are visited in an order fixed by their content, so the
fitted model does not depend on the order of the training rows.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

__all__ = ["Hyperparameters", "Tree", "TreeEnsemble", "fit", "sigmoid", "FORMAT_VERSION"]

FORMAT = "citepredict-gbt"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Hyperparameters:
    n_rounds: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.n_rounds < 0 or self.max_depth < 0:
            raise ValueError("n_rounds and max_depth must be non-negative")
        if self.learning_rate <= 0 or self.reg_lambda < 0 or self.gamma < 0:
            raise ValueError("learning_rate must be positive; reg_lambda and gamma non-negative")


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class Tree:
    """Flat array tree. ``feature[i] == -1`` marks a leaf.

    Internal node ``i`` sends rows with ``x[feature[i]] < threshold[i]`` to
    ``left[i]``, the rest to ``right[i]``. ``cover`` is the training
    hessian sum reaching the node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``X``."""
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.flatnonzero(active)
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] < self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active[idx] = self.feature[node[idx]] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def leaf_paths(self):
        """Yield (leaf index, [(feature, threshold, went_left), ...]) root to leaf."""
        stack = [(0, [])]
        while stack:
            i, path = stack.pop()
            if self.feature[i] < 0:
                yield i, path
                continue
            f, t = int(self.feature[i]), float(self.threshold[i])
            stack.append((int(self.right[i]), path + [(f, t, False)]))
            stack.append((int(self.left[i]), path + [(f, t, True)]))

    def to_json(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Tree":
        return cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
            np.asarray(d["cover"], dtype=np.float64),
        )

    @classmethod
    def leaf(cls, value: float, cover: float = 0.0) -> "Tree":
        return cls(
            np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
            np.array([float(value)]), np.array([float(cover)]),
        )


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    learning_rate: float
    base_score: float
    feature_names: tuple[str, ...]
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)

    def margin(self, X) -> np.ndarray:
        X = self._check(X)
        m = np.full(len(X), self.base_score)
        for t in self.trees:
            m += self.learning_rate * t.predict(X)
        return m

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.margin(X))

    def predict(self, row) -> float:
        """Probability of the positive class for one row.

        ``row`` is a sequence in feature order or a mapping keyed by
        feature name.
        """
        if isinstance(row, dict):
            missing = [f for f in self.feature_names if f not in row]
            if missing:
                raise KeyError(f"row lacks feature {missing[0]!r}")
            row = [row[f] for f in self.feature_names]
        return float(self.predict_proba(np.asarray([row], dtype=np.float64))[0])

    def predict_class(self, X) -> np.ndarray:
        return self.predict_proba(X) >= 0.5

    def _check(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise ValueError(f"expected {len(self.feature_names)} features, got shape {X.shape}")
        return X

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "feature_names": list(self.feature_names),
            "hyperparameters": asdict(self.hyperparameters),
            "trees": [t.to_json() for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, d: dict) -> "TreeEnsemble":
        if d.get("format") != FORMAT or d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format {d.get('format')!r} v{d.get('version')!r}")
        return cls(
            [Tree.from_json(t) for t in d["trees"]],
            float(d["learning_rate"]),
            float(d["base_score"]),
            tuple(d["feature_names"]),
            Hyperparameters(**d["hyperparameters"]),
        )

    @classmethod
    def loads(cls, text: str) -> "TreeEnsemble":
        return cls.from_json(json.loads(text))


def _canonical_orders(X, y):
    """Per feature, row order by (value, remaining columns, label).

    Rows that tie on every key are exact duplicates and always carry equal
    gradients, so cumulative sums along these orders do not depend on how
    the training rows were ordered.
    """
    n_feat = X.shape[1]
    orders = np.empty((n_feat, len(y)), dtype=np.int64)
    for f in range(n_feat):
        # np.lexsort treats the last key as primary
        rest = [X[:, j] for j in range(n_feat - 1, -1, -1) if j != f]
        orders[f] = np.lexsort((y, *rest, X[:, f]))
    return orders


class _Grower:
    def __init__(self, X, XT, orders, g, h, hp: Hyperparameters):
        self.X, self.XT, self.orders, self.g, self.h, self.hp = X, XT, orders, g, h, hp
        self.nodes = []

    def _new(self):
        self.nodes.append([-1, 0.0, -1, -1, 0.0, 0.0])
        return len(self.nodes) - 1

    def best_split(self, in_node, k):
        """Best (gain, feature, threshold) over all features; feature -1 if none beats gamma."""
        lam = self.hp.reg_lambda
        sub = self.orders[in_node[self.orders]].reshape(len(self.orders), k)
        xs = np.take_along_axis(self.XT, sub, axis=1)
        gs = np.cumsum(self.g[sub], axis=1)
        hs = np.cumsum(self.h[sub], axis=1)
        gt, ht = gs[:, -1:], hs[:, -1:]
        gl, hl = gs[:, :-1], hs[:, :-1]
        gr, hr = gt - gl, ht - hl
        gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - gt * gt / (ht + lam)
        gain[xs[:, 1:] == xs[:, :-1]] = -np.inf
        # row-major argmax: lowest feature, then lowest threshold, wins ties
        flat = int(np.argmax(gain))
        f, pos = divmod(flat, k - 1)
        best = float(gain[f, pos])
        if not best > self.hp.gamma:
            return best, -1, 0.0
        lo, hi = xs[f, pos], xs[f, pos + 1]
        thr = lo + (hi - lo) / 2.0
        if not lo < thr <= hi:
            thr = hi
        return best, f, float(thr)

    def grow(self, rows: np.ndarray, depth: int) -> int:
        i = self._new()
        G = math.fsum(self.g[rows])
        H = math.fsum(self.h[rows])
        self.nodes[i][5] = H
        split = None
        if depth < self.hp.max_depth and len(rows) >= 2:
            in_node = np.zeros(len(self.g), dtype=bool)
            in_node[rows] = True
            gain, f, thr = self.best_split(in_node, len(rows))
            if f >= 0:
                split = (f, thr)
        if split is None:
            self.nodes[i][4] = -G / (H + self.hp.reg_lambda)
            return i
        f, thr = split
        mask = self.X[rows, f] < thr
        left = self.grow(rows[mask], depth + 1)
        right = self.grow(rows[~mask], depth + 1)
        self.nodes[i][:4] = [f, thr, left, right]
        return i

    def tree(self) -> Tree:
        cols = list(zip(*self.nodes))
        return Tree(
            np.asarray(cols[0], dtype=np.int64),
            np.asarray(cols[1], dtype=np.float64),
            np.asarray(cols[2], dtype=np.int64),
            np.asarray(cols[3], dtype=np.int64),
            np.asarray(cols[4], dtype=np.float64),
            np.asarray(cols[5], dtype=np.float64),
        )


def fit(X, y, hp: Hyperparameters | None = None, seed: int = 0, feature_names=None) -> TreeEnsemble:
    """Fit a boosted tree ensemble for binary ``y``.

    ``seed`` is accepted for interface symmetry; without row or column
    subsampling the fit is fully deterministic and does not draw randomness.
    """
    hp = hp or Hyperparameters()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-d with one row per label")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    pos = math.fsum(y) / len(y) if len(y) else 0.0
    if not 0.0 < pos < 1.0:
        raise ValueError("training set must contain both classes")
    base = math.log(pos / (1.0 - pos))
    names = tuple(feature_names) if feature_names is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    margin = np.full(len(y), base)
    rows = np.arange(len(y))
    XT = np.ascontiguousarray(X.T)
    orders = _canonical_orders(X, y) if hp.n_rounds else None
    trees = []
    for _ in range(hp.n_rounds):
        p = sigmoid(margin)
        g = p - y
        h = p * (1.0 - p)
        grower = _Grower(X, XT, orders, g, h, hp)
        grower.grow(rows, 0)
        tree = grower.tree()
        trees.append(tree)
        margin = margin + hp.learning_rate * tree.predict(X)
    return TreeEnsemble(trees, hp.learning_rate, base, names, hp)
