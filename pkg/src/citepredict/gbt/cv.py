"""Monte-Carlo cross-validation with per-repetition SHAP importances."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..features import FEATURE_LABELS, FeatureTable
from ..stats import accuracy, cohen_kappa, roc_auc
from .shap import shap_values
from .trees import Hyperparameters, fit

__all__ = ["Repetition", "EvaluationReport", "split_indices", "monte_carlo_cv"]


@dataclass(frozen=True)
class Repetition:
    seed: int
    n_train: int
    n_test: int
    accuracy: float
    kappa: float
    auc: float
    mean_abs_shap: tuple[float, ...]


def _mean_sd(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return math.nan, math.nan
    sd = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return float(v.mean()), sd


@dataclass
class EvaluationReport:
    feature_names: tuple[str, ...]
    repetitions: list[Repetition]
    config: Mapping[str, object] = field(default_factory=dict)

    def metric(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.repetitions])

    def summary(self) -> dict[str, tuple[float, float]]:
        return {m: _mean_sd(self.metric(m)) for m in ("accuracy", "kappa", "auc")}

    def importances(self) -> list[tuple[str, float, float]]:
        """(feature, mean of per-repetition mean-|SHAP|, sd across repetitions), descending."""
        shap = np.array([r.mean_abs_shap for r in self.repetitions])
        rows = []
        for j, f in enumerate(self.feature_names):
            mean, sd = _mean_sd(shap[:, j])
            rows.append((f, mean, sd))
        return sorted(rows, key=lambda r: (-r[1], self.feature_names.index(r[0])))

    def importances_json(self) -> dict:
        return {
            "config": dict(self.config),
            "statistic": "mean |SHAP| over test rows, averaged across repetitions",
            "importances": [
                {"feature": f, "name": FEATURE_LABELS.get(f, f), "mean_abs_shap": m, "sd_abs_shap": s}
                for f, m, s in self.importances()
            ],
        }

    def to_json(self) -> dict:
        summary = self.summary()
        return {
            "config": dict(self.config),
            "repetitions": len(self.repetitions),
            "per_repetition": {
                "seed": [r.seed for r in self.repetitions],
                "n_train": [r.n_train for r in self.repetitions],
                "n_test": [r.n_test for r in self.repetitions],
                "accuracy": [r.accuracy for r in self.repetitions],
                "kappa": [r.kappa for r in self.repetitions],
                "auc": [r.auc for r in self.repetitions],
            },
            "aggregate": {m: {"mean": a, "sd": b} for m, (a, b) in summary.items()},
            "importances": self.importances_json()["importances"],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"


def split_indices(n: int, train_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Random split without replacement; both index arrays sorted."""
    n_train = int(math.floor(train_fraction * n + 0.5))
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def _one_repetition(X, y, names, train_fraction, hp, seed) -> Repetition:
    tr, te = split_indices(len(y), train_fraction, seed)
    if len(te) == 0 or y[tr].all() or not y[tr].any():
        raise ValueError("table too small to split with both classes in the training set")
    if y[te].all() or not y[te].any():
        raise ValueError("test split holds a single class; kappa and AUC are undefined")
    model = fit(X[tr], y[tr], hp, seed=seed, feature_names=names)
    proba = model.predict_proba(X[te])
    pred = proba >= 0.5
    phi = shap_values(model, X[te], X[tr])
    return Repetition(
        seed=seed,
        n_train=len(tr),
        n_test=len(te),
        accuracy=accuracy(pred, y[te]),
        kappa=cohen_kappa(pred, y[te]),
        auc=roc_auc(proba, y[te]),
        mean_abs_shap=tuple(np.abs(phi).mean(axis=0).tolist()),
    )


def monte_carlo_cv(
    table: FeatureTable,
    repetitions: int = 300,
    train_fraction: float = 0.75,
    hp: Hyperparameters | None = None,
    seed: int = 0,
    threads: int = 1,
    config: Mapping[str, object] | None = None,
) -> EvaluationReport:
    """Repeated random train/test splits, fit, score and explain.

    Repetition ``r`` uses seed ``seed + r`` for its split, so results do not
    depend on ``threads``. SHAP values are computed for the test rows with
    the training rows as background.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    hp = hp or Hyperparameters()
    X = table.matrix()
    y = table.labels()
    names = tuple(table.feature_names)
    seeds = [seed + r for r in range(repetitions)]

    def run(s):
        return _one_repetition(X, y, names, train_fraction, hp, s)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reps = list(pool.map(run, seeds))
    else:
        reps = [run(s) for s in seeds]
    cfg = {
        "seed": seed,
        "repetitions": repetitions,
        "train_fraction": train_fraction,
        "hyperparameters": asdict(hp),
        "shap_rows": "test",
        "shap_background": "train",
        "class_threshold": 0.5,
        **(config or {}),
    }
    return EvaluationReport(names, reps, cfg)
