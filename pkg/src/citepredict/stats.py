"""Rank correlations, classification scores and Welch t-tests."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .features import COLUMNS, FEATURE_LABELS, PREDICTORS, FeatureTable, nearest_rank_quantile

__all__ = [
    "CorrelationMatrix",
    "GroupComparison",
    "rankdata",
    "t_two_sided_p",
    "spearman",
    "correlation_matrix",
    "accuracy",
    "cohen_kappa",
    "roc_auc",
    "welch_t_test",
    "split_exception_groups",
    "compare_groups",
    "write_group_comparison",
    "stars_table3",
    "stars_figure1",
]


def rankdata(x) -> np.ndarray:
    """1-based ranks, ties sharing the average of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    xs = x[order]
    ranks = np.empty(len(x))
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    ends = np.r_[starts[1:], len(x)]
    avg = (starts + ends + 1) / 2.0
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    sa = math.sqrt(float(da @ da))
    sb = math.sqrt(float(db @ db))
    if sa == 0.0 or sb == 0.0:
        return math.nan
    r = float(da @ db) / (sa * sb)
    return max(-1.0, min(1.0, r))


def spearman(x, y) -> tuple[float, float]:
    """Spearman's rho with a two-sided p-value from the t approximation.

    Returns ``(nan, nan)`` when either series is constant.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two 1-d series of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("spearman needs at least 3 observations")
    rho = _pearson(rankdata(x), rankdata(y))
    if math.isnan(rho):
        return math.nan, math.nan
    if abs(rho) == 1.0:
        return rho, 0.0
    t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return rho, t_two_sided_p(t, n - 2)


def stars_table3(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def stars_figure1(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    rho: np.ndarray
    p: np.ndarray

    def write_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        """Lower triangle with diagonal, one pair per line, Table 3 star convention."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for h in header_lines:
                fh.write(f"# {h}\n")
            fh.write("# stars: ***p < 0.001; **p < 0.05; *p < 0.1\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["var1", "var2", "rho", "p_value", "stars"])
            for i, a in enumerate(self.names):
                for j in range(i + 1):
                    r, p = self.rho[i, j], self.p[i, j]
                    w.writerow([a, self.names[j], _fmt(r), _fmt(p), stars_table3(p)])


def _fmt(x) -> str:
    return "" if math.isnan(x) else format(float(x), ".12g")


def correlation_matrix(table: FeatureTable, names: Sequence[str] = COLUMNS) -> CorrelationMatrix:
    """Pairwise Spearman correlations over the outcome and all predictors."""
    if len(table) < 3:
        raise ValueError("correlation matrix needs at least 3 rows")
    cols = [rankdata(table.column(c)) for c in names]
    k = len(names)
    rho = np.eye(k)
    p = np.zeros((k, k))
    n = len(table)
    for i in range(k):
        if np.all(cols[i] == cols[i][0]):
            rho[i, i] = p[i, i] = math.nan
        for j in range(i):
            r = _pearson(cols[i], cols[j])
            if math.isnan(r):
                pv = math.nan
            elif abs(r) == 1.0:
                pv = 0.0
            else:
                pv = t_two_sided_p(r * math.sqrt((n - 2) / (1.0 - r * r)), n - 2)
            rho[i, j] = rho[j, i] = r
            p[i, j] = p[j, i] = pv
    return CorrelationMatrix(tuple(names), rho, p)


def _binary(v, name):
    a = np.asarray(v)
    if a.dtype != bool:
        if not np.all((a == 0) | (a == 1)):
            raise ValueError(f"{name} must be binary")
        a = a.astype(bool)
    return a


def accuracy(predictions, truth) -> float:
    pred, true = _binary(predictions, "predictions"), _binary(truth, "truth")
    if pred.shape != true.shape:
        raise ValueError("length mismatch")
    return float(np.count_nonzero(pred == true)) / len(true)


def cohen_kappa(predictions, truth) -> float:
    """(p_o - p_e) / (1 - p_e) with chance agreement from the marginals."""
    pred, true = _binary(predictions, "predictions"), _binary(truth, "truth")
    if pred.shape != true.shape:
        raise ValueError("length mismatch")
    if true.all() or not true.any():
        raise ValueError("kappa needs both classes in truth")
    n = len(true)
    po = np.count_nonzero(pred == true) / n
    a = np.count_nonzero(pred) / n
    b = np.count_nonzero(true) / n
    pe = a * b + (1 - a) * (1 - b)
    return float((po - pe) / (1 - pe))


def roc_auc(scores, truth) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties count 1/2)."""
    s = np.asarray(scores, dtype=np.float64)
    true = _binary(truth, "truth")
    if s.shape != true.shape:
        raise ValueError("length mismatch")
    n1 = int(np.count_nonzero(true))
    n0 = len(true) - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC needs both classes in truth")
    r = rankdata(s)
    return float((r[true].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def welch_t_test(a, b) -> tuple[float, float]:
    """Unequal-variance t statistic (mean_a - mean_b) and two-sided p-value."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least 2 observations")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    se2 = va + vb
    if se2 == 0.0:
        raise ValueError("both groups have zero variance")
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 * se2 / (va * va / (len(a) - 1) + vb * vb / (len(b) - 1))
    return float(t), t_two_sided_p(float(t), df)


def split_exception_groups(table: FeatureTable, low_q: float = 0.25, high_q: float = 0.25):
    """Highly cited papers in the bottom vs the top SJR band.

    Group A holds label-positive rows whose SJR is at or below the
    nearest-rank ``low_q`` quantile of the whole table; group B holds
    label-positive rows whose SJR exceeds the nearest-rank ``1 - high_q``
    quantile. The bands never overlap when ``low_q <= 1 - high_q``.
    """
    if not 0 <= low_q <= 1 - high_q or not 0 < high_q < 1:
        raise ValueError("need 0 <= low_q <= 1 - high_q and 0 < high_q < 1")
    sjr = [r.sjr for r in table.rows]
    hi = nearest_rank_quantile(sjr, 1 - high_q)
    lo = nearest_rank_quantile(sjr, low_q) if low_q > 0 else -math.inf
    group_a = tuple(r for r in table.rows if r.label and r.sjr <= lo)
    group_b = tuple(r for r in table.rows if r.label and r.sjr > hi)
    if not group_a:
        raise ValueError("low-SJR highly cited group is empty")
    if not group_b:
        raise ValueError("top-SJR highly cited group is empty")
    return group_a, group_b


@dataclass(frozen=True)
class GroupComparison:
    feature: str
    mean_a: float
    mean_b: float
    t: float
    p: float

    @property
    def stars(self) -> str:
        return stars_figure1(self.p)


def compare_groups(group_a, group_b, features: Sequence[str] = ("citations", *PREDICTORS)) -> list[GroupComparison]:
    """Welch t-test per feature; zero-variance features get nan statistics."""
    out = []
    for f in features:
        a = np.array([float(getattr(r, f)) for r in group_a])
        b = np.array([float(getattr(r, f)) for r in group_b])
        try:
            t, p = welch_t_test(a, b)
        except ValueError:
            t = p = math.nan
        out.append(GroupComparison(f, float(a.mean()), float(b.mean()), t, p))
    return out


def write_group_comparison(rows: Sequence[GroupComparison], n_a: int, n_b: int, path, header_lines: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for h in header_lines:
            fh.write(f"# {h}\n")
        fh.write(f"# group_a=low-SJR highly cited (n={n_a}); group_b=top-SJR highly cited (n={n_b})\n")
        fh.write("# stars: ***p < .001; *p < .05\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature", "name", "mean_a", "mean_b", "t", "p_value", "stars"])
        for g in rows:
            w.writerow([g.feature, FEATURE_LABELS[g.feature], _fmt(g.mean_a), _fmt(g.mean_b), _fmt(g.t), _fmt(g.p), g.stars])
