import json
import math

import numpy as np
import pytest

import oracles
from citepredict.features import FeatureRow, FeatureTable
from citepredict.gbt import (
    Hyperparameters,
    Tree,
    TreeEnsemble,
    expected_margin,
    fit,
    mean_abs_shap,
    monte_carlo_cv,
    shap_values,
    sigmoid,
    split_indices,
)


def toy_data(seed=0, n=200, m=5):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(n, m)).astype(float)
    y = (X[:, 0] + 0.5 * X[:, 1] + rng.normal(0, 1.5, n) > 4).astype(int)
    return X, y


def test_sigmoid_stable():
    z = np.array([-800.0, -1.0, 0.0, 1.0, 800.0])
    p = sigmoid(z)
    assert p[0] == 0.0 and p[2] == 0.5 and p[-1] == 1.0
    assert p[1] == pytest.approx(1 / (1 + math.e))


def test_single_stump_gain_and_leaves():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([0, 0, 1, 1])
    hp = Hyperparameters(n_rounds=1, max_depth=1, learning_rate=1.0, reg_lambda=1.0)
    m = fit(X, y, hp)
    t = m.trees[0]
    assert t.feature[0] == 0 and t.threshold[0] == 0.5
    # base score 0 -> p = 0.5, g = p - y = +-0.5, h = 0.25
    assert m.base_score == 0.0
    left = t.value[t.left[0]]
    assert left == pytest.approx(-(2 * 0.5) / (2 * 0.25 + 1.0))


def test_ties_broken_by_lowest_feature():
    X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    y = np.array([0, 0, 1, 1])
    m = fit(X, y, Hyperparameters(n_rounds=1, max_depth=1))
    assert m.trees[0].feature[0] == 0


def test_gamma_blocks_weak_splits():
    X, y = toy_data()
    m = fit(X, y, Hyperparameters(n_rounds=3, gamma=1e9))
    assert all(t.n_nodes == 1 for t in m.trees)


def test_fit_invariant_to_row_order():
    X, y = toy_data(3)
    hp = Hyperparameters(n_rounds=15, max_depth=3)
    perm = np.random.default_rng(9).permutation(len(y))
    assert fit(X, y, hp).dumps() == fit(X[perm], y[perm], hp).dumps()


def test_single_class_rejected():
    with pytest.raises(ValueError, match="both classes"):
        fit(np.zeros((4, 2)), np.ones(4))


def test_boosting_learns_signal():
    X, y = toy_data(1, n=600)
    m = fit(X, y)
    assert np.mean(m.predict_class(X) == y) > 0.75


def test_serialization_round_trip():
    X, y = toy_data(2)
    m = fit(X, y, Hyperparameters(n_rounds=5, max_depth=2), feature_names=list("abcde"))
    back = TreeEnsemble.loads(m.dumps())
    assert np.array_equal(back.margin(X), m.margin(X))
    assert back.hyperparameters == m.hyperparameters
    d = json.loads(m.dumps())
    assert d["format"] == "citepredict-gbt" and d["version"] == 1
    d["version"] = 99
    with pytest.raises(ValueError):
        TreeEnsemble.from_json(d)


def test_predict_row_by_name():
    X, y = toy_data(2)
    m = fit(X, y, Hyperparameters(n_rounds=5), feature_names=list("abcde"))
    row = dict(zip("abcde", X[0]))
    assert m.predict(row) == pytest.approx(m.predict_proba(X[:1])[0])
    del row["c"]
    with pytest.raises(KeyError, match="'c'"):
        m.predict(row)


def random_ensemble(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 9))
    n = 80
    X = rng.integers(0, 4, size=(n, m)).astype(float)
    w = rng.normal(size=m)
    y = (X @ w + rng.normal(0, 1, n) > np.median(X @ w)).astype(int)
    if y.all() or not y.any():
        y[0] = 1 - y[0]
    hp = Hyperparameters(n_rounds=int(rng.integers(1, 11)), max_depth=int(rng.integers(1, 4)))
    return fit(X, y, hp), X, rng


@pytest.mark.parametrize("seed", range(6))
def test_shap_matches_subset_enumeration(seed):
    model, X, rng = random_ensemble(seed)
    background = X[rng.choice(len(X), 25, replace=False)]
    rows = X[:4]
    phi = shap_values(model, rows, background)
    for r, x in enumerate(rows):
        want, base = oracles.brute_force_shap(model.margin, x, background)
        assert np.max(np.abs(phi[r] - want)) < 1e-9
        assert phi[r].sum() + base == pytest.approx(model.margin(x[None])[0], abs=1e-9)


def test_shap_dummy_feature_gets_zero():
    X, y = toy_data(4)
    X[:, 3] = 0.0  # constant column can never be split on
    m = fit(X, y, Hyperparameters(n_rounds=10, max_depth=3))
    phi = shap_values(m, X[:20], X)
    assert np.all(phi[:, 3] == 0.0)


def test_shap_single_stump_two_player_case():
    t = Tree(np.array([0, -1, -1]), np.array([0.5, 0, 0]), np.array([1, -1, -1]), np.array([2, -1, -1]),
             np.array([0.0, -1.0, 2.0]), np.array([4.0, 2.0, 2.0]))
    m = TreeEnsemble([t], 1.0, 0.0, ("a", "b"))
    bg = np.array([[0.0, 7.0], [1.0, 3.0], [1.0, 1.0]])
    x = np.array([0.0, 5.0])
    phi = shap_values(m, x, bg)
    assert phi[1] == 0.0
    assert phi[0] == pytest.approx(m.margin(x[None])[0] - expected_margin(m, bg))


def test_shap_symmetric_features_share_credit():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, 400).astype(float)
    b = rng.integers(0, 2, 400).astype(float)
    y = ((a + b) >= 1).astype(int)
    X1 = np.c_[a, b]
    X2 = np.c_[b, a]
    m1 = fit(X1, y, Hyperparameters(n_rounds=5, max_depth=2))
    m2 = fit(X2, y, Hyperparameters(n_rounds=5, max_depth=2))
    s1 = mean_abs_shap(m1, X1, X1)
    s2 = mean_abs_shap(m2, X2, X2)
    assert s1[0] == pytest.approx(s2[1], abs=1e-9) and s1[1] == pytest.approx(s2[0], abs=1e-9)


def table_from(X, y):
    names = FeatureTable.feature_names
    rows = []
    for i, (x, lab) in enumerate(zip(X, y)):
        vals = dict(zip(names, x))
        vals["n_authors"] = int(vals["n_authors"])
        rows.append(FeatureRow(pub_id=f"p{i:04d}", label=bool(lab), citations=int(lab), **vals))
    return FeatureTable(tuple(rows), 0.0)


def test_split_indices():
    tr, te = split_indices(10, 0.75, 3)
    assert len(tr) == 8 and len(te) == 2  # floor(7.5 + 0.5)
    assert sorted(np.r_[tr, te]) == list(range(10))
    assert np.array_equal(split_indices(10, 0.75, 3)[0], tr)


def test_cv_report_and_thread_independence():
    rng = np.random.default_rng(5)
    n = 240
    X = rng.normal(size=(n, 16))
    X[:, 1] = rng.integers(1, 6, n)
    y = (X[:, 0] + 0.3 * rng.normal(size=n) > 0.6).astype(int)
    table = table_from(X, y)
    hp = Hyperparameters(n_rounds=10, max_depth=2)
    r1 = monte_carlo_cv(table, repetitions=4, hp=hp, seed=7)
    r2 = monte_carlo_cv(table, repetitions=4, hp=hp, seed=7, threads=4)
    assert r1.dumps() == r2.dumps()
    d = r1.to_json()
    assert d["per_repetition"]["seed"] == [7, 8, 9, 10]
    assert d["config"]["shap_rows"] == "test"
    imp = r1.importances()
    assert imp[0][0] == "sjr"
    assert [v for _, v, _ in imp] == sorted((v for _, v, _ in imp), reverse=True)
    acc, sd = r1.summary()["accuracy"]
    assert acc == pytest.approx(np.mean(r1.metric("accuracy")))


def test_cv_rejects_bad_arguments():
    X = np.zeros((8, 16))
    table = table_from(X, [0, 1] * 4)
    with pytest.raises(ValueError):
        monte_carlo_cv(table, repetitions=0)
    with pytest.raises(ValueError):
        monte_carlo_cv(table, train_fraction=1.0)
