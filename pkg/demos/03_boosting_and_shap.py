"""Boosted trees and exact SHAP values on a toy problem.

Run with ``python3 demos/03_boosting_and_shap.py``.
"""

import numpy as np

from citepredict.gbt import Hyperparameters, expected_margin, fit, mean_abs_shap, shap_values

rng = np.random.default_rng(0)
n = 500
X = rng.normal(size=(n, 4))
# only the first two columns matter, the first twice as much
y = (2 * X[:, 0] + X[:, 1] + rng.normal(0, 0.5, n) > 0).astype(int)

model = fit(X[:400], y[:400], Hyperparameters(n_rounds=50, max_depth=3), feature_names=["a", "b", "c", "d"])
acc = np.mean(model.predict_class(X[400:]) == y[400:])
print(f"held-out accuracy {acc:.3f}")

# explain held-out rows against the training rows
phi = shap_values(model, X[400:], X[:400])
base = expected_margin(model, X[:400])
print("base value", round(base, 4))
print("row 0 contributions", np.round(phi[0], 4))
print("check", round(phi[0].sum() + base, 10), "==", round(model.margin(X[400:401])[0], 10))
print("mean |SHAP|", dict(zip(model.feature_names, np.round(mean_abs_shap(model, X[400:], X[:400]), 4).tolist())))

# the ensemble round-trips through JSON
from citepredict.gbt import TreeEnsemble

again = TreeEnsemble.loads(model.dumps())
print("reloaded model agrees:", np.array_equal(again.margin(X), model.margin(X)))
