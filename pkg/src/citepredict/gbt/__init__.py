"""Boosted trees, exact SHAP attributions and Monte-Carlo cross-validation."""

from .shap import expected_margin, mean_abs_shap, shap_values
from .trees import Hyperparameters, Tree, TreeEnsemble, fit, sigmoid
from .cv import EvaluationReport, Repetition, monte_carlo_cv, split_indices
