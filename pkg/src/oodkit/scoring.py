"""Layer-wise Mahalanobis anomaly scores and their sum.

Each layer contributes ``sqrt((f - mean)^T Sigma^{-1} (f - mean))``, computed
by a triangular solve against the stored Cholesky factor (the covariance is
never inverted explicitly). A sample's total score is the sum of its layer
scores; higher means more out-of-distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .features import FeatureSet
from .gaussian import GaussianModel, LayerGaussian
from .validation import check_layer_compat, check_matrix


@dataclass(frozen=True)
class ScoreReport:
    """Total and per-layer scores for a batch of test samples.

    ``total`` has one entry per sample and equals the row sum of
    ``per_layer`` (samples x layers). All scores are nonnegative.
    """

    total: np.ndarray
    per_layer: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.total.shape[0]


def score_layer(model_layer: LayerGaussian, features: np.ndarray) -> np.ndarray:
    """Mahalanobis distance of each row of *features* under one layer model."""
    X = check_matrix(features, model_layer.dim)
    diff = X - model_layer.mean
    z = solve_triangular(model_layer.factor, diff.T, lower=True, check_finite=False)
    return np.sqrt(np.einsum("ij,ij->j", z, z))


def score(model: GaussianModel, test: FeatureSet) -> ScoreReport:
    """Score every sample of *test* against *model*, layer by layer."""
    check_layer_compat(model.dims, test)
    per_layer = np.column_stack(
        [
            score_layer(layer, block.data)
            for layer, block in zip(model.layers, test.layers)
        ]
    )
    return ScoreReport(total=per_layer.sum(axis=1), per_layer=per_layer)
