"""Estimator-style front ends over the fitting and scoring operations.

Both detectors follow scikit-learn conventions: constructor arguments are
stored verbatim, ``fit(X, y=None)`` returns ``self`` and sets trailing
underscore attributes, and ``get_params``/``set_params`` make the classes
clonable and usable inside sklearn meta-estimators without a hard sklearn
dependency.

``X`` may be a :class:`~oodkit.features.FeatureSet`, a single ``(n_samples,
n_features)`` array (treated as one layer), or a sequence of such arrays
(one per layer).
"""

from __future__ import annotations

import inspect
from pathlib import Path
from typing import Any

import numpy as np

from .gaussian import fit_gaussian, load_model, save_model
from .invariants import ComponentSelection, fit_invariants, sum_layer_scores
from .scoring import ScoreReport, score
from .validation import as_feature_set, check_is_fitted


class ParamsMixin:
    """Minimal get_params/set_params protocol, sklearn-compatible."""

    @classmethod
    def _param_names(cls) -> list[str]:
        signature = inspect.signature(cls.__init__)
        return [
            name
            for name, p in signature.parameters.items()
            if name != "self" and p.kind != p.VAR_KEYWORD
        ]

    def get_params(self, deep: bool = True) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params: Any) -> "ParamsMixin":
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ValueError(
                    f"invalid parameter {name!r} for {type(self).__name__}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


class MahalanobisDetector(ParamsMixin):
    """Sum of per-layer Mahalanobis distances to the training distribution.

    Fits one Gaussian per feature layer and scores test samples by the sum
    of layer-wise distances. Higher scores mean more out-of-distribution.

    Parameters:
        shrinkage: "ledoit_wolf" to regularize each layer covariance toward
            a scaled identity (safe default for high-dimensional or
            low-sample layers), or "none" for the raw covariance.
    """

    def __init__(self, shrinkage: str = "ledoit_wolf") -> None:
        self.shrinkage = shrinkage
        self.model_ = None

    def fit(self, X, y: Any = None) -> "MahalanobisDetector":
        features = as_feature_set(X)
        self.model_ = fit_gaussian(features, shrinkage=self.shrinkage)
        self.n_layers_ = self.model_.layer_count
        self.layer_dims_ = self.model_.dims
        return self

    def score_samples(self, X) -> np.ndarray:
        """Total anomaly score per sample (sum over layers)."""
        check_is_fitted(self, "model_")
        return score(self.model_, as_feature_set(X)).total

    def score_report(self, X) -> ScoreReport:
        """Full per-layer breakdown alongside the totals."""
        check_is_fitted(self, "model_")
        return score(self.model_, as_feature_set(X))

    def save(self, path: str | Path) -> None:
        check_is_fitted(self, "model_")
        save_model(self.model_, path)

    @classmethod
    def load(cls, path: str | Path, shrinkage: str = "ledoit_wolf") -> "MahalanobisDetector":
        detector = cls(shrinkage=shrinkage)
        detector.model_ = load_model(path)
        detector.n_layers_ = detector.model_.layer_count
        detector.layer_dims_ = detector.model_.dims
        return detector


class SoftInvariantDetector(ParamsMixin):
    """Scores test samples by how strongly they violate training invariants.

    Fits per-layer principal directions and weights each component's squared
    residual by the inverse of its training error, so tight invariants
    dominate. By default all components are used, which reproduces the
    Mahalanobis detector without shrinkage; restricting the selection
    supports analyses over parts of the spectrum.

    Parameters:
        direction: which end of the spectrum a partial selection grows from.
        components: explicit component count per layer, or None.
        variance_fraction: cumulative eigenvalue-mass target per layer, or
            None. When both are None, all components are used.
        epsilon_floor: relative floor applied to per-component training
            errors to keep scores finite for exact invariants.
    """

    def __init__(
        self,
        direction: str = "from_most_invariant",
        components: int | None = None,
        variance_fraction: float | None = None,
        epsilon_floor: float = 1e-12,
    ) -> None:
        self.direction = direction
        self.components = components
        self.variance_fraction = variance_fraction
        self.epsilon_floor = epsilon_floor
        self.bases_ = None

    def _selection(self) -> ComponentSelection:
        if self.components is None and self.variance_fraction is None:
            return ComponentSelection(direction=self.direction, variance_fraction=1.0)
        return ComponentSelection(
            direction=self.direction,
            count=self.components,
            variance_fraction=self.variance_fraction,
        )

    def fit(self, X, y: Any = None) -> "SoftInvariantDetector":
        self._selection()  # validate parameters before the expensive part
        self.bases_ = fit_invariants(as_feature_set(X))
        self.n_layers_ = len(self.bases_)
        self.layer_dims_ = tuple(basis.dim for basis in self.bases_)
        return self

    def score_samples(self, X) -> np.ndarray:
        """Summed per-layer sqrt invariant scores, higher = more OOD."""
        check_is_fitted(self, "bases_")
        features = as_feature_set(X)
        selection = self._selection()
        return sum_layer_scores(
            self.bases_,
            features,
            [selection] * len(self.bases_),
            epsilon_floor=self.epsilon_floor,
        )
