"""Input coercion and checking helpers shared by the estimators and ops."""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from .errors import DimensionMismatchError, LayerCountMismatchError, NonFiniteValueError
from .features import FeatureSet

FeatureLike = "FeatureSet | np.ndarray | Sequence[np.ndarray]"


def as_feature_set(X: Any) -> FeatureSet:
    """Coerce estimator input into a :class:`FeatureSet`.

    Accepts a FeatureSet (returned as-is), a single N x D array (one layer),
    or a sequence of N x D arrays (one per layer).
    """
    if isinstance(X, FeatureSet):
        return X
    if isinstance(X, np.ndarray):
        return FeatureSet.from_arrays([X])
    if isinstance(X, (list, tuple)):
        return FeatureSet.from_arrays(X)
    raise TypeError(
        "expected a FeatureSet, a 2-D array, or a sequence of 2-D arrays, "
        f"got {type(X).__name__}"
    )


def check_matrix(X: Any, dim: int, name: str = "features") -> np.ndarray:
    """Validate a 2-D float matrix with *dim* columns; promote to float64."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[1] != dim:
        raise DimensionMismatchError(
            f"{name} has width {arr.shape[1]}, model layer expects {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise NonFiniteValueError(f"{name} contains NaN or infinity")
    return arr


def check_layer_compat(model_dims: Sequence[int], feature_set: FeatureSet) -> None:
    """Ensure a feature set matches a fitted model layer-for-layer."""
    if len(model_dims) != feature_set.layer_count:
        raise LayerCountMismatchError(
            f"model has {len(model_dims)} layers, features have "
            f"{feature_set.layer_count}"
        )
    for i, (want, have) in enumerate(zip(model_dims, feature_set.dims)):
        if want != have:
            raise DimensionMismatchError(
                f"layer {i}: model expects width {want}, features have {have}"
            )


def check_is_fitted(obj: Any, attribute: str) -> None:
    if getattr(obj, attribute, None) is None:
        raise RuntimeError(
            f"{type(obj).__name__} is not fitted yet; call fit() first"
        )
