"""Affine soft invariants of a training set, solved per layer via PCA.

A soft invariant of one layer is an affine function ``g_k(f) = a_k . f + b_k``
with a unit-norm direction ``a_k``, chosen to make ``g_k`` as close to zero as
possible on the training rows, subject to mutually orthogonal directions. The
minimizers are the eigenvectors of the layer's biased sample covariance; the
training mean-squared error ``e_k`` of each invariant is the matching
eigenvalue. Directions are kept for the full feature dimensionality, ordered
from most invariant (smallest error) to most variant.

A test vector is scored by the error-weighted sum of squared residuals over a
chosen component subset; tight invariants (small ``e_k``) dominate while weak
ones are effectively ignored. With every component selected, the score equals
the squared Mahalanobis distance to the training distribution.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import (
    AllErrorsZeroError,
    DimensionMismatchError,
    InvalidRangeError,
    TooFewSamplesError,
)
from .features import FeatureSet
from .gaussian import layer_moments
from .validation import check_layer_compat, check_matrix

Direction = Literal["from_most_invariant", "from_most_variant"]

DIRECTIONS = ("from_most_invariant", "from_most_variant")


@dataclass(frozen=True)
class InvariantBasis:
    """Affine soft invariants of one layer.

    directions: D x D orthonormal matrix; column k holds the k-th direction,
        ordered by ascending training error (most invariant first).
    offsets: per-component offsets, ``-directions[:, k] . mean``.
    errors: training mean-squared error of each component (the covariance
        eigenvalues), ascending and nonnegative.
    mean: the training mean, kept for diagnostics and reconstruction.
    """

    directions: np.ndarray
    offsets: np.ndarray
    errors: np.ndarray
    mean: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def residuals(self, X: np.ndarray, components: np.ndarray | None = None) -> np.ndarray:
        """Evaluate g_k over the rows of X for the selected components.

        The full product is always formed and then sliced: the offsets were
        produced by the same matmul, which keeps g_k exactly zero at the
        training mean for any selection.
        """
        X = check_matrix(X, self.dim)
        full = X @ self.directions + self.offsets
        return full if components is None else full[:, components]

    def validate(self, atol: float = 1e-8) -> None:
        gram = self.directions.T @ self.directions
        if not np.allclose(gram, np.eye(self.dim), atol=atol, rtol=0.0):
            raise ValueError("directions are not orthonormal")
        if np.any(np.diff(self.errors) < 0) or np.any(self.errors < 0):
            raise ValueError("errors must be ascending and nonnegative")


@dataclass(frozen=True)
class ComponentSelection:
    """A contiguous run of components taken from one end of the spectrum.

    ``direction`` picks the end: ``"from_most_invariant"`` starts at the
    smallest training error, ``"from_most_variant"`` at the largest. Exactly
    one of ``count`` (explicit component count) or ``variance_fraction``
    (smallest prefix whose eigenvalue mass reaches the fraction of the total,
    never fewer than one component) must be given.
    """

    direction: Direction = "from_most_invariant"
    count: int | None = None
    variance_fraction: float | None = None

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        if (self.count is None) == (self.variance_fraction is None):
            raise ValueError("give exactly one of count or variance_fraction")
        if self.count is not None and self.count < 1:
            raise ValueError("count must be at least 1")
        if self.variance_fraction is not None and not 0.0 < self.variance_fraction <= 1.0:
            raise InvalidRangeError(
                f"variance_fraction must be in (0, 1], got {self.variance_fraction}"
            )

    @classmethod
    def all_components(cls) -> "ComponentSelection":
        return cls(direction="from_most_invariant", variance_fraction=1.0)

    def resolve(self, errors: np.ndarray) -> np.ndarray:
        """Component indices (into the ascending spectrum) this selection picks."""
        d = errors.shape[0]
        if self.count is not None:
            if self.count > d:
                raise DimensionMismatchError(
                    f"selection of {self.count} components exceeds dimension {d}"
                )
            k = self.count
        else:
            ordered = errors if self.direction == "from_most_invariant" else errors[::-1]
            cum = np.cumsum(ordered)
            target = self.variance_fraction * cum[-1]
            k = int(np.searchsorted(cum, target, side="left")) + 1
            k = min(max(k, 1), d)
        if self.direction == "from_most_invariant":
            return np.arange(k)
        return np.arange(d - 1, d - 1 - k, -1)


def fit_invariants(train: FeatureSet) -> list[InvariantBasis]:
    """Fit one :class:`InvariantBasis` per layer of the training set.

    Uses the raw (unshrunk) biased covariance of each layer; eigenvalues are
    clamped at zero to absorb eigensolver rounding.
    """
    if train.sample_count < 2:
        raise TooFewSamplesError(
            f"need at least 2 samples to fit, got {train.sample_count}"
        )
    bases = []
    for block in train.layers:
        mean, cov, _ = layer_moments(block.data)
        errors, directions = np.linalg.eigh(cov)
        errors = np.maximum(errors, 0.0)
        offsets = -(mean @ directions)
        bases.append(
            InvariantBasis(
                directions=directions, offsets=offsets, errors=errors, mean=mean
            )
        )
    return bases


def invariant_scores(
    basis: InvariantBasis,
    X: np.ndarray,
    selection: ComponentSelection | None = None,
    epsilon_floor: float = 1e-12,
) -> np.ndarray:
    """Error-weighted squared invariant score of each row of X.

    ``sum_k g_k(f)^2 / max(e_k, epsilon_floor * e_max)`` over the selected
    components. Denominators that are still zero after flooring contribute 0
    for exactly-zero residuals and +inf otherwise.

    With all components selected and no flooring in effect this equals the
    squared Mahalanobis distance under the unshrunk Gaussian fit.
    """
    if epsilon_floor < 0:
        raise ValueError("epsilon_floor must be nonnegative")
    e_max = float(basis.errors[-1]) if basis.errors.size else 0.0
    if e_max == 0.0:
        raise AllErrorsZeroError("all training errors are zero; scores undefined")
    if selection is None:
        selection = ComponentSelection.all_components()
    components = selection.resolve(basis.errors)
    residuals = basis.residuals(X, components)
    denom = np.maximum(basis.errors[components], epsilon_floor * e_max)
    squared = residuals**2
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = squared / denom
    zero_denom = denom == 0.0
    if np.any(zero_denom):
        terms[:, zero_denom] = np.where(
            squared[:, zero_denom] == 0.0, 0.0, np.inf
        )
    return terms.sum(axis=1)


def invariant_score(
    basis: InvariantBasis,
    f: np.ndarray,
    selection: ComponentSelection | None = None,
    epsilon_floor: float = 1e-12,
) -> float:
    """Scalar score of a single feature vector; see :func:`invariant_scores`."""
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1:
        raise DimensionMismatchError(f"expected a vector, got shape {f.shape}")
    return float(invariant_scores(basis, f[None, :], selection, epsilon_floor)[0])


@dataclass(frozen=True)
class SweepPoint:
    """One row of a component sweep: grid fraction, AUROC, per-layer counts."""

    fraction: float
    auroc: float
    components_per_layer: tuple[int, ...]


def sum_layer_scores(
    bases: Sequence[InvariantBasis],
    feature_set: FeatureSet,
    selections: Sequence[ComponentSelection],
    epsilon_floor: float = 1e-12,
) -> np.ndarray:
    """Per-sample sum over layers of sqrt invariant scores."""
    check_layer_compat([b.dim for b in bases], feature_set)
    total = np.zeros(feature_set.sample_count)
    for basis, block, selection in zip(bases, feature_set.layers, selections):
        total += np.sqrt(
            invariant_scores(basis, block.data, selection, epsilon_floor)
        )
    return total


def component_sweep(
    bases: Sequence[InvariantBasis],
    test_in: FeatureSet,
    test_out: FeatureSet,
    direction: Direction,
    grid: Sequence[float],
    epsilon_floor: float = 1e-12,
    threads: int = 1,
) -> list[SweepPoint]:
    """AUROC as a function of cumulative explained variance.

    For each grid fraction, selects per layer the prefix of components (from
    the chosen end of the spectrum) whose eigenvalue mass first reaches that
    fraction, scores both test sets by summed layer-wise sqrt scores, and
    computes the AUROC of out against in. Grid points are independent, so
    results do not depend on ``threads``.
    """
    from .evaluation import auroc

    grid = [float(g) for g in grid]
    if not grid:
        raise InvalidRangeError("sweep grid is empty")
    if any(not 0.0 < g <= 1.0 for g in grid):
        raise InvalidRangeError(f"grid fractions must be in (0, 1], got {grid}")
    if any(b > a for a, b in zip(grid[1:], grid)):
        raise InvalidRangeError("grid fractions must be ascending")

    def evaluate(fraction: float) -> SweepPoint:
        selections = [
            ComponentSelection(direction=direction, variance_fraction=fraction)
            for _ in bases
        ]
        scores_in = sum_layer_scores(bases, test_in, selections, epsilon_floor)
        scores_out = sum_layer_scores(bases, test_out, selections, epsilon_floor)
        counts = tuple(
            int(sel.resolve(basis.errors).size)
            for sel, basis in zip(selections, bases)
        )
        return SweepPoint(
            fraction=fraction,
            auroc=auroc(scores_in, scores_out),
            components_per_layer=counts,
        )

    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1 or len(grid) <= 1:
        return [evaluate(fraction) for fraction in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, grid))
