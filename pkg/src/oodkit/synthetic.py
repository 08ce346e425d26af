"""Seeded generators for toy geometric feature sets.

Samples are abstract descriptions of simple shape images: polygon side count,
orientation, fill color, background shade, position, and size. Each abstract
feature is either fixed across the training set (a training invariant,
realized as its constant value plus Gaussian noise) or varying (uniform over
a declared range). The out-distribution set re-draws the same features but
perturbs those named in ``ood_spec``, which is how "breaks an invariant"
scenarios are constructed.

The emitted feature vector is a single 8-wide layer::

    [sides, sin(orientation), cos(orientation), color, background,
     position_x, position_y, size]

Orientation is sampled in degrees and encoded as a sin/cos pair to avoid
wrap-around artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .errors import InvalidRangeError
from .features import FeatureSet

FEATURE_NAMES = (
    "sides",
    "orientation_deg",
    "color_channel",
    "background",
    "position_xy",
    "size",
)

FEATURE_DIM = 8


@dataclass(frozen=True)
class Fixed:
    """Feature held constant over the set; realized as value + noise."""

    value: Union[float, tuple[float, float]]


@dataclass(frozen=True)
class Varying:
    """Feature drawn uniformly from [low, high) per sample."""

    low: Union[float, tuple[float, float]]
    high: Union[float, tuple[float, float]]


@dataclass(frozen=True)
class Shift:
    """OOD perturbation: draw per the training spec, then add a constant."""

    delta: Union[float, tuple[float, float]]


FeatureSpec = Union[Fixed, Varying]
OodSpec = Union[Fixed, Varying, Shift]

_DEFAULT_SPEC: dict[str, FeatureSpec] = {
    "sides": Fixed(5.0),
    "orientation_deg": Fixed(0.0),
    "color_channel": Fixed(1.0),
    "background": Fixed(0.0),
    "position_xy": Fixed((0.0, 0.0)),
    "size": Fixed(1.0),
}


def _as_pair(value) -> tuple[float, float]:
    if isinstance(value, (tuple, list)):
        if len(value) != 2:
            raise InvalidRangeError(f"expected a pair, got {value!r}")
        return float(value[0]), float(value[1])
    return float(value), float(value)


@dataclass(frozen=True)
class SyntheticConfig:
    """Declarative recipe for (train, test_in, test_out) feature sets.

    ``invariant_spec`` overrides the default all-fixed training distribution
    feature by feature; ``ood_spec`` names the features the out-distribution
    set perturbs and how. A nonempty ``ood_spec`` must target at least one
    feature that is fixed in training, so the set genuinely breaks an
    invariant (targeting only varying features describes an in-distribution
    "null" set; use an empty ood_spec for that).
    """

    n_train: int
    n_test_in: int
    n_test_out: int
    invariant_spec: Mapping[str, FeatureSpec] = field(default_factory=dict)
    ood_spec: Mapping[str, OodSpec] = field(default_factory=dict)
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_train, self.n_test_in, self.n_test_out) < 1:
            raise ValueError("sample counts must be at least 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        for source in (self.invariant_spec, self.ood_spec):
            unknown = set(source) - set(FEATURE_NAMES)
            if unknown:
                raise ValueError(f"unknown features {sorted(unknown)}")
        to_check = list(self.full_spec.items()) + list(self.ood_spec.items())
        for name, spec in to_check:
            if isinstance(spec, Varying):
                lo, hi = _as_pair(spec.low), _as_pair(spec.high)
                if not (lo[0] < hi[0] and lo[1] < hi[1]):
                    raise InvalidRangeError(
                        f"{name}: varying range must have low < high"
                    )
        if self.ood_spec:
            merged = self.full_spec
            if not any(
                isinstance(merged[name], Fixed) for name in self.ood_spec
            ):
                raise ValueError(
                    "ood_spec must target at least one feature fixed in training"
                )

    @property
    def full_spec(self) -> dict[str, FeatureSpec]:
        merged = dict(_DEFAULT_SPEC)
        merged.update(self.invariant_spec)
        return merged


def _draw(
    spec: FeatureSpec | OodSpec,
    train_spec: FeatureSpec,
    n: int,
    sigma: float,
    rng: np.random.Generator,
    pair: bool,
) -> np.ndarray:
    """Raw feature values, shape (n,) or (n, 2) for paired features."""
    width = 2 if pair else 1
    if isinstance(spec, Shift):
        base = _draw(train_spec, train_spec, n, sigma, rng, pair)
        delta = np.array(_as_pair(spec.delta))[:width]
        return base + (delta if pair else delta[0])
    if isinstance(spec, Fixed):
        value = np.array(_as_pair(spec.value))[:width]
        noise = rng.normal(0.0, sigma, size=(n, width)) if sigma > 0 else np.zeros((n, width))
        out = value + noise
    else:
        lo = np.array(_as_pair(spec.low))[:width]
        hi = np.array(_as_pair(spec.high))[:width]
        out = rng.uniform(lo, hi, size=(n, width))
    return out if pair else out[:, 0]


def _sample_set(
    specs: Mapping[str, FeatureSpec | OodSpec],
    train_specs: Mapping[str, FeatureSpec],
    n: int,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    columns = {}
    for name in FEATURE_NAMES:
        columns[name] = _draw(
            specs[name], train_specs[name], n, sigma, rng, pair=name == "position_xy"
        )
    theta = np.deg2rad(columns["orientation_deg"])
    return np.column_stack(
        [
            columns["sides"],
            np.sin(theta),
            np.cos(theta),
            columns["color_channel"],
            columns["background"],
            columns["position_xy"],
            columns["size"],
        ]
    )


def gen_synthetic(config: SyntheticConfig) -> tuple[FeatureSet, FeatureSet, FeatureSet]:
    """Generate (train, test_in, test_out) single-layer feature sets.

    Fully reproducible from ``config.seed``; train and test_in follow the
    training spec, test_out applies the ood_spec overrides on top of it.
    """
    rng = np.random.default_rng(config.seed)
    train_specs = config.full_spec
    ood_specs: dict[str, FeatureSpec | OodSpec] = dict(train_specs)
    ood_specs.update(config.ood_spec)
    sets = []
    for specs, n in (
        (train_specs, config.n_train),
        (train_specs, config.n_test_in),
        (ood_specs, config.n_test_out),
    ):
        sets.append(
            FeatureSet.from_arrays(
                [_sample_set(specs, train_specs, n, config.noise_sigma, rng)]
            )
        )
    return sets[0], sets[1], sets[2]


def preset_broken_orientation(
    n_train: int = 2000, n_test: int = 1000, noise_sigma: float = 0.01, seed: int = 0
) -> SyntheticConfig:
    """Everything fixed in training; the OOD set rotates every sample by 90.

    The orientation invariant is broken by a margin far above the noise, so
    a fitted detector separates the sets perfectly.
    """
    return SyntheticConfig(
        n_train=n_train,
        n_test_in=n_test,
        n_test_out=n_test,
        invariant_spec={
            "sides": Fixed(5.0),
            "orientation_deg": Fixed(270.0),
            "color_channel": Fixed(1.0),
            "background": Fixed(0.0),
        },
        ood_spec={"orientation_deg": Shift(90.0)},
        noise_sigma=noise_sigma,
        seed=seed,
    )


def preset_varied_shapes(
    n_train: int = 2000, n_test: int = 1000, noise_sigma: float = 0.01, seed: int = 0
) -> SyntheticConfig:
    """Shape count varies in training; the "OOD" set is a null draw.

    Pentagons (and every other side count in the range) are in-distribution,
    so test_out follows the training distribution and the expected AUROC is
    one half: samples that only realize varying features differently must not
    be flagged.
    """
    return SyntheticConfig(
        n_train=n_train,
        n_test_in=n_test,
        n_test_out=n_test,
        invariant_spec={
            "sides": Varying(3.0, 9.0),
            "orientation_deg": Fixed(0.0),
            "color_channel": Fixed(1.0),
            "background": Fixed(0.0),
        },
        ood_spec={},
        noise_sigma=noise_sigma,
        seed=seed,
    )


SCENARIOS = {
    "broken-orientation": preset_broken_orientation,
    "varied-shapes": preset_varied_shapes,
}


def gen_planted_invariant(
    n_train: int = 2000,
    n_test: int = 1000,
    dim: int = 20,
    weak_variance: float = 1e-4,
    shift: float = 60.0,
    seed: int = 0,
) -> tuple[FeatureSet, FeatureSet, FeatureSet]:
    """Gaussian data with one tight linear invariant, broken only in test_out.

    The generating covariance has a random orthonormal eigenbasis with one
    eigenvalue at ``weak_variance`` and the rest spread over 1..dim-1. The
    out set is shifted by ``shift`` standard deviations along the weak
    direction and is therefore separable only through that component.
    """
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    variances = np.concatenate([[weak_variance], np.arange(1, dim, dtype=np.float64)])
    scale = np.sqrt(variances)

    def draw(n: int) -> np.ndarray:
        return rng.standard_normal((n, dim)) * scale @ basis.T

    train = draw(n_train)
    test_in = draw(n_test)
    test_out = draw(n_test) + shift * np.sqrt(weak_variance) * basis[:, 0]
    return (
        FeatureSet.from_arrays([train]),
        FeatureSet.from_arrays([test_in]),
        FeatureSet.from_arrays([test_out]),
    )
