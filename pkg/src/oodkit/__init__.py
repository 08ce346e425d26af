"""Unsupervised out-of-distribution detection from multi-layer features.

Fits per-layer Gaussian models of a training set's descriptor vectors and
scores test samples by summed layer-wise Mahalanobis distances; the
equivalent soft-invariant (PCA) view exposes which principal components carry
the detection signal. Includes a portable binary feature format, an AUROC
evaluation harness driven by JSON manifests, synthetic scenario generators,
and a CLI.
"""

from .detector import MahalanobisDetector, SoftInvariantDetector
from .errors import (
    AllErrorsZeroError,
    BadMagicError,
    DimensionMismatchError,
    EmptyGroupError,
    EmptyInputError,
    InsufficientSamplesError,
    InvalidRangeError,
    LayerCountMismatchError,
    ManifestError,
    ModelFileError,
    NonFiniteScoreError,
    NonFiniteValueError,
    OodkitError,
    SingularCovarianceError,
    TooFewSamplesError,
    TruncatedFileError,
    ZeroDimensionError,
    ZeroVarianceError,
)
from .evaluation import (
    ClassCountPoint,
    EvalResult,
    RelativeResult,
    auroc,
    class_count_sweep,
    relative_performance,
    run_experiment,
    run_experiments,
)
from .features import (
    ExperimentManifest,
    FeatureSet,
    LayerBlock,
    load_features,
    load_manifest,
    save_features,
    save_manifest,
)
from .gaussian import (
    GaussianModel,
    LayerGaussian,
    fit_gaussian,
    ledoit_wolf_shrink,
    load_model,
    save_model,
)
from .invariants import (
    ComponentSelection,
    InvariantBasis,
    SweepPoint,
    component_sweep,
    fit_invariants,
    invariant_score,
    invariant_scores,
    sum_layer_scores,
)
from .scoring import ScoreReport, score, score_layer
from .synthetic import (
    Fixed,
    Shift,
    SyntheticConfig,
    Varying,
    gen_planted_invariant,
    gen_synthetic,
    preset_broken_orientation,
    preset_varied_shapes,
)

__version__ = "0.1.0"

__all__ = [
    "AllErrorsZeroError",
    "BadMagicError",
    "ClassCountPoint",
    "ComponentSelection",
    "DimensionMismatchError",
    "EmptyGroupError",
    "EmptyInputError",
    "EvalResult",
    "ExperimentManifest",
    "FeatureSet",
    "Fixed",
    "GaussianModel",
    "InsufficientSamplesError",
    "InvalidRangeError",
    "InvariantBasis",
    "LayerBlock",
    "LayerCountMismatchError",
    "LayerGaussian",
    "MahalanobisDetector",
    "ManifestError",
    "ModelFileError",
    "NonFiniteScoreError",
    "NonFiniteValueError",
    "OodkitError",
    "RelativeResult",
    "ScoreReport",
    "Shift",
    "SingularCovarianceError",
    "SoftInvariantDetector",
    "SweepPoint",
    "SyntheticConfig",
    "TooFewSamplesError",
    "TruncatedFileError",
    "Varying",
    "ZeroDimensionError",
    "ZeroVarianceError",
    "auroc",
    "class_count_sweep",
    "component_sweep",
    "fit_gaussian",
    "fit_invariants",
    "gen_planted_invariant",
    "gen_synthetic",
    "invariant_score",
    "invariant_scores",
    "ledoit_wolf_shrink",
    "load_features",
    "load_manifest",
    "load_model",
    "preset_broken_orientation",
    "preset_varied_shapes",
    "relative_performance",
    "run_experiment",
    "run_experiments",
    "save_features",
    "save_manifest",
    "save_model",
    "score",
    "score_layer",
    "sum_layer_scores",
]
