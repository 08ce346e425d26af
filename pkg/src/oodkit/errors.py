"""Exception types raised across the package.

Everything derives from :class:`OodkitError` so callers (and the CLI) can
catch data and validation failures with a single handler.
"""


class OodkitError(Exception):
    """Base class for all oodkit errors."""


# Feature files and data model

class NonFiniteValueError(OodkitError):
    """A feature matrix or score vector contains NaN or infinity."""


class BadMagicError(OodkitError):
    """File does not start with the expected magic/version preamble."""


class TruncatedFileError(OodkitError):
    """File ends before the payload its header promises (or has extra bytes)."""


class ZeroDimensionError(OodkitError):
    """A feature file declares a zero layer count, sample count, or width."""


class ManifestError(OodkitError):
    """An experiment manifest is malformed or references missing files."""


class ModelFileError(OodkitError):
    """A serialized model file is malformed."""


# Fitting

class TooFewSamplesError(OodkitError):
    """Fitting needs at least two samples."""


class SingularCovarianceError(OodkitError):
    """Covariance has no Cholesky factorization (rank-deficient data)."""


class ZeroVarianceError(OodkitError):
    """All training samples are identical; shrinkage target degenerates."""


# Scoring

class DimensionMismatchError(OodkitError):
    """Feature width does not match the fitted layer width."""


class LayerCountMismatchError(OodkitError):
    """Layer count differs between a model and a feature set."""


class AllErrorsZeroError(OodkitError):
    """Every training error of an invariant basis is zero; scores undefined."""


# Evaluation

class EmptyInputError(OodkitError):
    """A score vector required to be nonempty is empty."""


class NonFiniteScoreError(OodkitError):
    """Scores passed to the evaluator contain NaN or infinity."""


class EmptyGroupError(OodkitError):
    """A relative-performance group has no members."""


class InvalidRangeError(OodkitError):
    """A synthetic feature range or sweep grid is out of bounds."""


class InsufficientSamplesError(OodkitError):
    """A class-count sweep asks for more classes or samples than the pools hold."""
