"""Per-layer Gaussian models of training features.

Fitting computes, for each layer, the mean and the biased sample covariance
(divisor N) of the training descriptors, optionally regularizes the
covariance with Ledoit-Wolf shrinkage toward a scaled identity, and stores a
lower Cholesky factor for distance computations.

Rows are accumulated in a canonical order (sorted by raw byte pattern), so a
fit is exactly invariant to any permutation of the training rows and
reproducible bit-for-bit.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ModelFileError,
    SingularCovarianceError,
    TooFewSamplesError,
    ZeroVarianceError,
)
from .features import FeatureSet, SHRINKAGE_MODES

MODEL_MAGIC = b"UOM1"

# Diagonal jitter ladder for Cholesky retries after shrinkage: base scale,
# doubled at most this many times.
_JITTER_SCALE = 1e-10
_JITTER_DOUBLINGS = 3


def canonical_order(data: np.ndarray) -> np.ndarray:
    """Indices sorting rows by their raw bytes.

    Any permutation of the same rows sorts to the same sequence, which makes
    downstream float accumulation order-independent.
    """
    arr = np.ascontiguousarray(data)
    as_void = arr.view(f"V{arr.shape[1] * arr.dtype.itemsize}").ravel()
    return np.argsort(as_void, kind="stable")


def layer_moments(data: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean, biased covariance, and centered rows of one layer, in float64.

    Returns (mean, cov, centered) where centered rows are in canonical order.
    """
    rows = np.ascontiguousarray(data)[canonical_order(data)].astype(np.float64)
    n = rows.shape[0]
    mean = np.add.reduce(rows, axis=0) / n
    centered = rows - mean
    cov = centered.T @ centered / n
    cov = (cov + cov.T) / 2.0
    return mean, cov, centered


def ledoit_wolf_shrink(
    raw_cov: np.ndarray, centered_samples: np.ndarray
) -> tuple[np.ndarray, float]:
    """Shrink a biased sample covariance toward a scaled identity.

    Returns ``((1 - delta) * S + delta * m * I, delta)`` with ``m`` the mean
    diagonal of S and ``delta`` the closed-form optimal intensity estimated
    from the centered samples. ``delta`` is always in [0, 1]. The result is
    symmetric positive-definite whenever the data has any variance and
    ``delta > 0``.

    Raises ZeroVarianceError when all samples are identical (the shrinkage
    target ``m * I`` degenerates to zero).
    """
    S = np.asarray(raw_cov, dtype=np.float64)
    X = np.asarray(centered_samples, dtype=np.float64)
    n, d = X.shape
    m = np.trace(S) / d
    if m <= 0.0:
        raise ZeroVarianceError("all training samples are identical")
    identity = np.eye(d)
    dispersion = ((S - m * identity) ** 2).sum() / d
    if dispersion == 0.0:
        # S is already the target; the convex combination is S for any delta.
        return S.copy(), 0.0
    X2 = X**2
    beta_bar = ((X2.T @ X2) / n - S**2).sum() / (d * n)
    beta = min(max(beta_bar, 0.0), dispersion)
    delta = beta / dispersion
    shrunk = (1.0 - delta) * S + delta * m * identity
    return (shrunk + shrunk.T) / 2.0, float(delta)


def _cholesky_with_repair(
    cov: np.ndarray, shrinkage_enabled: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Lower Cholesky factor of *cov*, with bounded diagonal repair.

    Without shrinkage a failure means genuinely rank-deficient data and is
    reported as SingularCovarianceError. With shrinkage the matrix is SPD up
    to rounding, so a small diagonal jitter is retried a bounded number of
    times; the jittered matrix is returned alongside the factor so the stored
    covariance always reconstructs from it.
    """
    try:
        return np.linalg.cholesky(cov), cov
    except np.linalg.LinAlgError:
        if not shrinkage_enabled:
            raise SingularCovarianceError(
                "sample covariance is singular; enable shrinkage or add data"
            ) from None
    base = _JITTER_SCALE * np.trace(cov) / cov.shape[0]
    for k in range(_JITTER_DOUBLINGS + 1):
        jittered = cov + (base * 2**k) * np.eye(cov.shape[0])
        try:
            return np.linalg.cholesky(jittered), jittered
        except np.linalg.LinAlgError:
            continue
    raise SingularCovarianceError("covariance not positive-definite after repair")


@dataclass(frozen=True)
class LayerGaussian:
    """Fitted mean, covariance, and Cholesky factor for one layer."""

    mean: np.ndarray
    covariance: np.ndarray
    factor: np.ndarray
    shrinkage_intensity: float

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def validate(self) -> None:
        """Check the structural invariants; used by tests and after loads."""
        if not np.allclose(self.covariance, self.covariance.T, atol=1e-9, rtol=0.0):
            raise ValueError("covariance is not symmetric")
        recon = self.factor @ self.factor.T
        if not np.allclose(recon, self.covariance, rtol=1e-8, atol=0.0):
            raise ValueError("factor does not reconstruct covariance")
        if not 0.0 <= self.shrinkage_intensity <= 1.0:
            raise ValueError("shrinkage intensity out of [0, 1]")
        if self.shrinkage_intensity > 0.0:
            smallest = np.linalg.eigvalsh(self.covariance)[0]
            if smallest <= 0.0:
                raise ValueError("shrunk covariance is not positive-definite")


@dataclass(frozen=True)
class GaussianModel:
    """One :class:`LayerGaussian` per layer, in layer order."""

    layers: tuple[LayerGaussian, ...]

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(layer.dim for layer in self.layers)


def fit_gaussian(train: FeatureSet, shrinkage: str = "ledoit_wolf") -> GaussianModel:
    """Fit per-layer means and covariances on a training feature set.

    ``shrinkage`` is ``"ledoit_wolf"`` (regularize each layer's covariance
    toward a scaled identity with the data-driven intensity) or ``"none"``
    (raw biased covariance; raises SingularCovarianceError on rank-deficient
    layers).
    """
    if shrinkage not in SHRINKAGE_MODES:
        raise ValueError(f"shrinkage must be one of {SHRINKAGE_MODES}, got {shrinkage!r}")
    if train.sample_count < 2:
        raise TooFewSamplesError(
            f"need at least 2 samples to fit, got {train.sample_count}"
        )
    fitted = []
    for block in train.layers:
        mean, cov, centered = layer_moments(block.data)
        if shrinkage == "ledoit_wolf":
            cov, intensity = ledoit_wolf_shrink(cov, centered)
        else:
            intensity = 0.0
        factor, cov = _cholesky_with_repair(cov, shrinkage == "ledoit_wolf")
        fitted.append(
            LayerGaussian(
                mean=mean,
                covariance=cov,
                factor=factor,
                shrinkage_intensity=intensity,
            )
        )
    return GaussianModel(tuple(fitted))


def save_model(model: GaussianModel, path: str | Path) -> None:
    """Serialize a model: JSON header, then float64 means and factors.

    Payload is little-endian row-major, one mean vector and one full D x D
    factor matrix per layer, in layer order.
    """
    header = {
        "layer_count": model.layer_count,
        "dims": list(model.dims),
        "shrinkage_intensities": [layer.shrinkage_intensity for layer in model.layers],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for layer in model.layers:
            fh.write(np.ascontiguousarray(layer.mean, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(layer.factor, dtype="<f8").tobytes())


def load_model(path: str | Path) -> GaussianModel:
    """Read a model written by :func:`save_model`.

    The covariance is rebuilt from the stored factor, so scores computed from
    a reloaded model are bitwise identical to the freshly fitted ones.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MODEL_MAGIC) + 4 or raw[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFileError(f"{path}: not a model file")
    (header_len,) = struct.unpack_from("<I", raw, len(MODEL_MAGIC))
    offset = len(MODEL_MAGIC) + 4
    if len(raw) < offset + header_len:
        raise ModelFileError(f"{path}: header cut short")
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"{path}: bad header: {exc}") from exc
    offset += header_len
    try:
        dims = [int(d) for d in header["dims"]]
        intensities = [float(x) for x in header["shrinkage_intensities"]]
        layer_count = int(header["layer_count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: bad header fields: {exc}") from exc
    if layer_count != len(dims) or layer_count != len(intensities) or layer_count < 1:
        raise ModelFileError(f"{path}: inconsistent header")
    layers = []
    for dim, intensity in zip(dims, intensities):
        need = 8 * (dim + dim * dim)
        if len(raw) < offset + need:
            raise ModelFileError(f"{path}: payload cut short")
        mean = np.frombuffer(raw, dtype="<f8", count=dim, offset=offset).copy()
        offset += 8 * dim
        factor = (
            np.frombuffer(raw, dtype="<f8", count=dim * dim, offset=offset)
            .reshape(dim, dim)
            .copy()
        )
        offset += 8 * dim * dim
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(factor))):
            raise ModelFileError(f"{path}: non-finite model parameters")
        cov = factor @ factor.T
        layers.append(
            LayerGaussian(
                mean=mean,
                covariance=(cov + cov.T) / 2.0,
                factor=factor,
                shrinkage_intensity=intensity,
            )
        )
    if offset != len(raw):
        raise ModelFileError(f"{path}: trailing bytes")
    return GaussianModel(tuple(layers))
