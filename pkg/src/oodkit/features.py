"""Feature data model and the UOFV1 binary file format.

A :class:`FeatureSet` holds one matrix per network layer, all with the same
number of rows (one row per sample). Matrices are stored as float32 and are
immutable once constructed; downstream fitting and scoring promote to
float64.

UOFV1 layout (little-endian throughout)::

    magic   4 bytes  b"UOFV"
    version 1 byte   0x01
    L       uint32   layer count
    N       uint32   sample count
    then for each layer, in order:
        D       uint32   feature width of this layer
        data    N*D float32 values, row-major

Experiment manifests are plain JSON files pairing a training feature file
with in/out test files, named with the ``in:out`` convention::

    {"name": "CIFAR10:SVHN", "train": "...", "test_in": "...",
     "test_out": "...", "shrinkage": "ledoit_wolf"}

Relative paths in a manifest are resolved against the manifest's directory.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    BadMagicError,
    ManifestError,
    NonFiniteValueError,
    TruncatedFileError,
    ZeroDimensionError,
)

MAGIC = b"UOFV"
VERSION = 1

SHRINKAGE_MODES = ("ledoit_wolf", "none")


def _freeze(arr: np.ndarray) -> np.ndarray:
    # always copy so the caller's array is never aliased or flag-flipped
    out = np.array(arr, dtype=np.float32, order="C")
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class LayerBlock:
    """One layer's descriptors: an N x D float32 matrix, one row per sample."""

    data: np.ndarray

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LayerBlock):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"layer data must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ZeroDimensionError(f"layer data must be nonempty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValueError("layer data contains NaN or infinity")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True, eq=False)
class FeatureSet:
    """An ordered collection of per-layer descriptor matrices.

    Every layer has the same row count; layer order is meaningful and is
    preserved by serialization.
    """

    layers: tuple[LayerBlock, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise ZeroDimensionError("a FeatureSet needs at least one layer")
        n = layers[0].n_samples
        for i, block in enumerate(layers):
            if block.n_samples != n:
                raise ValueError(
                    f"layer {i} has {block.n_samples} rows, expected {n}"
                )
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_arrays(cls, arrays: Iterable[np.ndarray]) -> "FeatureSet":
        return cls(tuple(LayerBlock(a) for a in arrays))

    @property
    def sample_count(self) -> int:
        return self.layers[0].n_samples

    @property
    def layer_count(self) -> int:
        return len(self.layers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(block.dim for block in self.layers)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureSet):
            return NotImplemented
        return self.dims == other.dims and all(
            np.array_equal(a.data, b.data) for a, b in zip(self.layers, other.layers)
        )


def save_features(feature_set: FeatureSet, path: str | Path) -> None:
    """Write *feature_set* to *path* in the UOFV1 format."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([VERSION]))
        fh.write(struct.pack("<II", feature_set.layer_count, feature_set.sample_count))
        for block in feature_set.layers:
            fh.write(struct.pack("<I", block.dim))
            fh.write(np.ascontiguousarray(block.data, dtype="<f4").tobytes())


def load_features(path: str | Path) -> FeatureSet:
    """Read a UOFV1 file back into a :class:`FeatureSet`.

    Raises BadMagicError, TruncatedFileError, ZeroDimensionError or
    NonFiniteValueError on malformed input.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 1:
        raise TruncatedFileError(f"{path}: shorter than the file preamble")
    if raw[: len(MAGIC)] != MAGIC or raw[len(MAGIC)] != VERSION:
        raise BadMagicError(f"{path}: not a UOFV1 file")
    offset = len(MAGIC) + 1
    if len(raw) < offset + 8:
        raise TruncatedFileError(f"{path}: header cut short")
    layer_count, n_samples = struct.unpack_from("<II", raw, offset)
    offset += 8
    if layer_count == 0 or n_samples == 0:
        raise ZeroDimensionError(f"{path}: zero layer or sample count")
    blocks = []
    for index in range(layer_count):
        if len(raw) < offset + 4:
            raise TruncatedFileError(f"{path}: layer {index} header missing")
        (dim,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        if dim == 0:
            raise ZeroDimensionError(f"{path}: layer {index} has zero width")
        nbytes = 4 * n_samples * dim
        if len(raw) < offset + nbytes:
            raise TruncatedFileError(
                f"{path}: layer {index} payload ends early "
                f"(need {nbytes} bytes, have {len(raw) - offset})"
            )
        data = np.frombuffer(raw, dtype="<f4", count=n_samples * dim, offset=offset)
        offset += nbytes
        if not np.all(np.isfinite(data)):
            raise NonFiniteValueError(f"{path}: layer {index} contains NaN or infinity")
        blocks.append(LayerBlock(data.reshape(n_samples, dim)))
    if offset != len(raw):
        raise TruncatedFileError(f"{path}: {len(raw) - offset} trailing bytes")
    return FeatureSet(tuple(blocks))


@dataclass(frozen=True)
class ExperimentManifest:
    """Declarative ``in:out`` experiment: train on one file, score two others."""

    name: str
    train_path: Path
    test_in_path: Path
    test_out_path: Path
    shrinkage: str = "ledoit_wolf"

    def __post_init__(self) -> None:
        if self.shrinkage not in SHRINKAGE_MODES:
            raise ManifestError(
                f"shrinkage must be one of {SHRINKAGE_MODES}, got {self.shrinkage!r}"
            )


def load_manifest(path: str | Path) -> ExperimentManifest:
    """Parse a manifest JSON file, resolving relative paths against it."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"{path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    missing = {"name", "train", "test_in", "test_out"} - payload.keys()
    if missing:
        raise ManifestError(f"{path}: missing keys {sorted(missing)}")
    base = path.parent

    def resolve(key: str) -> Path:
        value = payload[key]
        if not isinstance(value, str):
            raise ManifestError(f"{path}: {key} must be a string path")
        p = Path(value)
        return p if p.is_absolute() else base / p

    return ExperimentManifest(
        name=str(payload["name"]),
        train_path=resolve("train"),
        test_in_path=resolve("test_in"),
        test_out_path=resolve("test_out"),
        shrinkage=str(payload.get("shrinkage", "ledoit_wolf")),
    )


def save_manifest(manifest: ExperimentManifest, path: str | Path) -> None:
    path = Path(path)
    payload = {
        "name": manifest.name,
        "train": str(manifest.train_path),
        "test_in": str(manifest.test_in_path),
        "test_out": str(manifest.test_out_path),
        "shrinkage": manifest.shrinkage,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
