"""Feature data model and UOFV1 round-trip tests."""

import json
import struct

import numpy as np
import pytest

from oodkit import (
    BadMagicError,
    FeatureSet,
    ManifestError,
    NonFiniteValueError,
    TruncatedFileError,
    ZeroDimensionError,
    load_features,
    load_manifest,
    save_features,
    save_manifest,
)
from oodkit.features import ExperimentManifest


def random_feature_set(rng, n, dims):
    return FeatureSet.from_arrays([rng.standard_normal((n, d)) for d in dims])


def test_file_size_arithmetic(tmp_path):
    # magic(4) + version(1) + L,N header(8) + layer header(4) + 2*3 floats(24)
    fs = FeatureSet.from_arrays([np.arange(6, dtype=np.float32).reshape(2, 3)])
    path = tmp_path / "tiny.uof"
    save_features(fs, path)
    assert path.stat().st_size == 4 + 1 + 8 + 4 + 24


def test_round_trip_exact_bits(tmp_path):
    rng = np.random.default_rng(42)
    fs = random_feature_set(rng, 10, (4, 8, 16))
    path = tmp_path / "feats.uof"
    save_features(fs, path)
    loaded = load_features(path)
    assert loaded.dims == (4, 8, 16)
    assert loaded.sample_count == 10
    for orig, back in zip(fs.layers, loaded.layers):
        assert orig.data.tobytes() == back.data.tobytes()
    assert loaded == fs


@pytest.mark.parametrize("seed", range(5))
def test_round_trip_random_shapes(tmp_path, seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 30))
    dims = tuple(int(d) for d in rng.integers(1, 12, size=rng.integers(1, 5)))
    fs = random_feature_set(rng, n, dims)
    path = tmp_path / f"rt{seed}.uof"
    save_features(fs, path)
    assert load_features(path) == fs


def test_layer_order_preserved(tmp_path):
    a = np.full((3, 2), 1.0)
    b = np.full((3, 5), 2.0)
    path = tmp_path / "order.uof"
    save_features(FeatureSet.from_arrays([a, b]), path)
    loaded = load_features(path)
    assert loaded.dims == (2, 5)
    assert np.all(loaded.layers[0].data == 1.0)
    assert np.all(loaded.layers[1].data == 2.0)


def test_nan_rejected_at_construction():
    bad = np.ones((2, 2))
    bad[0, 1] = np.nan
    with pytest.raises(NonFiniteValueError):
        FeatureSet.from_arrays([bad])
    with pytest.raises(NonFiniteValueError):
        FeatureSet.from_arrays([np.full((2, 2), np.inf)])


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.uof"
    path.write_bytes(b"XXXX" + bytes([1]) + struct.pack("<II", 1, 1) + b"\0" * 8)
    with pytest.raises(BadMagicError):
        load_features(path)


def test_wrong_version_rejected(tmp_path):
    path = tmp_path / "v2.uof"
    path.write_bytes(b"UOFV" + bytes([2]) + struct.pack("<II", 1, 1))
    with pytest.raises(BadMagicError):
        load_features(path)


def test_truncated_payload(tmp_path):
    # header claims N=5 rows of width 2 but carries only 4 rows
    path = tmp_path / "short.uof"
    payload = np.zeros(4 * 2, dtype="<f4").tobytes()
    path.write_bytes(
        b"UOFV" + bytes([1]) + struct.pack("<II", 1, 5) + struct.pack("<I", 2) + payload
    )
    with pytest.raises(TruncatedFileError):
        load_features(path)


def test_trailing_bytes_rejected(tmp_path):
    fs = FeatureSet.from_arrays([np.zeros((1, 1))])
    path = tmp_path / "extra.uof"
    save_features(fs, path)
    path.write_bytes(path.read_bytes() + b"junk")
    with pytest.raises(TruncatedFileError):
        load_features(path)


def test_zero_dimension_rejected(tmp_path):
    path = tmp_path / "zero.uof"
    path.write_bytes(b"UOFV" + bytes([1]) + struct.pack("<II", 1, 2) + struct.pack("<I", 0))
    with pytest.raises(ZeroDimensionError):
        load_features(path)
    path.write_bytes(b"UOFV" + bytes([1]) + struct.pack("<II", 0, 2))
    with pytest.raises(ZeroDimensionError):
        load_features(path)


def test_nonfinite_payload_rejected(tmp_path):
    path = tmp_path / "naninside.uof"
    payload = np.array([1.0, np.nan], dtype="<f4").tobytes()
    path.write_bytes(
        b"UOFV" + bytes([1]) + struct.pack("<II", 1, 2) + struct.pack("<I", 1) + payload
    )
    with pytest.raises(NonFiniteValueError):
        load_features(path)


def test_mismatched_row_counts_rejected():
    with pytest.raises(ValueError):
        FeatureSet.from_arrays([np.zeros((2, 2)), np.zeros((3, 2))])


def test_storage_is_float32_and_immutable():
    fs = FeatureSet.from_arrays([np.ones((2, 2), dtype=np.float64)])
    block = fs.layers[0]
    assert block.data.dtype == np.float32
    with pytest.raises(ValueError):
        block.data[0, 0] = 7.0


def test_manifest_round_trip(tmp_path):
    manifest = ExperimentManifest(
        name="CIFAR10:SVHN",
        train_path=tmp_path / "train.uof",
        test_in_path=tmp_path / "in.uof",
        test_out_path=tmp_path / "out.uof",
        shrinkage="none",
    )
    path = tmp_path / "exp.json"
    save_manifest(manifest, path)
    loaded = load_manifest(path)
    assert loaded == manifest


def test_manifest_relative_paths_resolve_against_file(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(
        json.dumps(
            {"name": "a:b", "train": "t.uof", "test_in": "i.uof", "test_out": "o.uof"}
        )
    )
    loaded = load_manifest(path)
    assert loaded.train_path == tmp_path / "t.uof"
    assert loaded.shrinkage == "ledoit_wolf"


def test_manifest_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ManifestError):
        load_manifest(path)
    path.write_text(json.dumps({"name": "x"}))
    with pytest.raises(ManifestError):
        load_manifest(path)
    path.write_text(
        json.dumps(
            {
                "name": "x",
                "train": "t",
                "test_in": "i",
                "test_out": "o",
                "shrinkage": "bogus",
            }
        )
    )
    with pytest.raises(ManifestError):
        load_manifest(path)
