"""AUROC, manifest experiments, and summary-table tests."""

import numpy as np
import pytest

from oodkit import (
    EmptyGroupError,
    EmptyInputError,
    EvalResult,
    FeatureSet,
    InsufficientSamplesError,
    LayerCountMismatchError,
    NonFiniteScoreError,
    auroc,
    class_count_sweep,
    relative_performance,
    run_experiment,
    run_experiments,
    save_features,
    save_manifest,
)
from oodkit.features import ExperimentManifest


def pairwise_auroc(scores_in, scores_out):
    """O(n^2) oracle: count out > in pairs, ties worth one half."""
    wins = 0.0
    for o in scores_out:
        for i in scores_in:
            if o > i:
                wins += 1.0
            elif o == i:
                wins += 0.5
    return wins / (len(scores_in) * len(scores_out))


def test_perfect_separation():
    assert auroc([1.0, 2.0], [3.0, 4.0]) == 1.0


def test_identical_distributions_with_ties():
    assert auroc([1.0, 2.0], [1.0, 2.0]) == 0.5


def test_matches_pairwise_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n_in = int(rng.integers(1, 60))
        n_out = int(rng.integers(1, 60))
        # coarse grid forces plenty of ties
        s_in = rng.integers(0, 8, n_in).astype(float)
        s_out = rng.integers(0, 8, n_out).astype(float) + rng.choice([0.0, 0.5])
        assert auroc(s_in, s_out) == pairwise_auroc(s_in, s_out)


def test_monotone_transform_invariance():
    rng = np.random.default_rng(5)
    s_in = rng.normal(0.0, 1.0, 300)
    s_out = rng.normal(0.5, 1.2, 200)
    base = auroc(s_in, s_out)
    assert auroc(np.exp(s_in), np.exp(s_out)) == base
    assert auroc(3.0 * s_in + 7.0, 3.0 * s_out + 7.0) == base


def test_complement_identity():
    rng = np.random.default_rng(7)
    for _ in range(50):
        a = rng.integers(0, 5, rng.integers(1, 40)).astype(float)
        b = rng.integers(0, 5, rng.integers(1, 40)).astype(float)
        assert auroc(a, b) + auroc(b, a) == 1.0


def test_auroc_input_errors():
    with pytest.raises(EmptyInputError):
        auroc([], [1.0])
    with pytest.raises(EmptyInputError):
        auroc([1.0], [])
    with pytest.raises(NonFiniteScoreError):
        auroc([1.0, np.nan], [2.0])
    with pytest.raises(NonFiniteScoreError):
        auroc([1.0], [np.inf])


def _write_experiment(tmp_path, train, test_in, test_out, shrinkage="ledoit_wolf"):
    save_features(train, tmp_path / "train.uof")
    save_features(test_in, tmp_path / "in.uof")
    save_features(test_out, tmp_path / "out.uof")
    manifest = ExperimentManifest(
        name="fixture:shifted",
        train_path=tmp_path / "train.uof",
        test_in_path=tmp_path / "in.uof",
        test_out_path=tmp_path / "out.uof",
        shrinkage=shrinkage,
    )
    path = tmp_path / "exp.json"
    save_manifest(manifest, path)
    return path


def test_shifted_out_set_separates(tmp_path):
    rng = np.random.default_rng(11)
    train = rng.standard_normal((1000, 6))
    sigma = train.std(axis=0)
    path = _write_experiment(
        tmp_path,
        FeatureSet.from_arrays([train]),
        FeatureSet.from_arrays([rng.standard_normal((500, 6))]),
        FeatureSet.from_arrays([rng.standard_normal((500, 6)) + 10.0 * sigma]),
    )
    result = run_experiment(path)
    assert result.auroc >= 0.999
    assert result.n_in == 500 and result.n_out == 500
    assert result.mean_score_out > result.mean_score_in


def test_null_experiment_stays_near_half(tmp_path):
    rng = np.random.default_rng(13)
    path = _write_experiment(
        tmp_path,
        FeatureSet.from_arrays([rng.standard_normal((2000, 6))]),
        FeatureSet.from_arrays([rng.standard_normal((1000, 6))]),
        FeatureSet.from_arrays([rng.standard_normal((1000, 6))]),
    )
    result = run_experiment(path)
    assert 0.45 <= result.auroc <= 0.55


def test_layer_count_mismatch_across_files(tmp_path):
    rng = np.random.default_rng(17)
    two_layer = FeatureSet.from_arrays(
        [rng.standard_normal((20, 3)), rng.standard_normal((20, 3))]
    )
    one_layer = FeatureSet.from_arrays([rng.standard_normal((20, 3))])
    path = _write_experiment(tmp_path, two_layer, one_layer, one_layer)
    with pytest.raises(LayerCountMismatchError):
        run_experiment(path)


def test_run_experiment_is_deterministic(tmp_path):
    rng = np.random.default_rng(19)
    path = _write_experiment(
        tmp_path,
        FeatureSet.from_arrays([rng.standard_normal((200, 4))]),
        FeatureSet.from_arrays([rng.standard_normal((100, 4))]),
        FeatureSet.from_arrays([rng.standard_normal((100, 4)) + 1.0]),
    )
    first = run_experiment(path)
    second = run_experiment(path)
    assert first == second
    batch = run_experiments([path, path, path], threads=3)
    assert batch == [first, first, first]


def _result(name, value):
    return EvalResult(
        name=name, auroc=value, n_in=10, n_out=10, mean_score_in=1.0, mean_score_out=2.0
    )


def test_relative_performance_single_result_group():
    rows = relative_performance([_result("a:b", 0.7)], ["task"])
    assert rows[0].relative == 1.0


def test_relative_performance_equal_values():
    rows = relative_performance([_result("a:b", 0.8), _result("a:c", 0.8)], ["t", "t"])
    assert [r.relative for r in rows] == [1.0, 1.0]


def test_relative_performance_arithmetic():
    rows = relative_performance([_result("a:b", 0.6), _result("a:c", 0.9)], ["t", "t"])
    assert rows[0].relative == pytest.approx(0.8)
    assert rows[1].relative == pytest.approx(1.2)


def test_relative_performance_groups_are_independent():
    rows = relative_performance(
        [_result("a:b", 0.6), _result("a:c", 0.9), _result("x:y", 0.5)],
        ["t1", "t1", "t2"],
    )
    assert rows[2].relative == 1.0


def test_relative_performance_errors():
    with pytest.raises(EmptyGroupError):
        relative_performance([], [])
    with pytest.raises(ValueError):
        relative_performance([_result("a:b", 0.5)], [])


def _class_pools(rng, values, n=240, spread=0.05):
    """Single-layer pools differing only in the first coordinate's value."""
    pools = []
    for v in values:
        block = rng.normal(0.0, spread, size=(n, 4))
        block[:, 0] += v
        pools.append(FeatureSet.from_arrays([block]))
    return pools


def test_class_count_sweep_k1_matches_plain_experiment(tmp_path):
    rng = np.random.default_rng(23)
    pools = _class_pools(rng, [0.0, 4.0, 8.0])
    ood = FeatureSet.from_arrays([rng.normal(0.0, 0.05, size=(100, 4)) + 20.0])
    sweep = class_count_sweep(pools, ood, ood, [1], seed=0)
    save_features(pools[0], tmp_path / "train.uof")
    save_features(ood, tmp_path / "ood.uof")
    manifest = ExperimentManifest(
        name="class0:ood",
        train_path=tmp_path / "train.uof",
        test_in_path=tmp_path / "train.uof",
        test_out_path=tmp_path / "ood.uof",
    )
    save_manifest(manifest, tmp_path / "exp.json")
    plain = run_experiment(tmp_path / "exp.json")
    assert sweep[0].auc_near == pytest.approx(plain.auroc, abs=1e-12)


def test_class_count_sweep_total_held_constant_and_deterministic():
    rng = np.random.default_rng(29)
    pools = _class_pools(rng, [0.0, 3.0, 6.0, 9.0])
    ood = FeatureSet.from_arrays([rng.normal(0.0, 0.05, size=(80, 4)) + 30.0])
    a = class_count_sweep(pools, ood, ood, [1, 2, 4], seed=7)
    b = class_count_sweep(pools, ood, ood, [1, 2, 4], seed=7)
    assert a == b
    threaded = class_count_sweep(pools, ood, ood, [1, 2, 4], seed=7, threads=4)
    assert threaded == a
    c = class_count_sweep(pools, ood, ood, [1, 2, 4], seed=8)
    assert [p.k for p in c] == [1, 2, 4]


def test_class_count_sweep_insufficient():
    rng = np.random.default_rng(31)
    pools = _class_pools(rng, [0.0, 5.0], n=20)
    ood = FeatureSet.from_arrays([rng.normal(0.0, 0.05, size=(10, 4))])
    with pytest.raises(InsufficientSamplesError):
        class_count_sweep(pools, ood, ood, [3])
    with pytest.raises(InsufficientSamplesError):
        class_count_sweep(pools, ood, ood, [0])
    with pytest.raises(InsufficientSamplesError):
        class_count_sweep([], ood, ood, [1])
    small = _class_pools(rng, [0.0, 5.0], n=3)
    with pytest.raises(InsufficientSamplesError):
        class_count_sweep(small, ood, ood, [2])
