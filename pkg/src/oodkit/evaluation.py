"""Experiment evaluation: AUROC, manifest runs, and summary tables.

AUROC follows the rank-statistic definition with the out-distribution as the
positive class: the probability that a random out sample outscores a random
in sample, counting ties as one half. Mid-rank tie handling keeps the result
exact (rank sums stay below 2**53 for up to ten million samples).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    EmptyGroupError,
    EmptyInputError,
    InsufficientSamplesError,
    NonFiniteScoreError,
)
from .features import ExperimentManifest, FeatureSet, load_features, load_manifest
from .gaussian import fit_gaussian
from .scoring import score
from .validation import check_layer_compat


def auroc(scores_in: np.ndarray, scores_out: np.ndarray) -> float:
    """Probability that an out score exceeds an in score, ties counted half."""
    s_in = np.asarray(scores_in, dtype=np.float64).ravel()
    s_out = np.asarray(scores_out, dtype=np.float64).ravel()
    if s_in.size == 0 or s_out.size == 0:
        raise EmptyInputError("both score vectors must be nonempty")
    if not (np.all(np.isfinite(s_in)) and np.all(np.isfinite(s_out))):
        raise NonFiniteScoreError("scores contain NaN or infinity")
    combined = np.concatenate([s_in, s_out])
    _, inverse, counts = np.unique(combined, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    midranks = ends - (counts - 1) / 2.0
    rank_sum_out = midranks[inverse[s_in.size :]].sum()
    u = rank_sum_out - s_out.size * (s_out.size + 1) / 2.0
    return float(u / (s_in.size * s_out.size))


@dataclass(frozen=True)
class EvalResult:
    """Outcome of one ``in:out`` experiment."""

    name: str
    auroc: float
    n_in: int
    n_out: int
    mean_score_in: float
    mean_score_out: float


def run_experiment(manifest: ExperimentManifest | str | Path) -> EvalResult:
    """Fit on the manifest's training file and score both test files.

    Deterministic given the file contents and the manifest; all layer counts
    and widths must agree across the three files.
    """
    if not isinstance(manifest, ExperimentManifest):
        manifest = load_manifest(manifest)
    train = load_features(manifest.train_path)
    test_in = load_features(manifest.test_in_path)
    test_out = load_features(manifest.test_out_path)
    check_layer_compat(train.dims, test_in)
    check_layer_compat(train.dims, test_out)
    model = fit_gaussian(train, shrinkage=manifest.shrinkage)
    scores_in = score(model, test_in).total
    scores_out = score(model, test_out).total
    return EvalResult(
        name=manifest.name,
        auroc=auroc(scores_in, scores_out),
        n_in=test_in.sample_count,
        n_out=test_out.sample_count,
        mean_score_in=float(scores_in.mean()),
        mean_score_out=float(scores_out.mean()),
    )


def run_experiments(
    manifests: Sequence[ExperimentManifest | str | Path], threads: int = 1
) -> list[EvalResult]:
    """Run a batch of experiments, aggregated in manifest order.

    Experiments are independent, so results do not depend on the thread
    count.
    """
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1 or len(manifests) <= 1:
        return [run_experiment(m) for m in manifests]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run_experiment, manifests))


@dataclass(frozen=True)
class RelativeResult:
    """One experiment's AUROC divided by the mean AUROC of its group."""

    name: str
    group: str
    auroc: float
    relative: float


def relative_performance(
    results: Sequence[EvalResult], grouping: Sequence[str]
) -> list[RelativeResult]:
    """Normalize each result by its task group's mean AUROC.

    ``grouping`` assigns a task label to each result, positionally.
    """
    if len(results) != len(grouping):
        raise ValueError(
            f"{len(results)} results but {len(grouping)} group labels"
        )
    if not results:
        raise EmptyGroupError("no results to summarize")
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for result, group in zip(results, grouping):
        sums[group] = sums.get(group, 0.0) + result.auroc
        counts[group] = counts.get(group, 0) + 1
    return [
        RelativeResult(
            name=result.name,
            group=group,
            auroc=result.auroc,
            relative=result.auroc / (sums[group] / counts[group]),
        )
        for result, group in zip(results, grouping)
    ]


def _subsample(pool: FeatureSet, quota: int, rng: np.random.Generator) -> list[np.ndarray]:
    idx = np.sort(rng.choice(pool.sample_count, size=quota, replace=False))
    return [block.data[idx] for block in pool.layers]


@dataclass(frozen=True)
class ClassCountPoint:
    """AUROC against near and far OOD sets when training on k class pools."""

    k: int
    auc_near: float
    auc_far: float


def class_count_sweep(
    pools: Sequence[FeatureSet],
    ood_near: FeatureSet,
    ood_far: FeatureSet,
    k_values: Sequence[int],
    shrinkage: str = "ledoit_wolf",
    seed: int = 0,
    threads: int = 1,
) -> list[ClassCountPoint]:
    """Detection quality as the training set spans more classes.

    For each k the training set is the union of the first k pools, each
    subsampled (uniformly, seeded) to ``floor(T / k)`` rows where T is the
    smallest pool size, so the total stays constant across k. In-distribution
    reference scores come from the fitted training subsample itself.
    Subsampling streams are derived from ``(seed, k, class)``, so results do
    not depend on ``threads`` or evaluation order.
    """
    if not pools:
        raise InsufficientSamplesError("no class pools given")
    dims = pools[0].dims
    for p in list(pools[1:]) + [ood_near, ood_far]:
        check_layer_compat(dims, p)
    smallest = min(p.sample_count for p in pools)
    for k in k_values:
        if k < 1 or k > len(pools):
            raise InsufficientSamplesError(
                f"k={k} outside the available {len(pools)} class pools"
            )
        if smallest // k < 2:
            raise InsufficientSamplesError(
                f"k={k} leaves {smallest // k} samples per class; need at least 2"
            )

    def evaluate(k: int) -> ClassCountPoint:
        quota = smallest // k
        picks = [
            _subsample(pools[ci], quota, np.random.default_rng([seed, k, ci]))
            for ci in range(k)
        ]
        train = FeatureSet.from_arrays(
            [np.concatenate([p[li] for p in picks]) for li in range(len(dims))]
        )
        model = fit_gaussian(train, shrinkage=shrinkage)
        scores_train = score(model, train).total
        return ClassCountPoint(
            k=int(k),
            auc_near=auroc(scores_train, score(model, ood_near).total),
            auc_far=auroc(scores_train, score(model, ood_far).total),
        )

    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1 or len(k_values) <= 1:
        return [evaluate(k) for k in k_values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(evaluate, k_values))
