"""Cross-validated k-NN evaluation of feature subsets and rank summaries."""

from __future__ import annotations

import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy.stats import rankdata

from . import __version__
from .dataset import Dataset, Kind

log = logging.getLogger(__name__)

METRIC = "heom"


@dataclass
class EvalReport:
    dataset: str
    subset: list[int]
    accuracy: np.ndarray  # (repeats, folds)
    folds: int
    repeats: int
    k: int
    seed: int
    wall_time: float = 0.0
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def subset_size(self) -> int:
        return len(self.subset)

    @property
    def mean_accuracy(self) -> float:
        return float(self.accuracy.mean())

    @property
    def std_accuracy(self) -> float:
        return float(self.accuracy.std())

    def to_json(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "version": __version__,
            "metric": METRIC,
            "subset": self.subset,
            "subset_size": self.subset_size,
            "folds": self.folds,
            "repeats": self.repeats,
            "k": self.k,
            "seed": self.seed,
            "accuracy": self.accuracy.tolist(),
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "wall_time": self.wall_time,
            "config": self.config,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> EvalReport:
        return cls(
            dataset=doc["dataset"],
            subset=list(doc["subset"]),
            accuracy=np.array(doc["accuracy"], dtype=float),
            folds=doc["folds"],
            repeats=doc["repeats"],
            k=doc["k"],
            seed=doc["seed"],
            wall_time=doc.get("wall_time", 0.0),
            config=doc.get("config", {}),
        )


@dataclass
class RankTable:
    methods: list[str]
    datasets: list[str]
    ranks: np.ndarray  # (datasets, methods)

    @property
    def mean_ranks(self) -> dict[str, float]:
        return dict(zip(self.methods, self.ranks.mean(axis=0).tolist()))


def mixed_distance(a, b, continuous) -> float:
    """Heterogeneous Euclidean-overlap distance between two samples.

    ``continuous`` flags which positions are (standardized) continuous;
    the rest contribute 1 per mismatch.
    """
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    cont = np.asarray(continuous, dtype=bool)
    sq = np.sum((a[cont] - b[cont]) ** 2) + np.count_nonzero(a[~cont] != b[~cont])
    return float(np.sqrt(sq))


def _sq_distances(train: np.ndarray, query: np.ndarray, cont: np.ndarray) -> np.ndarray:
    """Squared HEOM distances, shape (len(query), len(train))."""
    out = np.zeros((query.shape[0], train.shape[0]))
    for j in range(train.shape[1]):
        diff = query[:, j, None] - train[None, :, j]
        out += diff * diff if cont[j] else (diff != 0)
    return out


def _vote(neighbor_labels: np.ndarray, n_classes: int) -> int:
    return int(np.argmax(np.bincount(neighbor_labels, minlength=n_classes)))


def knn_predict(train_x, train_y, query, k: int, continuous) -> int:
    """Majority label among the k nearest training samples.

    Distance ties go to the lower training index, vote ties to the smaller
    class id.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    train_y = np.asarray(train_y, dtype=np.int64)
    if train_x.shape[0] == 0:
        raise ValueError("empty training set")
    if not 1 <= k <= train_x.shape[0]:
        raise ValueError(f"k={k} must lie in [1, {train_x.shape[0]}]")
    d = _sq_distances(train_x, np.atleast_2d(np.asarray(query, dtype=float)), np.asarray(continuous, dtype=bool))[0]
    nearest = np.argsort(d, kind="stable")[:k]
    return _vote(train_y[nearest], int(train_y.max()) + 1)


def knn_predict_batch(train_x, train_y, queries, k: int, continuous, n_classes: int) -> np.ndarray:
    d = _sq_distances(train_x, queries, continuous)
    nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
    votes = train_y[nearest]
    return np.array([_vote(v, n_classes) for v in votes], dtype=np.int64)


def stratified_kfold(labels, folds: int, seed: int) -> np.ndarray:
    """Fold id per sample.

    Each class is shuffled with a seeded generator and dealt round-robin,
    continuing where the previous class stopped, so fold sizes differ by at
    most one overall and within each class.
    """
    labels = np.asarray(labels)
    n = labels.size
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > n:
        raise ValueError(f"folds={folds} exceeds sample count {n}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < folds:
            warnings.warn(f"class {cls} has {idx.size} samples, fewer than {folds} folds", stacklevel=2)
        idx = rng.permutation(idx)
        assignment[idx] = (offset + np.arange(idx.size)) % folds
        offset = (offset + idx.size) % folds
    return assignment


def accuracy(predicted, truth) -> float:
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise ValueError("predicted and truth must be non-empty and equally long")
    return float(np.count_nonzero(predicted == truth)) / truth.size


def _fold_accuracy(x: np.ndarray, y: np.ndarray, cont: np.ndarray, test: np.ndarray, k: int, n_classes: int) -> float:
    train = ~test
    xtr, xte = x[train].copy(), x[test].copy()
    if cont.any():
        mu = xtr[:, cont].mean(axis=0)
        sd = xtr[:, cont].std(axis=0)
        sd[sd == 0] = 1.0
        xtr[:, cont] = (xtr[:, cont] - mu) / sd
        xte[:, cont] = (xte[:, cont] - mu) / sd
    kk = min(k, xtr.shape[0])
    pred = knn_predict_batch(xtr, y[train], xte, kk, cont, n_classes)
    return accuracy(pred, y[test])


def cross_validate(
    dataset: Dataset,
    subset: Sequence[int] | None = None,
    folds: int = 5,
    repeats: int = 10,
    k: int = 3,
    seed: int = 0,
    n_jobs: int = 1,
) -> EvalReport:
    """Repeated stratified k-fold accuracy of a k-NN on a feature subset.

    Repeat ``r`` splits with ``seed + r``. Continuous columns are z-scored
    with training-split statistics only. ``subset=None`` uses every feature.
    """
    subset = list(range(dataset.m)) if subset is None else [int(j) for j in subset]
    if not subset:
        raise ValueError("empty feature subset")
    bad = [j for j in subset if not 0 <= j < dataset.m]
    if bad:
        raise ValueError(f"feature indices out of range: {bad}")
    t0 = time.perf_counter()
    x = dataset.values(subset).T.copy()
    y = dataset.labels
    cont = np.array([dataset.features[j].kind is Kind.CONTINUOUS for j in subset])
    splits = [stratified_kfold(y, folds, seed + r) for r in range(repeats)]
    acc = np.empty((repeats, folds))

    def run(cell):
        r, f = cell
        acc[r, f] = _fold_accuracy(x, y, cont, splits[r] == f, k, dataset.n_classes)

    cells = [(r, f) for r in range(repeats) for f in range(folds)]
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            list(pool.map(run, cells))
    else:
        for cell in cells:
            run(cell)
    return EvalReport(dataset.name, subset, acc, folds, repeats, k, seed, time.perf_counter() - t0)


def mean_ranks(table, methods: Sequence[str], datasets: Sequence[str] | None = None) -> RankTable:
    """Rank methods per dataset by accuracy (1 = best, ties share the average rank)."""
    acc = np.asarray(table, dtype=float)
    if acc.ndim != 2 or acc.shape[1] != len(methods) or len(methods) < 2 or acc.shape[0] < 1:
        raise ValueError("need a (datasets, methods) table with >= 2 methods and >= 1 dataset")
    ranks = np.vstack([rankdata(-row, method="average") for row in acc])
    names = list(datasets) if datasets is not None else [str(i) for i in range(acc.shape[0])]
    return RankTable(list(methods), names, ranks)
