"""Relevant-and-representative feature selection and the full pipeline."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from .dataset import Dataset, DatasetError, Kind, infer_feature_kinds, split_by_kind
from .fclust import Clustering, cluster_features
from .measures import (
    DissimilarityMatrix,
    discretize_rows,
    dissimilarity_matrix,
    encode_rows,
    relevance_from_codes,
    relevance_vector,
)

log = logging.getLogger(__name__)

CENTER = "center"
MOST_RELEVANT = "most-relevant"


@dataclass(frozen=True)
class Provenance:
    index: int
    name: str
    kind: Kind
    cluster: int
    reason: str
    relevance: float


@dataclass(frozen=True)
class PipelineOptions:
    epsilon: float | None = None
    beta: float | None = None
    gamma: float | None = None
    bins: int | None = None
    n_jobs: int = 1

    def as_dict(self) -> dict[str, Any]:
        return {"epsilon": self.epsilon, "beta": self.beta, "gamma": self.gamma, "bins": self.bins}


@dataclass
class SelectionResult:
    dataset: str
    selected: list[int]
    provenance: list[Provenance]
    clusterings: dict[Kind, Clustering]
    excluded_constant: list[str] = field(default_factory=list)
    views: dict[Kind, list[int]] = field(default_factory=dict)
    matrices: dict[Kind, DissimilarityMatrix] = field(default_factory=dict, repr=False)
    config: dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def n_clusters(self) -> int:
        return sum(len(c) for c in self.clusterings.values())

    def counts(self) -> dict[str, int]:
        """Non-constant features per kind and clusters per kind."""
        return {
            "continuous": len(self.views.get(Kind.CONTINUOUS, ())),
            "discrete": len(self.views.get(Kind.DISCRETE, ())),
            "clusters_cont": len(self.clusterings.get(Kind.CONTINUOUS, ())),
            "clusters_disc": len(self.clusterings.get(Kind.DISCRETE, ())),
        }

    def to_json(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "version": __version__,
            "options": self.config,
            "selected": [
                {
                    "index": p.index,
                    "name": p.name,
                    "kind": p.kind.value,
                    "cluster": p.cluster,
                    "reason": p.reason,
                    "relevance_bits": p.relevance,
                }
                for p in self.provenance
            ],
            "counts": self.counts(),
            "excluded_constant": self.excluded_constant,
            "wall_time": self.wall_time,
        }


def select_from_clusters(clustering: Clustering, relevance) -> list[tuple[int, int, str]]:
    """Pick each cluster's center, plus its most relevant member if that beats the center.

    ``relevance`` maps a feature index to its MI with the labels. Ties go to
    the center; ties among other members go to the lowest index. Returns
    ``(feature, cluster_id, reason)`` triples.
    """
    picks = []
    for cid, cluster in enumerate(clustering.clusters):
        picks.append((cluster.center, cid, CENTER))
        others = sorted(j for j in cluster.members if j != cluster.center)
        if not others:
            continue
        best = max(others, key=lambda j: (relevance[j], -j))
        if relevance[best] > relevance[cluster.center]:
            picks.append((best, cid, MOST_RELEVANT))
    return picks


def run_pipeline(dataset: Dataset, options: PipelineOptions | None = None, keep_matrices: bool = False) -> SelectionResult:
    """Type, split, cluster and select; returns selected features in index order."""
    opts = options or PipelineOptions()
    t0 = time.perf_counter()
    if opts.epsilon is not None:
        dataset = dataset.with_kinds(infer_feature_kinds(dataset, opts.epsilon))
    x = dataset.values()
    if np.isnan(x).any():
        raise DatasetError("dataset has missing cells; impute first")
    constant = np.flatnonzero(np.all(x == x[:, :1], axis=1)).tolist()
    if constant:
        log.info("excluding constant features: %s", ", ".join(dataset.features[j].name for j in constant))
    if len(constant) == dataset.m:
        raise DatasetError("no informative features: every feature is constant")
    skip = set(constant)
    cont, disc = ([j for j in view if j not in skip] for view in split_by_kind(dataset))

    bins = opts.bins or max(2, math.ceil(math.sqrt(dataset.n)))
    disc_codes = encode_rows(x[disc]) if disc else None
    parts = [discretize_rows(x[cont], bins)] if cont else []
    if disc_codes is not None:
        parts.append(disc_codes[0])
    rel = relevance_from_codes(np.vstack(parts), dataset.labels)
    relevance = dict(zip(cont + disc, rel.tolist()))

    clusterings: dict[Kind, Clustering] = {}
    matrices: dict[Kind, DissimilarityMatrix] = {}
    provenance: list[Provenance] = []
    for kind, view in ((Kind.CONTINUOUS, cont), (Kind.DISCRETE, disc)):
        if not view:
            clusterings[kind] = Clustering((), None, kind)
            continue
        names = [dataset.features[j].name for j in view]
        shared = disc_codes if kind is Kind.DISCRETE else None
        mat = dissimilarity_matrix(x[view], kind, view, names, opts.n_jobs, codes=shared)
        clustering = cluster_features(mat, beta=opts.beta, gamma=opts.gamma, n_jobs=opts.n_jobs)
        clusterings[kind] = clustering
        if keep_matrices:
            matrices[kind] = mat
        for j, cid, reason in select_from_clusters(clustering, relevance):
            provenance.append(Provenance(j, dataset.features[j].name, kind, cid, reason, relevance[j]))

    provenance.sort(key=lambda p: p.index)
    return SelectionResult(
        dataset=dataset.name,
        selected=[p.index for p in provenance],
        provenance=provenance,
        clusterings=clusterings,
        excluded_constant=[dataset.features[j].name for j in constant],
        views={Kind.CONTINUOUS: cont, Kind.DISCRETE: disc},
        matrices=matrices,
        config=opts.as_dict(),
        wall_time=time.perf_counter() - t0,
    )


def mi_top_k(dataset: Dataset, k: int, bins: int | None = None) -> list[int]:
    """Indices of the ``k`` features with the highest label MI (ties: lowest index)."""
    bins = bins or max(2, math.ceil(math.sqrt(dataset.n)))
    rel = relevance_vector(dataset.values(), dataset.labels, dataset.kinds, bins)
    order = np.lexsort((np.arange(dataset.m), -rel))
    return sorted(int(j) for j in order[:k])
