"""Density-based feature clustering.

Features of one kind are clustered from their dissimilarity matrix:
kernel densities, fitness-proportionate-sharing search for temporary
centers, nearest-center assignment, then merging of overlapping clusters
until no two clusters overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .dataset import Kind
from .measures import DissimilarityMatrix, _run_rows

SHARING_FACTOR = 0.5
DEFAULT_GAMMA = 2.0


@dataclass(frozen=True)
class DensityParams:
    beta: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not self.beta > 0 or not self.gamma > 0:
            raise ValueError(f"beta and gamma must be positive, got {self.beta}, {self.gamma}")


@dataclass(frozen=True)
class FeatureCluster:
    center: int
    members: tuple[int, ...]
    radius: float

    def __post_init__(self):
        if self.center not in self.members:
            raise ValueError("cluster center must be a member")


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[FeatureCluster, ...]
    params: DensityParams | None
    kind: Kind
    densities: dict[int, float] = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.clusters)

    def to_json(self) -> list[dict]:
        return [
            {"kind": self.kind.value, "center": c.center, "members": list(c.members), "radius": c.radius}
            for c in self.clusters
        ]


def _values(matrix) -> np.ndarray:
    if isinstance(matrix, DissimilarityMatrix):
        return matrix.values
    return np.asarray(matrix, dtype=float)


def estimate_params(matrix, gamma: float = DEFAULT_GAMMA) -> DensityParams:
    """Bandwidth = mean off-diagonal dissimilarity; falls back to 1 when that is 0."""
    d = _values(matrix)
    m = d.shape[0]
    if m < 2:
        return DensityParams(1.0, gamma)
    # The diagonal is zero, so the off-diagonal mean is the full sum over m(m-1).
    beta = float((d.sum() - np.trace(d)) / (m * (m - 1)))
    return DensityParams(beta if beta > 0 else 1.0, gamma)


def density(matrix, params: DensityParams, n_jobs: int = 1) -> np.ndarray:
    """P(f_j) = sum_k exp(-gamma * Dist(f_j, f_k) / beta)."""
    d = np.ascontiguousarray(_values(matrix), dtype=float)
    out = np.empty(d.shape[0])
    _run_rows(lambda rows: K.density_rows(d, params.gamma / params.beta, rows, out), d.shape[0], n_jobs)
    return out


def fps_centers(matrix, densities: np.ndarray, params: DensityParams) -> list[int]:
    """Temporary centers by fitness proportionate sharing.

    The densest feature not yet chosen becomes a center, and every feature
    closer than ``beta`` to it has its working density halved. The search
    stops once each feature lies within ``beta`` of some center.
    """
    d = np.ascontiguousarray(_values(matrix), dtype=float)
    dens = np.ascontiguousarray(densities, dtype=float)
    return K.fps_centers(d, dens, float(params.beta), SHARING_FACTOR).tolist()


def _nearest(d: np.ndarray, centers) -> tuple[np.ndarray, np.ndarray]:
    """(sorted centers, slot of each feature's nearest center); centers own themselves."""
    order = np.array(sorted(centers), dtype=np.int64)
    owner = np.argmin(d[:, order], axis=1).astype(np.int64)
    owner[order] = np.arange(order.size)
    return order, owner


def _build(d: np.ndarray, centers: np.ndarray, owner: np.ndarray, radius=None) -> list[FeatureCluster]:
    out = []
    for s, c in enumerate(centers.tolist()):
        if c < 0:
            continue
        members = np.flatnonzero(owner == s)
        r = float(d[c, members].max()) if radius is None else float(radius[s])
        out.append(FeatureCluster(c, tuple(members.tolist()), r))
    return sorted(out, key=lambda c: c.center)


def assign(matrix, centers: list[int]) -> list[FeatureCluster]:
    """Attach every non-center feature to its nearest center (ties: lowest index)."""
    if not centers:
        raise ValueError("need at least one center")
    d = _values(matrix)
    order, owner = _nearest(d, centers)
    return _build(d, order, owner)


def _merge_arrays(d, densities, owner, centers):
    radius = K.merge_clusters(d, np.ascontiguousarray(densities, dtype=float), owner, centers)
    return _build(d, centers, owner, radius)


def merge(clusters: list[FeatureCluster], matrix, densities: np.ndarray) -> list[FeatureCluster]:
    """Merge clusters whose center distance is below the sum of their radii.

    Pairs are scanned lowest-center-first and the scan restarts after every
    merge, so the result is a deterministic fixed point. A merged cluster is
    centered on its densest member.
    """
    d = np.ascontiguousarray(_values(matrix), dtype=float)
    owner = np.full(d.shape[0], -1, dtype=np.int64)
    for slot, c in enumerate(clusters):
        owner[list(c.members)] = slot
    if (owner < 0).any():
        raise ValueError("clusters must cover every feature")
    centers = np.array([c.center for c in clusters], dtype=np.int64)
    return _merge_arrays(d, densities, owner, centers)


def cluster_features(
    matrix: DissimilarityMatrix | None,
    params: DensityParams | None = None,
    beta: float | None = None,
    gamma: float | None = None,
    n_jobs: int = 1,
) -> Clustering:
    """Cluster one feature view; cluster members use the dataset's feature indices.

    ``beta``/``gamma`` override the estimated density parameters.
    """
    if matrix is None or matrix.size == 0:
        kind = matrix.kind if matrix is not None else Kind.CONTINUOUS
        return Clustering((), None, kind)
    if params is None:
        params = estimate_params(matrix)
        if beta is not None or gamma is not None:
            params = DensityParams(beta if beta is not None else params.beta, gamma if gamma is not None else params.gamma)
    dens = density(matrix, params, n_jobs)
    d = np.ascontiguousarray(matrix.values, dtype=float)
    order, owner = _nearest(d, fps_centers(d, dens, params))
    local = _merge_arrays(d, dens, owner, order)
    f = np.asarray(matrix.features)
    clusters = tuple(
        sorted(
            (FeatureCluster(int(f[c.center]), tuple(f[list(c.members)].tolist()), c.radius) for c in local),
            key=lambda c: c.center,
        )
    )
    return Clustering(clusters, params, matrix.kind, dict(zip(f.tolist(), dens.tolist())))
