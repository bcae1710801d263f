"""Feature similarity and relevance measures.

Continuous pairs are compared with the maximal information compression
index (MICI), discrete pairs with symmetrical uncertainty (SU); relevance to
the class label is mutual information. Everything is in bits.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels as K
from .dataset import Kind, standardize


def _column(f) -> np.ndarray:
    a = np.ascontiguousarray(f, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise ValueError("expected a 1-D column with at least 2 entries")
    return a


def _codes(f) -> tuple[np.ndarray, int]:
    """Recode any 1-D integer-like column to contiguous codes."""
    _, inv = np.unique(np.asarray(f), return_inverse=True)
    inv = np.ascontiguousarray(inv.ravel(), dtype=np.int64)
    return inv, int(inv.max()) + 1 if inv.size else 0


def encode_rows(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense value codes and cardinalities for every row of a feature-major array."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=float)))
    codes = np.empty(x.shape, dtype=np.int64)
    card = np.empty(x.shape[0], dtype=np.int64)
    if x.shape[1] and not K.small_int_codes(x, codes, card):
        K.dense_rank_codes(x, np.argsort(x, axis=1), codes, card)
    return codes, card


def _moments(fj, fk) -> tuple[float, float, float]:
    a, b = _column(fj), _column(fk)
    if a.shape != b.shape:
        raise ValueError("columns differ in length")
    xc, var = K.center_rows(np.vstack([a, b]))
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise ValueError("constant column: correlation undefined")
    return var[0], var[1], K.covariance(xc[0], xc[1])


def pearson(fj, fk) -> float:
    vj, vk, cov = _moments(fj, fk)
    return K.correlation(vj, vk, cov)


def mici(fj, fk) -> float:
    """Twice the smallest eigenvalue of the pair's 2x2 covariance matrix."""
    vj, vk, cov = _moments(fj, fk)
    return K.mici(vj, vk, K.correlation(vj, vk, cov))


def cont_dissimilarity(fj, fk) -> float:
    """MICI / 2 after z-scoring both columns, i.e. 1 - |rho|."""
    _moments(fj, fk)
    z, _ = standardize(np.vstack([_column(fj), _column(fk)]))
    vj, vk, cov = _moments(z[0], z[1])
    return K.cont_dissim(vj, vk, cov)


def entropy(f) -> float:
    codes, v = _codes(f)
    return K.entropy(codes, v)


def information_gain(fj, fk) -> float:
    """H(fj) - H(fj | fk); symmetric, equal to the mutual information."""
    a, va = _codes(fj)
    b, vb = _codes(fk)
    if a.shape != b.shape:
        raise ValueError("columns differ in length")
    return K.gain(a, va, K.entropy(a, va), b, vb, K.entropy(b, vb))


def su(fj, fk) -> float:
    """Symmetrical uncertainty 2*gain / (H(fj) + H(fk)).

    Two constant columns give 0 (no shared information) instead of 0/0.
    """
    a, va = _codes(fj)
    b, vb = _codes(fk)
    if a.shape != b.shape:
        raise ValueError("columns differ in length")
    return K.su(a, va, K.entropy(a, va), b, vb, K.entropy(b, vb))


def disc_dissimilarity(fj, fk) -> float:
    return 1.0 - su(fj, fk)


def discretize(f, bins: int | None = None) -> np.ndarray:
    """Equal-frequency binning into at most ``bins`` codes.

    A value's bin is ``floor(b * (#samples strictly below it) / n)`` with
    ``b = min(bins, distinct values)``, so equal values always share a bin.
    Codes are then compacted to 0..v-1. ``bins`` defaults to ceil(sqrt(n)).
    """
    x = np.asarray(f, dtype=float).ravel()
    return discretize_rows(x[None, :], bins)[0]


def discretize_rows(x: np.ndarray, bins: int | None = None) -> np.ndarray:
    """:func:`discretize` applied to every row of a feature-major array."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    m, n = x.shape
    if bins is None:
        bins = max(2, math.ceil(math.sqrt(n)))
    if bins < 2:
        raise ValueError("bins must be >= 2")
    x = np.ascontiguousarray(x)
    out = np.empty((m, n), dtype=np.int64)
    K.equal_frequency_codes(x, np.argsort(x, axis=1), bins, out)
    return out


def relevance_mi(f, labels, kind: Kind | str = Kind.DISCRETE, bins: int | None = None) -> float:
    """I(Y; f) = H(Y) - H(Y | f). Continuous features are discretized first."""
    codes = discretize(f, bins) if Kind(kind) is Kind.CONTINUOUS else f
    return information_gain(labels, codes)


def relevance_vector(x: np.ndarray, labels, kinds: Sequence[Kind], bins: int | None = None) -> np.ndarray:
    """MI of every row of a feature-major array with the labels."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    codes = np.empty(x.shape, dtype=np.int64)
    cont = np.array([Kind(k) is Kind.CONTINUOUS for k in kinds], dtype=bool)
    if cont.any():
        codes[cont] = discretize_rows(x[cont], bins)
    if not cont.all():
        codes[~cont] = encode_rows(x[~cont])[0]
    return relevance_from_codes(codes, labels)


def relevance_from_codes(codes: np.ndarray, labels) -> np.ndarray:
    """MI of every row of dense (0-based) codes with the labels."""
    codes = np.ascontiguousarray(np.atleast_2d(codes), dtype=np.int64)
    out = np.zeros(codes.shape[0])
    if codes.shape[0] == 0:
        return out
    card = codes.max(axis=1) + 1
    y, c = _codes(labels)
    K.relevance_rows(codes, card, y, c, out)
    return out


@dataclass(frozen=True, eq=False)
class DissimilarityMatrix:
    """Symmetric dissimilarities in [0, 1] among features of one kind.

    ``features`` maps local row ``i`` to the dataset's feature index.
    """

    values: np.ndarray
    kind: Kind
    features: tuple[int, ...]
    names: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def to_csv(self, path: str | Path) -> None:
        names = self.names or tuple(str(f) for f in self.features)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in self.values:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_values(cls, values, kind: Kind | str = Kind.CONTINUOUS) -> DissimilarityMatrix:
        v = np.array(values, dtype=float)
        return cls(v, Kind(kind), tuple(range(v.shape[0])))


def _row_blocks(m: int, n_jobs: int) -> list[np.ndarray]:
    # Interleaved rows balance the triangular workload.
    n_jobs = max(1, min(n_jobs, m))
    return [np.arange(i, m, n_jobs, dtype=np.int64) for i in range(n_jobs)]


def _run_rows(fn, m: int, n_jobs: int, *args) -> None:
    blocks = _row_blocks(m, n_jobs)
    if len(blocks) == 1:
        fn(*args, blocks[0])
        return
    with ThreadPoolExecutor(len(blocks)) as pool:
        for fut in [pool.submit(fn, *args, b) for b in blocks]:
            fut.result()


def dissimilarity_matrix(
    x: np.ndarray,
    kind: Kind | str,
    features: Sequence[int] | None = None,
    names: Sequence[str] = (),
    n_jobs: int = 1,
    codes: tuple[np.ndarray, np.ndarray] | None = None,
) -> DissimilarityMatrix:
    """Pairwise dissimilarities among the rows of a feature-major array.

    Continuous rows are standardized here (a no-op on already standardized
    data); constant rows must have been removed upstream. Each pair is
    computed once and mirrored, so the result is exactly symmetric and does
    not depend on ``n_jobs``. Discrete callers may pass ``codes`` from
    :func:`encode_rows` to skip re-encoding.
    """
    kind = Kind(kind)
    x = np.atleast_2d(np.asarray(x))
    m = x.shape[0]
    if m == 0:
        raise ValueError("empty feature view")
    features = tuple(range(m)) if features is None else tuple(features)
    out = np.zeros((m, m))
    if kind is Kind.CONTINUOUS:
        z, constant = standardize(x)
        if constant.any():
            raise ValueError("constant continuous feature in view")
        xc, var = K.center_rows(np.ascontiguousarray(z))
        _run_rows(lambda rows: K.fill_cont_rows(xc, var, rows, out), m, n_jobs)
    else:
        codes, card = encode_rows(x) if codes is None else codes
        ent = np.array([K.entropy(codes[j], card[j]) for j in range(m)])
        _run_rows(lambda rows: K.fill_disc_rows(codes, card, ent, rows, out), m, n_jobs)
    return DissimilarityMatrix(out, kind, features, tuple(names))
