"""Tabular data loading, feature typing, imputation and standardization."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

log = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "?"})


class DatasetError(ValueError):
    """Raised for unreadable, malformed or degenerate input data."""


class Kind(str, enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class ImputePolicy(str, enum.Enum):
    MODE_OR_MEDIAN = "median-mode"
    DROP_ROWS = "drop"


@dataclass(frozen=True, eq=False)
class FeatureColumn:
    """One feature column.

    ``values`` is always float64 with NaN in missing cells. Columns parsed
    from text categories keep their category labels in ``categories`` and
    store first-appearance codes in ``values``; such columns can only be
    discrete.
    """

    name: str
    values: np.ndarray
    kind: Kind
    missing: np.ndarray
    categories: tuple[str, ...] | None = None
    declared: bool = False

    @property
    def n_distinct(self) -> int:
        return len(np.unique(self.values[~self.missing]))

    @property
    def codes(self) -> np.ndarray:
        """Contiguous integer codes 0..v-1 ordered by value."""
        if self.missing.any():
            raise DatasetError(f"column {self.name!r} has missing cells; impute first")
        _, inv = np.unique(self.values, return_inverse=True)
        return inv.astype(np.int64)

    @property
    def is_constant(self) -> bool:
        vals = self.values[~self.missing]
        return vals.size == 0 or bool(np.all(vals == vals[0]))


@dataclass(frozen=True, eq=False)
class Dataset:
    features: tuple[FeatureColumn, ...]
    labels: np.ndarray
    classes: tuple[str, ...]
    name: str = "dataset"
    label_name: str = "class"
    epsilon: float | None = field(default=None)

    def __post_init__(self):
        n = len(self.labels)
        if n < 2:
            raise DatasetError("need at least 2 samples")
        if not self.features:
            raise DatasetError("need at least 1 feature")
        for col in self.features:
            if len(col.values) != n:
                raise DatasetError(f"column {col.name!r} has {len(col.values)} entries, expected {n}")
        if len(np.unique(self.labels)) < 2:
            raise DatasetError("degenerate labels: fewer than 2 classes")

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.features]

    @property
    def kinds(self) -> list[Kind]:
        return [c.kind for c in self.features]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def values(self, indices: Sequence[int] | None = None) -> np.ndarray:
        """Feature-major float array of shape (len(indices), n)."""
        idx = range(self.m) if indices is None else indices
        return np.array([self.features[j].values for j in idx], dtype=float).reshape(len(idx), self.n)

    def codes(self, indices: Sequence[int]) -> np.ndarray:
        return np.array([self.features[j].codes for j in indices], dtype=np.int64).reshape(len(indices), self.n)

    def with_kinds(self, kinds: Sequence[Kind]) -> Dataset:
        cols = tuple(replace(c, kind=Kind(k)) for c, k in zip(self.features, kinds, strict=True))
        return replace(self, features=cols)

    def take_features(self, indices: Sequence[int]) -> Dataset:
        return replace(self, features=tuple(self.features[j] for j in indices))

    def take_samples(self, rows: np.ndarray) -> Dataset:
        cols = tuple(replace(c, values=c.values[rows], missing=c.missing[rows]) for c in self.features)
        labels, classes = _recode_labels(self.labels[rows], self.classes)
        return replace(self, features=cols, labels=labels, classes=classes)

    @classmethod
    def from_arrays(
        cls,
        x: np.ndarray,
        y: Sequence,
        kinds: Sequence[Kind | str] | None = None,
        names: Sequence[str] | None = None,
        name: str = "dataset",
        epsilon: float | None = None,
    ) -> Dataset:
        """Build from a sample-major (n, m) array; NaN marks missing cells."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise DatasetError("x must be 2-D (samples, features)")
        names = list(names) if names is not None else [f"f{j}" for j in range(x.shape[1])]
        labels, classes = encode_labels([str(v) for v in y])
        cols = []
        for j in range(x.shape[1]):
            v = x[:, j].copy()
            cols.append(FeatureColumn(names[j], v, Kind.CONTINUOUS, np.isnan(v), declared=kinds is not None))
        ds = cls(tuple(cols), labels, classes, name=name, epsilon=epsilon)
        if kinds is None:
            return ds.with_kinds(infer_feature_kinds(ds, epsilon))
        return ds.with_kinds([Kind(k) for k in kinds])


def _label_sort_key(s: str):
    try:
        return (0, float(s), s)
    except ValueError:
        return (1, 0.0, s)


def encode_labels(raw: Sequence[str]) -> tuple[np.ndarray, tuple[str, ...]]:
    """Map label strings to ids 0..c-1 in sorted (numeric-aware) order."""
    classes = tuple(sorted(set(raw), key=_label_sort_key))
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[r] for r in raw], dtype=np.int64), classes


def _recode_labels(labels, classes):
    present = np.unique(labels)
    remap = np.full(len(classes), -1, dtype=np.int64)
    remap[present] = np.arange(len(present))
    return remap[labels], tuple(classes[i] for i in present)


def read_schema(path: str | Path) -> dict[str, str]:
    """Parse a ``column=continuous|discrete|label`` sidecar file."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        col, sep, kind = line.partition("=")
        kind = kind.strip().lower()
        if not sep or kind not in ("continuous", "discrete", "label"):
            raise DatasetError(f"{path}:{lineno}: expected 'column=continuous|discrete|label'")
        out[col.strip()] = kind
    return out


def load_csv(
    path: str | Path,
    label_column: str | int | None = None,
    declared_kinds: Mapping[str, Kind | str] | None = None,
    epsilon: float | None = None,
    name: str | None = None,
) -> Dataset:
    """Read a comma-delimited file with one header row.

    Empty cells and ``?`` are missing. ``declared_kinds`` maps column names to
    ``continuous``, ``discrete`` or ``label`` (the sidecar schema format); a
    ``label`` entry stands in for ``label_column``. Undeclared features are
    typed with :func:`infer_feature_kinds`.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DatasetError(f"cannot parse {path}: {exc}") from exc
    if len(rows) < 2:
        raise DatasetError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for lineno, r in enumerate(body, 2):
        if len(r) != len(header):
            raise DatasetError(f"{path}:{lineno}: ragged row ({len(r)} cells, header has {len(header)})")

    declared = {k: v.value if isinstance(v, Kind) else str(v) for k, v in (declared_kinds or {}).items()}
    if label_column is None:
        label_column = next((k for k, v in declared.items() if v == "label"), None)
        if label_column is None:
            raise DatasetError(f"{path}: no label column given")
    if isinstance(label_column, int):
        if not -len(header) <= label_column < len(header):
            raise DatasetError(f"{path}: label column index {label_column} out of range")
        label_idx = label_column % len(header)
    else:
        if label_column not in header:
            raise DatasetError(f"{path}: label column {label_column!r} missing")
        label_idx = header.index(label_column)
    unknown = set(declared) - set(header)
    if unknown:
        raise DatasetError(f"{path}: schema names unknown columns {sorted(unknown)}")

    raw_labels = [r[label_idx].strip() for r in body]
    if any(v in MISSING_TOKENS for v in raw_labels):
        raise DatasetError(f"{path}: label column has missing cells")
    labels, classes = encode_labels(raw_labels)
    if len(classes) < 2:
        raise DatasetError(f"{path}: degenerate labels (fewer than 2 classes)")

    cols = []
    for j, col_name in enumerate(header):
        if j == label_idx or declared.get(col_name) == "label":
            continue
        cells = [r[j].strip() for r in body]
        cols.append(_parse_column(col_name, cells, declared.get(col_name)))
    if not cols:
        raise DatasetError(f"{path}: no feature columns")
    ds = Dataset(tuple(cols), labels, classes, name=name or path.stem, label_name=header[label_idx], epsilon=epsilon)
    return ds.with_kinds(infer_feature_kinds(ds, epsilon))


def _parse_column(name: str, cells: list[str], declared: str | None) -> FeatureColumn:
    missing = np.array([c in MISSING_TOKENS for c in cells])
    try:
        values = np.array([np.nan if m else float(c) for c, m in zip(cells, missing)])
        categories = None
    except ValueError:
        if declared == "continuous":
            raise DatasetError(f"column {name!r} is declared continuous but holds non-numeric cells") from None
        order: dict[str, int] = {}
        for c, m in zip(cells, missing):
            if not m:
                order.setdefault(c, len(order))
        values = np.array([np.nan if m else float(order[c]) for c, m in zip(cells, missing)])
        categories = tuple(order)
    if declared is not None:
        kind = Kind(declared)
    else:
        kind = Kind.DISCRETE if categories is not None else Kind.CONTINUOUS
    return FeatureColumn(name, values, kind, missing, categories, declared=declared is not None)


def infer_feature_kinds(d: Dataset, epsilon: float | None = None) -> list[Kind]:
    """Type each feature by its distinct-value count.

    A feature with fewer than ``epsilon`` distinct observed values is
    discrete, otherwise continuous. ``epsilon`` defaults to sqrt(n).
    Declared kinds and text-valued columns are left untouched.
    """
    eps = math.sqrt(d.n) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    kinds = []
    for col in d.features:
        if col.declared:
            kinds.append(col.kind)
        elif col.categories is not None:
            kinds.append(Kind.DISCRETE)
        else:
            kinds.append(Kind.DISCRETE if col.n_distinct < eps else Kind.CONTINUOUS)
    return kinds


def split_by_kind(d: Dataset) -> tuple[list[int], list[int]]:
    """Partition feature indices into (continuous, discrete)."""
    cont = [j for j, c in enumerate(d.features) if c.kind is Kind.CONTINUOUS]
    disc = [j for j, c in enumerate(d.features) if c.kind is Kind.DISCRETE]
    return cont, disc


def impute_missing(d: Dataset, policy: ImputePolicy | str = ImputePolicy.MODE_OR_MEDIAN) -> Dataset:
    policy = ImputePolicy(policy)
    if not any(c.missing.any() for c in d.features):
        return d
    if policy is ImputePolicy.DROP_ROWS:
        keep = ~np.any([c.missing for c in d.features], axis=0)
        if keep.sum() < 10:
            raise DatasetError(f"dropping incomplete rows leaves {int(keep.sum())} samples (need >= 10)")
        if len(np.unique(d.labels[keep])) < 2:
            raise DatasetError("dropping incomplete rows leaves fewer than 2 classes")
        log.info("drop-rows removed %d of %d samples", int((~keep).sum()), d.n)
        return d.take_samples(np.flatnonzero(keep))

    cols = []
    for c in d.features:
        if not c.missing.any():
            cols.append(c)
            continue
        observed = c.values[~c.missing]
        if observed.size == 0:
            raise DatasetError(f"column {c.name!r} has no observed values")
        if c.kind is Kind.CONTINUOUS:
            fill = float(np.median(observed))
        else:
            vals, counts = np.unique(observed, return_counts=True)
            fill = float(vals[np.argmax(counts)])
        values = np.where(c.missing, fill, c.values)
        cols.append(replace(c, values=values, missing=np.zeros(d.n, dtype=bool)))
    return replace(d, features=tuple(cols))


def standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Z-score each row of a feature-major array (population variance).

    Returns the standardized array and a boolean mask of constant rows,
    which come back as all zeros.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.size == 0:
        raise ValueError("cannot standardize an empty view")
    mu = x.mean(axis=1, keepdims=True)
    constant = np.all(x == x[:, :1], axis=1)
    sd = x.std(axis=1, keepdims=True)
    sd[constant] = 1.0
    z = (x - mu) / sd
    z[constant] = 0.0
    return z, constant
