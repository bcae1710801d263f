"""Synthetic datasets with known feature-group structure."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import Dataset, Kind


def grouped_continuous(
    n_groups: int = 4,
    per_group: int = 5,
    n: int = 500,
    noise: float = 0.1,
    seed: int = 0,
    informative: int | None = None,
) -> tuple[Dataset, np.ndarray]:
    """Features that are noisy linear copies of independent Gaussian seeds.

    Feature ``j`` copies seed ``j % n_groups`` with a random nonzero slope
    and intercept plus N(0, noise^2). Labels threshold the sum of the first
    ``informative`` seeds (default: all). Returns the dataset and each
    feature's seed id.
    """
    rng = np.random.default_rng(seed)
    seeds = rng.standard_normal((n, n_groups))
    group = np.arange(n_groups * per_group) % n_groups
    slope = rng.uniform(0.5, 2.0, group.size) * rng.choice([-1.0, 1.0], group.size)
    shift = rng.uniform(-3.0, 3.0, group.size)
    x = seeds[:, group] * slope + shift + noise * rng.standard_normal((n, group.size))
    k = n_groups if informative is None else informative
    y = (seeds[:, :k].sum(axis=1) > 0).astype(int)
    ds = Dataset.from_arrays(x, y, kinds=[Kind.CONTINUOUS] * group.size, name=f"grouped-{n_groups}x{per_group}")
    return ds, group


def mixed(
    n: int = 500,
    cont_groups: int = 3,
    disc_groups: int = 3,
    per_group: int = 4,
    alphabet: int = 4,
    flip: float = 0.1,
    noise: float = 0.3,
    n_classes: int = 2,
    seed: int = 0,
    name: str | None = None,
) -> Dataset:
    """Mixed-type data: continuous groups around Gaussian seeds and discrete
    groups that copy a categorical seed with probability ``1 - flip``.

    The class depends on the first seed of each kind, so some groups are
    informative and the rest are pure redundancy.
    """
    rng = np.random.default_rng(seed)
    cseed = rng.standard_normal((n, cont_groups))
    dseed = rng.integers(0, alphabet, (n, disc_groups))
    cols, kinds = [], []
    for g in range(cont_groups):
        for _ in range(per_group):
            cols.append(cseed[:, g] * rng.uniform(0.5, 2.0) + noise * rng.standard_normal(n))
            kinds.append(Kind.CONTINUOUS)
    for g in range(disc_groups):
        for _ in range(per_group):
            col = dseed[:, g].copy()
            swap = rng.random(n) < flip
            col[swap] = rng.integers(0, alphabet, int(swap.sum()))
            cols.append(col.astype(float))
            kinds.append(Kind.DISCRETE)
    score = (cseed[:, 0] if cont_groups else 0) + (dseed[:, 0] - (alphabet - 1) / 2 if disc_groups else 0)
    score = score + 0.3 * rng.standard_normal(n)
    cuts = np.quantile(score, np.linspace(0, 1, n_classes + 1)[1:-1])
    y = np.searchsorted(cuts, score)
    return Dataset.from_arrays(np.column_stack(cols), y, kinds=kinds, name=name or f"mixed-{seed}")


def write_csv(ds: Dataset, directory: str | Path) -> Path:
    """Write ``<name>.csv`` plus a ``<name>.schema`` sidecar into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{ds.name}.csv"
    x = ds.values().T
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(ds.names + [ds.label_name]) + "\n")
        for row, label in zip(x, ds.labels):
            cells = [repr(float(v)) if k is Kind.CONTINUOUS else str(int(v)) for v, k in zip(row, ds.kinds)]
            fh.write(",".join(cells + [ds.classes[label]]) + "\n")
    schema = "".join(f"{c}={k.value}\n" for c, k in zip(ds.names, ds.kinds)) + f"{ds.label_name}=label\n"
    path.with_suffix(".schema").write_text(schema)
    return path


def benchmark_suite(directory: str | Path, seed: int = 0) -> list[Path]:
    """Write a small suite of mixed-type datasets for ``sfsdfc bench``."""
    configs = [
        dict(n=300, cont_groups=3, disc_groups=3, per_group=4),
        dict(n=400, cont_groups=4, disc_groups=2, per_group=3, n_classes=3),
        dict(n=300, cont_groups=2, disc_groups=4, per_group=5, flip=0.2),
        dict(n=500, cont_groups=5, disc_groups=0, per_group=4),
        dict(n=350, cont_groups=0, disc_groups=5, per_group=4, alphabet=3),
    ]
    return [write_csv(mixed(seed=seed + i, name=f"synth{i}", **cfg), directory) for i, cfg in enumerate(configs)]
