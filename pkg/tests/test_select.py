import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sfsdfc.dataset import Dataset, DatasetError, Kind, load_csv, read_schema
from sfsdfc.fclust import Clustering, DensityParams, FeatureCluster
from sfsdfc.select import CENTER, MOST_RELEVANT, PipelineOptions, mi_top_k, run_pipeline, select_from_clusters
from sfsdfc.synthetic import grouped_continuous, mixed


def clustering(*clusters):
    return Clustering(tuple(clusters), DensityParams(0.5), Kind.DISCRETE)


def test_singleton_selects_its_center():
    got = select_from_clusters(clustering(FeatureCluster(4, (4,), 0.0)), {4: 0.1})
    assert got == [(4, 0, CENTER)]


def test_center_kept_alone_when_most_relevant():
    cl = clustering(FeatureCluster(0, (0, 1), 0.2))
    assert select_from_clusters(cl, {0: 0.5, 1: 0.2}) == [(0, 0, CENTER)]
    assert select_from_clusters(cl, {0: 0.5, 1: 0.5}) == [(0, 0, CENTER)]


def test_more_relevant_member_joins_center():
    cl = clustering(FeatureCluster(0, (0, 1), 0.2))
    assert select_from_clusters(cl, {0: 0.2, 1: 0.5}) == [(0, 0, CENTER), (1, 0, MOST_RELEVANT)]


def test_member_ties_go_to_lowest_index():
    cl = clustering(FeatureCluster(5, (2, 5, 7, 9), 0.3))
    assert select_from_clusters(cl, {2: 0.4, 5: 0.1, 7: 0.9, 9: 0.9})[1] == (7, 0, MOST_RELEVANT)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 3), min_size=1, max_size=8), st.floats(0.01, 100))
def test_selection_ignores_relevance_scale(rel, scale):
    m = len(rel)
    cl = clustering(FeatureCluster(m - 1, tuple(range(m)), 0.4))
    base = select_from_clusters(cl, dict(enumerate(rel)))
    assert select_from_clusters(cl, {j: r * scale for j, r in enumerate(rel)}) == base


def check_result(ds, res):
    assert res.selected == sorted(set(res.selected))
    assert 1 <= len(res.selected) <= min(ds.m, 2 * res.n_clusters)
    per_cluster = {}
    for p in res.provenance:
        assert p.kind is ds.features[p.index].kind
        per_cluster.setdefault((p.kind, p.cluster), []).append(p)
    for (kind, cid), picks in per_cluster.items():
        assert 1 <= len(picks) <= 2
        cluster = res.clusterings[kind].clusters[cid]
        center = next(p for p in picks if p.reason == CENTER)
        assert center.index == cluster.center
        for p in picks:
            assert p.index in cluster.members
            if p.reason == MOST_RELEVANT:
                assert p.relevance > center.relevance
    assert len(per_cluster) == res.n_clusters


def test_all_discrete_dataset_skips_continuous_stage():
    ds = mixed(n=200, cont_groups=0, disc_groups=3, seed=4)
    res = run_pipeline(ds)
    assert len(res.clusterings[Kind.CONTINUOUS]) == 0
    assert all(p.kind is Kind.DISCRETE for p in res.provenance)
    assert res.counts()["continuous"] == 0
    check_result(ds, res)


def test_independent_features_stay_singletons():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((400, 8))
    ds = Dataset.from_arrays(x, (x.sum(axis=1) > 0).astype(int), kinds=["continuous"] * 8)
    res = run_pipeline(ds, PipelineOptions(beta=0.5), keep_matrices=True)
    d = res.matrices[Kind.CONTINUOUS].values
    assert d[~np.eye(8, dtype=bool)].min() > 0.5
    assert res.n_clusters == 8 and res.selected == list(range(8))


def test_mixed_pipeline_invariants():
    for seed in range(5):
        ds = mixed(seed=seed)
        res = run_pipeline(ds)
        check_result(ds, res)
        assert {p.kind for p in res.provenance} == {Kind.CONTINUOUS, Kind.DISCRETE}


def test_pipeline_is_deterministic_and_thread_independent():
    ds = mixed(n=300, cont_groups=4, disc_groups=4, seed=9)
    a = run_pipeline(ds).to_json()
    b = run_pipeline(ds, PipelineOptions(n_jobs=4)).to_json()
    for doc in (a, b):
        doc.pop("wall_time")
        doc.pop("options")
    assert a == b


def test_rerun_on_selection_stays_inside_it():
    ds = mixed(n=300, seed=2)
    res = run_pipeline(ds)
    sub = ds.take_features(res.selected)
    again = run_pipeline(sub)
    assert set(res.selected[j] for j in again.selected) <= set(res.selected)


def test_constant_features_are_excluded():
    rng = np.random.default_rng(1)
    x = np.column_stack([rng.standard_normal(100), np.full(100, 3.0), rng.integers(0, 3, 100)])
    ds = Dataset.from_arrays(x, rng.integers(0, 2, 100), kinds=["continuous", "continuous", "discrete"])
    res = run_pipeline(ds)
    assert res.excluded_constant == ["f1"]
    assert 1 not in res.selected
    assert res.counts()["continuous"] == 1


def test_all_constant_is_an_error():
    ds = Dataset.from_arrays(np.ones((10, 3)), [0, 1] * 5)
    with pytest.raises(DatasetError, match="no informative features"):
        run_pipeline(ds)


def test_missing_cells_must_be_imputed():
    x = np.arange(20.0).reshape(10, 2)
    x[0, 0] = np.nan
    with pytest.raises(DatasetError, match="impute"):
        run_pipeline(Dataset.from_arrays(x, [0, 1] * 5, kinds=["continuous"] * 2))


def test_epsilon_option_retypes():
    ds = mixed(n=200, cont_groups=0, disc_groups=2, seed=1)
    assert run_pipeline(ds).counts()["continuous"] == 0
    assert run_pipeline(ds, PipelineOptions(epsilon=2)).counts()["continuous"] == 0  # declared kinds win
    raw = Dataset.from_arrays(ds.values().T, ds.labels)
    assert run_pipeline(raw, PipelineOptions(epsilon=2)).counts()["continuous"] == ds.m


def test_json_layout(data_dir):
    heart = load_csv(data_dir / "heart_statlog.csv", None, read_schema(data_dir / "heart_statlog.schema"))
    doc = json.loads(json.dumps(run_pipeline(heart).to_json()))
    assert set(doc) >= {"dataset", "options", "selected", "counts", "version"}
    assert set(doc["counts"]) == {"continuous", "discrete", "clusters_cont", "clusters_disc"}
    assert doc["counts"]["continuous"] == 7 and doc["counts"]["discrete"] == 6
    for s in doc["selected"]:
        assert set(s) == {"index", "name", "kind", "cluster", "reason", "relevance_bits"}
        assert heart.names[s["index"]] == s["name"]


def test_grouped_recovery_small():
    ds, group = grouped_continuous(n_groups=3, per_group=4, n=300, seed=11)
    res = run_pipeline(ds)
    clusters = res.clusterings[Kind.CONTINUOUS].clusters
    assert len(clusters) == 3
    assert all(len({group[j] for j in c.members}) == 1 for c in clusters)


def test_mi_top_k():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 300)
    x = np.column_stack([rng.integers(0, 2, 300), y, (y + (rng.random(300) < 0.2)) % 2, rng.integers(0, 3, 300)])
    ds = Dataset.from_arrays(x, y, kinds=["discrete"] * 4)
    assert mi_top_k(ds, 1) == [1]
    assert mi_top_k(ds, 2) == [1, 2]
