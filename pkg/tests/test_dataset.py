import math

import numpy as np
import pytest

from sfsdfc.dataset import (
    Dataset,
    DatasetError,
    Kind,
    encode_labels,
    impute_missing,
    infer_feature_kinds,
    load_csv,
    read_schema,
    split_by_kind,
    standardize,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_small_csv_parses(tmp_path):
    p = write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n")
    ds = load_csv(p, "y")
    assert (ds.n, ds.m) == (4, 2)
    assert ds.names == ["a", "b"]
    assert ds.labels.tolist() == [0, 1, 0, 1]


def test_question_mark_marks_missing(tmp_path):
    p = write(tmp_path, "a,b,y\n1,?,0\n3,4,1\n,6,0\n")
    ds = load_csv(p, "y")
    assert ds.features[1].missing.tolist() == [True, False, False]
    assert ds.features[0].missing.tolist() == [False, False, True]
    assert np.isnan(ds.features[1].values[0])


def test_single_class_is_degenerate(tmp_path):
    p = write(tmp_path, "a,y\n1,0\n2,0\n3,0\n")
    with pytest.raises(DatasetError, match="degenerate labels"):
        load_csv(p, "y")


@pytest.mark.parametrize(
    "text, match",
    [
        ("a,y\n1,0\n2\n", "ragged"),
        ("a,y\n1,0\n2,1\n", "label column 'z' missing"),
        ("a,y\n1,?\n2,1\n", "label column has missing"),
        ("a,y\n", "header row and at least one"),
    ],
)
def test_malformed_files(tmp_path, text, match):
    p = write(tmp_path, text)
    with pytest.raises(DatasetError, match=match):
        load_csv(p, "z" if "'z'" in match else "y")


def test_unreadable_file_names_path(tmp_path):
    with pytest.raises(DatasetError, match="nope.csv"):
        load_csv(tmp_path / "nope.csv", "y")


def test_text_columns_are_discrete(tmp_path):
    rows = "\n".join(f"{'red' if i % 2 else 'blue'},{i},{i % 2}" for i in range(40))
    ds = load_csv(write(tmp_path, "color,x,y\n" + rows + "\n"), "y")
    assert ds.features[0].kind is Kind.DISCRETE
    assert ds.features[0].categories == ("blue", "red")
    assert ds.features[1].kind is Kind.CONTINUOUS


def test_schema_declares_kinds_and_label(tmp_path):
    write(tmp_path, "a=discrete\nb = continuous\n# comment\ny=label\n", "d.schema")
    schema = read_schema(tmp_path / "d.schema")
    assert schema == {"a": "discrete", "b": "continuous", "y": "label"}
    p = write(tmp_path, "a,b,y\n1.5,1,0\n2.5,1,1\n3.5,2,0\n")
    ds = load_csv(p, None, schema)
    assert ds.kinds == [Kind.DISCRETE, Kind.CONTINUOUS]
    assert ds.label_name == "y"


def test_schema_errors(tmp_path):
    write(tmp_path, "a=fuzzy\n", "bad.schema")
    with pytest.raises(DatasetError, match="bad.schema:1"):
        read_schema(tmp_path / "bad.schema")
    p = write(tmp_path, "a,y\n1,0\n2,1\n")
    with pytest.raises(DatasetError, match="unknown columns"):
        load_csv(p, "y", {"zz": "discrete"})


def test_labels_sort_numerically():
    ids, classes = encode_labels(["10", "2", "1", "2"])
    assert classes == ("1", "2", "10")
    assert ids.tolist() == [2, 1, 0, 1]


def _with_distinct(n, distinct):
    rng = np.random.default_rng(0)
    col = np.arange(n) % distinct
    rng.shuffle(col)
    return Dataset.from_arrays(col[:, None].astype(float), np.arange(n) % 2)


@pytest.mark.parametrize("distinct, kind", [(3, Kind.DISCRETE), (50, Kind.CONTINUOUS), (10, Kind.CONTINUOUS), (9, Kind.DISCRETE)])
def test_typing_threshold_is_strict(distinct, kind):
    # n=100 gives epsilon=10; exactly 10 distinct values is not "below".
    assert infer_feature_kinds(_with_distinct(100, distinct)) == [kind]


def test_smaller_epsilon_types_more_continuous():
    ds = _with_distinct(100, 5)
    assert infer_feature_kinds(ds) == [Kind.DISCRETE]
    assert infer_feature_kinds(ds, epsilon=2) == [Kind.CONTINUOUS]
    with pytest.raises(ValueError):
        infer_feature_kinds(ds, epsilon=0)


def test_split_by_kind_views(data_dir):
    schema = read_schema(data_dir / "heart_statlog.schema")
    heart = load_csv(data_dir / "heart_statlog.csv", None, schema)
    cont, disc = split_by_kind(heart)
    assert (len(cont), len(disc)) == (7, 6)
    assert sorted(cont + disc) == list(range(13))

    x = np.random.default_rng(1).integers(0, 3, (30, 4)).astype(float)
    cont, disc = split_by_kind(Dataset.from_arrays(x, np.arange(30) % 2))
    assert cont == [] and disc == [0, 1, 2, 3]

    one = Dataset.from_arrays(np.linspace(0, 1, 30)[:, None], np.arange(30) % 2, kinds=["continuous"])
    assert split_by_kind(one) == ([0], [])


def _ds(cols, kinds, y=(0, 1, 0, 1)):
    return Dataset.from_arrays(np.array(cols, dtype=float).T, list(y), kinds=kinds)


def test_impute_median_and_mode():
    ds = _ds([[1.0, np.nan, 3.0, 2.0], [0, 0, 1, np.nan]], ["continuous", "discrete"])
    out = impute_missing(ds)
    assert out.features[0].values.tolist() == [1.0, 2.0, 3.0, 2.0]
    assert out.features[1].values.tolist() == [0, 0, 1, 0]
    assert not any(c.missing.any() for c in out.features)


def test_impute_spec_examples():
    cont = Dataset.from_arrays(np.array([[1.0], [np.nan], [3.0]]), [0, 1, 0], kinds=["continuous"])
    assert impute_missing(cont).features[0].values.tolist() == [1.0, 2.0, 3.0]
    disc = _ds([[0, 0, 1, np.nan]], ["discrete"])
    assert impute_missing(disc).features[0].values.tolist() == [0, 0, 1, 0]


def test_impute_mode_tie_takes_lowest_value():
    ds = _ds([[2, 1, np.nan, 2, 1, 5]], ["discrete"], y=(0, 1, 0, 1, 0, 1))
    assert impute_missing(ds).features[0].values[2] == 1


def test_complete_dataset_is_unchanged():
    ds = _ds([[1.0, 2.0, 3.0, 4.0]], ["continuous"])
    for policy in ("median-mode", "drop"):
        assert impute_missing(ds, policy) is ds


def test_drop_rows():
    n = 20
    x = np.arange(n, dtype=float)
    x[3] = np.nan
    ds = Dataset.from_arrays(x[:, None], np.arange(n) % 2, kinds=["continuous"])
    out = impute_missing(ds, "drop")
    assert out.n == n - 1
    assert not np.isnan(out.values()).any()
    small = _ds([[1.0, np.nan, 3.0, 2.0]], ["continuous"])
    with pytest.raises(DatasetError, match="need >= 10"):
        impute_missing(small, "drop")


def test_standardize_examples():
    z, const = standardize(np.array([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]]))
    assert z[0].mean() == pytest.approx(0, abs=1e-15)
    assert z[0].var() == pytest.approx(1, abs=1e-12)
    assert z[1].tolist() == [0, 0, 0]
    assert const.tolist() == [False, True]
    again, _ = standardize(z[:1])
    np.testing.assert_allclose(again, z[:1], atol=1e-12)


def test_dataset_invariants():
    with pytest.raises(DatasetError):
        Dataset.from_arrays(np.zeros((1, 1)), [0])
    with pytest.raises(DatasetError, match="degenerate"):
        Dataset.from_arrays(np.zeros((3, 1)), [1, 1, 1])
    ds = Dataset.from_arrays(np.arange(12.0).reshape(6, 2), [0, 1] * 3)
    assert ds.values().shape == (2, 6)
    assert ds.values([1]).tolist() == [[1, 3, 5, 7, 9, 11]]
    assert ds.take_features([1]).names == ["f1"]
    sub = ds.take_samples(np.array([1, 2, 3]))
    assert sub.n == 3
    assert sub.labels.tolist() == [1, 0, 1]
    with pytest.raises(DatasetError, match="degenerate"):
        ds.take_samples(np.array([0, 2, 4]))


def test_heart_default_typing(data_dir):
    heart = load_csv(data_dir / "heart_statlog.csv", "class")
    assert heart.n == 270 and heart.m == 13
    assert math.isclose(math.sqrt(270), 16.431676725154983)
    # slope (3 values) and major_vessels (4 values) fall below sqrt(n).
    cont, disc = split_by_kind(heart)
    assert len(cont) == 5 and len(disc) == 8
