import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evotf.data import (
    CANONICAL_SHAPES,
    SCHEMAS,
    Dataset,
    DatasetError,
    apply_minmax,
    fetch,
    fit_minmax,
    load_csv,
    load_dataset,
    normalize,
    stratified_folds,
)


@pytest.mark.parametrize("name", SCHEMAS)
def test_bundled_files_have_canonical_shape(name, data_dir):
    ds = load_dataset(name, data_dir)
    n, d, c = CANONICAL_SHAPES[name]
    assert (ds.n_samples, ds.n_features, ds.class_count) == (n, d, c)
    assert set(np.unique(ds.labels)) == set(range(c))


def test_class_counts(data_dir):
    assert list(np.bincount(load_dataset("iris", data_dir).labels)) == [50, 50, 50]
    assert list(np.bincount(load_dataset("wdbc", data_dir).labels)) == [357, 212]
    assert list(np.bincount(load_dataset("wine", data_dir).labels)) == [59, 71, 48]


def test_wdbc_label_mapping(tmp_path):
    row = ",".join(["842302", "{}"] + ["1.5"] * 30)
    p = tmp_path / "w.data"
    p.write_text(row.format("M") + "\n" + row.format("B") + "\n\n")
    ds = load_csv(p, "wdbc")
    assert list(ds.labels) == [1, 0]
    assert ds.features.shape == (2, 30)


def test_wine_and_iris_parsing(tmp_path):
    p = tmp_path / "wine.data"
    p.write_text("3," + ",".join(["0.5"] * 13) + "\n")
    assert load_csv(p, "wine").labels[0] == 2
    p = tmp_path / "iris.data"
    p.write_text("5.1,3.5,1.4,0.2,Iris-virginica\n")
    ds = load_csv(p, "iris")
    assert ds.labels[0] == 2 and ds.features[0, 0] == 5.1


def test_parse_error_names_line(tmp_path):
    p = tmp_path / "iris.data"
    p.write_text("5.1,3.5,1.4,0.2,Iris-setosa\n\n5.1,abc,1.4,0.2,Iris-setosa\n")
    with pytest.raises(DatasetError, match=r"iris.data:3"):
        load_csv(p, "iris")


def test_wrong_column_count_and_label(tmp_path):
    p = tmp_path / "iris.data"
    p.write_text("5.1,3.5,1.4,Iris-setosa\n")
    with pytest.raises(DatasetError, match="expected 5 columns"):
        load_csv(p, "iris")
    p.write_text("5.1,3.5,1.4,0.2,Iris-unknown\n")
    with pytest.raises(DatasetError, match="unknown iris label"):
        load_csv(p, "iris")


def test_empty_file(tmp_path):
    p = tmp_path / "wine.data"
    p.write_text("\n\n")
    with pytest.raises(DatasetError, match="no samples"):
        load_csv(p, "wine")


def test_missing_file_and_schema(tmp_path):
    with pytest.raises(FileNotFoundError, match="fetch"):
        load_dataset("iris", tmp_path)
    with pytest.raises(DatasetError, match="unknown schema"):
        load_csv(tmp_path / "x", "mnist")


def test_fetch_keeps_cached_files(tmp_path, data_dir):
    (tmp_path / "iris.data").write_bytes((data_dir / "iris.data").read_bytes())
    assert fetch(["iris"], tmp_path) == {"iris": "cached"}


def test_normalize_example():
    ds = Dataset("toy", np.array([[0.0, 5.0], [10.0, 5.0], [5.0, 5.0]]), np.array([0, 1, 0]), 2)
    out = normalize(ds)
    np.testing.assert_array_equal(out.features, [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])


def test_normalize_with_training_statistics():
    train = np.array([[0.0], [2.0]])
    scaling = fit_minmax(train)
    np.testing.assert_array_equal(apply_minmax(np.array([[4.0], [-2.0]]), scaling), [[2.0], [-1.0]])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(-1e6, 1e6), min_size=3, max_size=3), min_size=2, max_size=20))
def test_normalize_range(rows):
    ds = Dataset("toy", np.array(rows), np.zeros(len(rows), dtype=int), 1)
    f = normalize(ds).features
    assert np.all(f >= 0.0) and np.all(f <= 1.0)


def test_dataset_validation():
    with pytest.raises(DatasetError):
        Dataset("x", np.zeros((3, 2)), np.zeros(2, dtype=int), 1)
    with pytest.raises(DatasetError):
        Dataset("x", np.zeros((2, 2)), np.array([0, 2]), 2)
    with pytest.raises(DatasetError):
        Dataset("x", np.array([[np.nan]]), np.array([0]), 1)


# -- folds ----------------------------------------------------------------------


def check_partition(ds, plan):
    """Folds are disjoint, cover every sample, and are stratified and balanced."""
    seen = np.zeros(ds.n_samples, dtype=int)
    sizes = []
    for f in range(plan.k):
        train, test = plan.train_test(f)
        assert np.intersect1d(train, test).size == 0
        assert train.size + test.size == ds.n_samples
        seen[test] += 1
        sizes.append(test.size)
        for c in range(ds.class_count):
            expected = np.sum(ds.labels == c) / plan.k
            assert abs(np.sum(ds.labels[test] == c) - expected) < 1
    assert np.all(seen == 1)
    assert max(sizes) - min(sizes) <= 1


@pytest.mark.parametrize("name", SCHEMAS)
def test_fold_partition_properties(name, data_dir):
    ds = load_dataset(name, data_dir)
    for seed in range(3):
        check_partition(ds, stratified_folds(ds, 10, seed))


def test_iris_folds_hold_fifteen(data_dir):
    ds = load_dataset("iris", data_dir)
    plan = stratified_folds(ds, 10, 0)
    for f in range(10):
        _, test = plan.train_test(f)
        assert test.size == 15
        assert list(np.bincount(ds.labels[test], minlength=3)) == [5, 5, 5]


def test_folds_deterministic(data_dir):
    ds = load_dataset("wine", data_dir)
    assert stratified_folds(ds, 10, 4) == stratified_folds(ds, 10, 4)
    assert stratified_folds(ds, 10, 4) != stratified_folds(ds, 10, 5)


def test_too_few_samples_per_class():
    ds = Dataset("x", np.zeros((12, 1)), np.array([0] * 9 + [1] * 3), 2)
    with pytest.raises(DatasetError, match="fewer than k=5"):
        stratified_folds(ds, 5)
    with pytest.raises(IndexError):
        stratified_folds(Dataset("y", np.zeros((4, 1)), np.zeros(4, dtype=int), 1), 2).train_test(2)


def test_normalize_column_examples():
    ds = Dataset("toy", np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]]), np.zeros(3, dtype=int), 1)
    np.testing.assert_array_equal(normalize(ds).features, [[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])


def test_wine_training_fold_scaled_to_unit_range(data_dir):
    ds = load_dataset("wine", data_dir)
    train, _ = stratified_folds(ds, 10, 0).train_test(0)
    scaled = apply_minmax(ds.features[train], fit_minmax(ds.features[train]))
    assert np.all(scaled.min(axis=0) == 0.0) and np.all(scaled.max(axis=0) == 1.0)
