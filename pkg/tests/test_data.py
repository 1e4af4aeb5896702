import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from lcbal.data import (
    DataError,
    Dataset,
    UnitBoxScaler,
    load_csv,
    make_synthetic,
    save_csv,
    scale_to_unit_box,
    split,
)


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_zero_one_labels_are_remapped(tmp_path):
    path = _write(tmp_path, "a,b,label\n0.1,0.2,1\n0.3,0.4,0\n0.5,0.6,1\n")
    ds = load_csv(path, label_encoding="zero-one")
    np.testing.assert_array_equal(ds.y, [1.0, -1.0, 1.0])
    np.testing.assert_array_equal(ds.X, [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]])


def test_bad_pm1_label_names_the_row(tmp_path):
    path = _write(tmp_path, "a,label\n0.1,1\n0.2,2\n0.3,-1\n")
    with pytest.raises(DataError, match="row 3"):
        load_csv(path)


def test_label_column_by_name_and_index(tmp_path):
    path = _write(tmp_path, "y,a,b\n1,0.1,0.2\n-1,0.3,0.4\n")
    by_name = load_csv(path, label_column="y")
    by_index = load_csv(path, label_column=0)
    np.testing.assert_array_equal(by_name.X, by_index.X)
    np.testing.assert_array_equal(by_name.y, [1.0, -1.0])


def test_headerless_file(tmp_path):
    path = _write(tmp_path, "0.1,0.2,1\n0.3,0.4,-1\n")
    ds = load_csv(path, header=False)
    assert ds.n == 2 and ds.d == 2


@pytest.mark.parametrize("text, pattern", [
    ("a,label\n0.1,1\nfoo,-1\n", "row 3, column 1"),
    ("a,label\n0.1,1\nnan,-1\n", "non-finite"),
    ("a,label\n0.1,1\n", "at least 2 rows"),
    ("a,b,label\n0.1,0.2,1\n0.3,-1\n", "row 3"),
])
def test_malformed_files(tmp_path, text, pattern):
    with pytest.raises(DataError, match=pattern):
        load_csv(_write(tmp_path, text))


def test_csv_round_trip_is_exact(tmp_path):
    ds = make_synthetic(n=40, d=3, seed=5)
    path = tmp_path / "out.csv"
    save_csv(ds, path)
    back = load_csv(path)
    np.testing.assert_array_equal(back.X, ds.X)
    np.testing.assert_array_equal(back.y, ds.y)

    buf = io.StringIO()
    save_csv(ds, buf)
    assert buf.getvalue() == path.read_text()


@pytest.mark.parametrize("column, expected", [
    ([0.0, 5.0, 10.0], [-1.0, 0.0, 1.0]),
    ([7.0, 7.0, 7.0], [0.0, 0.0, 0.0]),
    ([-1.0, 1.0, 1.0], [-1.0, 1.0, 1.0]),
])
def test_scale_examples(column, expected):
    ds = Dataset(np.array(column)[:, None], np.ones(3))
    np.testing.assert_array_equal(scale_to_unit_box(ds).X[:, 0], expected)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (6, 3), elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_scaling_is_idempotent_and_bounded(X):
    once = scale_to_unit_box(Dataset(X, np.ones(6)))
    twice = scale_to_unit_box(once)
    assert np.all(np.abs(once.X) <= 1.0)
    np.testing.assert_allclose(twice.X, once.X, rtol=0, atol=1e-12)


def test_scaler_matches_function_and_clips():
    X = np.array([[0.0, 1.0], [10.0, 3.0], [5.0, 2.0]])
    scaler = UnitBoxScaler().fit(X)
    np.testing.assert_array_equal(scaler.transform(X), scale_to_unit_box(Dataset(X, np.ones(3))).X)
    np.testing.assert_array_equal(scaler.transform([[20.0, 0.0]]), [[1.0, -1.0]])


def test_split_sizes_and_partition():
    ds = make_synthetic(n=10, seed=1)
    train, test = split(ds, 0.3, seed=4)
    assert (train.n, test.n) == (7, 3)
    rows = {tuple(r) for r in train.X} | {tuple(r) for r in test.X}
    assert len(rows) == 10
    again = split(ds, 0.3, seed=4)
    np.testing.assert_array_equal(again[0].X, train.X)
    np.testing.assert_array_equal(again[1].X, test.X)


@pytest.mark.parametrize("fraction", [0.0, 1.0, 0.01])
def test_split_rejects_degenerate_fractions(fraction):
    with pytest.raises(DataError):
        split(make_synthetic(n=10), fraction)


def test_separable_pool_is_linearly_separable():
    # feasibility LP: exists w with y_i <w, x_i> >= 1
    ds = make_synthetic("separable", n=300, d=3, margin=0.05, seed=2)
    A = -(ds.y[:, None] * ds.X)
    res = linprog(np.zeros(ds.d), A_ub=A, b_ub=-np.ones(ds.n), bounds=[(None, None)] * ds.d)
    assert res.status == 0
    assert np.all(np.sign(ds.X @ res.x) == ds.y)


def test_separable_grid_search_reaches_zero_error():
    ds = make_synthetic("separable", n=200, d=2, margin=0.1, seed=8)
    angles = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
    H = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    errs = (np.where(ds.X @ H.T >= 0, 1.0, -1.0) != ds.y[:, None]).mean(axis=0)
    assert errs.min() == 0.0


def test_flip_fraction_within_binomial_band():
    n, q = 5000, 0.49
    clean = make_synthetic("noisy-margin", n=n, margin=0.05, flip_prob=0.0, seed=11)
    noisy = make_synthetic("noisy-margin", n=n, margin=0.05, flip_prob=q, seed=11)
    np.testing.assert_array_equal(clean.X, noisy.X)
    frac = np.mean(clean.y != noisy.y)
    assert abs(frac - q) <= 3 * np.sqrt(q * (1 - q) / n)


def test_synthetic_is_deterministic_and_respects_margin():
    a = make_synthetic(n=100, d=4, margin=0.1, seed=3)
    b = make_synthetic(n=100, d=4, margin=0.1, seed=3)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)
    assert np.all(np.abs(a.X) <= 1.0)


@pytest.mark.parametrize("kwargs", [
    dict(kind="spiral"), dict(n=2), dict(margin=0.0), dict(flip_prob=0.5), dict(margin=5.0),
])
def test_synthetic_rejects_bad_arguments(kwargs):
    with pytest.raises(ValueError):
        make_synthetic(**kwargs)


def test_dataset_validation_and_pool_view():
    with pytest.raises(DataError):
        Dataset(np.zeros((3, 2)), np.array([1.0, 0.0, 1.0]))
    with pytest.raises(DataError):
        Dataset(np.zeros((1, 2)), np.array([1.0]))
    ds = make_synthetic(n=10)
    view = ds.pool()
    with pytest.raises(ValueError):
        view[0, 0] = 3.0
