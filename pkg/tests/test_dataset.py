import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quantileda.dataset import Dataset, parse_csv, read_csv, write_csv
from quantileda.errors import DataError, InvalidArgumentError


def test_validation():
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 2)), np.array([0, 0, 0]))
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 2)), np.array([0, 2, 2]))
    with pytest.raises(InvalidArgumentError):
        Dataset(np.array([[0.0], [np.nan]]), np.array([0, 1]))
    with pytest.raises(InvalidArgumentError):
        Dataset(np.zeros((3, 2)), np.array([0, 1]))


def test_immutable():
    ds = Dataset(np.zeros((2, 2)), np.array([0, 1]))
    with pytest.raises(ValueError):
        ds.features[0, 0] = 1.0


def test_csv_layout():
    ds = Dataset(np.array([[0.1, 2.0], [1e-300, -3.5]]), np.array([0, 1]))
    text = write_csv(ds)
    assert text.splitlines()[0] == "y,x1,x2"
    assert text.splitlines()[1] == "0,0.10000000000000001,2"
    assert "\r" not in text


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 5)), elements=st.floats(-1e300, 1e300)))
def test_csv_round_trip_exact(X):
    y = np.arange(X.shape[0]) % 2
    back = parse_csv(write_csv(Dataset(X, y)))
    assert np.array_equal(back.features, X)
    assert np.array_equal(back.labels, y)


def test_string_labels_mapped():
    ds = parse_csv("y,x1\nb,1\na,2\nb,3\n")
    assert ds.class_names == ("a", "b")
    assert list(ds.labels) == [1, 0, 1]
    assert parse_csv(write_csv(ds)).class_names == ("a", "b")


def test_non_contiguous_int_labels():
    ds = parse_csv("y,x1\n3,1\n7,2\n")
    assert list(ds.labels) == [0, 1]
    assert ds.class_names == ("3", "7")


@pytest.mark.parametrize(
    "text,where",
    [
        ("y,x1\n0,1\n1,abc\n", ":3:"),
        ("y,x1,x2\n0,1,2\n1,2\n", ":3:"),
        ("y,x1\n0,1\n1,inf\n", ":3:"),
        ("", "empty"),
        ("y,x1\n0,1\n0,2\n", "two classes"),
    ],
)
def test_parse_errors_carry_location(text, where):
    with pytest.raises(DataError, match=where):
        parse_csv(text, "d.csv")


def test_read_missing_file(tmp_path):
    with pytest.raises(DataError):
        read_csv(tmp_path / "nope.csv")


def test_subset_and_with_features():
    ds = Dataset(np.arange(8.0).reshape(4, 2), np.array([0, 1, 0, 1]))
    sub = ds.subset([0, 1])
    assert sub.n == 2 and sub.g == 2
    assert np.array_equal(ds.with_features(ds.features * 2).labels, ds.labels)
    assert list(ds.class_sizes()) == [2, 2]
