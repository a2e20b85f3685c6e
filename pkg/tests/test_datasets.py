"""CSV ingest/emit, synthetic generation, and row partitioning."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dcakit.classifiers import accuracy, one_hot, ridge_fit, ridge_predict
from dcakit.datasets import (
    load_csv,
    make_synthetic,
    partition,
    render_csv,
    write_csv,
)
from dcakit.errors import DataError


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_basic(self, tmp_path):
        path = write(tmp_path, "a,b,label\n1.0,2.0,x\n3.0,4.0,y\n5,6,x\n")
        features, labels, names = load_csv(path, "label")
        assert_allclose(features, [[1, 2], [3, 4], [5, 6]])
        assert list(labels) == [0, 1, 0]
        assert names == ["x", "y"]

    def test_labels_coded_by_first_appearance(self, tmp_path):
        path = write(tmp_path, "f,label\n1,zz\n2,aa\n3,zz\n4,mm\n")
        _, labels, names = load_csv(path, "label")
        assert names == ["zz", "aa", "mm"]
        assert list(labels) == [0, 1, 0, 2]

    def test_label_column_position_free(self, tmp_path):
        path = write(tmp_path, "label,a,b\nu,1,2\nv,3,4\n")
        features, labels, names = load_csv(path, "label")
        assert_allclose(features, [[1, 2], [3, 4]])
        assert names == ["u", "v"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv", "label")

    def test_missing_label_column(self, tmp_path):
        path = write(tmp_path, "a,b\n1,2\n")
        with pytest.raises(DataError, match="label"):
            load_csv(path, "label")

    def test_duplicate_header_rejected(self, tmp_path):
        path = write(tmp_path, "a,a,label\n1,2,x\n3,4,y\n")
        with pytest.raises(DataError, match="duplicate"):
            load_csv(path, "label")

    def test_field_count_error_carries_line_number(self, tmp_path):
        path = write(tmp_path, "a,b,label\n1,2,x\n3,y\n")
        with pytest.raises(DataError, match=r":3:"):
            load_csv(path, "label")

    def test_non_numeric_error_carries_line_number(self, tmp_path):
        path = write(tmp_path, "a,label\n1,x\noops,y\n")
        with pytest.raises(DataError, match=r":3:"):
            load_csv(path, "label")

    def test_non_finite_rejected(self, tmp_path):
        path = write(tmp_path, "a,label\nnan,x\n1,y\n")
        with pytest.raises(DataError, match=r":2:"):
            load_csv(path, "label")

    def test_header_only_rejected(self, tmp_path):
        path = write(tmp_path, "a,label\n")
        with pytest.raises(DataError):
            load_csv(path, "label")

    def test_no_feature_columns_rejected(self, tmp_path):
        path = write(tmp_path, "label\nx\ny\n")
        with pytest.raises(DataError):
            load_csv(path, "label")


class TestWriteCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        features, labels, names = make_synthetic(
            classes=3, dims=4, rows=25, spread=0.7, seed=5)
        path = tmp_path / "out.csv"
        write_csv(path, features, labels, names)
        back_f, back_l, back_n = load_csv(path, "label")
        assert np.array_equal(back_f, features)
        assert np.array_equal(back_l, labels)
        assert back_n == names

    def test_render_matches_write(self, tmp_path):
        features, labels, names = make_synthetic(
            classes=2, dims=2, rows=6, spread=1.0, seed=9)
        path = tmp_path / "out.csv"
        write_csv(path, features, labels, names)
        assert path.read_text() == render_csv(features, labels, names)

    def test_header_shape(self):
        features, labels, names = make_synthetic(
            classes=2, dims=3, rows=4, spread=1.0, seed=0)
        text = render_csv(features, labels, names)
        assert text.splitlines()[0] == "f0,f1,f2,label"


class TestMakeSynthetic:
    def test_shapes_and_round_robin_labels(self):
        features, labels, names = make_synthetic(
            classes=3, dims=5, rows=10, spread=1.0, seed=1)
        assert features.shape == (10, 5)
        assert list(labels) == [0, 1, 2, 0, 1, 2, 0, 1, 2, 0]
        assert names == ["c0", "c1", "c2"]

    def test_deterministic_per_seed(self):
        a = make_synthetic(classes=2, dims=3, rows=8, spread=1.0, seed=3)
        b = make_synthetic(classes=2, dims=3, rows=8, spread=1.0, seed=3)
        c = make_synthetic(classes=2, dims=3, rows=8, spread=1.0, seed=4)
        assert np.array_equal(a[0], b[0])
        assert not np.array_equal(a[0], c[0])

    def test_zero_spread_collapses_classes_to_points(self):
        features, labels, _ = make_synthetic(
            classes=2, dims=3, rows=12, spread=0.0, seed=6)
        for cls in (0, 1):
            rows = features[labels == cls]
            assert np.all(rows == rows[0])

    def test_small_spread_is_linearly_separable(self):
        features, labels, _ = make_synthetic(
            classes=4, dims=6, rows=400, spread=0.15, seed=7)
        model = ridge_fit(features, one_hot(labels), penalty=1.0)
        assert accuracy(ridge_predict(model, features), labels) >= 0.95

    def test_validation(self):
        with pytest.raises(ValueError):
            make_synthetic(classes=1, dims=3, rows=8, spread=1.0, seed=0)
        with pytest.raises(ValueError):
            make_synthetic(classes=5, dims=3, rows=4, spread=1.0, seed=0)
        with pytest.raises(ValueError):
            make_synthetic(classes=2, dims=3, rows=8, spread=-0.5, seed=0)


class TestPartition:
    def test_disjoint_and_sized(self):
        parts = partition(100, institutions=4, rows_each=20, seed=2)
        assert len(parts) == 4
        seen = set()
        for idx in parts:
            assert idx.shape == (20,)
            assert len(set(idx.tolist()) & seen) == 0
            seen.update(idx.tolist())
        assert max(seen) < 100

    def test_deterministic(self):
        a = partition(50, institutions=3, rows_each=10, seed=8)
        b = partition(50, institutions=3, rows_each=10, seed=8)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa, pb)

    def test_nested_across_institution_counts(self):
        # The first k subsets must be identical no matter how many
        # institutions are drawn, so scaling sweeps stay comparable.
        small = partition(200, institutions=2, rows_each=30, seed=4)
        large = partition(200, institutions=5, rows_each=30, seed=4)
        for ps, pl in zip(small, large):
            assert np.array_equal(ps, pl)

    def test_overflow_rejected(self):
        with pytest.raises(ValueError):
            partition(10, institutions=3, rows_each=4, seed=0)
