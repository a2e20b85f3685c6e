"""Dimension-reduction and anchor behavior."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dcakit.abstraction import apply_abstraction, fit_abstraction
from dcakit.anchor import ANCHOR_GENERATOR, generate_anchor
from dcakit.errors import DataError, DimensionError


class TestFitAbstraction:
    def test_components_orthonormal(self):
        rng = np.random.default_rng(0)
        mapping = fit_abstraction(rng.standard_normal((40, 9)), intermediate_dim=4)
        assert_allclose(mapping.components.T @ mapping.components, np.eye(4),
                        atol=1e-10)

    def test_explained_ratios_decreasing_and_bounded(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((50, 8)) * np.arange(1, 9)
        mapping = fit_abstraction(x, intermediate_dim=5)
        assert np.all(np.diff(mapping.explained_ratio) <= 1e-12)
        assert 0 < mapping.explained_ratio.sum() <= 1 + 1e-12

    def test_projections_decorrelated(self):
        # Off-diagonal covariance of the fitted projections vanishes.
        rng = np.random.default_rng(2)
        x = rng.standard_normal((200, 10)) @ rng.standard_normal((10, 10))
        mapping = fit_abstraction(x, intermediate_dim=6)
        proj = apply_abstraction(mapping, x)
        cov = proj.T @ proj / (proj.shape[0] - 1)
        off = cov - np.diag(np.diag(cov))
        assert np.abs(off).max() <= 1e-8

    def test_full_rank_projection_preserves_geometry(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((30, 5))
        mapping = fit_abstraction(x, intermediate_dim=5)
        proj = apply_abstraction(mapping, x)
        reconstructed = proj @ mapping.components.T + mapping.mean
        assert_allclose(reconstructed, x, atol=1e-10)

    def test_threshold_rule_on_isotropic_data(self):
        # Four equal variance directions: each contributes ~0.25, so a
        # 0.60 cut keeps exactly two components.
        rng = np.random.default_rng(4)
        x = rng.standard_normal((4000, 4))
        mapping = fit_abstraction(x, threshold=0.60)
        assert mapping.output_dim == 2

    def test_threshold_floor_is_one(self):
        rng = np.random.default_rng(5)
        mapping = fit_abstraction(rng.standard_normal((20, 3)), threshold=1e-9)
        assert mapping.output_dim == 1

    def test_exactly_one_rule_required(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal((10, 3))
        with pytest.raises(ValueError):
            fit_abstraction(x)
        with pytest.raises(ValueError):
            fit_abstraction(x, intermediate_dim=2, threshold=0.5)

    def test_dim_cannot_exceed_row_or_column_budget(self):
        rng = np.random.default_rng(7)
        with pytest.raises(DimensionError):
            fit_abstraction(rng.standard_normal((4, 10)), intermediate_dim=4)
        with pytest.raises(DimensionError):
            fit_abstraction(rng.standard_normal((10, 4)), intermediate_dim=5)

    def test_dim_cannot_exceed_rank(self):
        row = np.array([1.0, 2.0, 3.0, 4.0])
        x = np.vstack([row, 2 * row, 3 * row, 4 * row, 5 * row])
        with pytest.raises(DimensionError):
            fit_abstraction(x, intermediate_dim=2)

    def test_zero_variance_rejected(self):
        x = np.ones((5, 3))
        with pytest.raises(DataError):
            fit_abstraction(x, threshold=0.9)

    def test_single_row_rejected(self):
        with pytest.raises(DimensionError):
            fit_abstraction(np.ones((1, 3)), intermediate_dim=1)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((25, 6))
        a = fit_abstraction(x, threshold=0.8)
        b = fit_abstraction(x, threshold=0.8)
        assert np.array_equal(a.components, b.components)
        assert np.array_equal(a.mean, b.mean)


class TestApplyAbstraction:
    def test_projection_shape(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((12, 7))
        mapping = fit_abstraction(x, intermediate_dim=3)
        assert apply_abstraction(mapping, x).shape == (12, 3)

    def test_new_rows_use_training_mean(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal((12, 7))
        mapping = fit_abstraction(x, intermediate_dim=3)
        row = rng.standard_normal((1, 7))
        expected = (row - mapping.mean) @ mapping.components
        assert_allclose(apply_abstraction(mapping, row), expected)

    def test_column_mismatch_rejected(self):
        rng = np.random.default_rng(11)
        mapping = fit_abstraction(rng.standard_normal((12, 7)), intermediate_dim=3)
        with pytest.raises(DimensionError):
            apply_abstraction(mapping, rng.standard_normal((4, 6)))


class TestAnchor:
    def test_shape_and_seed_recorded(self):
        anchor = generate_anchor(30, 4, seed=123)
        assert anchor.matrix.shape == (30, 4)
        assert anchor.seed == 123

    def test_deterministic_per_seed(self):
        a = generate_anchor(20, 5, seed=7)
        b = generate_anchor(20, 5, seed=7)
        c = generate_anchor(20, 5, seed=8)
        assert np.array_equal(a.matrix, b.matrix)
        assert not np.array_equal(a.matrix, c.matrix)

    def test_standard_normal_moments(self):
        anchor = generate_anchor(10000, 2, seed=0)
        assert abs(anchor.matrix.mean()) <= 0.05
        assert abs(anchor.matrix.var() - 1.0) <= 0.05

    def test_generator_name_recorded(self):
        assert "pcg64" in ANCHOR_GENERATOR

    def test_bad_shape_rejected(self):
        with pytest.raises(ValueError):
            generate_anchor(0, 3, seed=1)
