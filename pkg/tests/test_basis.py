import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st
from scipy.interpolate import BSpline

from vcselect.basis import (
    basis_matrix,
    evaluate_basis,
    evaluation_grid,
    expand_design,
    knot_sequence,
    recommended_knot_range,
)
from vcselect.errors import DataValidationError
from vcselect.models import Dataset
from vcselect.schemas import SplineConfig


def test_knot_sequence_is_clamped():
    knots = knot_sequence(SplineConfig(degree=2, interior_knots=2))
    np.testing.assert_allclose(knots, [0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1])


@pytest.mark.parametrize("degree,interior", [(0, 0), (1, 3), (2, 2), (3, 4)])
def test_basis_count(degree, interior):
    config = SplineConfig(degree=degree, interior_knots=interior)
    assert basis_matrix([0.2, 0.7], config).shape == (2, degree + interior + 1)


@given(st.floats(min_value=0.0, max_value=1.0), st.integers(0, 3), st.integers(0, 4))
def test_partition_of_unity(v, degree, interior):
    row = evaluate_basis(v, SplineConfig(degree=degree, interior_knots=interior))
    assert np.all(row >= -1e-14)
    assert abs(row.sum() - 1.0) < 1e-12


def test_endpoints_are_interpolated():
    config = SplineConfig(degree=2, interior_knots=2)
    left = evaluate_basis(0.0, config)
    right = evaluate_basis(1.0, config)
    assert left[0] == pytest.approx(1.0)
    assert right[-1] == pytest.approx(1.0)
    assert np.count_nonzero(right) == 1


@pytest.mark.parametrize("degree,interior", [(1, 1), (2, 2), (3, 3)])
def test_matches_scipy_bspline(degree, interior):
    config = SplineConfig(degree=degree, interior_knots=interior)
    knots = knot_sequence(config)
    v = np.linspace(0.0, 0.999, 57)
    d = config.basis_count
    expected = np.column_stack([BSpline(knots, np.eye(d)[i], degree)(v) for i in range(d)])
    np.testing.assert_allclose(basis_matrix(v, config), expected, atol=1e-12)


@pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan")])
def test_rejects_values_outside_unit_interval(bad):
    with pytest.raises(DataValidationError):
        basis_matrix([0.5, bad], SplineConfig())


def test_evaluation_grid():
    grid = evaluation_grid()
    assert grid.shape == (200,)
    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert np.all(np.diff(grid) > 0)


@pytest.mark.parametrize("n,degree,expected", [(200, 2, (1, 3)), (200, 3, (1, 2)), (10, 2, (1, 2))])
def test_recommended_knot_range(n, degree, expected):
    assert recommended_knot_range(n, degree) == expected


def test_expand_design_blocks():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((8, 3))
    v = rng.uniform(size=8)
    dataset = Dataset.from_predictors(rng.standard_normal(8), x, v)
    config = SplineConfig(degree=2, interior_knots=1)
    design = expand_design(dataset, config)
    pi = basis_matrix(v, config)
    assert design.blocks.shape == (4, 8, 4)
    np.testing.assert_allclose(design.blocks[0], pi)
    np.testing.assert_allclose(design.blocks[2], pi * x[:, [1]])

    alpha = rng.standard_normal((4, 4))
    dense = sum(design.blocks[j] @ alpha[j] for j in range(4))
    np.testing.assert_allclose(design.linear_predictor(alpha), dense)


def test_expand_design_rejects_row_mismatch():
    dataset = Dataset.from_predictors(np.zeros(5), np.ones((5, 2)), np.full(5, 0.5))
    dataset.v = np.full(4, 0.5)
    with pytest.raises(DataValidationError):
        expand_design(dataset, SplineConfig())
