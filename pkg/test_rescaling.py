import math

import numpy as np
import pytest

from horizonlab.errors import DimensionError, DomainError
from horizonlab.geometry.model_constants import DimensionPair
from horizonlab.geometry.rescaling import (
    ConvergenceWindow,
    RescalingMap,
    convergence_report,
    default_anchor,
    default_window,
    evaluate_F_infinity,
    evaluate_F_k,
    plane_distance,
    window_grid,
)
from horizonlab.geometry.submanifolds import PointSet, ProductOfSpheres, RoundSphere


@pytest.fixture
def circle():
    return RoundSphere(4, 1, 1.0)


def test_limit_function_of_a_line_in_R4():
    assert evaluate_F_infinity(DimensionPair(4, 1), 1.0, 2) == pytest.approx(math.pi, rel=1e-14)
    assert evaluate_F_infinity(DimensionPair(4, 1), 2.0, 2) == pytest.approx(math.pi / 2.0)


def test_limit_function_diverges_for_small_gamma():
    with pytest.raises(DimensionError):
        evaluate_F_infinity(DimensionPair(5, 2), 1.0, 2)
    with pytest.raises(DomainError):
        evaluate_F_infinity(DimensionPair(4, 1), 0.0, 2)


def test_rescaling_map(circle):
    x = np.array([1.0, 0.0, 0.0, 0.0])
    psi = RescalingMap(x, x, 0.1)
    np.testing.assert_allclose(psi([0.0, 0.0, 2.0, 0.0]), [1.0, 0.0, 0.2, 0.0])
    with pytest.raises(DomainError):
        RescalingMap(x, x, -1.0)


def test_plane_distance_ignores_tangent_offsets(circle):
    x = np.array([1.0, 0.0, 0.0, 0.0])
    distances = plane_distance(circle, x, [[0.0, 3.0, 0.0, 0.0], [2.0, 5.0, 1.0, 0.0]])
    np.testing.assert_allclose(distances, [0.0, math.sqrt(5.0)], atol=1e-14)


def test_default_anchor_lies_on_the_shape(circle):
    np.testing.assert_allclose(default_anchor(circle), [1.0, 0.0, 0.0, 0.0])
    torus = ProductOfSpheres(5, [1.0, 2.0], [1, 1])
    assert torus.contains(default_anchor(torus))
    points = PointSet([[1.0, 2.0, 3.0], [0.0, 0.0, 0.0]])
    np.testing.assert_array_equal(default_anchor(points), [1.0, 2.0, 3.0])


def test_window_grid_respects_the_window(circle):
    x = default_anchor(circle)
    grid = window_grid(circle, x, 3.0, 0.5, count=3)
    assert np.all(np.linalg.norm(grid, axis=1) <= 3.0 + 1e-12)
    assert np.all(plane_distance(circle, x, grid) >= 0.5 - 1e-12)


def test_window_validation_rejects_inverted_bounds(circle):
    x = default_anchor(circle)
    window = ConvergenceWindow(1.0, 2.0, 2.0, window_grid(circle, x, 3.0, 0.5, 1))
    with pytest.raises(DomainError):
        window.validate(circle, x)


def test_F_k_approaches_the_line_integral(circle):
    x = default_anchor(circle)
    zeta = np.array([1.0, 0.0, 0.0, 0.0])
    coarse = evaluate_F_k(circle, RescalingMap(x, x, 0.1), 2, zeta)
    fine = evaluate_F_k(circle, RescalingMap(x, x, 0.01), 2, zeta)
    assert abs(fine - math.pi) < abs(coarse - math.pi)


def test_point_rescaling_is_exact():
    S = PointSet([[0.0, 0.0, 0.0]])
    anchor = default_anchor(S)
    window = default_window(S, anchor, count=2)
    report = convergence_report(S, anchor, window, [0.2, 0.1, 0.05])
    for level in report.levels:
        assert level["sup_C0"] == 0.0
        assert level["sup_C1"] == 0.0
        assert level["metric_dev"] == 0.0


def test_circle_rescaling_converges(circle):
    anchor = default_anchor(circle)
    window = default_window(circle, anchor, count=2)
    report = convergence_report(circle, anchor, window, [0.2, 0.1, 0.05])
    assert report.strictly_decreasing
    assert all(0.0 < r < 1.0 for r in report.ratios)
    assert report.uniform_bound == pytest.approx(max(lv["max_F"] for lv in report.levels))
    n_points = len(window.grid)
    assert len(report.rows) == 3 * n_points
    assert report.as_dict()["strictly_decreasing"] is True


def test_convergence_report_needs_decreasing_epsilons(circle):
    anchor = default_anchor(circle)
    window = default_window(circle, anchor, count=1)
    with pytest.raises(DomainError):
        convergence_report(circle, anchor, window, [0.1, 0.2])


def test_anchor_must_lie_on_the_shape(circle):
    window = default_window(circle, default_anchor(circle), count=1)
    with pytest.raises(DomainError):
        convergence_report(circle, [2.0, 0.0, 0.0, 0.0], window, [0.1])


@pytest.mark.parametrize(
    "dims, gamma", [(DimensionPair(4, 1), 2), (DimensionPair(5, 1), 3), (DimensionPair(6, 2), 3)]
)
def test_limit_function_is_homogeneous_in_the_distance(dims, gamma):
    base = evaluate_F_infinity(dims, 0.7, gamma)
    for scale in (0.1, 2.0, 13.0):
        expected = scale ** (-(gamma - dims.m)) * base
        assert evaluate_F_infinity(dims, scale * 0.7, gamma) == pytest.approx(expected, rel=1e-13)
