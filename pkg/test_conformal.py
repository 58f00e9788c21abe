import math

import numpy as np
import pytest

from horizonlab.errors import DomainError, SingularityError
from horizonlab.geometry.conformal import ConformalField, transform_mean_curvature
from horizonlab.geometry.submanifolds import PointSet, RoundSphere


@pytest.fixture
def point_field():
    return ConformalField(PointSet([[0.0, 0.0, 0.0]]), 0.1)


@pytest.fixture
def circle_field():
    return ConformalField(RoundSphere(4, 1, 1.0), 0.1)


# --- evaluation ---
def test_point_field_equals_two_at_radius_epsilon(point_field):
    assert point_field.evaluate_u([0.1, 0.0, 0.0]) == pytest.approx(2.0, rel=1e-15)


def test_point_field_gradient(point_field):
    grad = point_field.evaluate_grad_u([0.2, 0.0, 0.0])
    np.testing.assert_allclose(grad, [-2.5, 0.0, 0.0], rtol=1e-14)


def test_batch_evaluation_matches_pointwise(point_field):
    points = np.array([[0.3, 0.1, 0.0], [0.0, -2.0, 1.0], [5.0, 5.0, 5.0]])
    u, grad = point_field.evaluate_many(points)
    for x, value, g in zip(points, u, grad):
        single_u, single_grad = point_field.evaluate(x)
        assert value == pytest.approx(single_u, rel=1e-14)
        np.testing.assert_allclose(g, single_grad, rtol=1e-13)


def test_field_is_singular_on_the_submanifold(point_field):
    with pytest.raises(SingularityError):
        point_field.evaluate_u([0.0, 0.0, 0.0])


def test_epsilon_must_be_positive():
    with pytest.raises(DomainError):
        ConformalField(PointSet([[0.0, 0.0, 0.0]]), 0.0)


def test_circle_field_on_the_axis(circle_field):
    # every point of the unit circle is at distance sqrt(1 + h^2) from (0, 0, h, 0)
    assert circle_field.evaluate_u([0.0, 0.0, 0.0, 0.0]) == pytest.approx(
        1.0 + 0.1 * 2.0 * math.pi, rel=1e-8
    )
    h = 0.75
    assert circle_field.evaluate_u([0.0, 0.0, h, 0.0]) == pytest.approx(
        1.0 + 0.1 * 2.0 * math.pi / (1.0 + h * h), rel=1e-8
    )


def test_circle_field_gradient_matches_differences(circle_field):
    x = np.array([1.2, 0.4, 0.3, -0.2])
    grad = circle_field.evaluate_grad_u(x)
    step = 1e-5
    for i in range(4):
        e = np.zeros(4)
        e[i] = step
        fd = (circle_field.evaluate_u(x + e) - circle_field.evaluate_u(x - e)) / (2 * step)
        assert grad[i] == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_with_epsilon_rescales_prefactor(circle_field):
    other = circle_field.with_epsilon(0.05)
    assert other.prefactor == pytest.approx(0.05)
    assert other.submanifold is circle_field.submanifold


# --- mean curvature ---
def test_transform_law_vanishes_on_the_schwarzschild_horizon(point_field):
    x = np.array([0.1, 0.0, 0.0])
    H = point_field.conformal_mean_curvature(x, 2.0 / 0.1, [1.0, 0.0, 0.0])
    assert H == pytest.approx(0.0, abs=1e-10)


def test_transform_law_reduces_to_euclidean_for_flat_u():
    assert transform_mean_curvature(5, 1.0, 0.0, 3.5) == 3.5


def test_conformal_mean_curvature_needs_unit_normal(point_field):
    with pytest.raises(DomainError):
        point_field.conformal_mean_curvature([0.2, 0.0, 0.0], 10.0, [2.0, 0.0, 0.0])


# --- harmonicity ---
@pytest.mark.parametrize(
    "x", [[0.5, 0.3, 0.8, 0.2], [1.6, -0.4, 0.1, 0.5], [-0.2, 1.3, -1.1, 0.9]]
)
def test_circle_field_is_harmonic(circle_field, x):
    assert circle_field.harmonicity_residual(x) < 1e-4


def test_harmonicity_detects_non_harmonic_function(circle_field):
    residual = circle_field.harmonicity_residual(
        [0.5, 0.5, 0.5, 0.5], function=lambda p: float(p @ p)
    )
    assert residual == pytest.approx(4.0, rel=1e-6)


def test_harmonicity_stencil_must_stay_off_the_submanifold(circle_field):
    with pytest.raises(DomainError):
        circle_field.harmonicity_residual([1.0, 0.0, 0.1, 0.0], step=0.2)


# --- asymptotics ---
def test_asymptotic_coefficient_of_a_point(point_field):
    fit = point_field.fit_asymptotic_coefficient()
    assert fit.relative_error < 1e-6
    assert fit.exponent == pytest.approx(1.0, abs=1e-6)
    assert fit.exponent_ok


def test_asymptotic_coefficient_of_a_circle(circle_field):
    fit = circle_field.fit_asymptotic_coefficient()
    assert fit.expected_coefficient == pytest.approx(0.1 * 2.0 * math.pi)
    assert fit.relative_error < 0.01
    assert fit.exponent_ok


def test_asymptotic_fit_rejects_small_radii(circle_field):
    with pytest.raises(DomainError):
        circle_field.fit_asymptotic_coefficient(radii=[1.0, 2.0])


# --- field invariants ---
def test_point_fields_superpose():
    p, q = [0.0, 0.0, 0.0], [1.0, 0.5, 0.0]
    both = ConformalField(PointSet([p, q]), 0.1)
    first = ConformalField(PointSet([p]), 0.1)
    second = ConformalField(PointSet([q]), 0.1)
    for x in ([0.3, 0.2, -0.1], [2.0, 1.0, 0.0], [0.5, 0.5, 0.5]):
        expected = (first.evaluate_u(x) - 1.0) + (second.evaluate_u(x) - 1.0)
        assert both.evaluate_u(x) - 1.0 == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize(
    "omega",
    [[1.0, 0.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.6, 0.0, 0.0, 0.8]],
)
def test_u_decreases_along_normal_rays(circle_field, omega):
    x = np.array([1.0, 0.0, 0.0, 0.0])
    values = [
        circle_field.evaluate_u(x + t * np.asarray(omega)) for t in np.geomspace(0.01, 0.9, 40)
    ]
    assert np.all(np.diff(values) < 0.0)


def test_circle_field_matches_a_dense_periodic_rule(circle_field):
    x = np.array([1.1, 0.2, 0.05, -0.1])
    rule = circle_field.submanifold.sample_quadrature(x)
    count = max(10 * len(rule.weights), 4000)
    alpha = 2.0 * math.pi * np.arange(count) / count
    y = np.stack([np.cos(alpha), np.sin(alpha), np.zeros(count), np.zeros(count)], axis=1)
    reference = 1.0 + 0.1 * np.sum((2.0 * math.pi / count) / np.sum((x - y) ** 2, axis=1))
    assert circle_field.evaluate_u(x) == pytest.approx(reference, rel=1e-8)
