import math

import numpy as np
import pytest

from horizonlab.errors import DimensionError, DivergentIntegralError, DomainError
from horizonlab.geometry.model_constants import (
    DimensionPair,
    compute_a_hat,
    compute_C,
    compute_D,
    compute_D_general,
    cylinder_mean_curvature,
    cylinder_model,
    cylinder_profile,
    radial_D_quadrature,
    u_infinity_on_cylinder,
    unit_sphere_area,
)

VALID_PAIRS = [(n, m) for n in range(3, 10) for m in range(0, n - 2)]


# --- DimensionPair ---
def test_dimension_pair_derived_exponents():
    dims = DimensionPair(7, 2)
    assert dims.gamma == 3
    assert dims.fiber_dim == 4
    assert dims.as_dict() == {"n": 7, "m": 2, "gamma": 3}


@pytest.mark.parametrize("n, m", [(2, 0), (4, 2), (5, -1), (6, 4)])
def test_dimension_pair_rejects_invalid(n, m):
    with pytest.raises(DimensionError):
        DimensionPair(n, m)


def test_dimension_pair_rejects_non_integers():
    with pytest.raises(DimensionError):
        DimensionPair(3.0, 0)
    with pytest.raises(DimensionError):
        DimensionPair(True, 0)


# --- sphere areas and C ---
def test_unit_sphere_area_low_dimensions():
    assert unit_sphere_area(0) == pytest.approx(2.0)
    assert unit_sphere_area(1) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(2) == pytest.approx(4 * math.pi)
    with pytest.raises(DomainError):
        unit_sphere_area(-1)


@pytest.mark.parametrize("n", range(3, 10))
def test_C_is_one_half_for_points(n):
    assert compute_C(DimensionPair(n, 0)) == 0.5


def test_C_for_a_circle_in_R4():
    assert compute_C(DimensionPair(4, 1)) == pytest.approx(2.0 / 3.0)


# --- D ---
def test_D_known_values():
    assert compute_D(DimensionPair(3, 0)) == 1.0
    assert compute_D(DimensionPair(4, 1)) == pytest.approx(math.pi, rel=1e-14)
    # m = 2, p = 4: pi * Gamma(1) / Gamma(2)
    assert compute_D_general(2, 4) == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize("n, m", VALID_PAIRS)
def test_D_matches_independent_quadrature(n, m):
    exact = compute_D(DimensionPair(n, m))
    assert abs(exact - radial_D_quadrature(m, n - 2)) / exact <= 1e-8


def test_D_general_diverges_when_exponent_not_above_m():
    with pytest.raises(DivergentIntegralError):
        compute_D_general(2, 2)
    with pytest.raises(DivergentIntegralError):
        radial_D_quadrature(3, 1.5)


def test_divergent_integral_is_a_dimension_error():
    with pytest.raises(DimensionError):
        compute_D_general(3, 3)


# --- a_hat ---
@pytest.mark.parametrize("n", range(3, 10))
def test_a_hat_is_exactly_one_for_points(n):
    assert compute_a_hat(DimensionPair(n, 0)) == 1.0


def test_a_hat_for_a_circle_in_R4():
    assert compute_a_hat(DimensionPair(4, 1)) == pytest.approx(math.pi / 2, abs=1e-12)


def test_cylinder_model_bundles_constants():
    model = cylinder_model(DimensionPair(4, 1))
    assert model.C == pytest.approx(2.0 / 3.0)
    assert model.D == pytest.approx(math.pi)
    assert model.a_hat == pytest.approx(math.pi / 2)
    assert model.as_dict()["gamma"] == 1


# --- model cylinder ---
def test_u_infinity_on_cylinder():
    dims = DimensionPair(4, 1)
    assert u_infinity_on_cylinder(dims, 2.0) == pytest.approx(1.0 + math.pi / 2.0)
    with pytest.raises(DomainError):
        u_infinity_on_cylinder(dims, 0.0)


@pytest.mark.parametrize("n, m", [(n, m) for n in range(3, 8) for m in range(0, n - 2)])
def test_cylinder_mean_curvature_sign_structure(n, m):
    dims = DimensionPair(n, m)
    a_hat = compute_a_hat(dims)
    below = np.geomspace(a_hat / 100.0, a_hat, 102)[1:-1]
    above = np.geomspace(a_hat, 100.0 * a_hat, 102)[1:-1]
    assert all(cylinder_mean_curvature(dims, a) < 0 for a in below)
    assert all(cylinder_mean_curvature(dims, a) > 0 for a in above)
    assert abs(cylinder_mean_curvature(dims, a_hat)) < 1e-10


def test_cylinder_mean_curvature_schwarzschild_closed_form():
    # n = 3, m = 0: H(a) = (1 + 1/a)^-2 * (2 - 4/(a + 1)) / a
    a = 3.0
    expected = (1.0 + 1.0 / a) ** -2 * (2.0 - 4.0 / (a + 1.0)) / a
    assert cylinder_mean_curvature(DimensionPair(3, 0), a) == pytest.approx(expected, rel=1e-13)


def test_cylinder_profile_table():
    dims = DimensionPair(5, 1)
    table = cylinder_profile(dims, samples=51, span=10.0)
    assert table.shape == (51, 3)
    a_hat = compute_a_hat(dims)
    assert table[0, 0] == pytest.approx(a_hat / 10.0)
    assert table[-1, 0] == pytest.approx(a_hat * 10.0)
    assert np.all(table[:, 1] > 1.0)
    assert table[0, 2] < 0 < table[-1, 2]
