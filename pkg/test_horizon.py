import dataclasses
import math

import numpy as np
import pytest

from horizonlab.errors import BarrierNotFoundError, ConfinementError, DomainError, ResolutionError
from horizonlab.geometry.conformal import ConformalField
from horizonlab.geometry.grid import build_grid, sphere_grid
from horizonlab.geometry.horizon import (
    HorizonGraph,
    SolverOptions,
    certify_outermost,
    certify_residual,
    expand_reduced,
    find_certified_horizon,
    find_horizon,
    graph_area,
    interpolate_profile,
    local_area_bound_check,
    location_check,
    max_slope,
    mean_curvature_residual,
    refine_resolution,
    scan_barriers,
    scan_coordinate_spheres,
    solve_horizon,
    tube_mean_curvature,
)
from horizonlab.geometry.submanifolds import PointSet, RoundSphere

EPS = 0.1


@pytest.fixture
def point():
    return PointSet([[0.0, 0.0, 0.0]])


@pytest.fixture
def point_field(point):
    return ConformalField(point, EPS)


@pytest.fixture
def point_grid(point):
    return build_grid(point, (8, [16, 8]), "full")


# --- grids ---
def test_sphere_grid_weights_integrate_the_sphere():
    grid = sphere_grid(2, (16, 8))
    assert grid.size == 128
    assert np.sum(grid.weights) == pytest.approx(4.0 * math.pi, rel=1e-12)


def test_full_grid_orders_nodes_theta_major(point_grid):
    assert point_grid.fiber_shape == (8, 16)
    assert point_grid.size == 128
    np.testing.assert_allclose(np.linalg.norm(point_grid.omegas, axis=1), 1.0)
    np.testing.assert_allclose(point_grid.fiber_weight_totals(), [4.0 * math.pi])


def test_reduced_grid_of_a_circle():
    S = RoundSphere(4, 1, 1.0)
    grid = build_grid(S, (8, 32), "reduced_1d")
    assert grid.mode == "reduced_1d"
    assert grid.fiber_shape == (32,)
    assert np.sum(grid.weights) == pytest.approx(2.0 * math.pi * 4.0 * math.pi, rel=1e-10)


def test_grid_rejects_coarse_or_odd_resolutions(point):
    with pytest.raises(ResolutionError):
        build_grid(point, (8, [16, 4]), "full")
    with pytest.raises(ResolutionError):
        build_grid(point, (8, [15, 8]), "full")
    with pytest.raises(ResolutionError):
        build_grid(point, (8, 16), "diagonal")


# --- area and curvature ---
def test_graph_area_of_a_coordinate_sphere(point_field, point_grid):
    a = 0.3
    graph = HorizonGraph(grid=point_grid, psi=np.full(point_grid.size, a))
    expected = 4.0 * math.pi * a**2 * (1.0 + EPS / a) ** 4
    assert graph_area(point_field, graph) == pytest.approx(expected, rel=1e-12)
    assert max_slope(graph, EPS) == 0.0


def test_area_rejects_heights_outside_the_reach():
    S = RoundSphere(4, 1, 1.0)
    grid = build_grid(S, (8, 16), "reduced_1d")
    graph = HorizonGraph(grid=grid, psi=np.full(grid.size, 1.5))
    with pytest.raises(DomainError):
        graph_area(ConformalField(S, 0.05), graph)


def test_tube_mean_curvature_changes_sign_at_epsilon(point_field, point_grid):
    assert np.all(tube_mean_curvature(point_field, point_grid, 0.5 * EPS) < 0)
    assert np.all(tube_mean_curvature(point_field, point_grid, 2.0 * EPS) > 0)
    np.testing.assert_allclose(tube_mean_curvature(point_field, point_grid, EPS), 0.0, atol=1e-9)


def test_first_variation_vanishes_on_the_schwarzschild_sphere(point_field, point_grid):
    graph = HorizonGraph(grid=point_grid, psi=np.full(point_grid.size, EPS))
    residual = mean_curvature_residual(point_field, graph)
    assert np.max(np.abs(residual)) * EPS < 1e-10


# --- barriers ---
def test_point_barriers_bracket_a_hat(point_field, point_grid):
    report = scan_barriers(point_field, point_grid, samples=40, r_end_samples=12)
    assert report.brackets_a_hat
    assert report.C_inner < 1.0 < report.C_outer
    assert report.R_outer > report.C_outer * EPS
    assert report.as_dict()["scan_rows"] == 40


def test_barrier_scan_fails_without_sign_change(point_field, point_grid):
    with pytest.raises(BarrierNotFoundError):
        scan_barriers(point_field, point_grid, a_range=(2.0 * EPS, 10.0), samples=10)


# --- solver ---
def test_schwarzschild_horizon_is_exact(point_field, point_grid):
    graph = solve_horizon(point_field, point_grid)
    assert graph.converged
    assert np.max(np.abs(graph.psi - EPS)) < 1e-4
    assert graph.sup_residual * EPS < 1e-8
    summary = graph.summary(EPS)
    assert summary["psi_over_epsilon_deviation"] < 1e-3
    assert summary["nodes"] == point_grid.size


def test_solver_recovers_from_an_outer_start(point_field, point_grid):
    options = SolverOptions(initial_psi_over_epsilon=1.6)
    graph = solve_horizon(point_field, point_grid, options)
    assert graph.converged
    assert np.max(np.abs(graph.psi - EPS)) < 1e-4
    assert graph.iterations > 0
    stages = {entry["stage"] for entry in graph.history}
    assert "start" in stages


def test_solver_rejects_initial_heights_outside_the_reach():
    S = PointSet([[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]])
    field = ConformalField(S, EPS)
    grid = build_grid(S, (8, [16, 8]), "full")
    with pytest.raises(ConfinementError):
        solve_horizon(field, grid, initial_psi=np.full(grid.size, 0.6))


def test_two_separated_points_give_two_horizons():
    S = PointSet([[-10.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
    field = ConformalField(S, EPS)
    graphs = find_horizon(field, (8, [16, 8]), "full")
    assert len(graphs) == 2
    for graph in graphs:
        assert graph.converged
        assert np.max(np.abs(graph.psi - EPS)) < 1e-3


def test_outermost_certificate_and_location(point_field, point_grid):
    report = scan_barriers(point_field, point_grid, samples=40, r_end_samples=12)
    certificate = certify_outermost(point_field, point_grid, report)
    assert certificate.passed
    check = location_check(certificate.from_a_hat, report)
    assert check["passed"]


def test_local_area_bound_on_the_schwarzschild_horizon(point_field, point_grid):
    graph = solve_horizon(point_field, point_grid)
    centre = graph.points()[0]
    result = local_area_bound_check(point_field, graph, centre, 0.5 * EPS)
    assert result.nodes_inside > 0
    assert result.holds


def test_expand_reduced_keeps_full_graphs(point_field, point_grid):
    graph = HorizonGraph(grid=point_grid, psi=np.full(point_grid.size, EPS))
    assert expand_reduced(graph) is graph


def test_circle_horizon_stays_between_the_barriers():
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    grid = build_grid(S, (8, 32), "reduced_1d")
    report = scan_barriers(field, grid, samples=30, r_end_samples=10)
    graph = solve_horizon(field, grid, report=report)
    assert graph.converged
    assert report.C_inner * 0.05 < np.min(graph.psi)
    assert np.max(graph.psi) < report.C_outer * 0.05
    assert max_slope(graph, 0.05) < 1.0
    assert graph.barrier_violations == 0
    expanded = expand_reduced(graph)
    assert expanded.grid.mode == "full"


def test_flow_never_increases_the_area(point_field, point_grid):
    graph = solve_horizon(point_field, point_grid, SolverOptions(initial_psi_over_epsilon=1.6))
    areas = [entry["area"] for entry in graph.history if entry["stage"] in ("start", "flow")]
    assert graph.flow_steps > 0
    assert all(b <= a for a, b in zip(areas, areas[1:]))


# --- barrier confinement ---
def test_converged_graph_respects_the_barriers_nodewise(point_field, point_grid):
    report = scan_barriers(point_field, point_grid, samples=40, r_end_samples=12)
    graph = solve_horizon(point_field, point_grid, report=report)
    ratio = graph.psi / EPS
    assert np.all(report.C_inner <= ratio)
    assert np.all(ratio <= report.C_outer)


def test_graph_outside_the_barrier_band_is_rejected(point_field, point_grid):
    report = scan_barriers(point_field, point_grid, samples=40, r_end_samples=12)
    narrow = dataclasses.replace(report, C_inner=0.5, C_outer=0.9)
    with pytest.raises(ConfinementError) as info:
        solve_horizon(point_field, point_grid, report=narrow)
    assert info.value.context["C_outer"] == 0.9


def test_coordinate_sphere_scan_skips_spheres_through_the_points():
    field = ConformalField(PointSet([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), EPS)
    rows, R_end = scan_coordinate_spheres(field, samples=3, r_min=0.5, r_max=2.0)
    assert len(rows) == 2
    assert np.all(np.abs(rows[:, 0] - 1.0) > 1e-6)
    assert np.all(np.isfinite(rows))
    assert rows[-1, 1] > 0
    assert R_end <= 2.0


# --- residual certificate ---
def test_schwarzschild_graph_passes_the_residual_certificate(point_field, point_grid):
    graph = solve_horizon(point_field, point_grid)
    certificate = certify_residual(point_field, graph)
    assert certificate.passed
    assert certificate.difference < 1e-10
    assert certificate.as_dict()["passed"] is True


def test_coarse_circle_graph_fails_the_residual_certificate():
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    graph = solve_horizon(field, build_grid(S, (8, 32), "reduced_1d"))
    certificate = certify_residual(field, graph, 1e-8)
    assert certificate.area_gradient < 1e-8
    assert certificate.difference > 10 * 1e-8
    assert not certificate.passed


def test_certified_solve_refines_the_grid_when_the_law_disagrees():
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    graphs, certificates, resolution = find_certified_horizon(
        field, (8, 32), "reduced_1d", SolverOptions(max_refinements=1)
    )
    assert resolution == (16, 64)
    assert graphs[0].grid.fiber_shape == (64,)
    assert len(certificates) == 1

    _, certificates, resolution = find_certified_horizon(
        field, (8, 32), "reduced_1d", SolverOptions(max_refinements=0)
    )
    assert resolution == (8, 32)
    assert not certificates[0].passed


def test_refine_resolution_doubles_every_count():
    assert refine_resolution((8, 32)) == (16, 64)
    assert refine_resolution((8, (16, 8))) == (16, (32, 16))
    assert refine_resolution((8, [16, 8])) == (16, (32, 16))


# --- symmetry reduction ---
def test_reduced_and_full_circle_solutions_agree():
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    reduced = solve_horizon(field, build_grid(S, (8, 8), "reduced_1d"))
    full = solve_horizon(field, build_grid(S, (8, [8, 8]), "full"))
    assert np.max(np.abs(interpolate_profile(reduced, full.grid) - full.psi)) < 1e-5


# --- local area bound on reduced graphs ---
def test_local_area_bound_on_a_reduced_two_sphere_horizon():
    S = RoundSphere(5, 2, 1.0)
    eps = 0.05
    field = ConformalField(S, eps)
    graph = solve_horizon(field, build_grid(S, (8, 64), "reduced_1d"))
    result = local_area_bound_check(field, graph, graph.points()[0], 0.5 * eps)
    assert result.nodes_inside > 0
    assert 0.0 < result.inside_area
    assert result.holds


def test_ball_around_the_whole_reduced_horizon_holds_all_of_its_area():
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    grid = build_grid(S, (8, 16), "reduced_1d")
    graph = HorizonGraph(grid=grid, psi=np.full(grid.size, 0.05))
    result = local_area_bound_check(field, graph, np.zeros(4), 3.0)
    assert result.nodes_inside == grid.size
    assert result.inside_area == pytest.approx(graph_area(field, graph), rel=1e-12)


def test_unit_ball_keeps_only_the_inner_side_of_a_circle_tube():
    # |y + psi*omega| < 1 exactly when cos(theta) < -psi/2
    S = RoundSphere(4, 1, 1.0)
    field = ConformalField(S, 0.05)
    grid = build_grid(S, (8, 16), "reduced_1d")
    graph = HorizonGraph(grid=grid, psi=np.full(grid.size, 0.05))
    result = local_area_bound_check(field, graph, np.zeros(4), 1.0)
    assert result.nodes_inside == int(np.sum(np.cos(grid.colatitude) < -0.025))
    assert 0.0 < result.inside_area < graph_area(field, graph)
