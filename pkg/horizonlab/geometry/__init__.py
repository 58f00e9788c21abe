"""Geometry of conformally flat horizon metrics: constants, shapes, field, rescaling, solver."""

from .conformal import AsymptoticExpansion, ConformalField, transform_mean_curvature
from .grid import UNSGrid, build_grid
from .horizon import (
    BarrierReport,
    HorizonGraph,
    SolverOptions,
    certify_outermost,
    certify_residual,
    find_certified_horizon,
    find_horizon,
    graph_area,
    local_area_bound_check,
    mean_curvature_residual,
    scan_barriers,
    solve_horizon,
)
from .mesh import Mesh, horizon_mesh, tube_mesh
from .model_constants import (
    DimensionPair,
    compute_a_hat,
    compute_C,
    compute_D,
    cylinder_mean_curvature,
    u_infinity_on_cylinder,
)
from .rescaling import (
    ConvergenceWindow,
    RescalingMap,
    convergence_report,
    evaluate_F_infinity,
    evaluate_F_k,
)
from .submanifolds import PointSet, ProductOfSpheres, RoundSphere, Submanifold

__all__ = [
    "AsymptoticExpansion",
    "ConformalField",
    "transform_mean_curvature",
    "UNSGrid",
    "build_grid",
    "BarrierReport",
    "HorizonGraph",
    "SolverOptions",
    "certify_outermost",
    "certify_residual",
    "find_certified_horizon",
    "find_horizon",
    "graph_area",
    "local_area_bound_check",
    "mean_curvature_residual",
    "scan_barriers",
    "solve_horizon",
    "Mesh",
    "horizon_mesh",
    "tube_mesh",
    "DimensionPair",
    "compute_a_hat",
    "compute_C",
    "compute_D",
    "cylinder_mean_curvature",
    "u_infinity_on_cylinder",
    "ConvergenceWindow",
    "RescalingMap",
    "convergence_report",
    "evaluate_F_infinity",
    "evaluate_F_k",
    "PointSet",
    "ProductOfSpheres",
    "RoundSphere",
    "Submanifold",
]
