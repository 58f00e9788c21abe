"""
Rescaling Verifier - blow-up of the conformal factor at a point of S.

Under zeta -> x + eps*zeta the integral eps^(gamma-m) * int_S |x + eps*zeta - y|^(-gamma) dy
converges, as eps -> 0, to the flat-plane integral over T_{x_inf}S, which
depends on zeta only through its distance d to that plane:

    F_inf(zeta) = d^(-(gamma-m)) * D^(gamma)_m
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from horizonlab.errors import DomainError
from horizonlab.geometry.model_constants import DimensionPair, compute_a_hat, compute_D_general
from horizonlab.geometry.submanifolds import (
    DEFAULT_TOLERANCE,
    PointSet,
    ProductOfSpheres,
    Submanifold,
)

logger = logging.getLogger(__name__)

WINDOW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RescalingMap:
    """zeta -> x + eps * zeta, with T_{x_inf} R^n identified with R^n."""

    x_infinity: np.ndarray
    x: np.ndarray
    epsilon: float

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon}")

    def __call__(self, zeta) -> np.ndarray:
        return self.x + self.epsilon * np.asarray(zeta, dtype=float)


@dataclass(frozen=True, eq=False)
class ConvergenceWindow:
    """Test points with |zeta| <= beta1 and dist(zeta, T_{x_inf}S) >= beta2."""

    beta1: float
    beta2: float
    gamma: float
    grid: np.ndarray

    def validate(self, S: Submanifold, x_infinity) -> np.ndarray:
        """Distances of the grid points to T_{x_inf}S; raises if a point violates the window."""
        if self.beta1 <= 0 or self.beta2 <= 0 or self.beta2 > self.beta1:
            raise DomainError(
                "window needs 0 < beta2 <= beta1", {"beta1": self.beta1, "beta2": self.beta2}
            )
        distances = plane_distance(S, x_infinity, self.grid)
        norms = np.linalg.norm(self.grid, axis=1)
        if np.any(norms > self.beta1 * (1.0 + WINDOW_TOL)):
            raise DomainError(
                "window grid point outside |zeta| <= beta1", {"max_norm": float(norms.max())}
            )
        if np.any(distances < self.beta2 * (1.0 - WINDOW_TOL)):
            raise DomainError(
                "window grid point closer than beta2 to the tangent plane",
                {"min_distance": float(distances.min())},
            )
        return distances


@dataclass
class RescalingReport:
    levels: List[dict]
    rows: List[tuple]
    uniform_bound: float
    ratios: List[float] = field(default_factory=list)

    @property
    def strictly_decreasing(self) -> bool:
        sups = [level["sup_C0"] for level in self.levels]
        return all(b < a for a, b in zip(sups, sups[1:]))

    def as_dict(self) -> dict:
        return {
            "levels": self.levels,
            "uniform_bound": self.uniform_bound,
            "deviation_ratios": self.ratios,
            "strictly_decreasing": self.strictly_decreasing,
        }


def plane_distance(S: Submanifold, x_infinity, zeta) -> np.ndarray:
    """Distance of each zeta to T_{x_inf}S (through the origin of the rescaled chart)."""
    normals = S.normal_frame(x_infinity).normals
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    return np.linalg.norm(zeta @ normals.T, axis=1)


def evaluate_F_k(
    S: Submanifold,
    rescaling: RescalingMap,
    gamma: float,
    zeta,
    tolerance: float = DEFAULT_TOLERANCE,
) -> float:
    """
    eps^(gamma-m) * int_S |Psi(zeta) - y|^(-gamma) dy, evaluated in rescaled
    coordinates as eps^(-m) * sum_i w_i |zeta - (y_i - x)/eps|^(-gamma).
    """
    zeta = np.asarray(zeta, dtype=float)
    eps = rescaling.epsilon
    rule = S.sample_quadrature(rescaling(zeta), tolerance, exponent=gamma, resolve_gradient=False)
    offsets = zeta[None, :] - (rule.points - rescaling.x[None, :]) / eps
    r = np.linalg.norm(offsets, axis=1)
    return float(eps ** (-S.m) * np.sum(rule.weights * r ** (-gamma)))


def evaluate_F_infinity(dims: DimensionPair, distance: float, gamma: float) -> float:
    """d^(-(gamma-m)) * D^(gamma)_m; raises a divergence error for gamma <= m."""
    if not np.isfinite(distance) or distance <= 0:
        raise DomainError(f"distance to the tangent plane must be positive, got {distance}")
    return distance ** (-(gamma - dims.m)) * compute_D_general(dims.m, gamma)


def window_grid(
    S: Submanifold, x_infinity, beta1: float, beta2: float, count: int = 4
) -> np.ndarray:
    """
    Deterministic grid inside the window: ``count`` normal distances in
    [beta2, 0.9*beta1] along +/- each normal vector, each paired with the
    tangent offsets 0 and +/- half the remaining room along each tangent vector.
    """
    if count < 1:
        raise DomainError("window grid needs at least one distance")
    frame = S.normal_frame(x_infinity)
    distances = np.linspace(beta2, max(beta2, 0.9 * beta1), count)
    directions = np.vstack([frame.normals, -frame.normals])
    points = []
    for d in distances:
        room = 0.5 * np.sqrt(max(beta1**2 - d**2, 0.0))
        offsets = [np.zeros(S.n)]
        for t in frame.tangents:
            offsets.extend([room * t, -room * t])
        for nu in directions:
            for offset in offsets:
                points.append(d * nu + offset)
    return np.asarray(points)


def default_anchor(S: Submanifold) -> np.ndarray:
    """A fixed point of S used as x_inf when none is configured."""
    if isinstance(S, PointSet):
        return S.points[0].copy()
    direction = np.zeros(S.n)
    direction[0] = 1.0
    if isinstance(S, ProductOfSpheres):
        direction[S.block_dims[0] + 1] = 1.0
    return S.nearest_point(direction).point


def default_window(S: Submanifold, x_infinity, count: int = 4, gamma: Optional[float] = None):
    """Window with beta1 = 3 a_hat and beta2 = a_hat / 2."""
    a_hat = compute_a_hat(S.dims)
    beta1, beta2 = 3.0 * a_hat, 0.5 * a_hat
    gamma = S.n - 2 if gamma is None else gamma
    return ConvergenceWindow(beta1, beta2, gamma, window_grid(S, x_infinity, beta1, beta2, count))


def convergence_report(
    S: Submanifold,
    x_infinity,
    window: ConvergenceWindow,
    epsilons: Sequence[float],
    base_points: Optional[Sequence] = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> RescalingReport:
    """
    Deviations of F_k from F_inf on the window, one level per eps.

    Each level reports the sup C^0 deviation, the sup first-difference (C^1)
    deviation at step beta2/20, the induced metric-coefficient deviation
    |(1+F_k)^(4/(n-2)) - (1+F_inf)^(4/(n-2))| and max F_k.

    Args:
        base_points: x_k for each level; defaults to x_inf throughout
    """
    x_infinity = np.asarray(x_infinity, dtype=float)
    if not S.contains(x_infinity):
        raise DomainError("x_infinity must lie on S")
    epsilons = [float(e) for e in epsilons]
    if not epsilons or any(e <= 0 for e in epsilons):
        raise DomainError("epsilons must be positive")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise DomainError("epsilons must be strictly decreasing", {"epsilons": epsilons})
    if base_points is None:
        base_points = [x_infinity] * len(epsilons)
    if len(base_points) != len(epsilons):
        raise DomainError("need one base point per epsilon")

    distances = window.validate(S, x_infinity)
    n, gamma = S.n, window.gamma
    h = window.beta2 / 20.0
    metric_power = 4.0 / (n - 2)
    eye = np.eye(n)

    F_inf = np.array([evaluate_F_infinity(S.dims, d, gamma) for d in distances])
    shifted_inf = []
    for e in eye:
        shifted_distances = plane_distance(S, x_infinity, window.grid + h * e)
        shifted_inf.append(
            np.array([evaluate_F_infinity(S.dims, d, gamma) for d in shifted_distances])
        )

    levels, rows = [], []
    uniform_bound = 0.0
    for eps, x_k in zip(epsilons, base_points):
        x_k = np.asarray(x_k, dtype=float)
        if not S.contains(x_k):
            raise DomainError("base point x_k must lie on S")
        rescaling = RescalingMap(x_infinity, x_k, eps)
        F = np.array([evaluate_F_k(S, rescaling, gamma, z, tolerance) for z in window.grid])
        c1 = 0.0
        for i, e in enumerate(eye):
            shifted = np.array(
                [evaluate_F_k(S, rescaling, gamma, z + h * e, tolerance) for z in window.grid]
            )
            c1 = max(c1, float(np.max(np.abs((shifted - F) - (shifted_inf[i] - F_inf)) / h)))
        metric = np.abs((1.0 + F) ** metric_power - (1.0 + F_inf) ** metric_power)
        level = {
            "epsilon": eps,
            "sup_C0": float(np.max(np.abs(F - F_inf))),
            "sup_C1": c1,
            "metric_dev": float(np.max(metric)),
            "max_F": float(np.max(F)),
        }
        levels.append(level)
        uniform_bound = max(uniform_bound, level["max_F"])
        for index, (z, f, f_inf) in enumerate(zip(window.grid, F, F_inf)):
            rows.append((eps, index, *z.tolist(), f, f_inf, abs(f - f_inf)))
        logger.info("rescaling eps=%g: sup C0=%.3e C1=%.3e", eps, level["sup_C0"], c1)

    ratios = []
    for previous, current in zip(levels, levels[1:]):
        ratios.append(current["sup_C0"] / previous["sup_C0"] if previous["sup_C0"] > 0 else 0.0)
    return RescalingReport(levels=levels, rows=rows, uniform_bound=uniform_bound, ratios=ratios)
