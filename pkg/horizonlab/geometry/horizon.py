"""
Horizon Solver - the outermost apparent horizon as a graph over UNS.

The candidate horizon is X = y + psi(omega) * omega for (y, omega) in UNS. Its
g_eps-area is a weighted sum over grid nodes; the discrete mean curvature is
the exact first variation of that sum, normalized by the node's area measure
and the normal-motion factor. The solver runs a monotone area-decreasing flow
from the model radius a_hat * eps and polishes with damped Newton steps.
"""

import logging
import math
import dataclasses
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse, special
from scipy.sparse.linalg import spsolve

from horizonlab.errors import (
    BarrierNotFoundError,
    ConfinementError,
    DomainError,
    NonConvergenceError,
)
from horizonlab.geometry.conformal import ConformalField, transform_mean_curvature
from horizonlab.geometry.grid import UNSGrid, build_grid, sphere_grid
from horizonlab.geometry.model_constants import compute_a_hat
from horizonlab.geometry.submanifolds import PointSet, RoundSphere, sample_sphere_directions

logger = logging.getLogger(__name__)

STAGNATION = 1e-14
BARRIER_GRACE_STEPS = 10
OUTERMOST_AGREEMENT = 1e-5
SEPARATION_FACTOR = 10.0
LAW_AGREEMENT_FACTOR = 10.0
SPHERE_CLEARANCE = 1e-3
ORBIT_NODES = 128


# ============================================================
# Value types
# ============================================================
@dataclass
class SolverOptions:
    """
    Flow-then-Newton controls.

    ``tolerance`` and ``switch`` are in units of 1/epsilon: the solver stops at
    sup|H| < tolerance/eps and hands the flow over to Newton at sup|H| < switch/eps.
    ``max_refinements`` caps how often ``find_certified_horizon`` doubles the grid.
    """

    tolerance: float = 1e-8
    switch: float = 1e-2
    max_flow_steps: int = 40
    max_newton_steps: int = 25
    initial_psi_over_epsilon: Optional[float] = None
    initial_step: float = 0.05
    fd_step: float = 1e-7
    certify: bool = False
    max_refinements: int = 1

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "SolverOptions":
        data = dict(data or {})
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


@dataclass(eq=False)
class HorizonGraph:
    """Graph heights ``psi`` on ``grid`` plus the solver's bookkeeping."""

    grid: UNSGrid
    psi: np.ndarray
    residual: Optional[np.ndarray] = None
    converged: bool = False
    flow_steps: int = 0
    newton_steps: int = 0
    area: float = math.nan
    history: List[Dict[str, float]] = dataclasses.field(default_factory=list)
    barrier_violations: int = 0

    @property
    def sup_residual(self) -> float:
        if self.residual is None:
            return math.nan
        return float(np.max(np.abs(self.residual)))

    @property
    def iterations(self) -> int:
        return self.flow_steps + self.newton_steps

    def points(self) -> np.ndarray:
        return self.grid.points(self.psi)

    def record(self, stage: str, area: float, sup_residual: float, step: float = math.nan):
        self.history.append(
            {"stage": stage, "area": area, "sup_residual": sup_residual, "step": step}
        )

    def summary(self, epsilon: float) -> dict:
        a_hat = compute_a_hat(self.grid.submanifold.dims)
        return {
            "epsilon": epsilon,
            "a_hat": a_hat,
            "psi_min": float(np.min(self.psi)),
            "psi_max": float(np.max(self.psi)),
            "psi_over_epsilon_deviation": float(np.max(np.abs(self.psi / epsilon - a_hat))),
            "sup_residual": self.sup_residual,
            "sup_residual_scaled": self.sup_residual * epsilon,
            "iterations": self.iterations,
            "flow_steps": self.flow_steps,
            "newton_steps": self.newton_steps,
            "area": self.area,
            "converged": self.converged,
            "nodes": self.grid.size,
        }


@dataclass(eq=False)
class BarrierReport:
    """
    Sign scan of the conformal mean curvature of tubes and coordinate spheres.

    ``scan`` rows are (a, min H, max H) over Tub(S, a); ``sphere_scan`` rows are
    (R, min H, max H) over S^{n-1}(R).
    """

    epsilon: float
    a_hat: float
    C_inner: float
    C_outer: float
    R_outer: float
    R_end: float
    scan: np.ndarray
    sphere_scan: np.ndarray

    @property
    def brackets_a_hat(self) -> bool:
        return self.C_inner < self.a_hat < self.C_outer

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "a_hat": self.a_hat,
            "C_inner": self.C_inner,
            "C_outer": self.C_outer,
            "R_outer": self.R_outer,
            "R_end": self.R_end,
            "brackets_a_hat": self.brackets_a_hat,
            "scan_rows": int(len(self.scan)),
            "sphere_rows": int(len(self.sphere_scan)),
        }


@dataclass(frozen=True, eq=False)
class AreaBoundResult:
    centre: np.ndarray
    radius: float
    inside_area: float
    boundary_area: float
    nodes_inside: int

    @property
    def holds(self) -> bool:
        return self.inside_area <= self.boundary_area

    def as_dict(self) -> dict:
        return {
            "centre": self.centre.tolist(),
            "radius": self.radius,
            "inside_area": self.inside_area,
            "boundary_area": self.boundary_area,
            "nodes_inside": self.nodes_inside,
            "holds": self.holds,
        }


@dataclass(eq=False)
class OutermostCertificate:
    difference: float
    from_a_hat: HorizonGraph
    from_outer: HorizonGraph

    @property
    def passed(self) -> bool:
        return self.difference < OUTERMOST_AGREEMENT


@dataclass(frozen=True)
class ResidualCertificate:
    """
    sup|H| of a solved graph from the area gradient and from the conformal law.

    All values are scaled by eps, so they compare directly with ``tolerance``.
    """

    tolerance: float
    area_gradient: float
    conformal_law: float
    difference: float

    @property
    def passed(self) -> bool:
        limit = LAW_AGREEMENT_FACTOR * self.tolerance
        return (
            self.area_gradient < self.tolerance
            and self.conformal_law < limit
            and self.difference <= limit
        )

    def as_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "sup_residual_scaled": self.area_gradient,
            "conformal_law_scaled": self.conformal_law,
            "sup_difference_scaled": self.difference,
            "passed": self.passed,
        }


# ============================================================
# Discrete area functional
# ============================================================
@dataclass(frozen=True, eq=False)
class _GraphState:
    points: np.ndarray
    u: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    P: np.ndarray
    dP: np.ndarray
    S: np.ndarray
    dS: np.ndarray
    slopes: List[np.ndarray]
    lambdas: List[np.ndarray]


def _check_psi(grid: UNSGrid, psi: np.ndarray, reach: Optional[float] = None) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    reach = grid.reach if reach is None else reach
    if psi.shape != (grid.size,):
        raise DomainError(
            f"psi must have one value per node ({grid.size})", {"shape": list(psi.shape)}
        )
    if not np.all(np.isfinite(psi)) or np.min(psi) <= 0.0 or np.max(psi) >= reach:
        raise DomainError(
            "graph heights must lie in (0, reach)",
            {"psi_min": float(np.min(psi)), "psi_max": float(np.max(psi)), "reach": reach},
        )
    return psi


def _graph_state(field: Optional[ConformalField], grid: UNSGrid, psi: np.ndarray) -> _GraphState:
    """All per-node pieces of the area density w * P * S * U; ``field=None`` means u = 1."""
    n, d = grid.n, grid.fiber_dim
    kappa = grid.kappa
    base_lambda = 1.0 - psi[:, None] * kappa
    P = np.prod(base_lambda, axis=1) * psi**d
    dP = P * (np.sum(-kappa / base_lambda, axis=1) + d / psi)

    slopes, lambdas, dlambdas = [], [], []
    for direction in grid.directions:
        slopes.append(direction.operator @ psi)
        if direction.kind == "base":
            lambdas.append(base_lambda[:, direction.curvature_index])
            dlambdas.append(-kappa[:, direction.curvature_index])
        else:
            lambdas.append(psi)
            dlambdas.append(np.ones_like(psi))
    Q = np.ones_like(psi)
    dQ = np.zeros_like(psi)
    for g, lam, dlam in zip(slopes, lambdas, dlambdas):
        Q += (g / lam) ** 2
        dQ -= 2.0 * g**2 * dlam / lam**3
    S = np.sqrt(Q)

    points = grid.points(psi)
    if field is None:
        u = np.ones_like(psi)
        du = np.zeros_like(psi)
    else:
        u, grad = field.evaluate_many(points)
        du = np.einsum("kn,kn->k", grad, grid.omegas)
    power = 2.0 * (n - 1) / (n - 2)
    U = u**power
    dU = power * u ** (power - 1.0) * du
    return _GraphState(points, u, U, dU, P, dP, S, 0.5 * dQ / S, slopes, lambdas)


def _area_gradient(grid: UNSGrid, state: _GraphState) -> np.ndarray:
    """Exact derivative of sum_i w_i P_i S_i U_i with respect to every psi_k."""
    w = grid.weights
    gradient = w * (
        state.dP * state.S * state.U
        + state.P * state.dS * state.U
        + state.P * state.S * state.dU
    )
    for direction, g, lam in zip(grid.directions, state.slopes, state.lambdas):
        flux = w * state.P * state.U * g / (lam**2 * state.S)
        gradient = gradient + direction.operator.T @ flux
    return gradient


def _mean_curvature(grid: UNSGrid, state: _GraphState) -> np.ndarray:
    n = grid.n
    measure = grid.weights * state.P * state.U * state.u ** (2.0 / (n - 2))
    return _area_gradient(grid, state) / measure


def _graph_normals(grid: UNSGrid, state: _GraphState) -> np.ndarray:
    """Euclidean unit normal (omega - sum_a (g_a/lambda_a) e_a) / S of the graph."""
    normal = grid.omegas.copy()
    for direction, g, lam in zip(grid.directions, state.slopes, state.lambdas):
        normal -= (g / lam)[:, None] * direction.vectors
    return normal / state.S[:, None]


def graph_area(field: ConformalField, h: HorizonGraph) -> float:
    """g_eps-area of the graph: sum of w * (Euclidean area element) * u^(2(n-1)/(n-2))."""
    psi = _check_psi(h.grid, h.psi)
    return float(np.sum(h.grid.weights * _density(_graph_state(field, h.grid, psi))))


def _density(state: _GraphState) -> np.ndarray:
    return state.P * state.S * state.U


def mean_curvature_residual(field: ConformalField, h: HorizonGraph) -> np.ndarray:
    """Per-node H_{g_eps} from the first variation of ``graph_area``."""
    psi = _check_psi(h.grid, h.psi)
    return _mean_curvature(h.grid, _graph_state(field, h.grid, psi))


def euclidean_mean_curvature(h: HorizonGraph) -> np.ndarray:
    """Per-node Euclidean mean curvature (the same first variation with u = 1)."""
    psi = _check_psi(h.grid, h.psi)
    return _mean_curvature(h.grid, _graph_state(None, h.grid, psi))


def conformal_law_residual(field: ConformalField, h: HorizonGraph) -> np.ndarray:
    """
    Independent residual: the conformal transformation law applied node by node
    to the Euclidean first variation and the Euclidean graph normal.
    """
    psi = _check_psi(h.grid, h.psi)
    flat = _graph_state(None, h.grid, psi)
    H_flat = _mean_curvature(h.grid, flat)
    normals = _graph_normals(h.grid, flat)
    u, grad = field.evaluate_many(flat.points)
    du = np.einsum("kn,kn->k", grad, normals)
    return transform_mean_curvature(h.grid.n, u, du, H_flat)


def certify_residual(
    field: ConformalField, h: HorizonGraph, tolerance: float = 1e-8
) -> ResidualCertificate:
    """
    Residual certificate of a solved graph: the area-gradient residual must be
    below ``tolerance``/eps, and the conformal-law residual and its gap to the
    area-gradient one below LAW_AGREEMENT_FACTOR * tolerance/eps.
    """
    eps = field.epsilon
    H = mean_curvature_residual(field, h) if h.residual is None else h.residual
    law = conformal_law_residual(field, h)
    certificate = ResidualCertificate(
        tolerance=tolerance,
        area_gradient=float(np.max(np.abs(H))) * eps,
        conformal_law=float(np.max(np.abs(law))) * eps,
        difference=float(np.max(np.abs(law - H))) * eps,
    )
    if not certificate.passed:
        logger.warning(
            "residual certificate failed on %d nodes: law sup=%.3e, gap=%.3e (tolerance %.1e)",
            h.grid.size,
            certificate.conformal_law,
            certificate.difference,
            tolerance,
        )
    return certificate


def max_slope(h: HorizonGraph, epsilon: float) -> float:
    """sup over nodes of |grad_omega psi| / eps, the fiber gradient of the graph."""
    squared = np.zeros(h.grid.size)
    for direction in h.grid.directions:
        if direction.kind == "fiber":
            squared += (direction.operator @ h.psi) ** 2
    return float(np.sqrt(np.max(squared)) / epsilon)


# ============================================================
# Barriers
# ============================================================
def tube_mean_curvature(field: ConformalField, grid: UNSGrid, a: float) -> np.ndarray:
    """H_{g_eps} of Tub(S, a) at the grid nodes: conformal law with the exact tube H."""
    kappa = grid.kappa
    H_flat = grid.fiber_dim / a + np.sum(-kappa / (1.0 - a * kappa), axis=1)
    u, grad = field.evaluate_many(grid.points(np.full(grid.size, a)))
    du = np.einsum("kn,kn->k", grad, grid.omegas)
    return transform_mean_curvature(grid.n, u, du, H_flat)


def default_a_range(
    field: ConformalField, a_min_over_epsilon: float = 0.1, a_max_over_reach: float = 0.95
) -> Tuple[float, float]:
    S = field.submanifold
    upper = 10.0 * (S.extent + 1.0)
    if math.isfinite(S.reach):
        upper = min(upper, a_max_over_reach * S.reach)
    return a_min_over_epsilon * field.epsilon, upper


def scan_coordinate_spheres(
    field: ConformalField,
    samples: int = 40,
    r_min: Optional[float] = None,
    r_max: Optional[float] = None,
    directions: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float]:
    """
    Conformal mean curvature of S^{n-1}(R) about the origin on a log grid of R.
    Radii whose sample points come within SPHERE_CLEARANCE * eps of S are skipped.

    Returns:
        (rows of (R, min H, max H), R_end) where R_end is the smallest scanned
        R beyond which every scanned sphere has min H > 0

    Raises:
        BarrierNotFoundError: the largest scanned sphere is not mean-convex
    """
    S = field.submanifold
    n = field.n
    r_min = S.extent + 0.1 * field.epsilon if r_min is None else r_min
    r_max = 10.0 * (S.extent + 1.0) if r_max is None else r_max
    if directions is None:
        directions = sample_sphere_directions(n, 64)
    clearance = SPHERE_CLEARANCE * field.epsilon
    rows = []
    for R in np.geomspace(r_min, r_max, samples):
        points = R * directions
        if min(S.distance(x) for x in points) < clearance:
            logger.debug("skipping coordinate sphere R=%.6g: a sample lies on S", R)
            continue
        u, grad = field.evaluate_many(points)
        du = np.einsum("kn,kn->k", grad, directions)
        H = transform_mean_curvature(n, u, du, (n - 1) / R)
        rows.append((R, float(np.min(H)), float(np.max(H))))
    if not rows:
        raise BarrierNotFoundError("every scanned coordinate sphere meets S", {"R_max": r_max})
    rows = np.asarray(rows)
    positive = rows[:, 1] > 0
    if not positive[-1]:
        raise BarrierNotFoundError(
            "large coordinate spheres are not mean-convex", {"R_max": float(rows[-1, 0])}
        )
    failing = np.flatnonzero(~positive)
    R_end = float(rows[0, 0] if len(failing) == 0 else rows[failing[-1] + 1, 0])
    return rows, R_end


def scan_barriers(
    field: ConformalField,
    grid: UNSGrid,
    a_range: Optional[Tuple[float, float]] = None,
    samples: int = 60,
    r_end_samples: int = 40,
) -> BarrierReport:
    """
    Locate the inner and outer tube barriers by a sign scan of H_{g_eps}.

    C_inner ends the leading run of tubes with max H < 0; C_outer is the first
    tube after it with min H > 0; R_outer ends the positive run started there.

    Raises:
        BarrierNotFoundError: no sign change, i.e. eps is outside the small-eps regime
    """
    eps = field.epsilon
    reach = field.submanifold.reach
    lo, hi = default_a_range(field) if a_range is None else a_range
    if not (0.0 < lo < hi < reach):
        raise DomainError(
            "tube radii must satisfy 0 < a_min < a_max < reach", {"a_range": [lo, hi]}
        )
    radii = np.geomspace(lo, hi, samples)
    rows = []
    for a in radii:
        H = tube_mean_curvature(field, grid, a)
        rows.append((a, float(np.min(H)), float(np.max(H))))
        logger.debug("tube a=%.6g: H in [%.6g, %.6g]", a, rows[-1][1], rows[-1][2])
    rows = np.asarray(rows)

    negative = rows[:, 2] < 0
    positive = rows[:, 1] > 0
    if not negative[0] or np.all(negative):
        raise BarrierNotFoundError(
            "no sign change from mean-concave to mean-convex tubes", {"epsilon": eps}
        )
    inner = int(np.argmin(negative)) - 1
    later = np.flatnonzero(positive[inner + 1 :])
    if len(later) == 0:
        raise BarrierNotFoundError("no mean-convex tube above the inner barrier", {"epsilon": eps})
    outer = inner + 1 + int(later[0])
    last = outer
    while last + 1 < len(rows) and positive[last + 1]:
        last += 1

    sphere_rows, R_end = scan_coordinate_spheres(field, r_end_samples)
    report = BarrierReport(
        epsilon=eps,
        a_hat=compute_a_hat(field.dims),
        C_inner=float(rows[inner, 0] / eps),
        C_outer=float(rows[outer, 0] / eps),
        R_outer=float(rows[last, 0]),
        R_end=R_end,
        scan=rows,
        sphere_scan=sphere_rows,
    )
    logger.info(
        "barriers: C_inner=%.4f C_outer=%.4f R_outer=%.4g R_end=%.4g",
        report.C_inner,
        report.C_outer,
        report.R_outer,
        report.R_end,
    )
    return report


# ============================================================
# Solver
# ============================================================
def _dependency_pattern(grid: UNSGrid) -> sparse.csr_matrix:
    """Nodes whose psi enters H_k: the two-ring of the difference stencils."""
    stencil = sparse.identity(grid.size, format="csr")
    for direction in grid.directions:
        stencil = stencil + abs(direction.operator)
    stencil = stencil.tocsr()
    stencil.data[:] = 1.0
    pattern = (stencil.T @ stencil).tocsr()
    pattern.data[:] = 1.0
    return pattern


def _greedy_colouring(pattern: sparse.csr_matrix) -> np.ndarray:
    """Columns of one colour never share a row of ``pattern``."""
    conflict = (pattern.T @ pattern).tocsr()
    colours = np.full(pattern.shape[1], -1)
    for j in range(pattern.shape[1]):
        neighbours = conflict.indices[conflict.indptr[j] : conflict.indptr[j + 1]]
        used = set(colours[neighbours].tolist())
        colour = 0
        while colour in used:
            colour += 1
        colours[j] = colour
    return colours


def _fd_jacobian(residual, psi, H0, pattern, colours, rel_step) -> sparse.csr_matrix:
    rows, cols = pattern.nonzero()
    values = np.empty(len(rows))
    h = rel_step * np.abs(psi)
    for colour in range(int(colours.max()) + 1):
        chosen = colours == colour
        step = np.where(chosen, h, 0.0)
        dH = residual(psi + step) - H0
        mask = chosen[cols]
        values[mask] = dH[rows[mask]] / h[cols[mask]]
    return sparse.csr_matrix((values, (rows, cols)), shape=pattern.shape)


def _inside(psi: np.ndarray, reach: float) -> bool:
    return bool(np.all(np.isfinite(psi)) and np.min(psi) > 0.0 and np.max(psi) < reach)


def solve_horizon(
    field: ConformalField,
    grid: UNSGrid,
    options: Optional[SolverOptions] = None,
    report: Optional[BarrierReport] = None,
    initial_psi: Optional[np.ndarray] = None,
) -> HorizonGraph:
    """
    Flow-then-Newton solve of H_{g_eps} = 0 for the graph heights.

    The flow takes explicit steps psi - tau * H, accepted only when the area
    does not increase and psi stays in (0, reach). It hands over to damped
    Newton at sup|H| < switch/eps, at the step cap, or on stagnation.

    Raises:
        ConfinementError: the initial heights are outside (0, reach)
        NonConvergenceError: Newton failed to reduce the residual or hit its cap
    """
    options = options or SolverOptions()
    eps = field.epsilon
    reach = field.submanifold.reach
    a_hat = compute_a_hat(field.dims)
    if initial_psi is None:
        start = options.initial_psi_over_epsilon or a_hat
        initial_psi = np.full(grid.size, start * eps)
    psi = np.asarray(initial_psi, dtype=float).copy()
    if not _inside(psi, reach):
        raise ConfinementError(
            "initial graph heights leave (0, reach)",
            {"psi_min": float(np.min(psi)), "psi_max": float(np.max(psi)), "reach": reach},
        )

    def evaluate(values):
        state = _graph_state(field, grid, values)
        return _mean_curvature(grid, state), float(np.sum(grid.weights * _density(state)))

    graph = HorizonGraph(grid=grid, psi=psi)
    H, area = evaluate(psi)
    sup = float(np.max(np.abs(H)))
    graph.record("start", area, sup)

    # --- gradient flow ------------------------------------------------------
    tau = options.initial_step * eps**2
    for _ in range(options.max_flow_steps):
        if sup < options.switch / eps:
            break
        candidate = psi - tau * H
        if _inside(candidate, reach):
            H_new, area_new = evaluate(candidate)
            if area_new <= area:
                decrease = area - area_new
                psi, H, area = candidate, H_new, area_new
                sup = float(np.max(np.abs(H)))
                graph.flow_steps += 1
                graph.record("flow", area, sup, tau)
                if report is not None and graph.flow_steps > BARRIER_GRACE_STEPS:
                    if np.min(psi) <= report.C_inner * eps or np.max(psi) >= report.C_outer * eps:
                        graph.barrier_violations += 1
                        logger.warning("flow iterate %d left the barrier band", graph.flow_steps)
                tau *= 1.2
                if decrease <= STAGNATION * area:
                    break
                continue
        tau *= 0.5
        if tau < STAGNATION * eps**2:
            break
    logger.debug("flow: %d accepted steps, sup|H|*eps=%.3e", graph.flow_steps, sup * eps)

    # --- damped Newton ------------------------------------------------------
    def residual(values):
        return _mean_curvature(grid, _graph_state(field, grid, values))

    target = options.tolerance / eps
    pattern = colours = None
    while sup >= target:
        if graph.newton_steps >= options.max_newton_steps:
            raise NonConvergenceError(
                f"Newton iteration cap {options.max_newton_steps} reached",
                best_residual=sup * eps,
                newton_steps=graph.newton_steps,
            )
        if pattern is None:
            pattern = _dependency_pattern(grid)
            colours = _greedy_colouring(pattern)
        jacobian = _fd_jacobian(residual, psi, H, pattern, colours, options.fd_step)
        delta = spsolve(jacobian.tocsc(), -H)
        if not np.all(np.isfinite(delta)):
            raise NonConvergenceError("singular Newton system", best_residual=sup * eps)
        t = 1.0
        confined = False
        while t >= 1.0 / 64.0:
            candidate = psi + t * delta
            if _inside(candidate, reach):
                confined = True
                H_new, area_new = evaluate(candidate)
                sup_new = float(np.max(np.abs(H_new)))
                if sup_new < sup:
                    psi, H, area, sup = candidate, H_new, area_new, sup_new
                    break
            t *= 0.5
        else:
            if not confined:
                raise ConfinementError(
                    "every damped Newton step leaves (0, reach)",
                    {"reach": reach, "best_residual": sup * eps},
                )
            raise NonConvergenceError(
                "damped Newton step did not reduce the residual",
                best_residual=sup * eps,
                newton_steps=graph.newton_steps,
            )
        graph.newton_steps += 1
        graph.record("newton", area, sup, t)
        logger.debug("newton %d: damping=%g sup|H|*eps=%.3e", graph.newton_steps, t, sup * eps)

    if report is not None:
        lower, upper = report.C_inner * eps, report.C_outer * eps
        if np.min(psi) <= lower or np.max(psi) >= upper:
            raise ConfinementError(
                "converged graph leaves the barrier band",
                {
                    "psi_over_epsilon_min": float(np.min(psi)) / eps,
                    "psi_over_epsilon_max": float(np.max(psi)) / eps,
                    "C_inner": report.C_inner,
                    "C_outer": report.C_outer,
                },
            )

    graph.psi = psi
    graph.residual = H
    graph.area = area
    graph.converged = True
    logger.info(
        "horizon converged: psi/eps in [%.6f, %.6f], sup|H|*eps=%.2e after %d+%d steps",
        np.min(psi) / eps,
        np.max(psi) / eps,
        sup * eps,
        graph.flow_steps,
        graph.newton_steps,
    )
    return graph


def _components_separated(field: ConformalField) -> bool:
    S = field.submanifold
    components = S.components()
    if len(components) < 2 or not isinstance(S, PointSet):
        return False
    size = 2.0 * compute_a_hat(field.dims) * field.epsilon
    gaps = np.linalg.norm(S.points[:, None, :] - S.points[None, :, :], axis=-1)
    separation = float(np.min(gaps[np.triu_indices(len(S.points), 1)]))
    return separation >= SEPARATION_FACTOR * size


def find_horizon(
    field: ConformalField,
    resolution: Tuple[int, object],
    mode: str = "full",
    options: Optional[SolverOptions] = None,
    report: Optional[BarrierReport] = None,
) -> List[HorizonGraph]:
    """
    Solve for the horizon, one graph per component of S when the components
    are well separated, otherwise one coupled graph over all of UNS.
    """
    S = field.submanifold
    if _components_separated(field):
        logger.info("solving %d separated components", len(S.components()))
        return [
            solve_horizon(field, build_grid(c, resolution, mode), options, report)
            for c in S.components()
        ]
    return [solve_horizon(field, build_grid(S, resolution, mode), options, report)]


def refine_resolution(resolution: Tuple[int, object]) -> Tuple[int, object]:
    """Double the base count and every fiber count."""
    base, fiber = resolution
    if isinstance(fiber, (list, tuple)):
        return 2 * int(base), tuple(2 * int(c) for c in fiber)
    return 2 * int(base), 2 * int(fiber)


def find_certified_horizon(
    field: ConformalField,
    resolution: Tuple[int, object],
    mode: str = "full",
    options: Optional[SolverOptions] = None,
    report: Optional[BarrierReport] = None,
) -> Tuple[List[HorizonGraph], List[ResidualCertificate], Tuple[int, object]]:
    """
    ``find_horizon``, re-solved on doubled grids while any component fails its
    residual certificate, at most ``options.max_refinements`` times.

    Returns:
        (graphs, certificates, resolution of the final solve)
    """
    options = options or SolverOptions()
    refinements = 0
    while True:
        graphs = find_horizon(field, resolution, mode, options, report)
        certificates = [certify_residual(field, g, options.tolerance) for g in graphs]
        if all(c.passed for c in certificates) or refinements >= options.max_refinements:
            return graphs, certificates, resolution
        refinements += 1
        resolution = refine_resolution(resolution)
        logger.info("refining the grid to %s for the residual certificate", resolution)


def certify_outermost(
    field: ConformalField,
    grid: UNSGrid,
    report: BarrierReport,
    options: Optional[SolverOptions] = None,
) -> OutermostCertificate:
    """Solve from a_hat * eps and from C_outer * eps; both must reach the same graph."""
    options = options or SolverOptions()
    flat_start = dataclasses.replace(options, initial_psi_over_epsilon=None)
    first = solve_horizon(field, grid, flat_start, report)
    second = solve_horizon(
        field, grid, dataclasses.replace(options, initial_psi_over_epsilon=report.C_outer), report
    )
    difference = float(np.max(np.abs(first.psi - second.psi)))
    logger.info("outermost certificate: sup|psi1 - psi2| = %.3e", difference)
    return OutermostCertificate(difference, first, second)


def location_check(h: HorizonGraph, report: BarrierReport) -> dict:
    """A-priori band: outside Tub(S, C_inner * eps), inside S^{n-1}(R_end), within the barriers."""
    eps = report.epsilon
    radii = np.linalg.norm(h.points(), axis=1)
    outside_inner = bool(np.min(h.psi) >= report.C_inner * eps)
    inside_sphere = bool(np.max(radii) <= report.R_end)
    within_barriers = bool(
        np.min(h.psi) > report.C_inner * eps and np.max(h.psi) < report.C_outer * eps
    )
    return {
        "outside_inner_tube": outside_inner,
        "inside_R_end": inside_sphere,
        "within_barriers": within_barriers,
        "max_radius": float(np.max(radii)),
        "passed": outside_inner and inside_sphere and within_barriers,
    }


def expand_reduced(h: HorizonGraph, base: int = 64, fiber: Sequence[int] = (16, 8)) -> HorizonGraph:
    """
    Carry a reduced_1d graph onto a full-mode grid, so every node stands for
    its own patch of UNS rather than a whole symmetry orbit.
    """
    if h.grid.mode != "reduced_1d":
        return h
    grid = build_grid(h.grid.submanifold, (base, tuple(fiber)), "full")
    return HorizonGraph(grid=grid, psi=interpolate_profile(h, grid), converged=h.converged)


def _cosine_tail(k: int, level) -> np.ndarray:
    """P(t > level) for t = <v, e>, v uniform on S^k and e a fixed unit vector."""
    level = np.asarray(level, dtype=float)
    if k == 0:
        return 0.5 * (level < -1.0) + 0.5 * (level < 1.0)
    # (1 + t)/2 is Beta(k/2, k/2)
    return special.betainc(0.5 * k, 0.5 * k, 0.5 * (1.0 - np.clip(level, -1.0, 1.0)))


def _cosine_rule(k: int) -> Tuple[np.ndarray, np.ndarray]:
    """Axis cosines of S^k with probability weights."""
    if k == 0:
        return np.array([1.0, -1.0]), np.array([0.5, 0.5])
    x, w = leggauss(ORBIT_NODES)
    alpha = 0.5 * math.pi * (x + 1.0)
    w = w * np.sin(alpha) ** (k - 1)
    return np.cos(alpha), w / np.sum(w)


def _orbit_share(level: float, a1: float, k1: int, a2: float, k2: int) -> float:
    """P(a1*t1 + a2*t2 > level) for independent axis cosines t1 on S^k1, t2 on S^k2."""
    if a2 <= 0.0:
        if a1 <= 0.0:
            return float(level < 0.0)
        return float(_cosine_tail(k1, level / a1))
    t1, w = _cosine_rule(k1)
    return float(np.sum(w * _cosine_tail(k2, (level - a1 * t1) / a2)))


def _orbit_fractions(h: HorizonGraph, centre: np.ndarray, radius: float) -> np.ndarray:
    """
    Share of each node's symmetry orbit that lies in B(centre, radius).

    A full-mode node is its own orbit. A reduced_1d node at colatitude theta
    stands for y(s) + psi * (cos(theta) N0(s) + sin(theta) eta) over every base
    point s of a round sphere (or the single point) and every unit eta in the
    span of the remaining normals; |X - c|^2 < r^2 is linear in the two axis
    cosines s.c and eta.c.
    """
    grid = h.grid
    if grid.mode != "reduced_1d":
        points = grid.points(h.psi)
        return (np.linalg.norm(points - centre, axis=1) < radius).astype(float)

    S = grid.submanifold
    frame = S.normal_frame(grid.base_points[0])
    sideways = frame.normals[1:]
    k2 = grid.fiber_dim - 1
    fractions = np.empty(grid.size)
    if isinstance(S, RoundSphere):
        c_plane = float(np.linalg.norm(centre[: S.plane_dim]))
        c_side = float(np.linalg.norm(sideways @ centre))
        for k, (psi, theta) in enumerate(zip(h.psi, grid.colatitude)):
            A = S.radius + psi * math.cos(theta)
            B = psi * math.sin(theta)
            level = A * A + c_plane**2 + B * B + c_side**2 - radius**2
            fractions[k] = _orbit_share(level, 2.0 * A * c_plane, S.m, 2.0 * B * c_side, k2)
        return fractions

    offset = centre - grid.base_points[0]
    along = float(frame.normals[0] @ offset)
    side = sideways @ offset
    c_side = float(np.linalg.norm(side))
    rest = float(offset @ offset) - along**2 - c_side**2
    for k, (psi, theta) in enumerate(zip(h.psi, grid.colatitude)):
        B = psi * math.sin(theta)
        level = (psi * math.cos(theta) - along) ** 2 + max(rest, 0.0) + B * B + c_side**2
        fractions[k] = _orbit_share(level - radius**2, 0.0, 0, 2.0 * B * c_side, k2)
    return fractions


def local_area_bound_check(
    field: ConformalField,
    h: HorizonGraph,
    centre: Sequence[float],
    radius: float,
    sphere_resolution: int = 12,
) -> AreaBoundResult:
    """
    Compare the g-area of the horizon inside the ball N = B(centre, radius)
    with the g-area of its boundary sphere.

    On a reduced_1d graph each node's area is split over its symmetry orbit,
    on which u and the area element are constant.
    """
    n = h.grid.n
    centre = np.asarray(centre, dtype=float)
    if centre.shape != (n,) or not np.all(np.isfinite(centre)):
        raise DomainError("ball centre must be a finite vector in R^n")
    if not np.isfinite(radius) or radius <= 0:
        raise DomainError(f"ball radius must be positive, got {radius}")
    psi = _check_psi(h.grid, h.psi, field.submanifold.reach)
    flat = _graph_state(None, h.grid, psi)
    fractions = _orbit_fractions(h, centre, radius)
    touched = fractions > 0.0
    power = 2.0 * (n - 1) / (n - 2)
    inside_area = 0.0
    if np.any(touched):
        u, _ = field.evaluate_many(flat.points[touched])
        inside_area = float(
            np.sum((h.grid.weights * _density(flat) * fractions)[touched] * u**power)
        )

    sphere = sphere_grid(n - 1, (2 * sphere_resolution, sphere_resolution))
    u, _ = field.evaluate_many(centre + radius * sphere.coords)
    boundary_area = float(np.sum(sphere.weights * u**power) * radius ** (n - 1))
    return AreaBoundResult(centre, float(radius), inside_area, boundary_area, int(np.sum(touched)))


def probe_centres(h: HorizonGraph, count: int) -> np.ndarray:
    """Evenly spaced graph nodes used as default probe-ball centres."""
    index = np.linspace(0, h.grid.size - 1, count).round().astype(int)
    return h.points()[index]


def interpolate_profile(reduced: HorizonGraph, grid: UNSGrid) -> np.ndarray:
    """Carry a reduced_1d colatitude profile onto another grid of the same shape."""
    order = np.argsort(reduced.grid.colatitude)
    return np.interp(grid.colatitude, reduced.grid.colatitude[order], reduced.psi[order])
