"""
Structured grids on the unit normal bundle UNS.

A grid node is a (base, fiber) pair: a point y on S and a unit normal omega at
y. Graph heights psi live on nodes; the hypersurface is y + psi * omega.
First differences along every active grid direction are sparse matrices that
differentiate with respect to arclength (on S for base directions, on the unit
fiber sphere for fiber directions).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from horizonlab.errors import ResolutionError
from horizonlab.geometry.model_constants import unit_sphere_area
from horizonlab.geometry.quadrature import cell_integrals
from horizonlab.geometry.submanifolds import (
    PointSet,
    ProductOfSpheres,
    RoundSphere,
    Submanifold,
)

logger = logging.getLogger(__name__)

MODES = ("full", "reduced_1d")
MIN_COUNT = 8
MAX_FULL_FIBER_DIM = 3


@dataclass(frozen=True, eq=False)
class GridDirection:
    """One differentiation direction of the grid."""

    kind: str
    operator: sparse.csr_matrix
    vectors: np.ndarray
    curvature_index: Optional[int] = None


@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Cell-centred angular grid on the unit d-sphere in R^{d+1}."""

    coords: np.ndarray
    weights: np.ndarray
    colatitude: np.ndarray
    operators: List[sparse.csr_matrix]
    tangents: List[np.ndarray]
    shape: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class UNSGrid:
    """
    Discretization of UNS; arrays are indexed by node k = base * fiber_size + fiber.

    Attributes:
        base_points: (N, n) base point y of each node
        omegas: (N, n) unit normal of each node
        kappa: (N, m) shape-operator eigenvalues A_omega at each node
        weights: (N,) product of base and fiber quadrature weights
        directions: active difference directions
    """

    submanifold: Submanifold
    mode: str
    base_count: int
    fiber_shape: Tuple[int, ...]
    base_points: np.ndarray
    omegas: np.ndarray
    kappa: np.ndarray
    weights: np.ndarray
    base_weights: np.ndarray
    base_index: np.ndarray
    fiber_index: np.ndarray
    colatitude: np.ndarray
    directions: List[GridDirection]

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def n(self) -> int:
        return self.submanifold.n

    @property
    def fiber_dim(self) -> int:
        return self.submanifold.dims.fiber_dim

    @property
    def reach(self) -> float:
        return self.submanifold.reach

    @property
    def fiber_size(self) -> int:
        return int(np.prod(self.fiber_shape))

    def points(self, psi) -> np.ndarray:
        return self.base_points + np.asarray(psi, dtype=float)[:, None] * self.omegas

    def fiber_weight_totals(self) -> np.ndarray:
        """Per-base sum of fiber weights; equals |S^{n-m-1}| for every base node."""
        base_weight = self.base_weight_per_node()
        return np.bincount(self.base_index, weights=self.weights / base_weight)

    def base_weight_per_node(self) -> np.ndarray:
        return self.base_weights[self.base_index]

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "base_count": self.base_count,
            "fiber_shape": list(self.fiber_shape),
            "nodes": self.size,
        }


# ============================================================
# Sphere grids
# ============================================================
def _embed(polar: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """
    Hyperspherical coordinates to unit vectors.

    Args:
        polar: (k, d-1) polar angles theta_1..theta_{d-1}
        phi: (k,) azimuth

    Returns:
        (k, d+1) points on S^d; the polar axis is the first coordinate
    """
    k, p = polar.shape
    out = np.empty((k, p + 2))
    running = np.ones(k)
    for j in range(p):
        out[:, j] = running * np.cos(polar[:, j])
        running = running * np.sin(polar[:, j])
    out[:, p] = running * np.cos(phi)
    out[:, p + 1] = running * np.sin(phi)
    return out


def _angle_tangent(polar: np.ndarray, phi: np.ndarray, j: int) -> Tuple[np.ndarray, np.ndarray]:
    """Derivative of the embedding along angle j (polar angles first, azimuth last) and its norm."""
    p = polar.shape[1]
    shifted_polar = polar.copy()
    shifted_phi = phi.copy()
    if j < p:
        shifted_polar[:, j] += 0.5 * math.pi
    else:
        shifted_phi = shifted_phi + 0.5 * math.pi
    derivative = _embed(shifted_polar, shifted_phi)
    derivative[:, :j] = 0.0
    if j < p:
        scale = np.prod(np.sin(polar[:, :j]), axis=1)
    else:
        scale = np.prod(np.sin(polar), axis=1)
    return derivative, scale


def sphere_grid(d: int, counts: Sequence[int]) -> SphereGrid:
    """
    Cell-centred grid on S^d: d-1 polar angles and one periodic azimuth.

    Args:
        d: Sphere dimension, >= 2
        counts: (n_phi, n_theta); n_theta is shared by all polar angles

    Neighbours across the poles are located by embedding the reflected angle
    tuple and looking it up in a KD-tree of the node embeddings, so n_phi must
    be even.
    """
    n_phi, n_theta = int(counts[0]), int(counts[1])
    if n_phi % 2:
        raise ResolutionError("azimuthal count must be even", {"n_phi": n_phi})
    p = d - 1
    d_theta = math.pi / n_theta
    d_phi = 2.0 * math.pi / n_phi
    theta = (np.arange(n_theta) + 0.5) * d_theta
    phi = np.arange(n_phi) * d_phi
    mesh = np.meshgrid(*([theta] * p + [phi]), indexing="ij")
    angles = np.stack([m.ravel() for m in mesh], axis=1)
    polar, azimuth = angles[:, :p], angles[:, p]
    coords = _embed(polar, azimuth)

    edges = np.arange(n_theta + 1) * d_theta
    weights = np.full(len(coords), d_phi)
    for j in range(p):
        # the measure carries sin^(d-1-j) of the j-th polar angle
        cell = cell_integrals(d - 1 - j, edges)
        index = np.floor(polar[:, j] / d_theta).astype(int)
        weights = weights * cell[index]

    tree = cKDTree(coords)
    steps = [d_theta] * p + [d_phi]
    operators, tangents = [], []
    size = len(coords)
    rows = np.arange(size)
    for j, step in enumerate(steps):
        neighbours = []
        for sign in (1.0, -1.0):
            moved = angles.copy()
            moved[:, j] += sign * step
            dist, idx = tree.query(_embed(moved[:, :p], moved[:, p]))
            if np.max(dist) > 1e-8:
                raise ResolutionError("sphere grid is not closed under reflection", {"d": d})
            neighbours.append(idx)
        tangent, scale = _angle_tangent(polar, azimuth, j)
        inv = 1.0 / (2.0 * step * scale)
        operator = sparse.csr_matrix(
            (
                np.concatenate([inv, -inv]),
                (np.concatenate([rows, rows]), np.concatenate(neighbours)),
            ),
            shape=(size, size),
        )
        operators.append(operator)
        tangents.append(tangent / scale[:, None])

    return SphereGrid(
        coords=coords,
        weights=weights,
        colatitude=polar[:, 0].copy(),
        operators=operators,
        tangents=tangents,
        shape=tuple([n_theta] * p + [n_phi]),
    )


def colatitude_grid(d: int, count: int) -> SphereGrid:
    """Axisymmetric reduction of S^d to the colatitude, even-reflected at both poles."""
    edges = np.linspace(0.0, math.pi, count + 1)
    theta = 0.5 * (edges[:-1] + edges[1:])
    step = edges[1] - edges[0]
    coords = np.zeros((count, d + 1))
    coords[:, 0] = np.cos(theta)
    coords[:, 1] = np.sin(theta)
    tangent = np.zeros((count, d + 1))
    tangent[:, 0] = -np.sin(theta)
    tangent[:, 1] = np.cos(theta)
    weights = unit_sphere_area(d - 1) * cell_integrals(d - 1, edges)
    rows = np.arange(count)
    up = np.minimum(rows + 1, count - 1)
    down = np.maximum(rows - 1, 0)
    inv = np.full(count, 1.0 / (2.0 * step))
    operator = sparse.csr_matrix(
        (np.concatenate([inv, -inv]), (np.concatenate([rows, rows]), np.concatenate([up, down]))),
        shape=(count, count),
    )
    return SphereGrid(coords, weights, theta, [operator], [tangent], (count,))


# ============================================================
# Base grids
# ============================================================
def _periodic_difference(count: int, step: float) -> sparse.csr_matrix:
    rows = np.arange(count)
    inv = np.full(count, 1.0 / (2.0 * step))
    return sparse.csr_matrix(
        (
            np.concatenate([inv, -inv]),
            (
                np.concatenate([rows, rows]),
                np.concatenate([(rows + 1) % count, (rows - 1) % count]),
            ),
        ),
        shape=(count, count),
    )


def _circle_base(count: int, radius: float, n: int, offset: int = 0):
    t = 2.0 * math.pi * np.arange(count) / count
    points = np.zeros((count, n))
    points[:, offset] = radius * np.cos(t)
    points[:, offset + 1] = radius * np.sin(t)
    tangent = np.zeros((count, n))
    tangent[:, offset] = -np.sin(t)
    tangent[:, offset + 1] = np.cos(t)
    return points, tangent, _periodic_difference(count, 2.0 * math.pi * radius / count)


def _base_nodes(S: Submanifold, count: int, mode: str):
    """
    Base points, normal frames, weights and base difference directions.

    Returns:
        (points (B, n), normals (B, n-m, n), weights (B,), [(operator, tangents, curvature index)])
    """
    n = S.n
    if mode == "reduced_1d":
        if isinstance(S, RoundSphere):
            base = np.zeros(n)
            base[0] = S.radius
        elif isinstance(S, PointSet) and len(S.points) == 1:
            base = S.points[0].copy()
        else:
            raise ResolutionError(
                "reduced_1d needs the symmetry of a single round sphere or a single point",
                {"shape": S.kind},
            )
        frame = S.normal_frame(base)
        return base[None, :], frame.normals[None, :, :], np.array([S.total_measure]), []

    if isinstance(S, PointSet):
        normals = np.repeat(np.eye(n)[None, :, :], len(S.points), axis=0)
        return S.points.copy(), normals, np.ones(len(S.points)), []

    if isinstance(S, RoundSphere) and S.m == 1:
        points, tangent, operator = _circle_base(count, S.radius, n)
        normals = np.array([S.normal_frame(p).normals for p in points])
        weights = np.full(count, 2.0 * math.pi * S.radius / count)
        return points, normals, weights, [(operator, tangent, 0)]

    if isinstance(S, ProductOfSpheres) and S.block_dims == (1, 1):
        r1, r2 = S.radii
        p1, t1, d1 = _circle_base(count, r1, n, 0)
        p2, t2, d2 = _circle_base(count, r2, n, 2)
        points = np.repeat(p1, count, axis=0) + np.tile(p2, (count, 1))
        tangent1 = np.repeat(t1, count, axis=0)
        tangent2 = np.tile(t2, (count, 1))
        eye = sparse.identity(count, format="csr")
        directions = [
            (sparse.kron(d1, eye, format="csr"), tangent1, 0),
            (sparse.kron(eye, d2, format="csr"), tangent2, 1),
        ]
        normals = np.array([S.normal_frame(p).normals for p in points])
        cell = (2.0 * math.pi * r1 / count) * (2.0 * math.pi * r2 / count)
        weights = np.full(count * count, cell)
        return points, normals, weights, directions

    raise ResolutionError(
        "full mode supports point sets, circles and tori (product of two circles)",
        {"shape": S.kind, "m": S.m},
    )


# ============================================================
# Assembly
# ============================================================
def _fiber_counts(fiber: Union[int, Sequence[int]]) -> Tuple[int, int]:
    if isinstance(fiber, (int, np.integer)):
        return int(fiber), max(int(fiber) // 2, MIN_COUNT)
    values = [int(v) for v in fiber]
    if len(values) != 2:
        raise ResolutionError("fiber resolution must be an integer or [n_phi, n_theta]")
    return values[0], values[1]


def build_grid(
    S: Submanifold,
    resolution: Tuple[int, Union[int, Sequence[int]]],
    mode: str = "full",
) -> UNSGrid:
    """
    Deterministic structured grid on UNS.

    Args:
        S: Catalog shape
        resolution: (base count, fiber count) where the fiber count is an int
            (colatitude count in reduced_1d, azimuth count in full mode) or
            [n_phi, n_theta]
        mode: "full" or "reduced_1d"

    Raises:
        ResolutionError: counts below 8, odd azimuth count, or an
            unsupported shape / fiber dimension for the mode
    """
    if mode not in MODES:
        raise ResolutionError(f"mode must be one of {MODES}, got {mode!r}")
    base_count, fiber = resolution
    base_count = int(base_count)
    d = S.dims.fiber_dim
    if mode == "reduced_1d":
        count = fiber if isinstance(fiber, (int, np.integer)) else int(list(fiber)[-1])
        counts = (int(count),)
        if counts[0] < MIN_COUNT:
            raise ResolutionError(f"fiber count must be at least {MIN_COUNT}", {"fiber": counts[0]})
        fiber_grid = colatitude_grid(d, counts[0])
    else:
        if d > MAX_FULL_FIBER_DIM:
            raise ResolutionError(
                f"full mode supports fiber spheres of dimension <= {MAX_FULL_FIBER_DIM}",
                {"fiber_dim": d},
            )
        counts = _fiber_counts(fiber)
        if min(counts) < MIN_COUNT:
            raise ResolutionError(
                f"fiber counts must be at least {MIN_COUNT}", {"fiber": list(counts)}
            )
        fiber_grid = sphere_grid(d, counts)
    if not isinstance(S, PointSet) and mode == "full" and base_count < MIN_COUNT:
        raise ResolutionError(f"base count must be at least {MIN_COUNT}", {"base": base_count})

    base_points, normals, base_weights, base_dirs = _base_nodes(S, base_count, mode)
    B, F = len(base_points), fiber_grid.size
    # fiber coordinates are expressed in the first d+1 normals of each base frame
    frames = normals[:, : d + 1, :]
    omegas = np.einsum("fi,bin->bfn", fiber_grid.coords, frames).reshape(B * F, -1)
    points = np.repeat(base_points, F, axis=0)
    weights = np.repeat(base_weights, F) * np.tile(fiber_grid.weights, B)
    kappa = np.array([S.principal_curvatures(y, w) for y, w in zip(points, omegas)])
    kappa = kappa.reshape(B * F, S.m)

    directions = []
    eye_f = sparse.identity(F, format="csr")
    eye_b = sparse.identity(B, format="csr")
    for operator, tangent, index in base_dirs:
        directions.append(
            GridDirection(
                kind="base",
                operator=sparse.kron(operator, eye_f, format="csr"),
                vectors=np.repeat(tangent, F, axis=0),
                curvature_index=index,
            )
        )
    for operator, tangent in zip(fiber_grid.operators, fiber_grid.tangents):
        vectors = np.einsum("fi,bin->bfn", tangent, frames).reshape(B * F, -1)
        directions.append(
            GridDirection(
                kind="fiber",
                operator=sparse.kron(eye_b, operator, format="csr"),
                vectors=vectors,
            )
        )

    grid = UNSGrid(
        submanifold=S,
        mode=mode,
        base_count=B,
        fiber_shape=fiber_grid.shape,
        base_points=points,
        omegas=omegas,
        kappa=kappa,
        weights=weights,
        base_weights=base_weights,
        base_index=np.repeat(np.arange(B), F),
        fiber_index=np.tile(np.arange(F), B),
        colatitude=np.tile(fiber_grid.colatitude, B),
        directions=directions,
    )
    logger.debug("built %s grid: %d base x %d fiber nodes", mode, B, F)
    return grid
