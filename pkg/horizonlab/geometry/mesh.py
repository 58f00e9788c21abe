"""
Triangle meshes of tubes and solved horizons, for export as OBJ.

Meshes live in three coordinates. Hypersurfaces of R^n with n > 3 are
represented by a 2-parameter slice projected onto (x_0, x_1, x_{n-1}).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from horizonlab.errors import DomainError, ResolutionError
from horizonlab.geometry.horizon import HorizonGraph, expand_reduced
from horizonlab.geometry.submanifolds import (
    PointSet,
    ProductOfSpheres,
    RoundSphere,
    Submanifold,
)

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 4


@dataclass(frozen=True, eq=False)
class Mesh:
    """Vertices (V, 3) and 0-based triangle indices (F, 3)."""

    vertices: np.ndarray
    faces: np.ndarray

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def describe(self) -> dict:
        return {"vertices": self.vertex_count, "faces": self.face_count}


def projection_axes(n: int) -> Tuple[int, int, int]:
    return (0, 1, n - 1)


def merge_meshes(parts: List[Mesh]) -> Mesh:
    """Concatenate meshes, shifting face indices."""
    vertices, faces, offset = [], [], 0
    for part in parts:
        vertices.append(part.vertices)
        faces.append(part.faces + offset)
        offset += part.vertex_count
    return Mesh(np.vstack(vertices), np.vstack(faces))


def _periodic_faces(rows: int, cols: int, wrap_rows: bool) -> np.ndarray:
    """Two triangles per cell of a rows x cols vertex lattice; columns always wrap."""
    faces = []
    last = rows if wrap_rows else rows - 1
    for i in range(last):
        i1 = (i + 1) % rows
        for j in range(cols):
            j1 = (j + 1) % cols
            a, b = i * cols + j, i * cols + j1
            c, d = i1 * cols + j1, i1 * cols + j
            faces.append((a, b, c))
            faces.append((a, c, d))
    return np.asarray(faces, dtype=int)


def _capped_sphere(rings: np.ndarray, north: np.ndarray, south: np.ndarray) -> Mesh:
    """Close a (n_theta, n_phi, 3) lattice of latitude rings with two pole fans."""
    n_theta, n_phi, _ = rings.shape
    body = _periodic_faces(n_theta, n_phi, wrap_rows=False)
    top, bottom = n_theta * n_phi, n_theta * n_phi + 1
    caps = []
    last = (n_theta - 1) * n_phi
    for j in range(n_phi):
        j1 = (j + 1) % n_phi
        caps.append((top, j1, j))
        caps.append((bottom, last + j, last + j1))
    vertices = np.vstack([rings.reshape(-1, 3), north[None, :], south[None, :]])
    return Mesh(vertices, np.vstack([body, np.asarray(caps, dtype=int)]))


def _lat_long_sphere(centre: np.ndarray, radius: float, resolution: int) -> Mesh:
    theta = (np.arange(resolution) + 0.5) * math.pi / resolution
    phi = 2.0 * math.pi * np.arange(2 * resolution) / (2 * resolution)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    rings = np.stack([np.cos(t), np.sin(t) * np.cos(p), np.sin(t) * np.sin(p)], axis=-1)
    rings = centre + radius * rings
    axis = np.array([radius, 0.0, 0.0])
    return _capped_sphere(rings, centre + axis, centre - axis)


def _base_circle(S: Submanifold, count: int) -> np.ndarray:
    """A closed great circle of S, sampled at ``count`` points."""
    t = 2.0 * math.pi * np.arange(count) / count
    points = np.zeros((count, S.n))
    if isinstance(S, RoundSphere):
        points[:, 0] = S.radius * np.cos(t)
        points[:, 1] = S.radius * np.sin(t)
        return points
    if isinstance(S, ProductOfSpheres):
        r1, r2 = S.radii
        k1 = S.block_dims[0]
        points[:, 0] = r1 * np.cos(t)
        points[:, 1] = r1 * np.sin(t)
        points[:, k1 + 1] = r2
        return points
    raise DomainError("no base circle for this shape", {"shape": S.kind})


def tube_mesh(S: Submanifold, a: float, resolution: int = 32) -> Mesh:
    """
    Mesh of Tub(S, a), or of its 2-parameter slice when that is all that fits
    in three coordinates.

    Point sets give one lat-long sphere per point. Other shapes give the torus
    swept by the fiber circle spanned by the first and last normal vectors
    along a great circle of S.
    """
    if resolution < MIN_RESOLUTION:
        raise ResolutionError(f"mesh resolution must be at least {MIN_RESOLUTION}")
    S.check_radius(a)
    axes = list(projection_axes(S.n))
    if isinstance(S, PointSet):
        parts = [_lat_long_sphere(p[axes], a, resolution) for p in S.points]
        mesh = merge_meshes(parts)
    else:
        base = _base_circle(S, 2 * resolution)
        s = 2.0 * math.pi * np.arange(resolution) / resolution
        rows = []
        for y in base:
            normals = S.normal_frame(y).normals
            omega = np.outer(np.cos(s), normals[0]) + np.outer(np.sin(s), normals[-1])
            rows.append(y + a * omega)
        lattice = np.asarray(rows)[:, :, axes]
        faces = _periodic_faces(len(base), resolution, wrap_rows=True)
        mesh = Mesh(lattice.reshape(-1, 3), faces)
    logger.debug("tube mesh a=%g: %d vertices, %d faces", a, mesh.vertex_count, mesh.face_count)
    return mesh


def horizon_mesh(h: HorizonGraph) -> Mesh:
    """
    Closed surface of a solved horizon around point sources in R^3, one
    sphere-like component per base node.
    """
    S = h.grid.submanifold
    if not isinstance(S, PointSet) or S.n != 3:
        raise DomainError(
            "horizon meshes are exported for point sources in R^3",
            {"shape": S.kind, "n": S.n},
        )
    h = expand_reduced(h, fiber=(32, 16))
    grid = h.grid
    if len(grid.fiber_shape) != 2:
        raise ResolutionError("horizon mesh needs a full-mode fiber grid")
    n_theta, n_phi = grid.fiber_shape
    points = h.points()
    parts = []
    for b in range(grid.base_count):
        block = slice(b * grid.fiber_size, (b + 1) * grid.fiber_size)
        rings = points[block].reshape(n_theta, n_phi, 3)
        psi = h.psi[block].reshape(n_theta, n_phi)
        y = grid.base_points[block][0]
        pole = np.array([1.0, 0.0, 0.0])
        north = y + float(np.mean(psi[0])) * pole
        south = y - float(np.mean(psi[-1])) * pole
        parts.append(_capped_sphere(rings, north, south))
    return merge_meshes(parts)
