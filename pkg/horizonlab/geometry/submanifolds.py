"""
Submanifold Catalog - point sets, round spheres and products of two spheres.

Every shape knows its nearest-point projection, adapted normal frames, reach,
tubular hypersurfaces and the Euclidean mean curvature of those tubes, and
produces quadrature rules for integrals of |x - y|^(-p) over itself.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from horizonlab.errors import (
    AmbiguityError,
    DimensionError,
    DomainError,
    ReachExceededError,
    SingularityError,
)
from horizonlab.geometry.model_constants import DimensionPair, unit_sphere_area
from horizonlab.geometry.quadrature import adaptive_panels, graded_breakpoints

logger = logging.getLogger(__name__)

MEMBERSHIP_TOL = 1e-9
DEFAULT_TOLERANCE = 1e-9


# ============================================================
# Value types
# ============================================================
@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes ``points`` on S with positive ``weights``, built for ``target_point``."""

    points: np.ndarray
    weights: np.ndarray
    target_point: Optional[np.ndarray] = None

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class NormalFrame:
    """Orthonormal frame at ``base``; ``tangents`` rows span T_xS and ``normals`` rows N_xS."""

    base: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        return np.vstack([self.tangents, self.normals])

    def gram_deviation(self) -> float:
        basis = self.basis
        return float(np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0]))))


@dataclass(frozen=True, eq=False)
class NearestPoint:
    point: np.ndarray
    distance: float
    ambiguous: bool = False


@dataclass(frozen=True, eq=False)
class TubeSurface:
    """Tub(S, a): the image of the unit normal bundle under x + a*omega."""

    base: "Submanifold"
    radius: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0:
            raise DomainError(f"tube radius must be positive, got {self.radius}")
        if self.radius >= self.base.reach:
            raise ReachExceededError(
                f"tube radius {self.radius} is not below the reach {self.base.reach}",
                {"radius": self.radius, "reach": self.base.reach},
            )

    def point(self, x, omega) -> np.ndarray:
        return self.base.tube_point(x, omega, self.radius)

    def mean_curvature(self, x, omega) -> float:
        return self.base.euclid_tube_mean_curvature(self, x, omega)


# ============================================================
# Helpers
# ============================================================
def householder_basis(unit: np.ndarray) -> np.ndarray:
    """
    Orthogonal matrix whose first column is ``unit``.

    The reflection fixes the remaining columns deterministically, so frames at
    nearby points vary continuously except across the antipode of e_0.
    """
    k = unit.shape[0]
    v = -np.asarray(unit, dtype=float).copy()
    v[0] += 1.0
    norm2 = float(v @ v)
    if norm2 < 1e-30:
        return np.eye(k)
    return np.eye(k) - 2.0 * np.outer(v, v) / norm2


def _as_vector(x, n: int, name: str = "x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DomainError(f"{name} must be a vector of length {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    return x


def _orthogonal_unit(unit: np.ndarray) -> np.ndarray:
    """A deterministic unit vector orthogonal to ``unit`` (same ambient space)."""
    j = int(np.argmin(np.abs(unit)))
    xi = -unit[j] * unit
    xi[j] += 1.0
    return xi / np.linalg.norm(xi)


def _colatitude_rule(
    rho: float,
    radius: float,
    k: int,
    offset2: float,
    exponent: float,
    tolerance: float,
    resolve_gradient: bool,
):
    """
    Adaptive rule in the colatitude alpha for integrals over S^k(radius).

    The integrand depends on y only through alpha, measured from the direction
    of the projected target; |x - y|^2 = rho^2 + radius^2 - 2 radius rho cos(alpha) + offset2.

    Returns:
        (alpha nodes, weights including |S^{k-1}| radius^k sin^{k-1}(alpha))
    """
    dmin2 = (rho - radius) ** 2 + offset2
    if dmin2 <= 0.0:
        raise SingularityError("evaluation point lies on the submanifold", {"distance": 0.0})
    dmin = math.sqrt(dmin2)
    scale = 2.0 * radius * rho

    def integrand(alpha):
        d2 = rho * rho + radius * radius - scale * np.cos(alpha) + offset2
        jac = np.sin(alpha) ** (k - 1) if k > 1 else np.ones_like(alpha)
        rows = [jac * d2 ** (-0.5 * exponent)]
        if resolve_gradient:
            rows.append(jac * d2 ** (-0.5 * (exponent + 1)))
        return np.vstack(rows)

    if rho > 0.0:
        width = min(math.pi / 2.0, 0.5 * dmin / math.sqrt(radius * rho))
        breakpoints = graded_breakpoints(0.0, math.pi, width, ratio=1.5)
    else:
        breakpoints = np.array([0.0, math.pi / 2.0, math.pi])
    rule = adaptive_panels(integrand, breakpoints, rtol=tolerance)
    jac = np.sin(rule.nodes) ** (k - 1) if k > 1 else np.ones_like(rule.nodes)
    weights = unit_sphere_area(k - 1) * radius**k * jac * rule.weights
    return rule.nodes, weights


def _mirrored_sphere_points(alpha, radius, axis, xi):
    """Points radius*(cos a * axis +/- sin a * xi), interleaved (+, -)."""
    cos_part = radius * np.cos(alpha)[:, None] * axis[None, :]
    sin_part = radius * np.sin(alpha)[:, None] * xi[None, :]
    return np.stack([cos_part + sin_part, cos_part - sin_part], axis=1).reshape(-1, axis.shape[0])


# ============================================================
# Base class
# ============================================================
class Submanifold:
    """
    Compact embedded submanifold S of R^n with codimension at least three.

    Subclasses implement the shape-specific closed forms; the generic
    operations (tube points, tube curvature, the finite-difference oracle)
    are built on top of them here.
    """

    kind = "submanifold"

    def __init__(self, dims: DimensionPair):
        self.dims = dims

    # --- shape-specific ---------------------------------------------------
    @property
    def reach(self) -> float:
        raise NotImplementedError

    @property
    def total_measure(self) -> float:
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def extent(self) -> float:
        """max |y| over S."""
        raise NotImplementedError

    def nearest_point(self, x, strict: bool = False) -> NearestPoint:
        raise NotImplementedError

    def normal_frame(self, x) -> NormalFrame:
        raise NotImplementedError

    def principal_curvatures(self, x, omega) -> np.ndarray:
        """Eigenvalues of the shape operator A_omega, ordered like ``normal_frame(x).tangents``."""
        raise NotImplementedError

    def sample_quadrature(
        self,
        x,
        tolerance: float = DEFAULT_TOLERANCE,
        exponent: Optional[float] = None,
        resolve_gradient: bool = True,
    ) -> QuadratureRule:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    # --- generic ----------------------------------------------------------
    @property
    def n(self) -> int:
        return self.dims.n

    @property
    def m(self) -> int:
        return self.dims.m

    def components(self) -> List["Submanifold"]:
        return [self]

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.nearest_point(x).distance <= tol * max(1.0, self.extent)

    def distance(self, x) -> float:
        return self.nearest_point(x).distance

    def _check_on_surface(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        if not self.contains(x):
            raise DomainError(
                "point does not lie on the submanifold", {"distance": self.distance(x)}
            )
        return x

    def check_unit_normal(self, x, omega) -> Tuple[NormalFrame, np.ndarray]:
        frame = self.normal_frame(x)
        omega = _as_vector(omega, self.n, "omega")
        if abs(np.linalg.norm(omega) - 1.0) > 1e-9:
            raise DomainError("omega must be a unit vector", {"norm": float(np.linalg.norm(omega))})
        if frame.tangents.size and np.max(np.abs(frame.tangents @ omega)) > 1e-9:
            raise DomainError("omega must be normal to S at x")
        return frame, omega

    def tube_point(self, x, omega, a: float) -> np.ndarray:
        """Euclidean normal exponential x + a*omega."""
        self.check_radius(a)
        frame, omega = self.check_unit_normal(x, omega)
        return frame.base + a * omega

    def check_radius(self, a: float):
        if not np.isfinite(a) or a <= 0:
            raise DomainError(f"tube radius must be positive, got {a}")
        if a >= self.reach:
            raise ReachExceededError(
                f"tube radius {a} is not below the reach {self.reach}",
                {"radius": a, "reach": self.reach},
            )

    def euclid_tube_mean_curvature(self, tube, x, omega) -> float:
        """
        Mean curvature of Tub(S, a) at x + a*omega, outward normal omega.

        Fiber directions contribute 1/a each; a tangent principal direction
        with shape-operator eigenvalue kappa contributes -kappa / (1 - a*kappa).
        """
        a = tube.radius if isinstance(tube, TubeSurface) else float(tube)
        self.check_radius(a)
        _, omega = self.check_unit_normal(x, omega)
        kappa = self.principal_curvatures(x, omega)
        return float(self.dims.fiber_dim / a + np.sum(-kappa / (1.0 - a * kappa)))

    def tube_mean_curvature_oracle(self, x, omega, a: float, step: float = 1e-4) -> float:
        """
        Finite-difference value of the tube mean curvature.

        Builds a chart (tangent offsets projected back onto S, normal offsets
        projected into the moving normal space), forms the area element
        J(a) = sqrt(det(DX^T DX)) with DX = DY + a*DOmega, and differentiates
        log J in a with step ``step*a``, Richardson-extrapolated once.
        """
        self.check_radius(a)
        frame, omega = self.check_unit_normal(x, omega)
        n, m = self.n, self.m
        normal_coords = frame.normals @ omega
        fiber_basis = householder_basis(normal_coords)[:, 1:].T @ frame.normals
        delta = 1e-5 * min(1.0, self.reach if np.isfinite(self.reach) else 1.0)

        def chart(params):
            s, phi = params[:m], params[m:]
            if m:
                y = self.nearest_point(frame.base + s @ frame.tangents).point
                tangents = self.normal_frame(y).tangents
            else:
                y, tangents = frame.base, np.zeros((0, n))
            w = omega + phi @ fiber_basis
            w = w - tangents.T @ (tangents @ w)
            return y, w / np.linalg.norm(w)

        dim = n - 1
        dy = np.zeros((n, dim))
        dw = np.zeros((n, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = delta
            y_plus, w_plus = chart(e)
            y_minus, w_minus = chart(-e)
            dy[:, j] = (y_plus - y_minus) / (2 * delta)
            dw[:, j] = (w_plus - w_minus) / (2 * delta)

        def log_area(radius):
            jac = dy + radius * dw
            return 0.5 * np.linalg.slogdet(jac.T @ jac)[1]

        def central(h):
            return (log_area(a + h) - log_area(a - h)) / (2 * h)

        h = step * a
        return float((4.0 * central(h / 2) - central(h)) / 3.0)

    def tube_expansion_constant(self, x, omega, radii: Optional[Sequence[float]] = None) -> dict:
        """
        Fitted O(1) constant of the expansion H = (n - m - 1)/a + O(1).

        Returns:
            Dict with the radii, the deviations |H - (n-m-1)/a| and their sup K
        """
        if radii is None:
            top = 0.5 * (self.reach if np.isfinite(self.reach) else 1.0)
            radii = np.geomspace(top * 1e-4, top, 25)
        radii = np.asarray(radii, dtype=float)
        deviations = np.array(
            [
                abs(self.euclid_tube_mean_curvature(a, x, omega) - self.dims.fiber_dim / a)
                for a in radii
            ]
        )
        return {"radii": radii, "deviations": deviations, "K": float(np.max(deviations))}


# ============================================================
# PointSet
# ============================================================
class PointSet(Submanifold):
    """Finite set of distinct points (m = 0) with counting measure."""

    kind = "points"

    def __init__(self, points, n: Optional[int] = None):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.size == 0:
            raise DomainError("a point set needs at least one point")
        n = points.shape[1] if n is None else n
        super().__init__(DimensionPair(int(n), 0))
        if points.shape[1] != n:
            raise DimensionError(
                f"points must have {n} coordinates, got {points.shape[1]}", {"n": n}
            )
        if not np.all(np.isfinite(points)):
            raise DomainError("point coordinates must be finite")
        self.points = points
        if len(points) > 1:
            gaps = self._pairwise()
            if np.min(gaps[np.triu_indices(len(points), 1)]) <= 0.0:
                raise DomainError("points must be pairwise distinct")

    def _pairwise(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.linalg.norm(diff, axis=-1)

    @property
    def reach(self) -> float:
        if len(self.points) == 1:
            return math.inf
        gaps = self._pairwise()[np.triu_indices(len(self.points), 1)]
        return 0.5 * float(np.min(gaps))

    @property
    def total_measure(self) -> float:
        return float(len(self.points))

    @property
    def diameter(self) -> float:
        return float(np.max(self._pairwise())) if len(self.points) > 1 else 0.0

    @property
    def extent(self) -> float:
        return float(np.max(np.linalg.norm(self.points, axis=1)))

    def components(self) -> List["Submanifold"]:
        if len(self.points) == 1:
            return [self]
        return [PointSet(p[None, :]) for p in self.points]

    def nearest_point(self, x, strict: bool = False) -> NearestPoint:
        x = _as_vector(x, self.n)
        dist = np.linalg.norm(self.points - x, axis=1)
        best = float(np.min(dist))
        tied = np.flatnonzero(dist <= best * (1.0 + 1e-12))
        ambiguous = len(tied) > 1
        if ambiguous:
            if strict:
                raise AmbiguityError("nearest point is not unique", {"candidates": int(len(tied))})
            candidates = self.points[tied]
            order = np.lexsort(candidates.T[::-1])
            index = tied[order[0]]
        else:
            index = tied[0]
        return NearestPoint(self.points[index].copy(), best, ambiguous)

    def normal_frame(self, x) -> NormalFrame:
        x = self._check_on_surface(x)
        base = self.nearest_point(x).point
        return NormalFrame(base, np.zeros((0, self.n)), np.eye(self.n))

    def principal_curvatures(self, x, omega) -> np.ndarray:
        return np.zeros(0)

    def sample_quadrature(
        self, x, tolerance=DEFAULT_TOLERANCE, exponent=None, resolve_gradient=True
    ):
        x = _as_vector(x, self.n)
        if np.min(np.linalg.norm(self.points - x, axis=1)) == 0.0:
            raise SingularityError("evaluation point lies on the submanifold", {"distance": 0.0})
        return QuadratureRule(self.points, np.ones(len(self.points)), x)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "m": self.m, "points": self.points.tolist()}


# ============================================================
# RoundSphere
# ============================================================
class RoundSphere(Submanifold):
    """Sphere S^m of radius R in the plane of the first m + 1 coordinates."""

    kind = "sphere"

    def __init__(self, n: int, m: int, radius: float = 1.0):
        super().__init__(DimensionPair(n, m))
        if m < 1:
            raise DimensionError("a round sphere needs m >= 1; use a point set for m = 0", {"m": m})
        if not np.isfinite(radius) or radius <= 0:
            raise DomainError(f"sphere radius must be positive, got {radius}")
        self.radius = float(radius)

    @property
    def plane_dim(self) -> int:
        return self.m + 1

    @property
    def reach(self) -> float:
        return self.radius

    @property
    def total_measure(self) -> float:
        return unit_sphere_area(self.m) * self.radius**self.m

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def extent(self) -> float:
        return self.radius

    def _split(self, x):
        k = self.plane_dim
        return x[:k], x[k:]

    def _embed(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        out[: v.shape[0]] = v
        return out

    def nearest_point(self, x, strict: bool = False) -> NearestPoint:
        x = _as_vector(x, self.n)
        p, q = self._split(x)
        rho = float(np.linalg.norm(p))
        q_norm = float(np.linalg.norm(q))
        if rho <= 1e-14 * max(1.0, float(np.linalg.norm(x))):
            if strict:
                raise AmbiguityError(
                    "point lies on the medial axis of the sphere", {"x": x.tolist()}
                )
            axis = np.zeros(self.plane_dim)
            axis[0] = 1.0
            foot = self._embed(self.radius * axis)
            return NearestPoint(foot, math.hypot(self.radius, q_norm), True)
        point = self._embed(self.radius * p / rho)
        return NearestPoint(point, math.hypot(rho - self.radius, q_norm), False)

    def normal_frame(self, x) -> NormalFrame:
        x = self._check_on_surface(x)
        base = self.nearest_point(x).point
        radial = base[: self.plane_dim] / self.radius
        reflector = householder_basis(radial)
        tangents = np.array([self._embed(reflector[:, j]) for j in range(1, self.plane_dim)])
        normals = [self._embed(radial)]
        for j in range(self.plane_dim, self.n):
            e = np.zeros(self.n)
            e[j] = 1.0
            normals.append(e)
        return NormalFrame(base, tangents, np.array(normals))

    def principal_curvatures(self, x, omega) -> np.ndarray:
        base = self.nearest_point(_as_vector(x, self.n)).point
        kappa = -float(np.dot(omega, base)) / self.radius**2
        return np.full(self.m, kappa)

    def sample_quadrature(
        self, x, tolerance=DEFAULT_TOLERANCE, exponent=None, resolve_gradient=True
    ):
        """
        Colatitude rule for integrals of |x - y|^(-exponent) over the sphere.

        Each colatitude node becomes a mirrored pair of points, which keeps the
        rule exact for the gradient kernel (x - y)|x - y|^(-n) as well.
        """
        x = _as_vector(x, self.n)
        exponent = self.n - 2 if exponent is None else exponent
        p, q = self._split(x)
        rho = float(np.linalg.norm(p))
        axis = p / rho if rho > 0.0 else np.eye(self.plane_dim)[0]
        xi = _orthogonal_unit(axis)
        alpha, weights = _colatitude_rule(
            rho, self.radius, self.m, float(q @ q), exponent, tolerance, resolve_gradient
        )
        plane_points = _mirrored_sphere_points(alpha, self.radius, axis, xi)
        points = np.zeros((len(plane_points), self.n))
        points[:, : self.plane_dim] = plane_points
        return QuadratureRule(points, np.repeat(0.5 * weights, 2), x)

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "m": self.m, "radius": self.radius}


# ============================================================
# ProductOfSpheres
# ============================================================
class ProductOfSpheres(Submanifold):
    """
    S^{k1}(r1) x S^{k2}(r2) inside R^{k1+1} x R^{k2+1} x R^{n-k1-k2-2}.

    The tangent frame lists the k1 directions of the first factor, then the
    k2 directions of the second; normals are the two radial directions
    followed by the remaining coordinate axes.
    """

    kind = "product"

    def __init__(self, n: int, radii: Sequence[float], block_dims: Sequence[int]):
        if len(radii) != 2 or len(block_dims) != 2:
            raise DomainError("a product of spheres takes two radii and two block dimensions")
        k1, k2 = (int(k) for k in block_dims)
        if k1 < 1 or k2 < 1:
            raise DimensionError("product factors must have dimension >= 1", {"dims": [k1, k2]})
        super().__init__(DimensionPair(n, k1 + k2))
        for r in radii:
            if not np.isfinite(r) or r <= 0:
                raise DomainError(f"sphere radii must be positive, got {list(radii)}")
        self.radii = (float(radii[0]), float(radii[1]))
        self.block_dims = (k1, k2)
        self._slices = (slice(0, k1 + 1), slice(k1 + 1, k1 + k2 + 2))

    @property
    def reach(self) -> float:
        return min(self.radii)

    @property
    def total_measure(self) -> float:
        return float(
            np.prod([unit_sphere_area(k) * r**k for k, r in zip(self.block_dims, self.radii)])
        )

    @property
    def extent(self) -> float:
        return math.hypot(*self.radii)

    @property
    def diameter(self) -> float:
        return 2.0 * self.extent

    def nearest_point(self, x, strict: bool = False) -> NearestPoint:
        x = _as_vector(x, self.n)
        point = np.zeros(self.n)
        ambiguous = False
        dist2 = float(x[self._slices[1].stop :] @ x[self._slices[1].stop :])
        for block, radius in zip(self._slices, self.radii):
            p = x[block]
            rho = float(np.linalg.norm(p))
            if rho <= 1e-14 * max(1.0, float(np.linalg.norm(x))):
                if strict:
                    raise AmbiguityError("point lies on the medial axis of a factor sphere")
                ambiguous = True
                axis = np.zeros(p.shape[0])
                axis[0] = 1.0
                point[block] = radius * axis
                dist2 += radius**2
            else:
                point[block] = radius * p / rho
                dist2 += (rho - radius) ** 2
        return NearestPoint(point, math.sqrt(dist2), ambiguous)

    def normal_frame(self, x) -> NormalFrame:
        x = self._check_on_surface(x)
        base = self.nearest_point(x).point
        tangents, normals = [], []
        for block, radius in zip(self._slices, self.radii):
            radial = base[block] / radius
            reflector = householder_basis(radial)
            for j in range(1, reflector.shape[0]):
                t = np.zeros(self.n)
                t[block] = reflector[:, j]
                tangents.append(t)
            nu = np.zeros(self.n)
            nu[block] = radial
            normals.append(nu)
        for j in range(self._slices[1].stop, self.n):
            e = np.zeros(self.n)
            e[j] = 1.0
            normals.append(e)
        return NormalFrame(base, np.array(tangents), np.array(normals))

    def principal_curvatures(self, x, omega) -> np.ndarray:
        base = self.nearest_point(_as_vector(x, self.n)).point
        values = []
        for block, radius, k in zip(self._slices, self.radii, self.block_dims):
            kappa = -float(np.dot(omega[block], base[block])) / radius**2
            values.extend([kappa] * k)
        return np.asarray(values)

    def sample_quadrature(
        self, x, tolerance=DEFAULT_TOLERANCE, exponent=None, resolve_gradient=True
    ):
        """
        Tensor product of two colatitude rules.

        Each factor rule is adapted with the other factor frozen at its nearest
        configuration, where the integrand is most concentrated.
        """
        x = _as_vector(x, self.n)
        exponent = self.n - 2 if exponent is None else exponent
        rest = x[self._slices[1].stop :]
        rest2 = float(rest @ rest)
        rhos = [float(np.linalg.norm(x[b])) for b in self._slices]
        factors = []
        for i, (block, radius, k) in enumerate(zip(self._slices, self.radii, self.block_dims)):
            other = 1 - i
            offset2 = rest2 + (rhos[other] - self.radii[other]) ** 2
            p = x[block]
            axis = p / rhos[i] if rhos[i] > 0 else np.eye(p.shape[0])[0]
            alpha, weights = _colatitude_rule(
                rhos[i], radius, k, offset2, exponent, tolerance, resolve_gradient
            )
            pts = _mirrored_sphere_points(alpha, radius, axis, _orthogonal_unit(axis))
            factors.append((pts, np.repeat(0.5 * weights, 2)))
        (p1, w1), (p2, w2) = factors
        points = np.zeros((len(w1) * len(w2), self.n))
        points[:, self._slices[0]] = np.repeat(p1, len(w2), axis=0)
        points[:, self._slices[1]] = np.tile(p2, (len(w1), 1))
        weights = np.outer(w1, w2).ravel()
        return QuadratureRule(points, weights, x)

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "m": self.m,
            "radii": list(self.radii),
            "dims": list(self.block_dims),
        }


def sample_sphere_directions(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic unit vectors: the 2n coordinate directions, then seeded Gaussian draws."""
    axes = np.vstack([np.eye(n), -np.eye(n)])
    if count <= len(axes):
        return axes[:count]
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((count - len(axes), n))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([axes, extra])


