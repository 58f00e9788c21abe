"""
Conformal Field - the factor u_eps and the scalar-flat metric g_eps = u^(4/(n-2)) delta.

u_eps(x) = 1 + eps^(n-m-2) * integral over S of |x - y|^(-(n-2)) dy

is harmonic off S, tends to 1 at infinity and blows up on S. Derivatives are
taken under the integral sign, never by differencing quadrature output.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from horizonlab.errors import DomainError, SingularityError
from horizonlab.geometry.submanifolds import (
    DEFAULT_TOLERANCE,
    PointSet,
    Submanifold,
    sample_sphere_directions,
)

logger = logging.getLogger(__name__)

TIGHTEN_FACTOR = 1e-3
TOLERANCE_FLOOR = 1e-13


@dataclass(frozen=True)
class AsymptoticExpansion:
    """Fit of u - 1 = A |x|^(-p) on large spheres."""

    coefficient: float
    exponent: float
    residual: float
    expected_coefficient: float
    expected_exponent: float

    @property
    def relative_error(self) -> float:
        return abs(self.coefficient - self.expected_coefficient) / self.expected_coefficient

    @property
    def exponent_ok(self) -> bool:
        return abs(self.exponent - self.expected_exponent) <= 0.05

    def as_dict(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "fit_residual": self.residual,
            "expected_coefficient": self.expected_coefficient,
            "expected_exponent": self.expected_exponent,
            "relative_error": self.relative_error,
            "exponent_ok": self.exponent_ok,
        }


def transform_mean_curvature(n: int, u: float, du_dnu: float, H_euclid: float) -> float:
    """
    Mean curvature in u^(4/(n-2)) delta from the Euclidean one.

    H_g = u^(-2/(n-2)) * (H_delta + 2 (n-1)/(n-2) * d_nu u / u)
    """
    return u ** (-2.0 / (n - 2)) * (H_euclid + 2.0 * ((n - 1) / (n - 2)) * du_dnu / u)


class ConformalField:
    """
    Evaluator of u_eps for a (submanifold, eps) pair.

    Args:
        submanifold: The concentration set S
        epsilon: Concentration parameter, > 0
        tolerance: Relative quadrature tolerance; tightened automatically
            inside the tube region dist(x, S) < reach/2
    """

    def __init__(
        self, submanifold: Submanifold, epsilon: float, tolerance: float = DEFAULT_TOLERANCE
    ):
        if not np.isfinite(epsilon) or epsilon <= 0:
            raise DomainError(f"epsilon must be positive, got {epsilon}", {"epsilon": epsilon})
        if not np.isfinite(tolerance) or tolerance <= 0:
            raise DomainError(f"tolerance must be positive, got {tolerance}")
        self.submanifold = submanifold
        self.epsilon = float(epsilon)
        self.tolerance = float(tolerance)
        self.prefactor = self.epsilon**self.dims.gamma

    @property
    def dims(self):
        return self.submanifold.dims

    @property
    def n(self) -> int:
        return self.dims.n

    def with_epsilon(self, epsilon: float) -> "ConformalField":
        return ConformalField(self.submanifold, epsilon, self.tolerance)

    # --- evaluation -------------------------------------------------------
    def effective_tolerance(self, x) -> float:
        S = self.submanifold
        if isinstance(S, PointSet):
            return self.tolerance
        if S.distance(x) < 0.5 * S.reach:
            return max(TIGHTEN_FACTOR * self.tolerance, TOLERANCE_FLOOR)
        return self.tolerance

    def _kernel_sums(self, x, with_gradient: bool):
        x = np.asarray(x, dtype=float)
        rule = self.submanifold.sample_quadrature(
            x, self.effective_tolerance(x), resolve_gradient=with_gradient
        )
        diff = x[None, :] - rule.points
        r = np.linalg.norm(diff, axis=1)
        if np.any(r == 0.0):
            raise SingularityError("evaluation point lies on the submanifold", {"x": x.tolist()})
        n = self.n
        value = float(np.sum(rule.weights * r ** (2 - n)))
        if not with_gradient:
            return value, None
        grad = -(n - 2) * np.sum((rule.weights * r ** (-n))[:, None] * diff, axis=0)
        return value, grad

    def evaluate_u(self, x) -> float:
        value, _ = self._kernel_sums(x, with_gradient=False)
        return 1.0 + self.prefactor * value

    def evaluate_grad_u(self, x) -> np.ndarray:
        """grad u = -(n-2) eps^(n-m-2) sum_i w_i (x - y_i) |x - y_i|^(-n)."""
        _, grad = self._kernel_sums(x, with_gradient=True)
        return self.prefactor * grad

    def evaluate(self, x) -> Tuple[float, np.ndarray]:
        """u and grad u from a single quadrature rule."""
        value, grad = self._kernel_sums(x, with_gradient=True)
        return 1.0 + self.prefactor * value, self.prefactor * grad

    def evaluate_many(self, points) -> Tuple[np.ndarray, np.ndarray]:
        """
        Batch evaluation.

        Returns:
            (u of shape (N,), grad u of shape (N, n))
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        S = self.submanifold
        n = self.n
        if isinstance(S, PointSet):
            diff = points[:, None, :] - S.points[None, :, :]
            r = np.linalg.norm(diff, axis=-1)
            if np.any(r == 0.0):
                raise SingularityError("evaluation point lies on the submanifold")
            u = 1.0 + self.prefactor * np.sum(r ** (2 - n), axis=1)
            grad = -(n - 2) * self.prefactor * np.sum(r[:, :, None] ** (-n) * diff, axis=1)
            return u, grad
        u = np.empty(len(points))
        grad = np.empty((len(points), n))
        for i, x in enumerate(points):
            u[i], grad[i] = self.evaluate(x)
        return u, grad

    # --- geometry ---------------------------------------------------------
    def conformal_mean_curvature(self, x, H_euclid: float, nu) -> float:
        """Mean curvature in g_eps of a hypersurface through x with Euclidean unit normal nu."""
        nu = np.asarray(nu, dtype=float)
        if abs(np.linalg.norm(nu) - 1.0) > 1e-9:
            raise DomainError(
                "normal must be a Euclidean unit vector", {"norm": float(np.linalg.norm(nu))}
            )
        u, grad = self.evaluate(x)
        return transform_mean_curvature(self.n, u, float(grad @ nu), H_euclid)

    def harmonicity_residual(
        self,
        x,
        step: Optional[float] = None,
        function: Optional[Callable[[np.ndarray], float]] = None,
    ) -> float:
        """
        Normalized central-difference Laplacian at x.

        The sum of the n second differences is divided by the largest of them;
        values near zero certify that u is harmonic, i.e. g_eps is scalar-flat.

        Args:
            x: Evaluation point off S
            step: Difference step; defaults to 1e-3 * dist(x, S)
            function: Scalar function to test instead of u
        """
        x = np.asarray(x, dtype=float)
        dist = self.submanifold.distance(x)
        step = 1e-3 * dist if step is None else float(step)
        if step <= 0 or step * math.sqrt(self.n) >= dist:
            raise DomainError(
                "difference stencil reaches the submanifold", {"step": step, "distance": dist}
            )
        if function is None:
            # one rule for the whole stencil, so rule noise cancels in the differences
            tolerance = max(TIGHTEN_FACTOR * self.effective_tolerance(x), TOLERANCE_FLOOR)
            rule = self.submanifold.sample_quadrature(x, tolerance, resolve_gradient=False)

            def f(point):
                r = np.linalg.norm(point[None, :] - rule.points, axis=1)
                return 1.0 + self.prefactor * float(np.sum(rule.weights * r ** (2 - self.n)))

        else:
            f = function
        centre = f(x)
        seconds = []
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = step
            seconds.append((f(x + e) - 2.0 * centre + f(x - e)) / step**2)
        seconds = np.asarray(seconds)
        scale = float(np.max(np.abs(seconds)))
        if scale == 0.0:
            return 0.0
        return abs(float(np.sum(seconds))) / scale

    def fit_asymptotic_coefficient(
        self, radii: Optional[Sequence[float]] = None, directions: Optional[np.ndarray] = None
    ) -> AsymptoticExpansion:
        """
        Least-squares fit of log(u - 1) against log|x| on large spheres.

        u - 1 is averaged over the 2n directions +/- e_i, which cancels the
        dipole term of the expansion.
        """
        S = self.submanifold
        size = max(S.diameter, S.extent)
        if radii is None:
            base = 10.0 * size if size > 0 else 1.0
            radii = np.geomspace(2.0 * base, 200.0 * base, 8)
        radii = np.asarray(radii, dtype=float)
        if len(radii) < 2 or np.any(~np.isfinite(radii)) or np.any(radii <= 0):
            raise DomainError("need at least two positive radii")
        if np.min(radii) < 10.0 * size:
            raise DomainError(
                "radii must be at least 10 times the size of S",
                {"min_radius": float(np.min(radii)), "size": size},
            )
        if directions is None:
            directions = sample_sphere_directions(self.n, 2 * self.n)
        excess = []
        for r in radii:
            values = [self.evaluate_u(r * d) - 1.0 for d in directions]
            excess.append(np.mean(values))
        log_r = np.log(radii)
        log_e = np.log(np.asarray(excess))
        slope, intercept = np.polyfit(log_r, log_e, 1)
        fitted = slope * log_r + intercept
        residual = float(np.sqrt(np.mean((log_e - fitted) ** 2)))
        expansion = AsymptoticExpansion(
            coefficient=float(np.exp(intercept)),
            exponent=float(-slope),
            residual=residual,
            expected_coefficient=self.prefactor * S.total_measure,
            expected_exponent=float(self.n - 2),
        )
        logger.info(
            "asymptotic fit: A=%.6g (expected %.6g), p=%.4f",
            expansion.coefficient,
            expansion.expected_coefficient,
            expansion.exponent,
        )
        return expansion
