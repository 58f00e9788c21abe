"""
Model Constants - closed forms for the flat cylinder model.

The blow-up limit of the conformal factor near a point of S is the factor of
the flat model in which S is replaced by its tangent plane R^m. On that model
every cylinder of radius a around R^m has constant mean curvature, and the sign
change of that curvature happens at the critical radius a_hat.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from horizonlab.errors import DimensionError, DivergentIntegralError, DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DimensionPair:
    """
    Ambient dimension ``n`` and submanifold dimension ``m``.

    Requires n >= 3, m >= 0 and codimension n - m >= 3.
    """

    n: int
    m: int

    def __post_init__(self):
        for name in ("n", "m"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise DimensionError(f"{name} must be an integer, got {value!r}", {name: value})
        if self.n < 3:
            raise DimensionError(f"n must be at least 3, got {self.n}", {"n": self.n})
        if self.m < 0:
            raise DimensionError(f"m must be non-negative, got {self.m}", {"m": self.m})
        if self.n - self.m < 3:
            raise DimensionError(
                f"codimension n - m must be at least 3, got {self.n - self.m}",
                {"n": self.n, "m": self.m},
            )

    @property
    def gamma(self) -> int:
        """Decay exponent n - m - 2 of the tube correction term."""
        return self.n - self.m - 2

    @property
    def fiber_dim(self) -> int:
        """Dimension n - m - 1 of the unit normal sphere."""
        return self.n - self.m - 1

    def as_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "gamma": self.gamma}


@dataclass(frozen=True)
class CylinderModel:
    dims: DimensionPair
    C: float
    D: float
    a_hat: float

    def as_dict(self) -> dict:
        return {**self.dims.as_dict(), "C": self.C, "D": self.D, "a_hat": self.a_hat}


def unit_sphere_area(k: int) -> float:
    """Area of the unit k-sphere in R^{k+1}; |S^0| = 2."""
    if k < 0:
        raise DomainError(f"sphere dimension must be non-negative, got {k}")
    return float(2.0 * math.pi ** ((k + 1) / 2.0) / special.gamma((k + 1) / 2.0))


def compute_C(dims: DimensionPair) -> float:
    """(n-2)(n-m-1) / (2(n-1)(n-m-2))."""
    n, m = dims.n, dims.m
    return ((n - 2) * (n - m - 1)) / (2 * (n - 1) * (n - m - 2))


def compute_D_general(m: int, exponent: float) -> float:
    """
    Integral of (1 + |eta|^2)^(-exponent/2) over R^m.

    Args:
        m: Dimension of the integration plane
        exponent: Kernel exponent p; the integral converges only for p > m

    Returns:
        pi^(m/2) * Gamma((p - m)/2) / Gamma(p/2)
    """
    if m < 0:
        raise DimensionError(f"m must be non-negative, got {m}", {"m": m})
    if exponent <= m:
        raise DivergentIntegralError(
            f"kernel exponent {exponent} must exceed m = {m}", {"m": m, "exponent": exponent}
        )
    if m == 0:
        return 1.0
    return float(
        math.pi ** (m / 2.0) * special.gamma((exponent - m) / 2.0) / special.gamma(exponent / 2.0)
    )


def compute_D(dims: DimensionPair) -> float:
    """D_{n,m} = integral over R^m of (1 + |eta|^2)^(-(n-2)/2)."""
    if dims.n - 2 <= dims.m:
        raise DivergentIntegralError(
            "D_{n,m} diverges unless n - 2 > m", {"n": dims.n, "m": dims.m}
        )
    return compute_D_general(dims.m, dims.n - 2)


def radial_D_quadrature(m: int, exponent: float, rtol: float = 1e-13) -> float:
    """
    Independent quadrature value of ``compute_D_general``.

    Integrates |S^{m-1}| r^{m-1} (1 + r^2)^{-p/2} over (0, inf) after the
    substitution r = tan(theta), which leaves the bounded integrand
    sin^{m-1} cos^{p-m-1} on (0, pi/2).
    """
    if exponent <= m:
        raise DivergentIntegralError(
            f"kernel exponent {exponent} must exceed m = {m}", {"m": m, "exponent": exponent}
        )
    if m == 0:
        return 1.0

    def integrand(theta):
        return math.sin(theta) ** (m - 1) * math.cos(theta) ** (exponent - m - 1)

    value, err = integrate.quad(integrand, 0.0, math.pi / 2.0, epsabs=0.0, epsrel=rtol, limit=200)
    logger.debug("radial D quadrature m=%d p=%s value=%r err=%r", m, exponent, value, err)
    return unit_sphere_area(m - 1) * value


def compute_a_hat(dims: DimensionPair) -> float:
    """Critical cylinder radius (D (1 - C) / C)^(1/(n-m-2))."""
    C = compute_C(dims)
    D = compute_D(dims)
    return (D * (1.0 - C) / C) ** (1.0 / dims.gamma)


def cylinder_model(dims: DimensionPair) -> CylinderModel:
    return CylinderModel(dims=dims, C=compute_C(dims), D=compute_D(dims), a_hat=compute_a_hat(dims))


def _check_radius(a: float) -> float:
    if not np.isfinite(a) or a <= 0:
        raise DomainError(f"cylinder radius must be positive, got {a}", {"a": a})
    return float(a)


def u_infinity_on_cylinder(dims: DimensionPair, a: float) -> float:
    """Model conformal factor 1 + a^(-(n-m-2)) D_{n,m} on the cylinder of radius a."""
    a = _check_radius(a)
    return 1.0 + a ** (-dims.gamma) * compute_D(dims)


def cylinder_mean_curvature(dims: DimensionPair, a: float) -> float:
    """
    Mean curvature of the model cylinder of radius a in the model metric.

    Negative below a_hat, zero at a_hat and positive above it.
    """
    a = _check_radius(a)
    n, gamma = dims.n, dims.gamma
    t = a ** (-gamma) * compute_D(dims)
    ratio = t / (1.0 + t)
    bracket = (gamma + 1) - 2.0 * gamma * ((n - 1) / (n - 2)) * ratio
    return (1.0 + t) ** (-2.0 / (n - 2)) * bracket / a


def cylinder_profile(dims: DimensionPair, samples: int = 201, span: float = 100.0) -> np.ndarray:
    """
    Table of (a, u_inf(a), H(a)) on a log grid over (a_hat/span, a_hat*span).

    Returns:
        Array of shape (samples, 3)
    """
    a_hat = compute_a_hat(dims)
    radii = np.geomspace(a_hat / span, a_hat * span, samples)
    rows = [(a, u_infinity_on_cylinder(dims, a), cylinder_mean_curvature(dims, a)) for a in radii]
    return np.asarray(rows, dtype=float)
