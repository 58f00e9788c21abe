"""
Exception hierarchy for horizonlab.

Every error carries an ``exit_code`` used by the CLI and a ``context`` dict that
is echoed into the machine-readable error payload.
"""

from typing import Any, Dict, Optional


class HorizonlabError(Exception):
    """Base class for all horizonlab errors."""

    exit_code = 1

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = dict(context or {})

    def to_payload(self) -> Dict[str, Any]:
        return {
            "success": False,
            "error": self.message,
            "error_type": type(self).__name__,
            "exit_code": self.exit_code,
            "context": self.context,
        }


# ============================================================
# Configuration
# ============================================================
class ConfigError(HorizonlabError):
    """Schema violation in a run configuration."""

    exit_code = 2

    def __init__(self, field: str, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(f"{field}: {message}", context)
        self.field = field
        self.context.setdefault("field", field)


class DimensionError(HorizonlabError, ValueError):
    """Invalid (n, m) pair."""

    exit_code = 2


class DivergentIntegralError(DimensionError):
    """The kernel integral over R^m diverges for the requested exponent."""


class ResolutionError(ConfigError):
    """Unsupported grid resolution or symmetry mode."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__("grid", message, context)


# ============================================================
# Geometry domain errors
# ============================================================
class DomainError(HorizonlabError, ValueError):
    """An argument lies outside the domain of an operation."""


class SingularityError(DomainError):
    """Evaluation point lies on the submanifold."""


class AmbiguityError(DomainError):
    """Nearest point on the submanifold is not unique."""


class ReachExceededError(DomainError):
    """Tube radius at or beyond the reach of the submanifold."""


# ============================================================
# Numerical failures
# ============================================================
class QuadratureAccuracyError(HorizonlabError):
    """Adaptive quadrature ran out of panels before meeting its tolerance."""

    exit_code = 3

    def __init__(self, message: str, estimate: float, error: float, **context: Any):
        super().__init__(message, {"estimate": estimate, "error_estimate": error, **context})
        self.estimate = estimate
        self.error = error


class NonConvergenceError(HorizonlabError):
    """Iterative solver hit its iteration cap."""

    exit_code = 3

    def __init__(self, message: str, best_residual: float, **context: Any):
        super().__init__(message, {"best_residual": best_residual, **context})
        self.best_residual = best_residual


class ConfinementError(HorizonlabError):
    """Graph height left the admissible interval (0, reach)."""

    exit_code = 3


class BarrierNotFoundError(HorizonlabError):
    """No mean-curvature sign change was found; epsilon is outside the small-epsilon regime."""

    exit_code = 4
