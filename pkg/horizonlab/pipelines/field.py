"""
Field Pipeline - batch evaluation of u_eps and grad u_eps with optional
harmonicity and asymptotic-coefficient diagnostics.
"""

import logging
from typing import Any, Dict

import numpy as np

from horizonlab.errors import DomainError
from horizonlab.geometry.submanifolds import sample_sphere_directions
from horizonlab.pipelines.base import Pipeline

logger = logging.getLogger(__name__)


def default_field_points(S, epsilon: float) -> np.ndarray:
    """Points at distance about eps + 0.1 beyond the extent of S along the 2n axes."""
    radius = S.extent + epsilon + 0.1
    return radius * sample_sphere_directions(S.n, 2 * S.n)


class FieldPipeline(Pipeline):
    """field-eval: CSV of (x, u, grad u[, harmonicity]) and a JSON diagnostics summary."""

    command = "field-eval"

    def run(self) -> Dict[str, Any]:
        S = self.config.submanifold
        field = self.field
        n = S.n
        points = np.asarray(self.config.field["points"], dtype=float).reshape(-1, n)
        if len(points) == 0:
            points = default_field_points(S, field.epsilon)
        diagnostics = self.config.field["diagnostics"]

        rows, residuals = [], []
        for x in points:
            u, grad = field.evaluate(x)
            row = [*x.tolist(), u, *grad.tolist()]
            if diagnostics:
                try:
                    residual = field.harmonicity_residual(x)
                except DomainError as e:
                    logger.warning("no harmonicity residual at %s: %s", x.tolist(), e.message)
                    residual = float("nan")
                residuals.append(residual)
                row.append(residual)
            rows.append(row)

        header = [f"x{i}" for i in range(n)] + ["u"] + [f"du{i}" for i in range(n)]
        if diagnostics:
            header.append("harmonicity_residual")
        self.writer.write_csv("field.csv", header, rows)

        summary: Dict[str, Any] = {
            "epsilon": field.epsilon,
            "points": int(len(points)),
            "min_u": float(min(r[n] for r in rows)),
        }
        if diagnostics:
            finite = [r for r in residuals if np.isfinite(r)]
            summary["max_harmonicity_residual"] = float(max(finite)) if finite else float("nan")
            summary["asymptotic"] = field.fit_asymptotic_coefficient().as_dict()
        self.writer.write_json("field.json", summary)
        return summary
