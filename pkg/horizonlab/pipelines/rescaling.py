"""
Rescaling Pipeline - F_k -> F_inf on a window around a point of S.
"""

from typing import Any, Dict

import numpy as np

from horizonlab.errors import DomainError
from horizonlab.geometry.model_constants import compute_a_hat
from horizonlab.geometry.rescaling import (
    ConvergenceWindow,
    convergence_report,
    default_anchor,
    window_grid,
)
from horizonlab.pipelines.base import Pipeline


class RescalingPipeline(Pipeline):
    """verify-rescaling: per-level deviations (JSON) and per-point values (CSV)."""

    command = "verify-rescaling"

    def window(self, x_infinity: np.ndarray) -> ConvergenceWindow:
        S = self.config.submanifold
        settings = self.config.rescaling
        a_hat = compute_a_hat(S.dims)
        beta1 = settings["beta1"] or 3.0 * a_hat
        beta2 = settings["beta2"] or 0.5 * a_hat
        gamma = settings["gamma"] or float(S.n - 2)
        grid = window_grid(S, x_infinity, beta1, beta2, settings["grid_count"])
        return ConvergenceWindow(beta1, beta2, gamma, grid)

    def run(self) -> Dict[str, Any]:
        S = self.config.submanifold
        settings = self.config.rescaling
        if settings["x_infinity"] is None:
            x_infinity = default_anchor(S)
        else:
            x_infinity = np.asarray(settings["x_infinity"], dtype=float)
            if not S.contains(x_infinity):
                raise DomainError(
                    "rescaling.x_infinity must lie on S", {"distance": S.distance(x_infinity)}
                )
        window = self.window(x_infinity)
        report = convergence_report(
            S,
            x_infinity,
            window,
            settings["epsilons"],
            tolerance=self.config.tolerances["quadrature"],
        )

        n = S.n
        header = ["epsilon", "index"] + [f"zeta{i}" for i in range(n)]
        header += ["F_k", "F_inf", "deviation"]
        self.writer.write_csv("rescaling_points.csv", header, report.rows)
        summary = {
            **report.as_dict(),
            "x_infinity": x_infinity.tolist(),
            "window": {
                "beta1": window.beta1,
                "beta2": window.beta2,
                "gamma": window.gamma,
                "points": int(len(window.grid)),
            },
        }
        self.writer.write_json("rescaling.json", summary)
        return summary
