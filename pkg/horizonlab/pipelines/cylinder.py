"""
Cylinder Pipeline - model constants and the mean-curvature profile of the
model cylinder for one (n, m).
"""

from typing import Any, Dict

import numpy as np

from horizonlab.geometry.model_constants import (
    cylinder_mean_curvature,
    cylinder_model,
    cylinder_profile,
)
from horizonlab.pipelines.base import Pipeline


class CylinderPipeline(Pipeline):
    """analyze-cylinder: C, D, a_hat and the table (a, u_inf(a), H(a))."""

    command = "analyze-cylinder"

    def run(self) -> Dict[str, Any]:
        dims = self.config.dims
        model = cylinder_model(dims)
        profile = cylinder_profile(dims)
        below = profile[:, 0] < model.a_hat
        above = profile[:, 0] > model.a_hat
        summary = {
            **model.as_dict(),
            "H_at_a_hat": cylinder_mean_curvature(dims, model.a_hat),
            "negative_below_a_hat": bool(np.all(profile[below, 2] < 0)),
            "positive_above_a_hat": bool(np.all(profile[above, 2] > 0)),
            "profile_rows": int(len(profile)),
        }
        self.writer.write_csv("cylinder_profile.csv", ["a", "u_inf", "H"], profile.tolist())
        self.writer.write_json("cylinder.json", summary)
        return summary
