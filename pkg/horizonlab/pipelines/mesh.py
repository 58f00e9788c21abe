"""
Mesh Pipeline - OBJ export of Tub(S, a) and, for point sources in R^3, of
the solved horizon.
"""

from typing import Any, Dict

from horizonlab.geometry.horizon import find_horizon
from horizonlab.geometry.mesh import horizon_mesh, merge_meshes, projection_axes, tube_mesh
from horizonlab.geometry.model_constants import compute_a_hat
from horizonlab.geometry.submanifolds import PointSet
from horizonlab.pipelines.base import Pipeline


class MeshPipeline(Pipeline):
    """export-mesh: tube.obj and, when requested and possible, horizon.obj."""

    command = "export-mesh"

    def run(self) -> Dict[str, Any]:
        config = self.config
        S = config.submanifold
        eps = config.epsilon
        ratio = config.mesh["radius_over_epsilon"] or compute_a_hat(S.dims)
        radius = ratio * eps
        axes = projection_axes(S.n)
        tube = tube_mesh(S, radius, config.mesh["resolution"])
        self.writer.write_obj(
            "tube.obj", tube, comment=f"Tub(S, {radius:.17g}) projected on axes {list(axes)}"
        )
        summary: Dict[str, Any] = {
            "radius": radius,
            "axes": list(axes),
            "tube": tube.describe(),
        }
        if config.mesh["horizon"] and isinstance(S, PointSet) and S.n == 3:
            graphs = find_horizon(
                self.field, config.resolution, config.mode, config.solver_options()
            )
            horizon = merge_meshes([horizon_mesh(g) for g in graphs])
            self.writer.write_obj("horizon.obj", horizon, comment="solved apparent horizon")
            summary["horizon"] = {**horizon.describe(), "components": len(graphs)}
        self.writer.write_json("mesh.json", summary)
        return summary
