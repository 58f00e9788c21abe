"""horizonlab pipelines - one runner per CLI subcommand."""

from .acceptance import AcceptancePipeline
from .barriers import BarrierPipeline
from .base import Pipeline
from .cylinder import CylinderPipeline
from .field import FieldPipeline
from .horizon import HorizonPipeline
from .mesh import MeshPipeline
from .rescaling import RescalingPipeline

PIPELINES = {
    pipeline.command: pipeline
    for pipeline in (
        CylinderPipeline,
        FieldPipeline,
        BarrierPipeline,
        HorizonPipeline,
        RescalingPipeline,
        MeshPipeline,
        AcceptancePipeline,
    )
}

__all__ = [
    "PIPELINES",
    "Pipeline",
    "AcceptancePipeline",
    "BarrierPipeline",
    "CylinderPipeline",
    "FieldPipeline",
    "HorizonPipeline",
    "MeshPipeline",
    "RescalingPipeline",
]
