"""horizonlab - apparent horizons of conformally flat metrics concentrated near submanifolds."""

from horizonlab.errors import HorizonlabError
from horizonlab.geometry import (
    ConformalField,
    DimensionPair,
    PointSet,
    ProductOfSpheres,
    RoundSphere,
    build_grid,
    compute_a_hat,
    find_horizon,
    scan_barriers,
    solve_horizon,
)

__version__ = "1.0.0"
__all__ = [
    "HorizonlabError",
    "ConformalField",
    "DimensionPair",
    "PointSet",
    "ProductOfSpheres",
    "RoundSphere",
    "build_grid",
    "compute_a_hat",
    "find_horizon",
    "scan_barriers",
    "solve_horizon",
]
