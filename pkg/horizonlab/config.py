"""
Run configuration - one JSON document per run.

parse_config validates every field, fills in defaults and returns a RunConfig
whose normalized echo (and its SHA-256) is embedded in every artifact.
"""

import copy
import hashlib
import json
import math
import os
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from horizonlab.errors import ConfigError, DimensionError
from horizonlab.geometry.grid import MIN_COUNT, MODES
from horizonlab.geometry.horizon import SolverOptions
from horizonlab.geometry.model_constants import DimensionPair
from horizonlab.geometry.submanifolds import (
    PointSet,
    ProductOfSpheres,
    RoundSphere,
    Submanifold,
)

# ============================================================
# Defaults
# ============================================================
DEFAULT_OUT_DIR = "horizonlab_results"

SECTION_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "tolerances": {"quadrature": 1e-9, "solver": 1e-8, "switch": 1e-2},
    "solver": {
        "max_flow_steps": 40,
        "max_newton_steps": 25,
        "initial_psi_over_epsilon": None,
        "certify": False,
        "max_refinements": 1,
    },
    "scan": {
        "a_min_over_epsilon": 0.1,
        "a_max_over_reach": 0.95,
        "samples": 60,
        "r_end_samples": 40,
    },
    "field": {"points": [], "diagnostics": True},
    "rescaling": {
        "beta1": None,
        "beta2": None,
        "gamma": None,
        "grid_count": 4,
        "epsilons": [0.2, 0.1, 0.05],
        "x_infinity": None,
    },
    "mesh": {"radius_over_epsilon": None, "resolution": 32, "horizon": True},
    "area_bound": {"probes": 4, "radius_over_epsilon": 0.5, "sphere_resolution": 12},
    "acceptance": {"criteria": list(range(1, 12))},
}

TOP_LEVEL_KEYS = {"n", "m", "shape", "epsilon", "epsilons", "grid", "mode"} | set(SECTION_DEFAULTS)
SHAPE_KINDS = ("points", "sphere", "product")


# ============================================================
# Field validators
# ============================================================
def _number(value: Any, name: str, positive: bool = False, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    if positive and value <= 0:
        raise ConfigError(name, f"must be positive, got {value}")
    return value


def _integer(value: Any, name: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {type(value).__name__}")
    if minimum is not None and value < minimum:
        raise ConfigError(name, f"must be at least {minimum}, got {value}")
    return int(value)


def _boolean(value: Any, name: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(name, f"expected true or false, got {type(value).__name__}")
    return value


def _vector(value: Any, name: str, n: int) -> List[float]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(name, f"expected a list of {n} numbers")
    return [_number(v, f"{name}[{i}]") for i, v in enumerate(value)]


def _epsilon_list(value: Any, name: str) -> List[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(name, "expected a non-empty list of positive numbers")
    return [_number(v, f"{name}[{i}]", positive=True) for i, v in enumerate(value)]


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    """Defaults of one section overlaid with the user's values; unknown keys are rejected."""
    given = data.get(name, {})
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigError(name, "expected an object")
    defaults = SECTION_DEFAULTS[name]
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"{name}.{unknown[0]}", "unknown key")
    merged = copy.deepcopy(defaults)
    merged.update(given)
    return merged


# ============================================================
# RunConfig
# ============================================================
@dataclass
class RunConfig:
    """Validated run parameters; ``echo`` is the normalized config with defaults filled in."""

    dims: DimensionPair
    shape: Dict[str, Any]
    epsilon: float
    epsilons: Optional[List[float]]
    grid: Dict[str, Any]
    mode: str
    tolerances: Dict[str, float]
    solver: Dict[str, Any]
    scan: Dict[str, Any]
    field: Dict[str, Any]
    rescaling: Dict[str, Any]
    mesh: Dict[str, Any]
    area_bound: Dict[str, Any]
    acceptance: Dict[str, Any]
    out_dir: Optional[str] = None
    _submanifold: Optional[Submanifold] = dataclasses.field(default=None, repr=False)

    @property
    def submanifold(self) -> Submanifold:
        if self._submanifold is None:
            self._submanifold = build_submanifold(self.dims, self.shape)
        return self._submanifold

    @property
    def resolution(self) -> Tuple[int, Union[int, Tuple[int, int]]]:
        fiber = self.grid["fiber"]
        return self.grid["base"], tuple(fiber) if isinstance(fiber, list) else fiber

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            tolerance=self.tolerances["solver"],
            switch=self.tolerances["switch"],
            max_flow_steps=self.solver["max_flow_steps"],
            max_newton_steps=self.solver["max_newton_steps"],
            initial_psi_over_epsilon=self.solver["initial_psi_over_epsilon"],
            certify=self.solver["certify"],
            max_refinements=self.solver["max_refinements"],
        )

    def echo(self) -> Dict[str, Any]:
        return {
            "n": self.dims.n,
            "m": self.dims.m,
            "shape": copy.deepcopy(self.shape),
            "epsilon": self.epsilon,
            "epsilons": list(self.epsilons) if self.epsilons is not None else None,
            "grid": copy.deepcopy(self.grid),
            "mode": self.mode,
            "tolerances": dict(self.tolerances),
            "solver": dict(self.solver),
            "scan": dict(self.scan),
            "field": copy.deepcopy(self.field),
            "rescaling": copy.deepcopy(self.rescaling),
            "mesh": dict(self.mesh),
            "area_bound": dict(self.area_bound),
            "acceptance": copy.deepcopy(self.acceptance),
        }

    @property
    def config_hash(self) -> str:
        return config_hash(self.echo())

    def with_overrides(self, **changes: Any) -> "RunConfig":
        """Re-validated copy with top-level keys replaced."""
        data = self.echo()
        data.update(changes)
        return parse_config(data, out_dir=self.out_dir)


def canonical_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(echo: Dict[str, Any]) -> str:
    return hashlib.sha256(canonical_json(echo).encode("utf-8")).hexdigest()


# ============================================================
# Shapes
# ============================================================
def _parse_shape(value: Any, dims: DimensionPair) -> Dict[str, Any]:
    if not isinstance(value, dict) or len(value) != 1:
        raise ConfigError("shape", f"expected exactly one of {list(SHAPE_KINDS)}")
    kind, params = next(iter(value.items()))
    if kind == "points":
        if dims.m != 0:
            raise ConfigError("shape.points", f"point sets need m = 0, got m = {dims.m}")
        if not isinstance(params, list) or not params:
            raise ConfigError("shape.points", "expected a non-empty list of points")
        points = [_vector(p, f"shape.points[{i}]", dims.n) for i, p in enumerate(params)]
        if len({tuple(p) for p in points}) != len(points):
            raise ConfigError("shape.points", "points must be distinct")
        return {"points": points}
    if kind == "sphere":
        if not isinstance(params, dict):
            raise ConfigError("shape.sphere", "expected an object")
        unknown = sorted(set(params) - {"radius"})
        if unknown:
            raise ConfigError(f"shape.sphere.{unknown[0]}", "unknown key")
        if dims.m < 1:
            raise ConfigError("shape.sphere", "a round sphere needs m >= 1")
        radius = _number(params.get("radius", 1.0), "shape.sphere.radius", positive=True)
        return {"sphere": {"radius": radius}}
    if kind == "product":
        if not isinstance(params, dict):
            raise ConfigError("shape.product", "expected an object")
        unknown = sorted(set(params) - {"radii", "dims"})
        if unknown:
            raise ConfigError(f"shape.product.{unknown[0]}", "unknown key")
        radii = params.get("radii")
        blocks = params.get("dims")
        if not isinstance(radii, list) or len(radii) != 2:
            raise ConfigError("shape.product.radii", "expected two radii")
        if not isinstance(blocks, list) or len(blocks) != 2:
            raise ConfigError("shape.product.dims", "expected two block dimensions")
        radii = [
            _number(r, f"shape.product.radii[{i}]", positive=True) for i, r in enumerate(radii)
        ]
        blocks = [_integer(k, f"shape.product.dims[{i}]", 1) for i, k in enumerate(blocks)]
        if sum(blocks) != dims.m:
            raise ConfigError("shape.product.dims", f"block dimensions must sum to m = {dims.m}")
        return {"product": {"radii": radii, "dims": blocks}}
    raise ConfigError("shape", f"unknown shape {kind!r}; expected one of {list(SHAPE_KINDS)}")


def build_submanifold(dims: DimensionPair, shape: Dict[str, Any]) -> Submanifold:
    """Catalog shape for a normalized shape entry."""
    kind, params = next(iter(shape.items()))
    if kind == "points":
        return PointSet(params, n=dims.n)
    if kind == "sphere":
        return RoundSphere(dims.n, dims.m, params["radius"])
    return ProductOfSpheres(dims.n, params["radii"], params["dims"])


def default_mode(shape: Dict[str, Any]) -> str:
    """reduced_1d for a single round sphere or a single point, full otherwise."""
    if "sphere" in shape:
        return "reduced_1d"
    if "points" in shape and len(shape["points"]) == 1:
        return "reduced_1d"
    return "full"


def _parse_grid(value: Any, mode: str) -> Dict[str, Any]:
    if value is None:
        value = {}
    if not isinstance(value, dict):
        raise ConfigError("grid", "expected an object")
    unknown = sorted(set(value) - {"base", "fiber"})
    if unknown:
        raise ConfigError(f"grid.{unknown[0]}", "unknown key")
    base = _integer(value.get("base", 32), "grid.base", MIN_COUNT)
    fiber = value.get("fiber", 64 if mode == "reduced_1d" else [32, 16])
    if isinstance(fiber, list):
        if len(fiber) != 2:
            raise ConfigError("grid.fiber", "expected an integer or [n_phi, n_theta]")
        fiber = [_integer(f, f"grid.fiber[{i}]", MIN_COUNT) for i, f in enumerate(fiber)]
        if fiber[0] % 2:
            raise ConfigError("grid.fiber[0]", "azimuthal count must be even")
    else:
        fiber = _integer(fiber, "grid.fiber", MIN_COUNT)
    return {"base": base, "fiber": fiber}


# ============================================================
# Parsing
# ============================================================
def parse_config(text: Union[str, Dict[str, Any]], out_dir: Optional[str] = None) -> RunConfig:
    """
    Validate a JSON config and fill in defaults.

    Args:
        text: JSON text or an already decoded dict
        out_dir: Output directory; falls back to HORIZONLAB_OUT_DIR

    Returns:
        RunConfig

    Raises:
        ConfigError: schema violation, naming the offending field
        DimensionError: invalid (n, m)
    """
    if isinstance(text, dict):
        data = copy.deepcopy(text)
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("config", f"invalid JSON: {e.msg} at line {e.lineno}") from e
    if not isinstance(data, dict):
        raise ConfigError("config", "expected a JSON object")

    unknown = sorted(set(data) - TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    for key in ("n", "m", "shape", "epsilon"):
        if key not in data:
            raise ConfigError(key, "missing required key")

    n = _integer(data["n"], "n")
    m = _integer(data["m"], "m")
    try:
        dims = DimensionPair(n, m)
    except DimensionError as e:
        e.context.setdefault("field", "m")
        raise
    shape = _parse_shape(data["shape"], dims)
    epsilon = _number(data["epsilon"], "epsilon", positive=True)
    epsilons = data.get("epsilons")
    if epsilons is not None:
        epsilons = _epsilon_list(epsilons, "epsilons")

    mode = data.get("mode") or default_mode(shape)
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {list(MODES)}, got {mode!r}")
    if mode == "reduced_1d" and default_mode(shape) != "reduced_1d":
        raise ConfigError("mode", "reduced_1d needs a single round sphere or a single point")
    grid = _parse_grid(data.get("grid"), mode)

    tolerances = _section(data, "tolerances")
    for key in ("quadrature", "solver", "switch"):
        tolerances[key] = _number(tolerances[key], f"tolerances.{key}", positive=True)

    solver = _section(data, "solver")
    solver["max_flow_steps"] = _integer(solver["max_flow_steps"], "solver.max_flow_steps", 0)
    solver["max_newton_steps"] = _integer(solver["max_newton_steps"], "solver.max_newton_steps", 0)
    solver["initial_psi_over_epsilon"] = _number(
        solver["initial_psi_over_epsilon"],
        "solver.initial_psi_over_epsilon",
        positive=True,
        allow_none=True,
    )
    solver["certify"] = _boolean(solver["certify"], "solver.certify")
    solver["max_refinements"] = _integer(solver["max_refinements"], "solver.max_refinements", 0)

    scan = _section(data, "scan")
    scan["a_min_over_epsilon"] = _number(
        scan["a_min_over_epsilon"], "scan.a_min_over_epsilon", True
    )
    scan["a_max_over_reach"] = _number(scan["a_max_over_reach"], "scan.a_max_over_reach", True)
    if scan["a_max_over_reach"] >= 1.0:
        raise ConfigError("scan.a_max_over_reach", "must be below 1")
    scan["samples"] = _integer(scan["samples"], "scan.samples", 3)
    scan["r_end_samples"] = _integer(scan["r_end_samples"], "scan.r_end_samples", 2)

    field_section = _section(data, "field")
    if not isinstance(field_section["points"], list):
        raise ConfigError("field.points", "expected a list of points")
    field_section["points"] = [
        _vector(p, f"field.points[{i}]", n) for i, p in enumerate(field_section["points"])
    ]
    field_section["diagnostics"] = _boolean(field_section["diagnostics"], "field.diagnostics")

    rescaling = _section(data, "rescaling")
    for key in ("beta1", "beta2", "gamma"):
        rescaling[key] = _number(rescaling[key], f"rescaling.{key}", True, allow_none=True)
    rescaling["grid_count"] = _integer(rescaling["grid_count"], "rescaling.grid_count", 1)
    rescaling["epsilons"] = _epsilon_list(rescaling["epsilons"], "rescaling.epsilons")
    levels = rescaling["epsilons"]
    if any(b >= a for a, b in zip(levels, levels[1:])):
        raise ConfigError("rescaling.epsilons", "must be strictly decreasing")
    if rescaling["x_infinity"] is not None:
        rescaling["x_infinity"] = _vector(rescaling["x_infinity"], "rescaling.x_infinity", n)

    mesh = _section(data, "mesh")
    mesh["radius_over_epsilon"] = _number(
        mesh["radius_over_epsilon"], "mesh.radius_over_epsilon", True, allow_none=True
    )
    mesh["resolution"] = _integer(mesh["resolution"], "mesh.resolution", 4)
    mesh["horizon"] = _boolean(mesh["horizon"], "mesh.horizon")

    area_bound = _section(data, "area_bound")
    area_bound["probes"] = _integer(area_bound["probes"], "area_bound.probes", 1)
    area_bound["radius_over_epsilon"] = _number(
        area_bound["radius_over_epsilon"], "area_bound.radius_over_epsilon", True
    )
    area_bound["sphere_resolution"] = _integer(
        area_bound["sphere_resolution"], "area_bound.sphere_resolution", 4
    )

    acceptance = _section(data, "acceptance")
    criteria = acceptance["criteria"]
    if not isinstance(criteria, list) or not criteria:
        raise ConfigError("acceptance.criteria", "expected a non-empty list of criterion ids")
    acceptance["criteria"] = sorted({_integer(c, "acceptance.criteria", 1) for c in criteria})
    if acceptance["criteria"][-1] > 11:
        raise ConfigError("acceptance.criteria", "criterion ids run from 1 to 11")

    return RunConfig(
        dims=dims,
        shape=shape,
        epsilon=epsilon,
        epsilons=epsilons,
        grid=grid,
        mode=mode,
        tolerances=tolerances,
        solver=solver,
        scan=scan,
        field=field_section,
        rescaling=rescaling,
        mesh=mesh,
        area_bound=area_bound,
        acceptance=acceptance,
        out_dir=out_dir or os.environ.get("HORIZONLAB_OUT_DIR", DEFAULT_OUT_DIR),
    )


def load_config(path: Union[str, Path], out_dir: Optional[str] = None) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"), out_dir=out_dir)
