"""
Acceptance Pipeline - the eleven property checks with exact or derived oracles.

Each criterion runs on a bundled config from horizonlab/data/acceptance and
yields one row (id, name, passed, metric, threshold, detail). Runtimes are
measured against their limits but reported only in the run manifest, so the
data artifacts stay byte-identical across runs.
"""

import filecmp
import logging
import math
import os
import shutil
import tempfile
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from horizonlab.config import RunConfig, load_config
from horizonlab.errors import HorizonlabError
from horizonlab.geometry.conformal import ConformalField
from horizonlab.geometry.grid import build_grid
from horizonlab.geometry.horizon import (
    BarrierReport,
    default_a_range,
    find_horizon,
    max_slope,
    scan_barriers,
    solve_horizon,
)
from horizonlab.geometry.model_constants import (
    DimensionPair,
    compute_a_hat,
    compute_D,
    cylinder_mean_curvature,
    radial_D_quadrature,
)
from horizonlab.geometry.rescaling import convergence_report, default_anchor, default_window
from horizonlab.pipelines.base import Pipeline
from horizonlab.pipelines.horizon import epsilon_sweep, sweep_decreasing
from horizonlab.reporting import MANIFEST_NAME, status

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
ACCEPTANCE_DIR = os.path.join(DATA_DIR, "acceptance")

# ============================================================
# Criterion constants
# ============================================================
RUNTIME_LIMITS = {1: 30.0, 2: 5.0, 4: 120.0}
R_OUTER_FACTOR = 5.0
SWEEP_RATIO = 0.6
HARMONIC_POINTS = 100
HARMONIC_SEED = 0
ASYMPTOTIC_TOLERANCE = 0.01

CRITERIA = {
    1: "schwarzschild_exactness",
    2: "model_constants",
    3: "cylinder_sign_structure",
    4: "barrier_bracketing",
    5: "horizon_confinement",
    6: "rescaled_limit_convergence",
    7: "disconnected_horizon",
    8: "harmonicity",
    9: "asymptotic_coefficient",
    10: "rescaling_convergence",
    11: "determinism",
}


def acceptance_config(name: str, out_dir: Optional[str] = None) -> RunConfig:
    """Load one of the bundled acceptance configs by stem."""
    return load_config(os.path.join(ACCEPTANCE_DIR, f"{name}.json"), out_dir=out_dir)


def _field(config: RunConfig, epsilon: Optional[float] = None) -> ConformalField:
    return ConformalField(
        config.submanifold,
        config.epsilon if epsilon is None else epsilon,
        config.tolerances["quadrature"],
    )


def _row(passed: bool, metric: float, threshold: float, detail: str = "") -> Dict[str, Any]:
    return {
        "passed": bool(passed),
        "metric": float(metric),
        "threshold": float(threshold),
        "detail": detail,
    }


def directory_difference(first: Path, second: Path) -> List[str]:
    """Names of data files that differ between two output directories (manifest excluded)."""
    names = sorted(
        {p.name for p in first.iterdir() if p.is_file()}
        | {p.name for p in second.iterdir() if p.is_file()}
    )
    differing = []
    for name in names:
        if name == MANIFEST_NAME:
            continue
        a, b = first / name, second / name
        if not (a.is_file() and b.is_file() and filecmp.cmp(a, b, shallow=False)):
            differing.append(name)
    return differing


class AcceptancePipeline(Pipeline):
    """run-acceptance: acceptance.csv and acceptance.json, one row per criterion."""

    command = "run-acceptance"

    def __init__(self, config: RunConfig, out_dir: Optional[str] = None):
        super().__init__(config, out_dir)
        self._circle: Optional[RunConfig] = None
        self._circle_report: Optional[BarrierReport] = None

    # --- shared fixtures ------------------------------------------------
    @property
    def circle(self) -> RunConfig:
        if self._circle is None:
            self._circle = acceptance_config("circle")
        return self._circle

    def circle_report(self) -> BarrierReport:
        if self._circle_report is None:
            config = self.circle
            field = _field(config)
            grid = build_grid(config.submanifold, config.resolution, config.mode)
            scan = config.scan
            self._circle_report = scan_barriers(
                field,
                grid,
                a_range=default_a_range(
                    field, scan["a_min_over_epsilon"], scan["a_max_over_reach"]
                ),
                samples=scan["samples"],
                r_end_samples=scan["r_end_samples"],
            )
        return self._circle_report

    # --- criteria -------------------------------------------------------
    def schwarzschild_exactness(self) -> Dict[str, Any]:
        config = acceptance_config("schwarzschild")
        field = _field(config)
        grid = build_grid(config.submanifold, config.resolution, config.mode)
        graph = solve_horizon(field, grid, config.solver_options())
        eps = field.epsilon
        deviation = float(np.max(np.abs(graph.psi - eps)))
        scaled = graph.sup_residual * eps
        passed = graph.converged and scaled < 1e-8 and deviation < 1e-4
        return _row(passed, deviation, 1e-4, f"sup|H|*eps={scaled:.3e}")

    def model_constants(self) -> Dict[str, Any]:
        point_ok = all(compute_a_hat(DimensionPair(n, 0)) == 1.0 for n in range(3, 10))
        circle_error = abs(compute_a_hat(DimensionPair(4, 1)) - math.pi / 2)
        worst = 0.0
        for n in range(3, 10):
            for m in range(0, n - 2):
                exact = compute_D(DimensionPair(n, m))
                worst = max(worst, abs(exact - radial_D_quadrature(m, n - 2)) / exact)
        passed = point_ok and circle_error <= 1e-12 and worst <= 1e-8
        return _row(passed, worst, 1e-8, f"|a_hat(4,1) - pi/2|={circle_error:.3e}")

    def cylinder_sign_structure(self) -> Dict[str, Any]:
        worst_zero = 0.0
        signs_ok = True
        for n in range(3, 8):
            for m in range(0, n - 2):
                dims = DimensionPair(n, m)
                a_hat = compute_a_hat(dims)
                below = np.geomspace(a_hat / 100.0, a_hat, 102)[1:-1]
                above = np.geomspace(a_hat, 100.0 * a_hat, 102)[1:-1]
                signs_ok &= all(cylinder_mean_curvature(dims, a) < 0 for a in below)
                signs_ok &= all(cylinder_mean_curvature(dims, a) > 0 for a in above)
                worst_zero = max(worst_zero, abs(cylinder_mean_curvature(dims, a_hat)))
        return _row(signs_ok and worst_zero < 1e-10, worst_zero, 1e-10)

    def barrier_bracketing(self) -> Dict[str, Any]:
        report = self.circle_report()
        eps = report.epsilon
        scan = report.scan
        inner_rows = scan[scan[:, 0] <= report.C_inner * eps * (1 + 1e-12)]
        outer_rows = scan[
            (scan[:, 0] >= report.C_outer * eps * (1 - 1e-12))
            & (scan[:, 0] <= report.R_outer * (1 + 1e-12))
        ]
        pattern_ok = bool(np.all(inner_rows[:, 2] < 0) and np.all(outer_rows[:, 1] > 0))
        ratio = report.R_outer / (report.C_outer * eps)
        reach_ok = ratio >= R_OUTER_FACTOR
        passed = report.brackets_a_hat and pattern_ok and reach_ok
        detail = (
            f"C_inner={report.C_inner:.6g} C_outer={report.C_outer:.6g} "
            f"R_outer={report.R_outer:.6g} R_outer/(C_outer*eps)={ratio:.4g}"
        )
        return _row(passed, ratio, R_OUTER_FACTOR, detail)

    def horizon_confinement(self) -> Dict[str, Any]:
        config = self.circle
        report = self.circle_report()
        field = _field(config)
        grid = build_grid(config.submanifold, config.resolution, config.mode)
        graph = solve_horizon(field, grid, config.solver_options(), report)
        eps = field.epsilon
        slope = max_slope(graph, eps)
        confined = (
            np.min(graph.psi) > report.C_inner * eps and np.max(graph.psi) < report.C_outer * eps
        )
        return _row(graph.converged and confined and slope < 1.0, slope, 1.0)

    def rescaled_limit_convergence(self) -> Dict[str, Any]:
        config = self.circle
        rows = epsilon_sweep(
            _field(config),
            config.resolution,
            config.mode,
            config.solver_options(),
            [0.1, 0.05, 0.025],
        )
        ratio = rows[-1]["deviation"] / rows[0]["deviation"]
        passed = sweep_decreasing(rows) and ratio < SWEEP_RATIO
        detail = " ".join(f"d({r['epsilon']:g})={r['deviation']:.4e}" for r in rows)
        return _row(passed, ratio, SWEEP_RATIO, detail)

    def disconnected_horizon(self) -> Dict[str, Any]:
        config = acceptance_config("two_points")
        field = _field(config)
        graphs = find_horizon(field, config.resolution, config.mode, config.solver_options())
        eps = field.epsilon
        deviation = max(float(np.max(np.abs(g.psi - eps))) for g in graphs)
        mean = max(abs(float(np.average(g.psi, weights=g.grid.weights)) - eps) for g in graphs)
        passed = len(graphs) == 2 and all(g.converged for g in graphs) and deviation < 1e-3
        detail = f"components={len(graphs)} mean|psi-eps|={mean:.4e}"
        return _row(passed, deviation, 1e-3, detail)

    def harmonicity(self) -> Dict[str, Any]:
        config = self.circle
        field = _field(config)
        S = config.submanifold
        rng = np.random.default_rng(HARMONIC_SEED)
        worst, tested = 0.0, 0
        while tested < HARMONIC_POINTS:
            x = rng.uniform(-2.0, 2.0, S.n)
            if S.distance(x) < 0.1:
                continue
            worst = max(worst, field.harmonicity_residual(x))
            tested += 1
        return _row(worst < 1e-4, worst, 1e-4, f"points={tested}")

    def asymptotic_coefficient(self) -> Dict[str, Any]:
        cases = [
            ("point", acceptance_config("schwarzschild")),
            ("two_points", acceptance_config("two_points")),
            ("circle", self.circle),
        ]
        errors = {}
        for name, config in cases:
            errors[name] = _field(config).fit_asymptotic_coefficient().relative_error
        worst = max(errors.values())
        detail = " ".join(f"{k}={v:.3e}" for k, v in errors.items())
        return _row(worst < ASYMPTOTIC_TOLERANCE, worst, ASYMPTOTIC_TOLERANCE, detail)

    def rescaling_convergence(self) -> Dict[str, Any]:
        circle = self.circle
        S = circle.submanifold
        anchor = default_anchor(S)
        window = default_window(S, anchor, circle.rescaling["grid_count"])
        circle_report = convergence_report(S, anchor, window, [0.2, 0.1, 0.05])

        point = acceptance_config("point_rescaling")
        P = point.submanifold
        p = default_anchor(P)
        point_window = default_window(P, p, point.rescaling["grid_count"])
        point_report = convergence_report(P, p, point_window, point.rescaling["epsilons"])
        point_zero = all(
            level["sup_C0"] == 0.0 and level["sup_C1"] == 0.0 and level["metric_dev"] == 0.0
            for level in point_report.levels
        )
        sups = [level["sup_C0"] for level in circle_report.levels]
        passed = circle_report.strictly_decreasing and point_zero
        detail = "sup_C0=" + ",".join(f"{s:.4e}" for s in sups)
        return _row(passed, sups[-1] / sups[0], 1.0, detail)

    def determinism(self) -> Dict[str, Any]:
        from horizonlab.pipelines import PIPELINES

        runs = [
            ("analyze-cylinder", "circle"),
            ("field-eval", "schwarzschild"),
            ("scan-barriers", "schwarzschild"),
            ("find-horizon", "schwarzschild"),
            ("verify-rescaling", "point_rescaling"),
        ]
        root = Path(tempfile.mkdtemp(prefix="horizonlab_determinism_"))
        try:
            differing = []
            for command, name in runs:
                dirs = []
                for attempt in ("a", "b"):
                    target = root / attempt / command
                    pipeline = PIPELINES[command](acceptance_config(name), out_dir=str(target))
                    pipeline.run()
                    dirs.append(target)
                differing += [f"{command}/{f}" for f in directory_difference(*dirs)]
        finally:
            shutil.rmtree(root, ignore_errors=True)
        commands = ",".join(command for command, _ in runs)
        detail = f"reran {commands} twice; runtime limits are in run_manifest.json only"
        if differing:
            detail += "; differing: " + ",".join(differing)
        return _row(not differing, len(differing), 0, detail)

    # --- driver ---------------------------------------------------------
    def evaluate(self, criterion: int) -> Dict[str, Any]:
        name = CRITERIA[criterion]
        check: Callable[[], Dict[str, Any]] = getattr(self, name)
        try:
            row = check()
        except HorizonlabError as e:
            logger.warning("criterion %d (%s) raised %s", criterion, name, type(e).__name__)
            row = _row(False, math.nan, math.nan, f"{type(e).__name__}: {e.message}")
        return {"id": criterion, "name": name, **row}

    def run(self) -> Dict[str, Any]:
        rows, runtimes = [], {}
        for criterion in self.config.acceptance["criteria"]:
            start = time.perf_counter()
            row = self.evaluate(criterion)
            elapsed = time.perf_counter() - start
            limit = RUNTIME_LIMITS.get(criterion)
            runtimes[str(criterion)] = {
                "seconds": elapsed,
                "limit": limit,
                "within_limit": limit is None or elapsed < limit,
            }
            mark = "✅" if row["passed"] else "❌"
            status(f"{mark} criterion {criterion} {row['name']}: metric={row['metric']:.6g}")
            rows.append(row)

        header = ["id", "name", "passed", "metric", "threshold", "detail"]
        self.writer.write_csv("acceptance.csv", header, [[r[h] for h in header] for r in rows])
        table = {"criteria": rows, "all_passed": all(r["passed"] for r in rows)}
        self.writer.write_json("acceptance.json", table)
        return {**table, "runtimes": runtimes}
