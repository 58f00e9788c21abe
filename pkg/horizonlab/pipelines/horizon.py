"""
Horizon Pipeline - locate the outermost apparent horizon and certify it.

Runs the barrier scan, solves per component (or coupled), and checks each
solved graph against the location band, the conformal transformation law,
the small-slope condition and the local area bound. An optional epsilon
sweep tracks how psi/eps approaches a_hat.
"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np

from horizonlab.geometry.conformal import ConformalField
from horizonlab.geometry.horizon import (
    BarrierReport,
    HorizonGraph,
    ResidualCertificate,
    certify_outermost,
    find_certified_horizon,
    find_horizon,
    local_area_bound_check,
    location_check,
    max_slope,
    probe_centres,
)
from horizonlab.geometry.model_constants import compute_a_hat
from horizonlab.pipelines.barriers import BarrierPipeline

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["epsilon", "deviation", "sup_residual_scaled", "iterations"]


def epsilon_sweep(
    field: ConformalField, resolution, mode: str, options, epsilons: List[float]
) -> List[Dict[str, Any]]:
    """sup over nodes of |psi/eps - a_hat| for each eps, largest eps first."""
    a_hat = compute_a_hat(field.dims)
    rows = []
    for eps in sorted(epsilons, reverse=True):
        graphs = find_horizon(field.with_epsilon(eps), resolution, mode, options)
        deviation = max(float(np.max(np.abs(g.psi / eps - a_hat))) for g in graphs)
        rows.append(
            {
                "epsilon": eps,
                "deviation": deviation,
                "sup_residual_scaled": max(g.sup_residual for g in graphs) * eps,
                "iterations": sum(g.iterations for g in graphs),
            }
        )
        logger.info("sweep eps=%g: sup|psi/eps - a_hat| = %.6e", eps, deviation)
    return rows


def sweep_decreasing(rows: List[Dict[str, Any]]) -> bool:
    deviations = [row["deviation"] for row in rows]
    return all(b < a for a, b in zip(deviations, deviations[1:]))


class HorizonPipeline(BarrierPipeline):
    """find-horizon: graph CSV, iteration history and a JSON summary with certificates."""

    command = "find-horizon"

    def certify_graph(
        self, graph: HorizonGraph, report: BarrierReport, residual: ResidualCertificate
    ) -> Dict[str, Any]:
        field = self.field
        eps = field.epsilon
        summary = graph.summary(eps)
        summary["location"] = location_check(graph, report)
        summary["conformal_law"] = residual.as_dict()
        summary["max_slope"] = max_slope(graph, eps)
        summary["barrier_violations"] = graph.barrier_violations

        bound = self.config.area_bound
        checks = [
            local_area_bound_check(
                field,
                graph,
                centre,
                bound["radius_over_epsilon"] * eps,
                bound["sphere_resolution"],
            )
            for centre in probe_centres(graph, bound["probes"])
        ]
        summary["area_bound"] = {
            "probes": [c.as_dict() for c in checks],
            "all_hold": all(c.holds for c in checks),
        }
        summary["certified"] = bool(
            graph.converged
            and residual.passed
            and summary["location"]["passed"]
            and summary["max_slope"] < 1.0
            and graph.barrier_violations == 0
            and summary["area_bound"]["all_hold"]
        )
        return summary

    def certify_outermost(self, report: BarrierReport) -> Optional[Dict[str, Any]]:
        if not self.config.solver["certify"]:
            return None
        certificate = certify_outermost(
            self.field, self.grid, report, self.config.solver_options()
        )
        return {"difference": certificate.difference, "passed": certificate.passed}

    def write_graphs(self, graphs: List[HorizonGraph]):
        rows, history = [], []
        for c, graph in enumerate(graphs):
            grid = graph.grid
            for k in range(grid.size):
                rows.append(
                    (
                        c,
                        int(grid.base_index[k]),
                        int(grid.fiber_index[k]),
                        graph.psi[k],
                        graph.residual[k],
                    )
                )
            for step, entry in enumerate(graph.history):
                history.append(
                    (c, step, entry["stage"], entry["area"], entry["sup_residual"], entry["step"])
                )
        self.writer.write_csv(
            "horizon.csv", ["component", "base_index", "fiber_index", "psi", "residual"], rows
        )
        self.writer.write_csv(
            "horizon_history.csv",
            ["component", "step", "stage", "area", "sup_residual", "step_size"],
            history,
        )

    def run(self) -> Dict[str, Any]:
        config = self.config
        field = self.field
        options = config.solver_options()
        report = self.scan()
        self.write_report(report)

        graphs, residuals, resolution = find_certified_horizon(
            field, config.resolution, config.mode, options, report
        )
        self.write_graphs(graphs)
        components = [self.certify_graph(g, report, r) for g, r in zip(graphs, residuals)]

        eps = field.epsilon
        base, fiber = resolution
        summary: Dict[str, Any] = {
            "epsilon": eps,
            "a_hat": report.a_hat,
            "psi_min": min(c["psi_min"] for c in components),
            "psi_max": max(c["psi_max"] for c in components),
            "sup_residual": max(c["sup_residual"] for c in components),
            "iterations": sum(c["iterations"] for c in components),
            "converged": all(c["converged"] for c in components),
            "certified": all(c["certified"] for c in components),
            "resolution": [base, list(fiber) if isinstance(fiber, tuple) else fiber],
            "component_count": len(components),
            "components": components,
            "barriers": report.as_dict(),
        }
        outermost = self.certify_outermost(report)
        if outermost is not None:
            summary["outermost"] = outermost

        if config.epsilons:
            rows = epsilon_sweep(field, config.resolution, config.mode, options, config.epsilons)
            self.writer.write_csv(
                "epsilon_sweep.csv",
                SWEEP_COLUMNS,
                [[r[c] for c in SWEEP_COLUMNS] for r in rows],
            )
            summary["sweep"] = {"rows": rows, "strictly_decreasing": sweep_decreasing(rows)}

        self.writer.write_json("horizon.json", summary)
        return summary
