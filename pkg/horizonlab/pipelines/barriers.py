"""
Barrier Pipeline - sign scan of tube and coordinate-sphere mean curvature.
"""

from typing import Any, Dict

from horizonlab.geometry.horizon import BarrierReport, default_a_range, scan_barriers
from horizonlab.pipelines.base import Pipeline


class BarrierPipeline(Pipeline):
    """scan-barriers: C_inner, C_outer, R_outer, R_end and both scan tables."""

    command = "scan-barriers"

    def scan(self) -> BarrierReport:
        scan = self.config.scan
        a_range = default_a_range(self.field, scan["a_min_over_epsilon"], scan["a_max_over_reach"])
        return scan_barriers(
            self.field,
            self.grid,
            a_range=a_range,
            samples=scan["samples"],
            r_end_samples=scan["r_end_samples"],
        )

    def write_report(self, report: BarrierReport):
        eps = report.epsilon
        self.writer.write_csv(
            "barrier_scan.csv",
            ["a", "a_over_epsilon", "min_H", "max_H"],
            [(a, a / eps, lo, hi) for a, lo, hi in report.scan.tolist()],
        )
        self.writer.write_csv(
            "sphere_scan.csv", ["R", "min_H", "max_H"], report.sphere_scan.tolist()
        )
        self.writer.write_json("barriers.json", report.as_dict())

    def run(self) -> Dict[str, Any]:
        report = self.scan()
        self.write_report(report)
        return report.as_dict()
