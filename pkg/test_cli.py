import json
import math
from pathlib import Path

import numpy as np
import pytest

from horizonlab import app
from horizonlab.geometry.grid import build_grid
from horizonlab.geometry.horizon import BarrierReport, HorizonGraph
from horizonlab.geometry.submanifolds import PointSet
from horizonlab.pipelines import PIPELINES, acceptance
from horizonlab.pipelines.acceptance import (
    AcceptancePipeline,
    acceptance_config,
    directory_difference,
)

CIRCLE = {"n": 4, "m": 1, "shape": {"sphere": {"radius": 1.0}}, "epsilon": 0.05}
POINT = {"n": 3, "m": 0, "shape": {"points": [[0.0, 0.0, 0.0]]}, "epsilon": 0.1}


def write_config(tmp_path, data, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = app.main(list(argv))
    payload = json.loads(capsys.readouterr().out)
    return code, payload


# --- successful runs ---
def test_analyze_cylinder_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "out"
    code, payload = run(
        capsys, "analyze-cylinder", "--config", write_config(tmp_path, CIRCLE), "--out", str(out)
    )
    assert code == 0
    assert payload["success"] is True
    assert payload["a_hat"] == pytest.approx(math.pi / 2)
    assert payload["negative_below_a_hat"] and payload["positive_above_a_hat"]

    lines = (out / "cylinder_profile.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "a,u_inf,H"
    assert len(lines) == 2 + 201

    summary = json.loads((out / "cylinder.json").read_text(encoding="utf-8"))
    manifest = json.loads((out / "run_manifest.json").read_text(encoding="utf-8"))
    assert summary["config_hash"] == manifest["config_hash"]
    assert manifest["command"] == "analyze-cylinder"
    assert manifest["config"]["epsilon"] == 0.05
    assert "wall_time_seconds" in manifest


def test_field_eval_at_configured_points(tmp_path, capsys):
    config = {**POINT, "field": {"points": [[0.1, 0.0, 0.0], [0.0, 0.5, 0.0]]}}
    out = tmp_path / "field"
    code, payload = run(
        capsys, "field-eval", "--config", write_config(tmp_path, config), "--out", str(out)
    )
    assert code == 0
    assert payload["points"] == 2
    assert payload["min_u"] == pytest.approx(1.2)
    assert payload["asymptotic"]["relative_error"] < 0.01
    rows = (out / "field.csv").read_text(encoding="utf-8").splitlines()
    assert rows[1].split(",")[:4] == ["x0", "x1", "x2", "u"]
    assert float(rows[2].split(",")[3]) == pytest.approx(2.0)


def test_verify_rescaling_for_a_point_is_exact(tmp_path, capsys):
    config = {**POINT, "rescaling": {"grid_count": 1}}
    out = tmp_path / "rescaling"
    code, payload = run(
        capsys, "verify-rescaling", "--config", write_config(tmp_path, config), "--out", str(out)
    )
    assert code == 0
    assert all(level["sup_C0"] == 0.0 for level in payload["levels"])
    assert (out / "rescaling_points.csv").is_file()


def test_export_mesh_of_a_circle_tube(tmp_path, capsys):
    config = {**CIRCLE, "mesh": {"resolution": 8}}
    out = tmp_path / "mesh"
    code, payload = run(
        capsys, "export-mesh", "--config", write_config(tmp_path, config), "--out", str(out)
    )
    assert code == 0
    assert payload["tube"] == {"vertices": 128, "faces": 256}
    assert "horizon" not in payload
    lines = (out / "tube.obj").read_text(encoding="utf-8").splitlines()
    assert sum(line.startswith("v ") for line in lines) == 128
    faces = [line for line in lines if line.startswith("f ")]
    assert len(faces) == 256
    assert min(int(i) for face in faces for i in face.split()[1:]) == 1


def test_run_acceptance_subset(tmp_path, capsys):
    config = {**CIRCLE, "acceptance": {"criteria": [2, 3]}}
    out = tmp_path / "acceptance"
    code, payload = run(
        capsys, "run-acceptance", "--config", write_config(tmp_path, config), "--out", str(out)
    )
    assert code == 0
    assert payload["all_passed"] is True
    assert [row["id"] for row in payload["criteria"]] == [2, 3]
    table = json.loads((out / "acceptance.json").read_text(encoding="utf-8"))
    assert "runtimes" not in table
    assert "runtimes" in json.loads((out / "run_manifest.json").read_text())["summary"]


# --- acceptance criteria ---
def _acceptance(tmp_path):
    return AcceptancePipeline(acceptance_config("circle"), out_dir=str(tmp_path / "acceptance"))


def test_disconnected_horizon_is_judged_node_by_node(tmp_path, monkeypatch):
    eps = 0.1
    grid = build_grid(PointSet([[0.0, 0.0, 0.0]]), (8, [16, 8]), "full")
    # tilted heights: mean height eps, but 2e-3 away from it at the poles
    psi = eps + 2e-3 * grid.omegas[:, 0]
    graphs = [HorizonGraph(grid=grid, psi=psi, converged=True) for _ in range(2)]
    monkeypatch.setattr(acceptance, "find_horizon", lambda *args, **kwargs: graphs)
    row = _acceptance(tmp_path).disconnected_horizon()
    assert not row["passed"]
    assert row["metric"] == pytest.approx(float(np.max(np.abs(psi - eps))))
    assert row["metric"] > 1e-3
    assert "mean|psi-eps|=" in row["detail"]


def test_barrier_bracketing_reports_the_outer_reach_ratio(tmp_path):
    eps = 0.05
    radii = np.geomspace(0.005, 0.9, 30)
    signs = np.where(radii < 0.0785, -1.0, 1.0)
    report = BarrierReport(
        epsilon=eps,
        a_hat=math.pi / 2,
        C_inner=1.4,
        C_outer=1.7,
        R_outer=0.557,
        R_end=2.0,
        scan=np.column_stack([radii, signs, signs]),
        sphere_scan=np.zeros((0, 3)),
    )
    pipeline = _acceptance(tmp_path)
    pipeline._circle_report = report
    row = pipeline.barrier_bracketing()
    ratio = 0.557 / (1.7 * eps)
    assert row["passed"]
    assert row["metric"] == pytest.approx(ratio)
    assert f"R_outer/(C_outer*eps)={ratio:.4g}" in row["detail"]


def test_determinism_detail_names_the_rerun_commands(tmp_path, monkeypatch):
    class Stub:
        def __init__(self, config, out_dir=None):
            self.out_dir = Path(out_dir)

        def run(self):
            self.out_dir.mkdir(parents=True, exist_ok=True)
            (self.out_dir / "data.csv").write_text("1\n", encoding="utf-8")
            return {}

    for command in ("analyze-cylinder", "field-eval", "scan-barriers", "find-horizon"):
        monkeypatch.setitem(PIPELINES, command, Stub)
    monkeypatch.setitem(PIPELINES, "verify-rescaling", Stub)
    row = _acceptance(tmp_path).determinism()
    assert row["passed"]
    assert row["detail"].startswith(
        "reran analyze-cylinder,field-eval,scan-barriers,find-horizon,verify-rescaling twice"
    )
    assert "run_manifest.json only" in row["detail"]


# --- determinism ---
def test_repeated_runs_are_byte_identical(tmp_path, capsys):
    path = write_config(tmp_path, CIRCLE)
    first, second = tmp_path / "a", tmp_path / "b"
    assert app.main(["analyze-cylinder", "--config", path, "--out", str(first)]) == 0
    assert app.main(["analyze-cylinder", "--config", path, "--out", str(second)]) == 0
    capsys.readouterr()
    assert directory_difference(first, second) == []


def test_directory_difference_reports_changed_files(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for d in (first, second):
        d.mkdir()
    (first / "x.csv").write_text("1\n")
    (second / "x.csv").write_text("2\n")
    (first / "run_manifest.json").write_text("{}")
    (first / "only.json").write_text("{}")
    assert directory_difference(first, second) == ["only.json", "x.csv"]


# --- failures ---
def test_config_error_exit_code_and_payload(tmp_path, capsys):
    out = tmp_path / "bad"
    config = {**CIRCLE, "epsilon": -1.0}
    code, payload = run(
        capsys, "analyze-cylinder", "--config", write_config(tmp_path, config), "--out", str(out)
    )
    assert code == 2
    assert payload["success"] is False
    assert payload["error_type"] == "ConfigError"
    assert payload["context"]["field"] == "epsilon"
    on_disk = json.loads((out / "error.json").read_text(encoding="utf-8"))
    assert on_disk == payload


def test_missing_config_file(tmp_path, capsys):
    code, payload = run(
        capsys,
        "field-eval",
        "--config",
        str(tmp_path / "nope.json"),
        "--out",
        str(tmp_path / "out"),
    )
    assert code == 2
    assert payload["error_type"] == "ConfigError"


def test_domain_error_exit_code(tmp_path, capsys):
    config = {**POINT, "field": {"points": [[0.0, 0.0, 0.0]]}}
    code, payload = run(
        capsys,
        "field-eval",
        "--config",
        write_config(tmp_path, config),
        "--out",
        str(tmp_path / "out"),
    )
    assert code == 1
    assert payload["error_type"] == "SingularityError"


def test_unexpected_errors_map_to_exit_code_one(tmp_path, capsys, monkeypatch):
    class Broken:
        """broken pipeline"""

        def __init__(self, config, out_dir=None):
            pass

        def process(self):
            raise RuntimeError("boom")

    monkeypatch.setitem(app.PIPELINES, "analyze-cylinder", Broken)
    code, payload = run(
        capsys,
        "analyze-cylinder",
        "--config",
        write_config(tmp_path, CIRCLE),
        "--out",
        str(tmp_path / "out"),
    )
    assert code == 1
    assert payload == {
        "success": False,
        "error": "boom",
        "error_type": "RuntimeError",
        "exit_code": 1,
        "context": {},
    }


def test_subcommand_requires_config():
    with pytest.raises(SystemExit):
        app.main(["scan-barriers"])
