"""
Deterministic artifact emission.

Every data file carries the config hash. Floats are written with 17
significant digits and inf/nan as strings; nothing time-dependent goes into
data files (wall time lives only in run_manifest.json).
"""

import csv
import json
import logging
import math
import platform
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import scipy

from horizonlab.geometry.mesh import Mesh

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"
ERROR_NAME = "error.json"


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return ""
    return str(value)


def normalize(value: Any) -> Any:
    """JSON-ready copy: numpy to Python, tuples to lists, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, np.ndarray):
        return [normalize(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return format_float(value)
        return float(format(value, ".17g"))
    if isinstance(value, Path):
        return str(value)
    return value


def package_versions() -> Dict[str, str]:
    from horizonlab import __version__

    return {
        "horizonlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def status(message: str):
    """Human status line on stderr; stdout stays machine-readable."""
    print(message, file=sys.stderr)


class ArtifactWriter:
    """
    Writes CSV/JSON/OBJ artifacts into one output directory.

    Args:
        out_dir: Target directory, created on first use
        config_hash: Hash of the echoed config, embedded in every file
    """

    def __init__(self, out_dir: Union[str, Path], config_hash: str):
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.written: List[str] = []

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        if name not in self.written:
            self.written.append(name)
        return path

    def _announce(self, path: Path):
        logger.debug("wrote %s", path)
        status(f"📄 {path}")

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(f"# config_hash={self.config_hash}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(list(header))
            for row in rows:
                writer.writerow([_cell(v) for v in row])
        self._announce(path)
        return path

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._path(name)
        data = normalize(payload)
        data["config_hash"] = self.config_hash
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
            f.write("\n")
        self._announce(path)
        return path

    def write_obj(self, name: str, mesh: Mesh, comment: Optional[str] = None) -> Path:
        """Wavefront OBJ with 1-based face indices."""
        path = self._path(name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"# config_hash={self.config_hash}\n")
            if comment:
                f.write(f"# {comment}\n")
            for vertex in mesh.vertices:
                f.write("v " + " ".join(format_float(float(c)) for c in vertex) + "\n")
            for face in mesh.faces:
                f.write("f " + " ".join(str(int(i) + 1) for i in face) + "\n")
        self._announce(path)
        return path

    def write_manifest(
        self, command: str, echo: Dict[str, Any], wall_time: float, summary: Optional[dict] = None
    ) -> Path:
        payload = {
            "command": command,
            "config": echo,
            "versions": package_versions(),
            "wall_time_seconds": wall_time,
            "artifacts": sorted(self.written),
        }
        if summary is not None:
            payload["summary"] = summary
        return self.write_json(MANIFEST_NAME, payload)

    def write_error(self, payload: Dict[str, Any]) -> Path:
        path = self.out_dir / ERROR_NAME
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(normalize(payload), f, indent=2, sort_keys=True)
            f.write("\n")
        return path
