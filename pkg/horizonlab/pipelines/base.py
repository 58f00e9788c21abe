"""
Shared plumbing for subcommand pipelines: output directory, artifact writer,
lazily built field and grid, and the run manifest.
"""

import logging
import os
import time
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from horizonlab.config import DEFAULT_OUT_DIR, RunConfig
from horizonlab.geometry.conformal import ConformalField
from horizonlab.geometry.grid import UNSGrid, build_grid
from horizonlab.reporting import ArtifactWriter, status

load_dotenv()

logger = logging.getLogger(__name__)


class Pipeline:
    """
    Base class of the subcommand pipelines.

    Subclasses set ``command`` and implement ``run``, which writes the
    command's artifacts and returns its JSON summary.
    """

    command = ""

    def __init__(self, config: RunConfig, out_dir: Optional[str] = None):
        """
        Args:
            config: Validated run configuration
            out_dir: Output directory. If not provided, uses the config's, then
                HORIZONLAB_OUT_DIR.
        """
        self.config = config
        self.out_dir = Path(
            out_dir or config.out_dir or os.environ.get("HORIZONLAB_OUT_DIR", DEFAULT_OUT_DIR)
        )
        self.writer = ArtifactWriter(self.out_dir, config.config_hash)
        self._field: Optional[ConformalField] = None
        self._grid: Optional[UNSGrid] = None

    @property
    def field(self) -> ConformalField:
        """Lazy load the conformal field of the configured shape and epsilon."""
        if self._field is None:
            self._field = ConformalField(
                self.config.submanifold,
                self.config.epsilon,
                self.config.tolerances["quadrature"],
            )
        return self._field

    @property
    def grid(self) -> UNSGrid:
        if self._grid is None:
            config = self.config
            self._grid = build_grid(config.submanifold, config.resolution, config.mode)
        return self._grid

    def run(self) -> Dict[str, Any]:
        raise NotImplementedError

    def process(self) -> Dict[str, Any]:
        """
        Run the pipeline and write the run manifest.

        Returns:
            The JSON summary of the run
        """
        start = time.perf_counter()
        logger.info("%s: starting (config %s)", self.command, self.config.config_hash[:12])
        summary = self.run()
        elapsed = time.perf_counter() - start
        self.writer.write_manifest(self.command, self.config.echo(), elapsed, summary)
        status(f"✅ {self.command} finished in {elapsed:.2f}s")
        return summary
