#  (c) Copyright 2026 skewmix authors. All rights reserved.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from skewmix.experiments.types import ResultManifest

LOGGER = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def jsonable(value: Any) -> Any:
    """Converts numpy scalars and arrays, complex numbers, paths and dataclass-like dicts for json."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


class OutputWriter:
    """Writes the files of one run into a directory and remembers every path it emitted."""

    def __init__(self, directory: Path, plots: bool = False):
        self.directory = Path(directory)
        self.plots = plots
        self.emitted: List[Path] = []
        self.directory.mkdir(parents=True, exist_ok=True)

    def _record(self, name: str) -> Path:
        path = self.directory / name
        if path not in self.emitted:
            self.emitted.append(path)
        return path

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._record(name)
        frame.to_csv(path, index=False, float_format="%.17g")
        LOGGER.debug("wrote %d rows to %s", len(frame), path)
        return path

    def write_json(self, name: str, document: Dict[str, Any]) -> Path:
        path = self._record(name)
        path.write_text(json.dumps(jsonable(document), indent=2, sort_keys=True) + "\n")
        return path

    def plot(
        self,
        name: str,
        x: Sequence[float],
        series: Dict[str, Sequence[float]],
        xlabel: str,
        ylabel: str,
        log: bool = False,
    ) -> None:
        """Line plot as SVG when plots are enabled and matplotlib is installed."""
        if not self.plots:
            return
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            LOGGER.warning("matplotlib is not installed, skipping %s", name)
            return
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, ys in series.items():
            ax.plot(x, ys, label=label)
        if log:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        path = self._record(name)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)

    def write_manifest(self, manifest: ResultManifest) -> Path:
        path = self._record(MANIFEST_NAME)
        manifest.outputs = list(self.emitted)
        path.write_text(json.dumps(jsonable(manifest.as_dict()), indent=2, sort_keys=True) + "\n")
        return path
