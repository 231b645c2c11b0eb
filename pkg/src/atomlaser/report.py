"""Container for the output of a single run (analytic or numerical)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np


@dataclass
class RunReport:
    """Time series, summary scalars and provenance of one run.

    ``series`` maps column names to equal-length arrays and keeps insertion
    order, which is the CSV column order. ``profiles`` holds spatial data
    (e.g. effective potential snapshots) sharing the ``"x"`` axis.
    """

    kind: str
    series: Dict[str, np.ndarray]
    summary: Dict[str, Any] = field(default_factory=dict)
    manifest: Dict[str, Any] = field(default_factory=dict)
    profiles: Dict[str, np.ndarray] = field(default_factory=dict)
    snapshots: List[Any] = field(default_factory=list)

    @property
    def t(self) -> np.ndarray:
        return self.series["t"]

    @property
    def parameters(self) -> Dict[str, Any]:
        return self.manifest.get("parameters", {})
