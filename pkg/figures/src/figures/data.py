"""Loading and validation of the sweep CSV corpus.

Input files follow the fixed schema ``experiment,grid_param,grid_value,round,
metric,producer,value,stderr,mode,seed`` with an optional leading ``#``
comment line. This module knows nothing about how the files were produced.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_COLUMNS = ("experiment", "grid_param", "grid_value", "round", "metric",
                    "producer", "value", "stderr", "mode", "seed")


class SchemaError(ValueError):
    """A CSV file does not conform to the sweep schema."""


@dataclass(frozen=True)
class SweepTable:
    """Parsed rows of one sweep CSV."""

    path: Path
    experiment: str
    grid_param: str
    rows: tuple  # of dicts with grid_value/value/stderr floats, round int

    def metrics(self) -> set[str]:
        return {row["metric"] for row in self.rows}

    def series(self, metric: str, producer: str = ""):
        """(x, y, yerr) for one metric, sorted by grid value."""
        picked = [r for r in self.rows
                  if r["metric"] == metric and r["producer"] == producer]
        if not picked:
            raise SchemaError(f"{self.path}: no rows for metric {metric!r}")
        picked.sort(key=lambda r: r["grid_value"])
        x = np.array([r["grid_value"] for r in picked])
        y = np.array([r["value"] for r in picked])
        yerr = np.array([r["stderr"] for r in picked])
        return x, y, yerr

    def constant(self, metric: str) -> float:
        """Value of a metric that is constant across the grid."""
        _, y, _ = self.series(metric)
        if y.size and np.ptp(y) > 1e-12:
            raise SchemaError(f"{self.path}: metric {metric!r} is not constant")
        return float(y[0])


def load_table(path) -> SweepTable:
    """Read one sweep CSV, skipping leading comment lines.

    Raises SchemaError naming any missing column, and on an empty body.
    """
    path = Path(path)
    with path.open() as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: no header line")
    reader = csv.DictReader(lines)
    missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"{path}: missing columns: {', '.join(missing)}")
    rows = []
    for raw in reader:
        rows.append({
            "experiment": raw["experiment"],
            "grid_param": raw["grid_param"],
            "grid_value": float(raw["grid_value"]),
            "round": int(raw["round"]),
            "metric": raw["metric"],
            "producer": raw["producer"],
            "value": float(raw["value"]),
            "stderr": float(raw["stderr"]) if raw["stderr"] else 0.0,
            "mode": raw["mode"],
        })
    if not rows:
        raise SchemaError(f"{path}: empty body")
    return SweepTable(path=path, experiment=rows[0]["experiment"],
                      grid_param=rows[0]["grid_param"], rows=tuple(rows))
