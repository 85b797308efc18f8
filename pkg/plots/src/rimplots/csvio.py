"""CSV/JSON input for the plotting scripts.

Readers consume only the exported result files: pattern sweeps
(``psi_deg, gain_dbi``), chain logs (``iter, G_db, Gtrue_db, Gpred_db,
accepted``), and the experiment summary JSON. Lines starting with ``#`` are
provenance comments and are skipped. Missing columns are reported with the
file and column name.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class PlotInputError(ValueError):
    """Missing file, missing column, or empty/malformed plot input."""


def read_csv_columns(path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise PlotInputError(f"{path}: file not found")
    header = None
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in line.split(",")]
                continue
            rows.append(line.split(","))
    if header is None:
        raise PlotInputError(f"{path}: no header row found")
    for col in required:
        if col not in header:
            raise PlotInputError(f"{path}: missing column '{col}' "
                                 f"(found: {', '.join(header)})")
    if not rows:
        raise PlotInputError(f"{path}: no data rows")
    data = np.array(rows, dtype=object)
    out = {}
    for col in required:
        i = header.index(col)
        try:
            out[col] = data[:, i].astype(float)
        except ValueError as exc:
            raise PlotInputError(f"{path}: column '{col}' is not numeric: "
                                 f"{exc}") from exc
    return out


def read_summary(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise PlotInputError(f"{path}: file not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PlotInputError(f"{path}: not valid JSON: {exc}") from exc
