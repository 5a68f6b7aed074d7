"""CSV output for evaluation reports, embeddings, and node signals.

All writers emit a header row, format floats at 6 significant digits, and
order rows deterministically, so a repeated run with the same seed
produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


@dataclass
class EvalReport:
    """Scalar metrics plus optional per-fold/per-seed series."""

    name: str
    metrics: dict[str, float] = field(default_factory=dict)
    series: dict[str, list[float]] = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)

    def __post_init__(self):
        for key, value in self.metrics.items():
            if not np.isfinite(value):
                raise ValueError(f"metric {key!r} is not finite: {value}")

    def summary(self) -> str:
        parts = [f"{k}={_fmt(v)}" for k, v in sorted(self.metrics.items())]
        return f"[{self.name}] " + " ".join(parts)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def _open_out(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_report(path, report: EvalReport) -> Path:
    """metric/value rows, then one row per series entry, sorted by key."""
    path = _open_out(path)
    lines = ["kind,key,index,value"]
    for key in sorted(report.metrics):
        lines.append(f"metric,{key},,{_fmt(report.metrics[key])}")
    for key in sorted(report.series):
        for idx, value in enumerate(report.series[key]):
            lines.append(f"series,{key},{idx},{_fmt(value)}")
    for idx, seed in enumerate(report.seeds):
        lines.append(f"seed,seed,{idx},{seed}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_embeddings(path, embeddings: np.ndarray, ids: Optional[Sequence] = None) -> Path:
    path = _open_out(path)
    embeddings = np.asarray(embeddings)
    if ids is None:
        ids = range(embeddings.shape[0])
    header = "id," + ",".join(f"e{j}" for j in range(embeddings.shape[1]))
    lines = [header]
    for gid, row in zip(ids, embeddings):
        lines.append(f"{gid}," + ",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_signals(path, columns: dict[str, np.ndarray]) -> Path:
    """Per-node signal columns (original, reconstructions, residuals...)."""
    path = _open_out(path)
    names = list(columns)
    arrays = [np.asarray(columns[k]).ravel() for k in names]
    length = len(arrays[0])
    if any(len(a) != length for a in arrays):
        raise ValueError("signal columns must share a length")
    lines = ["node," + ",".join(names)]
    for i in range(length):
        lines.append(f"{i}," + ",".join(_fmt(a[i]) for a in arrays))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv_columns(path) -> dict[str, list[str]]:
    """Tiny reader for the files written above (used by tests and demos)."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    cols: dict[str, list[str]] = {h: [] for h in header}
    for line in lines[1:]:
        for h, cell in zip(header, line.split(",")):
            cols[h].append(cell)
    return cols
