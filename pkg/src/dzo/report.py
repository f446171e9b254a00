"""Render convergence figures from trace CSVs, next to the delimited output.

Layout follows the benchmark convention: one column per dataset, top row
objective at the network average versus total network-wide oracle calls,
bottom row the same objective versus communication rounds, one curve per
algorithm. Uses the object-oriented matplotlib API so no GUI backend is
touched.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .metrics import TRACE_COLUMNS

TRACE_SUFFIX = ".csv"


def read_trace_csv(path: str | Path) -> dict[str, np.ndarray]:
    """Load one trace; every schema column must be present."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty trace file")
        missing = [c for c in TRACE_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        raw = list(reader)
    cols = {c: np.array([float(row[header.index(c)]) for row in raw]) for c in header}
    t = cols["t"]
    if t.size and np.any(np.diff(t) <= 0):
        raise ValueError(f"{path}: t column must be strictly increasing")
    return cols


def discover_traces(trace_dir: str | Path) -> dict[str, dict[str, Path]]:
    """Map dataset -> algorithm -> path via the `<dataset>__<algorithm>.csv`
    naming convention; files without the separator are ignored."""
    found: dict[str, dict[str, Path]] = {}
    for path in sorted(Path(trace_dir).glob(f"*{TRACE_SUFFIX}")):
        stem = path.name[: -len(TRACE_SUFFIX)]
        dataset, sep, algorithm = stem.partition("__")
        if not sep or not dataset or not algorithm:
            continue
        found.setdefault(dataset, {})[algorithm] = path
    return found


def render_figure(trace_dir: str | Path, out_path: str | Path, logy: bool = False) -> Path:
    """Write the 2 x k panel grid for all traces found in `trace_dir`."""
    traces = discover_traces(trace_dir)
    if not traces:
        raise FileNotFoundError(f"no trace CSVs found in {trace_dir}")
    datasets = sorted(traces)
    k = len(datasets)

    fig = Figure(figsize=(4.2 * k, 6.4))
    axes = fig.subplots(2, k, squeeze=False)
    for col, dataset in enumerate(datasets):
        for algorithm in sorted(traces[dataset]):
            cols = read_trace_csv(traces[dataset][algorithm])
            axes[0][col].plot(cols["oracle_calls_total"], cols["f_xbar"], label=algorithm)
            axes[1][col].plot(cols["comm_rounds_total"], cols["f_xbar"], label=algorithm)
        axes[0][col].set_title(dataset)
        axes[0][col].set_xlabel("oracle calls (network-wide)")
        axes[1][col].set_xlabel("communication rounds")
        for row in (0, 1):
            axes[row][col].set_ylabel("objective at network average")
            if logy:
                axes[row][col].set_yscale("log")
            axes[row][col].legend()
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=140)
    return out_path
