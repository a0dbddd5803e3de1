"""CSV/JSON serialization for trajectories, knot tables, and reports.

Floating-point values are printed with 17 significant digits so identical
(config, seed) runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Iterable

import numpy as np

from .construct import ConvexObjective1D
from .flows import Trajectory
from .verify import DecayReport


def fmt(v) -> str:
    return f"{float(v):.17g}"


def _component_headers(name: str, arr: np.ndarray) -> list[str]:
    if arr.ndim == 1:
        return [name]
    return [f"{name}{i}" for i in range(arr.shape[1])]


def write_trajectory_csv(traj: Trajectory, path: str) -> None:
    """Columns: t, x components, v components (when present), f, gnorm."""
    x = np.asarray(traj.x)
    headers = ["t"] + _component_headers("x", x)
    cols = [traj.t] + ([x] if x.ndim == 1 else [x[:, i] for i in range(x.shape[1])])
    if traj.v is not None:
        v = np.asarray(traj.v)
        headers += _component_headers("v", v)
        cols += [v] if v.ndim == 1 else [v[:, i] for i in range(v.shape[1])]
    headers += ["f", "gnorm"]
    cols += [traj.f, traj.gnorm]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(headers)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])


def write_trajectory_meta(traj: Trajectory, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(traj.meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def read_trajectory_csv(path: str) -> dict:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        headers = next(r)
        rows = [[float(v) for v in row] for row in r]
    data = np.array(rows)
    return {h: data[:, i] for i, h in enumerate(headers)}


def write_knot_table_csv(obj: ConvexObjective1D, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "phi", "dphi"])
        for row in zip(obj.xs, obj.phis, obj.dphis):
            w.writerow([fmt(v) for v in row])


def write_objective_json(obj: ConvexObjective1D, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(obj.to_table_document(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(report: DecayReport, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "lhs", "rhs"])
        for row in zip(report.t, report.lhs, report.rhs):
            w.writerow([fmt(v) for v in row])


def write_report_summary(reports: Iterable[DecayReport], path: str) -> None:
    with open(path, "w") as fh:
        json.dump([r.summary() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_json(doc, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def out_dir(path: str | None) -> str:
    """Resolve the output directory: flag value, DECAYLAB_OUT, or cwd."""
    root = path or os.environ.get("DECAYLAB_OUT") or "."
    os.makedirs(root, exist_ok=True)
    return root
