"""Canned experiments: the four-panel oscillator figure and the
slow-decay Hilbert counterexample sweep.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import io
from .curves import DecayCurve, make_named_curve
from .flows import OscillatorSpec, Trajectory, run_heavy_ball_scheme
from .spectral import build_profile, gf_energy

FIG1_MUS = (0.001, 0.1, 1.0, 10.0)
FIG1_ALPHAS = (3.0, 10.0)
FIG1_H = 0.003
FIG1_X0 = 1.0


@dataclass(frozen=True)
class Fig1Run:
    mu: float
    alpha: float
    t_transition: float
    trajectory: Trajectory

    @property
    def csv_name(self) -> str:
        return f"fig1_mu{self.mu:g}_alpha{self.alpha:g}.csv"


def fig1_horizon(mu: float, alpha: float) -> float:
    """Cover the overdamped phase plus several oscillation periods."""
    ttr = alpha / (2.0 * math.sqrt(mu))
    return ttr + max(8.0 * math.pi / math.sqrt(mu), ttr)


def run_fig1_panels(h: float = FIG1_H, x0: float = FIG1_X0,
                    mus=FIG1_MUS, alphas=FIG1_ALPHAS) -> list[Fig1Run]:
    runs = []
    for mu in mus:
        for alpha in alphas:
            spec = OscillatorSpec(mu=mu, alpha=alpha, x0=x0)
            n = int(math.ceil(fig1_horizon(mu, alpha) / math.sqrt(h)))
            traj = run_heavy_ball_scheme(spec.objective(), x0, alpha, h, n)
            runs.append(Fig1Run(mu=mu, alpha=alpha,
                                t_transition=spec.t_transition,
                                trajectory=traj))
    return runs


def crossing_times(traj: Trajectory) -> np.ndarray:
    """Zero crossings of x, linearly interpolated between samples."""
    x = np.asarray(traj.x, dtype=float)
    t = traj.t
    s = np.sign(x)
    s[s == 0] = 1.0
    idx = np.where(np.diff(s) != 0)[0]
    return t[idx] + (t[idx + 1] - t[idx]) * x[idx] / (x[idx] - x[idx + 1])


def write_fig1_outputs(runs: list[Fig1Run], out: str,
                       max_rows: int = 4000) -> list[str]:
    """Write one trajectory CSV per run plus the markers document.

    Rows are strided deterministically so files stay below max_rows samples.
    """
    os.makedirs(out, exist_ok=True)
    written = []
    markers = []
    for run in runs:
        traj = run.trajectory
        stride = max(1, int(math.ceil(len(traj) / max_rows)))
        idx = np.arange(0, len(traj), stride)
        if idx[-1] != len(traj) - 1:
            idx = np.append(idx, len(traj) - 1)
        thin = Trajectory(t=traj.t[idx], x=np.asarray(traj.x)[idx],
                          f=traj.f[idx], gnorm=traj.gnorm[idx],
                          v=None if traj.v is None else np.asarray(traj.v)[idx],
                          meta=traj.meta)
        path = os.path.join(out, run.csv_name)
        io.write_trajectory_csv(thin, path)
        written.append(path)
        markers.append({"mu": run.mu, "alpha": run.alpha,
                        "t_transition": run.t_transition,
                        "csv": run.csv_name,
                        "h": traj.meta["h"], "x0": traj.meta["x0"],
                        "stride": stride})
    mpath = os.path.join(out, "fig1_markers.json")
    io.write_json({"schema_version": 1, "panels": markers}, mpath)
    written.append(mpath)
    return written


def hilbert_experiment(curve: DecayCurve = None, s_max: float = 1e4,
                       t_max: float = 100.0, n_t: int = 25):
    """Rows (t, F_numeric, F_lower_bound, g_target, bias) for the gradient
    flow of the diagonal quadratic with the slow-decay initial state."""
    if curve is None:
        curve = make_named_curve("power", p=1.5)
    profile = build_profile(curve, s_max)
    ts = np.geomspace(1.0, t_max, n_t)
    rows = []
    for t in ts:
        fnum = gf_energy(profile, t)
        g = float(curve.eval(t))
        rows.append((t, fnum, g - profile.bias, g, profile.bias))
    return profile, rows


def write_hilbert_csv(rows, path: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "F_numeric", "F_lower_bound", "g_target", "bias"])
        for row in rows:
            w.writerow([io.fmt(v) for v in row])
