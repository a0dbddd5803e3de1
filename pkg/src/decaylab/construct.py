"""Build 1-d convex objectives realizing a prescribed decay curve.

The realization substitutes x = Psi(t) = ∫_t^∞ sqrt(-g'(s)) ds and sets
phi(Psi(t)) = g(t), so the gradient flow of phi started at X = Psi(t_min)
replays g. The no-minimizer constructions integrate Psi from the left end
instead and never reach the infimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .curves import ASSERTED, DecayCurve, _flags

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(12)

MINIMUM_VALUE_TOL = 1e-10   # |phi(0)| tolerance for has_minimizer objectives


class ConstructError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexObjective1D:
    """Piecewise cubic-Hermite convex objective defined by a knot table.

    xs strictly increasing, slope values dphis non-decreasing. Left of xs[0]
    the objective continues as ys[0] + (x - xs[0])^2 ("square" mode, used
    when xs[0] = 0 is the minimizer) or linearly with the first slope.
    Right of xs[-1] it continues linearly with the last slope.
    """

    xs: np.ndarray
    phis: np.ndarray
    dphis: np.ndarray
    X: float
    left_mode: str = "square"           # "square" | "linear"
    has_minimizer: bool = True
    label: str = "objective"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.phis, dtype=float)
        ds = np.asarray(self.dphis, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.shape != ds.shape:
            raise ConstructError("knot arrays must be 1-d and equally sized")
        if np.any(np.diff(xs) <= 0):
            raise ConstructError("knot positions must be strictly increasing")
        scale = max(float(np.max(np.abs(ds))), 1e-300)
        if np.any(np.diff(ds) < -1e-12 * scale):
            raise ConstructError("knot slopes must be non-decreasing (convexity)")
        if np.any(ys < -1e-12 * max(float(np.max(np.abs(ys))), 1e-300)):
            raise ConstructError("objective values must be non-negative")
        if self.has_minimizer:
            if abs(ys[0]) > MINIMUM_VALUE_TOL or abs(xs[0]) > MINIMUM_VALUE_TOL:
                raise ConstructError("has_minimizer objective must carry the "
                                     "(0, 0) knot")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "phis", ys)
        object.__setattr__(self, "dphis", ds)

    # -- evaluation ---------------------------------------------------------

    def _left_code(self) -> int:
        return K.LEFT_SQUARE if self.left_mode == "square" else K.LEFT_LINEAR

    def kernel_args(self):
        return (K.OBJ_TABLE, 0.0, 0.0, self.xs, self.phis, self.dphis,
                self._left_code())

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        xs, ys, ds = self.xs, self.phis, self.dphis
        val = np.empty_like(x)
        der = np.empty_like(x)

        lo = x <= xs[0]
        hi = x >= xs[-1]
        mid = ~(lo | hi)
        if np.any(lo):
            dx = x[lo] - xs[0]
            if self.left_mode == "square":
                val[lo] = ys[0] + dx * dx
                der[lo] = 2.0 * dx
            else:
                val[lo] = ys[0] + ds[0] * dx
                der[lo] = ds[0]
        if np.any(hi):
            dx = x[hi] - xs[-1]
            val[hi] = ys[-1] + ds[-1] * dx
            der[hi] = ds[-1]
        if np.any(mid):
            xm = x[mid]
            j = np.searchsorted(xs, xm) - 1
            h = xs[j + 1] - xs[j]
            s = (xm - xs[j]) / h
            s2, s3 = s * s, s ** 3
            val[mid] = ((2 * s3 - 3 * s2 + 1) * ys[j] + (s3 - 2 * s2 + s) * h * ds[j]
                        + (-2 * s3 + 3 * s2) * ys[j + 1] + (s3 - s2) * h * ds[j + 1])
            der[mid] = ((6 * s2 - 6 * s) / h * ys[j] + (3 * s2 - 4 * s + 1) * ds[j]
                        + (-6 * s2 + 6 * s) / h * ys[j + 1] + (3 * s2 - 2 * s) * ds[j + 1])
        if scalar:
            return float(val[0]), float(der[0])
        return val, der

    def value(self, x):
        return self.value_and_grad(x)[0]

    def grad(self, x):
        return self.value_and_grad(x)[1]

    # -- serialization ------------------------------------------------------

    def to_table_document(self) -> dict:
        return {
            "x": self.xs.tolist(),
            "phi": self.phis.tolist(),
            "dphi": self.dphis.tolist(),
            "X": self.X,
            "left_mode": self.left_mode,
            "has_minimizer": self.has_minimizer,
            "label": self.label,
        }


def default_grid(curve: DecayCurve, t_end: float,
                 points_per_decade: int = 96) -> np.ndarray:
    """Geometric time grid from t_min to t_end (geometric in 1 + t - t_min)."""
    span = 1.0 + (t_end - curve.t_min)
    n = max(int(points_per_decade * math.log10(span)), 16)
    return curve.t_min + np.geomspace(1.0, span, n + 1) - 1.0


def _psi_values(curve: DecayCurve, grid: np.ndarray):
    """Psi(t_j) = ∫_{t_j}^∞ sqrt(-g') for each grid point, plus a bias bound.

    Uses the curve's closed-form tail when available; otherwise Gauss-Legendre
    panels over the grid with the tail beyond the grid set to zero and the
    dropped mass bounded below by g(T)/sqrt(-g'(T)).
    """
    if curve.psi_tail is not None:
        return np.array([curve.psi_tail(t) for t in grid], dtype=float), 0.0
    mids = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * (grid[1:] - grid[:-1])
    cells = np.zeros(len(grid) - 1)
    for k, (m, hw) in enumerate(zip(mids, half)):
        s = m + hw * GL_NODES
        integrand = np.sqrt(np.maximum(-curve.deriv(s), 0.0))
        cells[k] = hw * float(np.dot(GL_WEIGHTS, integrand))
    psi = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    T = grid[-1]
    dT = max(-curve.deriv(T), 0.0)
    bias = curve.eval(T) / math.sqrt(dT) if dT > 0 else 0.0
    return psi, bias


def build_objective(curve: DecayCurve, grid=None, t_end: float = 100.0,
                    points_per_decade: int = 96) -> ConvexObjective1D:
    """Realize a decay curve as a convex objective with a minimizer at 0."""
    for name in ("monotone_decreasing", "convex", "limit_zero",
                 "sqrt_deriv_integrable"):
        if not curve.flag_ok(name):
            raise ConstructError(
                f"curve {curve.label!r} flag {name} is neither asserted nor "
                "verified; run verify_flags or assert it explicitly")
    if grid is None:
        grid = default_grid(curve, t_end, points_per_decade)
    grid = np.asarray(grid, dtype=float)
    if grid[0] < curve.t_min:
        raise ConstructError("grid starts before the curve domain")

    psi, tail_bias = _psi_values(curve, grid)
    g = curve.eval(grid)
    slope = np.sqrt(np.maximum(-curve.deriv(grid), 0.0))

    # knots run from the minimizer (x=0) out to X = Psi(t_min);
    # time decreasing <-> x increasing
    xs = np.concatenate([[0.0], psi[::-1]])
    ys = np.concatenate([[0.0], g[::-1]])
    ds = np.concatenate([[0.0], slope[::-1]])

    # drop knots that collapse in x (flat tail of the curve)
    keep = np.concatenate([[True], np.diff(xs) > 1e-15 * max(xs[-1], 1.0)])
    xs, ys, ds = xs[keep], ys[keep], ds[keep]

    return ConvexObjective1D(
        xs=xs, phis=ys, dphis=ds, X=float(xs[-1]),
        left_mode="square", has_minimizer=True,
        label=f"realized[{curve.label}]",
        meta={"curve": curve.document or {"label": curve.label},
              "grid_t_min": float(grid[0]), "grid_t_max": float(grid[-1]),
              "n_knots": int(len(xs)), "psi_tail_bias": float(tail_bias)},
    )


# ---------------------------------------------------------------------------
# no-minimizer constructions


def _panel_integral(fn, lo: float, hi: float, panels: int) -> float:
    edges = np.linspace(lo, hi, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    total = 0.0
    for m, hw in zip(mids, half):
        total += hw * float(np.dot(GL_WEIGHTS, fn(m + hw * GL_NODES)))
    return total


def build_no_minimizer_envelope(curve: DecayCurve, s_big: float = 1e13,
                                panels_per_unit: int = 2) -> DecayCurve:
    """Convex envelope phi(t) = ∫_t^∞ (s-t)(-g'(s))/s ds below a monotone curve.

    Satisfies g(2t)/2 <= phi(t) <= g(t). Integrals are evaluated with
    Gauss-Legendre panels under the substitution s = t e^u.
    """
    if not (curve.flag_ok("monotone_decreasing") and curve.flag_ok("limit_zero")):
        raise ConstructError("envelope needs a monotone curve with limit 0; "
                             "preprocess first")

    def _env(t: float) -> float:
        t = max(float(t), curve.t_min)
        if t == 0.0:
            # ∫_0^∞ (s-0)(-g')/s ds = g(0)
            return float(curve.eval(0.0))
        U = max(math.log(s_big / t), 1.0)
        return _panel_integral(
            lambda u: t * (np.exp(u) - 1.0) * np.maximum(-curve.deriv(t * np.exp(u)), 0.0),
            0.0, U, max(int(panels_per_unit * U), 8))

    def _env_deriv(t: float) -> float:
        t = max(float(t), curve.t_min)
        if t == 0.0:
            t = 1e-12
        U = max(math.log(s_big / t), 1.0)
        val = _panel_integral(
            lambda u: np.maximum(-curve.deriv(t * np.exp(u)), 0.0),
            0.0, U, max(int(panels_per_unit * U), 8))
        return -val

    def ev(t):
        if np.ndim(t) == 0:
            return _env(float(t))
        return np.array([_env(float(v)) for v in np.atleast_1d(t)])

    def dv(t):
        if np.ndim(t) == 0:
            return _env_deriv(float(t))
        return np.array([_env_deriv(float(v)) for v in np.atleast_1d(t)])

    return DecayCurve(
        eval_fn=ev, deriv_fn=dv, t_min=curve.t_min,
        flags=_flags(monotone_decreasing=ASSERTED, convex=ASSERTED,
                     limit_zero=ASSERTED),
        label=f"envelope[{curve.label}]",
    )


def preprocess_monotone_smooth(raw, t_min: float = 0.0, horizon: float = 200.0,
                               n_grid: int = 20001,
                               tail_tol: float = 1e-3) -> DecayCurve:
    """Monotonize (running max from the right) then mollify by a unit average.

    raw must tend to 0: its running maximum over the last tenth of the horizon
    must be below tail_tol times its overall maximum.
    """
    grid = np.linspace(t_min, t_min + horizon, n_grid)
    vals = np.asarray(raw(grid), dtype=float)
    peak = float(np.max(np.abs(vals)))
    tail = float(np.max(np.abs(vals[grid > t_min + 0.9 * horizon])))
    if peak > 0 and tail > tail_tol * peak:
        raise ConstructError("raw does not tend to 0 over the configured horizon")

    gm = np.maximum.accumulate(vals[::-1])[::-1]
    # cumulative integral of the monotonized samples for the unit average
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (gm[1:] + gm[:-1]) * np.diff(grid))])

    def C(t):
        t = np.clip(t, grid[0], grid[-1])
        return np.interp(t, grid, cum)

    def GM(t):
        t = np.clip(t, grid[0], grid[-1])
        return np.interp(t, grid, gm)

    lo = t_min + 1.0

    def ev(t):
        t = np.maximum(np.asarray(t, dtype=float), lo)
        return C(t) - C(t - 1.0)

    def dv(t):
        t = np.maximum(np.asarray(t, dtype=float), lo)
        return GM(t) - GM(t - 1.0)

    return DecayCurve(
        eval_fn=ev, deriv_fn=dv, t_min=lo,
        flags=_flags(monotone_decreasing=ASSERTED, limit_zero=ASSERTED),
        label="preprocessed",
    )


def build_no_minimizer_objective(curve: DecayCurve, grid=None,
                                 t_end: float = 100.0,
                                 points_per_decade: int = 96,
                                 variant: str = "gradient_flow") -> ConvexObjective1D:
    """Objective without a minimizer whose dynamics stay above the curve.

    variant "gradient_flow": f(∫_{t0}^t sqrt(-phi')) = phi(t) for a convex
    decreasing positive curve phi (use build_no_minimizer_envelope output).
    variant "heavy_ball": the direct rescaling f(x) = g(t0 + x / (2 sqrt(g(t0)))).
    """
    if grid is None:
        grid = default_grid(curve, t_end, points_per_decade)
    grid = np.asarray(grid, dtype=float)
    g = np.array([curve.eval(t) for t in grid], dtype=float)
    dg = np.array([curve.deriv(t) for t in grid], dtype=float)
    if np.any(g <= 0):
        raise ConstructError("curve must be strictly positive (no minimizer)")
    if np.any(dg >= 0):
        raise ConstructError("curve must be strictly decreasing; a flat "
                             "segment would make the objective degenerate")

    if variant == "gradient_flow":
        slope = np.sqrt(-dg)
        # x_j accumulates ∫ sqrt(-phi') from the grid start
        cells = 0.5 * (slope[1:] + slope[:-1]) * np.diff(grid)
        # refine each cell with Gauss-Legendre when deriv is cheap
        mids = 0.5 * (grid[:-1] + grid[1:])
        half = 0.5 * np.diff(grid)
        for k in range(len(cells)):
            s = mids[k] + half[k] * GL_NODES
            integ = np.sqrt(np.maximum(-np.asarray(curve.deriv(s), dtype=float), 0.0))
            cells[k] = half[k] * float(np.dot(GL_WEIGHTS, integ))
        xs = np.concatenate([[0.0], np.cumsum(cells)])
        ds = -slope
    elif variant == "heavy_ball":
        scale = 2.0 * math.sqrt(g[0])
        xs = scale * (grid - grid[0])
        ds = dg / scale
    else:
        raise ConstructError(f"unknown variant {variant!r}")

    return ConvexObjective1D(
        xs=xs, phis=g, dphis=ds, X=float(xs[-1]),
        left_mode="linear", has_minimizer=False,
        label=f"no_minimizer[{variant}][{curve.label}]",
        meta={"curve": curve.document or {"label": curve.label},
              "variant": variant, "infimum": 0.0,
              "grid_t_min": float(grid[0]), "grid_t_max": float(grid[-1])},
    )
