"""Discrete comparison of sqrt-derivative integrals of ordered convex curves.

If G >= g (both convex, decreasing to 0), the cell increments
a_i = g(T(i-1)/N) - g(Ti/N) and the tail masses g(T), G(T) form sequences
whose tail sums telescope to the curve values, so tail dominance is exactly
G >= g on the grid. Splitting both tail masses into a common number M of
equal pieces makes both sequences decreasing (the whole-tail term may exceed
the last cell increment), after which the averaging-map certificate yields
the split inequality sum sqrt(b) >= sum sqrt(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .curves import DecayCurve
from .majorize import (SequencePair, build_averaging_map,
                       check_tail_dominance, jensen_sqrt_certificate)

DOMINANCE_TOL = 1e-12
SPLIT_CAP = 10 ** 6


class CompareError(ValueError):
    pass


def discretize_increments(curve: DecayCurve, T: float, N: int) -> np.ndarray:
    """Increments a_1..a_N over uniform cells of [t_min, T] plus the tail g(T).

    The cell increments are decreasing for convex curves (checked; violation
    raises). The final tail term g(T) may exceed the last cell; see
    tail_split_factor for the sorted refinement.
    """
    if N < 1:
        raise CompareError("N must be >= 1")
    grid = np.linspace(curve.t_min, T, N + 1)
    g = np.asarray(curve.eval(grid), dtype=float)
    inc = g[:-1] - g[1:]
    scale = max(abs(g[0]), 1e-300)
    if np.any(inc < -1e-12 * scale):
        raise CompareError("curve increments negative: not monotone")
    inc = np.maximum(inc, 0.0)
    if np.any(np.diff(inc) > 1e-9 * scale):
        raise CompareError("increment sequence not decreasing: curve not "
                           "convex on the grid")
    return np.concatenate([inc, [max(float(g[-1]), 0.0)]])


def tail_split_factor(a: np.ndarray, b: np.ndarray) -> int:
    """Common number of equal pieces making both tail-extended sequences
    decreasing: M >= tail/last_cell for both sides."""
    m = 1
    for seq in (a, b):
        cells_last, tail = seq[-2], seq[-1]
        if tail <= 0:
            continue
        if cells_last <= 0:
            raise CompareError("flat last cell with positive tail: curve is "
                               "not convex-decreasing to 0")
        m = max(m, int(math.ceil(tail / cells_last)))
    if m > SPLIT_CAP:
        raise CompareError(f"tail split factor {m} exceeds cap {SPLIT_CAP}")
    return m


def split_sqrt_sum(seq: np.ndarray, m: int) -> float:
    """sum sqrt over cells plus the M-piece tail: Σ sqrt(cells) + sqrt(M tail)."""
    return float(np.sum(np.sqrt(seq[:-1])) + math.sqrt(m * seq[-1]))


@dataclass(frozen=True)
class SqrtComparison:
    T: float
    N: int
    a: np.ndarray               # increments of the lower curve (tail last)
    b: np.ndarray               # increments of the upper curve (tail last)
    split_m: int
    sqrt_sum_a: float           # split form: Σ sqrt(a cells) + sqrt(M g(T))
    sqrt_sum_b: float
    raw_sqrt_sum_a: float       # unsplit Σ sqrt(a_i), informational
    raw_sqrt_sum_b: float
    riemann_a: float            # sqrt(T/N)-scaled estimate of ∫ sqrt(-g')
    riemann_b: float
    error_bound_a: float
    error_bound_b: float
    certified: bool             # exact averaging map built for the split form
    details: dict = field(default_factory=dict)

    @property
    def sqrt_sum_ok(self) -> bool:
        return self.sqrt_sum_b >= self.sqrt_sum_a - 1e-12 * max(1.0, self.sqrt_sum_a)


def _riemann(inc: np.ndarray, span: float, N: int):
    width = span / N
    est = math.sqrt(width) * float(np.sum(np.sqrt(inc[:-1])))
    sup = math.sqrt(inc[0] / width) if width > 0 else 0.0
    return est, width * sup


def _split_sequences(a: np.ndarray, b: np.ndarray, m: int):
    fa = [Fraction(float(v)) for v in a[:-1]]
    fb = [Fraction(float(v)) for v in b[:-1]]
    fa += [Fraction(float(a[-1])) / m] * m
    fb += [Fraction(float(b[-1])) / m] * m
    return fa, fb


def compare_sqrt_integrals(g: DecayCurve, G: DecayCurve, T: float, N: int,
                           certify_cap: int = 12) -> SqrtComparison:
    """Increment tail dominance + split sqrt-sum comparison for G >= g.

    Certifies the split inequality through the exact averaging map when the
    split length N + M fits under certify_cap, by direct evaluation otherwise.
    """
    if abs(g.t_min - G.t_min) > 0:
        raise CompareError("curves must share t_min")
    grid = np.linspace(g.t_min, T, N + 1)
    gv = np.asarray(g.eval(grid), dtype=float)
    Gv = np.asarray(G.eval(grid), dtype=float)
    bad = np.where(Gv < gv - DOMINANCE_TOL * np.maximum(np.abs(gv), 1.0))[0]
    if len(bad):
        k = int(bad[0])
        raise CompareError(f"G >= g violated at grid point t={grid[k]:g}: "
                           f"G={Gv[k]:g} < g={gv[k]:g}")
    a = discretize_increments(g, T, N)
    b = discretize_increments(G, T, N)

    tails_a = np.cumsum(a[::-1])[::-1]
    tails_b = np.cumsum(b[::-1])[::-1]
    if np.any(tails_b < tails_a - DOMINANCE_TOL * np.maximum(tails_a, 1.0)):
        raise CompareError("tail dominance violated despite G >= g "
                           "(numerical inconsistency)")

    m = tail_split_factor(a, b)
    sa = split_sqrt_sum(a, m)
    sb = split_sqrt_sum(b, m)
    ra, ea = _riemann(a, T - g.t_min, N)
    rb, eb = _riemann(b, T - G.t_min, N)

    certified = False
    details = {}
    if N + m <= certify_cap:
        fa, fb = _split_sequences(a, b, m)
        pair = SequencePair.make(fa, fb)
        if not check_tail_dominance(pair):
            raise CompareError("exact tail dominance violated")
        amap = build_averaging_map(pair, n_cap=certify_cap)
        chain = jensen_sqrt_certificate(pair, amap)
        certified = True
        details["certificate_chain"] = chain
        details["support"] = len(amap)
    else:
        details["certificate_skipped"] = (f"split length {N + m} exceeds "
                                          f"cap {certify_cap}")
    return SqrtComparison(T=T, N=N, a=a, b=b, split_m=m, sqrt_sum_a=sa,
                          sqrt_sum_b=sb,
                          raw_sqrt_sum_a=float(np.sum(np.sqrt(a))),
                          raw_sqrt_sum_b=float(np.sum(np.sqrt(b))),
                          riemann_a=ra, riemann_b=rb, error_bound_a=ea,
                          error_bound_b=eb, certified=certified,
                          details=details)


def random_convex_pair(rng, N: int, T: float = 1.0):
    """Random convex decreasing pair with G >= g, as increment sequences.

    Draws independent decreasing slope profiles for the two curves plus
    non-negative tails, then rescales the lower curve so that G >= g holds at
    every grid point. Returns (a, b) with the whole-tail masses last.
    """
    width = T / N
    slopes_g = np.sort(rng.uniform(0.0, 1.0, size=N))[::-1] * rng.uniform(0.1, 3.0)
    slopes_G = np.sort(rng.uniform(0.0, 1.0, size=N))[::-1] * rng.uniform(0.1, 3.0)
    tail_g = rng.uniform(0.0, 0.5) * slopes_g[-1] * T
    tail_G = rng.uniform(0.0, 0.5) * slopes_G[-1] * T
    a_cells = slopes_g * width
    b_cells = slopes_G * width
    # curve values at grid points (right-anchored partial sums + tail)
    g_vals = tail_g + np.concatenate([np.cumsum(a_cells[::-1])[::-1], [0.0]])
    G_vals = tail_G + np.concatenate([np.cumsum(b_cells[::-1])[::-1], [0.0]])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(g_vals > 0, G_vals / np.maximum(g_vals, 1e-300), np.inf)
    rho = float(np.min(ratios))
    scale = min(rho, 1.0) * rng.uniform(0.5, 1.0)
    a = np.concatenate([a_cells, [tail_g]]) * scale
    b = np.concatenate([b_cells, [tail_G]])
    return a, b


def fuzz_counterexample_search(trials: int, seed: int, n_max: int = 64,
                               concave=np.sqrt,
                               reproducer_path: str = None) -> dict:
    """Search for violations of the split form Σ c(b) >= Σ c(a).

    The generator produces random convex decreasing dominated pairs; any
    violation would falsify the implementation (the split inequality is a
    theorem for concave increasing c) and is emitted as a minimized
    reproducer, written to reproducer_path when given.
    """
    rng = np.random.default_rng(seed)
    violations = []
    plain_sqrt = concave is np.sqrt
    for k in range(trials):
        N = int(rng.integers(1, n_max + 1))
        a, b = random_convex_pair(rng, N)
        m = tail_split_factor(a, b)
        if plain_sqrt:
            ca = split_sqrt_sum(a, m)
            cb = split_sqrt_sum(b, m)
        else:
            ca = float(np.sum(concave(a[:-1])) + m * concave(a[-1] / m))
            cb = float(np.sum(concave(b[:-1])) + m * concave(b[-1] / m))
        if cb < ca - 1e-12 * max(1.0, abs(ca)):
            violations.append({"trial": k, "N": N, "split_m": m,
                               "a": a.tolist(), "b": b.tolist(),
                               "sum_c_a": ca, "sum_c_b": cb})
    out = {"trials": trials, "violations": len(violations), "seed": seed,
           "n_max": n_max}
    if violations:
        out["reproducer"] = min(violations, key=lambda v: v["N"])
        if reproducer_path:
            import json

            with open(reproducer_path, "w") as fh:
                json.dump(out["reproducer"], fh, indent=2, sort_keys=True)
                fh.write("\n")
            out["reproducer_path"] = reproducer_path
    return out
