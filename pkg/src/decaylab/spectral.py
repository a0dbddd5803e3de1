"""Discretized diagonal quadratic F(u) = 1/2 ∫_1^∞ u(s)^2/s ds.

The per-mode curvature is 1/s, so gradient flow acts as u(t,s) =
e^{-t/s} u0(s) and the heavy-ball dynamics reduce to independent damped
oscillators. Profiles are finite log-grid surrogates; every bound check
carries the reported truncation bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .curves import DecayCurve

E2 = math.e ** 2


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralProfile:
    """Log-spaced discretization of an initial state u0 in L^2(1, S_max)."""

    s_grid: np.ndarray
    u0: np.ndarray
    w: np.ndarray               # quadrature weights: ∫ f ds ≈ Σ w_j f(s_j)
    curve: DecayCurve
    s_max: float
    bias: float                 # upper bound on the F-mass dropped past s_max
    meta: dict = field(default_factory=dict)

    @property
    def mu(self) -> np.ndarray:
        """Per-mode curvatures 1/s in (0, 1]."""
        return 1.0 / self.s_grid

    def norm_sq(self) -> float:
        return float(np.sum(self.w * self.u0 ** 2))


def build_profile(curve: DecayCurve, s_max: float,
                  nodes_per_decade: int = 64) -> SpectralProfile:
    """Discretize u0(s) = sqrt(-2 e^2 s g'(s)) on a log grid over [1, s_max]."""
    if not curve.flag_ok("monotone_decreasing"):
        raise SpectralError("curve must be monotone decreasing")
    if curve.t_min > 1.0:
        raise SpectralError("profile needs the curve on [1, s_max]")
    n = max(int(nodes_per_decade * math.log10(s_max)), 8)
    s = np.geomspace(1.0, s_max, n + 1)
    dg = np.asarray(curve.deriv(s), dtype=float)
    if np.any(dg > 1e-12 * max(abs(dg[0]), 1e-300)):
        raise SpectralError("curve derivative must be non-positive")
    u0 = np.sqrt(np.maximum(-2.0 * E2 * s * dg, 0.0))
    # trapezoid in y = log s: ∫ f ds = ∫ f(e^y) e^y dy
    y = np.log(s)
    wy = np.zeros_like(y)
    wy[1:-1] = 0.5 * (y[2:] - y[:-2])
    wy[0] = 0.5 * (y[1] - y[0])
    wy[-1] = 0.5 * (y[-1] - y[-2])
    w = wy * s
    # mass dropped past s_max: 1/2 ∫_{s_max}^∞ u0^2/s = e^2 g(s_max)
    bias = E2 * float(curve.eval(s_max))
    if not np.isfinite(bias):
        raise SpectralError("curve not integrable: unbounded truncation bias")
    return SpectralProfile(
        s_grid=s, u0=u0, w=w, curve=curve, s_max=float(s_max), bias=bias,
        meta={"nodes_per_decade": nodes_per_decade,
              "curve": curve.document or {"label": curve.label}})


def gf_energy(profile: SpectralProfile, t: float) -> float:
    """F(u(t)) = 1/2 Σ w_j u0_j^2 e^{-2t/s_j} / s_j under gradient flow."""
    if t < 0:
        raise SpectralError("t must be >= 0")
    s, w, u0 = profile.s_grid, profile.w, profile.u0
    return float(0.5 * np.sum(w * u0 ** 2 * np.exp(-2.0 * t / s) / s))


def gf_tail_lower_bound(profile: SpectralProfile, t: float) -> float:
    """(1/2e^2) Σ_{s_j >= t} w_j u0_j^2 / s_j — the bound chain's middle term."""
    s, w, u0 = profile.s_grid, profile.w, profile.u0
    mask = s >= t
    return float(np.sum(w[mask] * u0[mask] ** 2 / s[mask]) / (2.0 * E2))


def flatness_sequence(phi, n: int):
    """Norm and energy of u_n = (1/n) 1_{(R_n, 1+R_n)}, R_n = 1/phi(1/n).

    Returns (norm, energy) with the exact F(u_n) =
    (1/2n^2) log(1 + 1/R_n) <= 1/(n R_n).
    """
    if n < 1:
        raise SpectralError("n must be >= 1")
    p = phi(1.0 / n)
    if p <= 0:
        raise SpectralError("phi must be positive on (0, 1]")
    r = 1.0 / p
    norm = 1.0 / n
    energy = 0.5 / n ** 2 * math.log1p(1.0 / r)
    return norm, energy


def hb_energy(profile: SpectralProfile, alpha: float, t: float, h: float):
    """Heavy-ball energy at time t from per-mode momentum-scheme runs.

    Returns (value, analytic_lower_bound) where the bound is
    (1/2) e^{-alpha/2} ∫_{4t^2/alpha^2}^∞ u0^2/s ds over the grid; each mode
    with s > 4t^2/alpha^2 is still overdamped at time t and keeps
    u(t) >= e^{-alpha/4} u0.
    """
    if alpha < 3:
        raise SpectralError("alpha must be >= 3")
    if h <= 0:
        raise SpectralError("h must be positive")
    s, w, u0 = profile.s_grid, profile.w, profile.u0
    n_steps = int(round(t / math.sqrt(h)))
    if n_steps == 0:
        value = gf_energy(profile, 0.0)
    else:
        u = K.momentum_scheme_modes(1.0 / s, u0, float(alpha), float(h),
                                    n_steps)
        if not np.all(np.isfinite(u)):
            raise SpectralError("per-mode simulation diverged")
        value = float(0.5 * np.sum(w * u ** 2 / s))
    s_cut = 4.0 * t ** 2 / alpha ** 2
    mask = s > s_cut
    tail = float(np.sum(w[mask] * u0[mask] ** 2 / s[mask]))
    lower = 0.5 * math.exp(-alpha / 2.0) * tail
    return value, lower
