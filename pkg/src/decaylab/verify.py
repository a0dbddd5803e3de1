"""Turn trajectories into pass/fail reports for every decay claim.

Each check produces a DecayReport: a named series of (t, lhs, rhs) with the
verdict `pass` iff lhs <= rhs + tolerance at every sample. Limit claims use
finite-horizon surrogates: "lim -> 0" passes when the tail sup over the last
decade of samples is below a threshold, "liminf -> 0" passes when the running
inf ever drops below it, and a horizon too short to witness either yields the
distinct verdict `inconclusive`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .flows import PreconditionError, Trajectory

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class DecayReport:
    name: str
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    tolerance: float
    verdict: str
    worst_margin: float         # max(lhs - rhs); pass iff <= tolerance
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def summary(self) -> dict:
        return {"name": self.name, "verdict": self.verdict,
                "margin": self.worst_margin, "tolerance": self.tolerance}


def _report(name, t, lhs, rhs, tolerance, details=None) -> DecayReport:
    t = np.asarray(t, dtype=float)
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    margin = float(np.max(lhs - rhs)) if len(lhs) else 0.0
    verdict = PASS if margin <= tolerance else FAIL
    return DecayReport(name=name, t=t, lhs=lhs, rhs=rhs, tolerance=tolerance,
                       verdict=verdict, worst_margin=margin,
                       details=details or {})


def _monotone_report(name, t, series, tolerance, details=None) -> DecayReport:
    """Pass iff the series is non-increasing within tolerance."""
    series = np.asarray(series, dtype=float)
    return _report(name, t[1:], series[1:], series[:-1], tolerance, details)


def _excess(traj: Trajectory, inf_f: float) -> np.ndarray:
    return traj.f - inf_f


def _dist(traj: Trajectory, xstar) -> np.ndarray:
    x = np.asarray(traj.x, dtype=float)
    xs = np.asarray(xstar, dtype=float)
    if x.ndim == 1:
        return np.abs(x - float(xs))
    return np.linalg.norm(x - xs, axis=-1)


def default_monotone_tol(traj: Trajectory, scale: float) -> float:
    rtol = traj.meta.get("rtol", 1e-9)
    return 10.0 * rtol * max(scale, 1.0)


# ---------------------------------------------------------------------------
# gradient flow


def lyapunov_gf(traj: Trajectory, xstar, fstar: float = 0.0,
                tolerance: Optional[float] = None) -> DecayReport:
    """L(t) = t (f - f*) + 1/2 |x - x*|^2 must be non-increasing.

    details carry the consequence series: excess <= L(0)/t.
    """
    if xstar is None:
        raise PreconditionError("lyapunov_gf needs the minimizer xstar")
    L = traj.t * (traj.f - fstar) + 0.5 * _dist(traj, xstar) ** 2
    if tolerance is None:
        tolerance = default_monotone_tol(traj, float(L[0]))
    pos = traj.t > 0
    consequence = _report(
        "excess<=L(0)/t", traj.t[pos], (traj.f - fstar)[pos],
        L[0] / traj.t[pos], tolerance)
    rep = _monotone_report("lyapunov_gf", traj.t, L, tolerance,
                           details={"L0": float(L[0]),
                                    "consequence": consequence.summary()})
    return rep


def excess_integral(traj: Trajectory, weight: str = "one",
                    inf_f: float = 0.0, xstar=None,
                    tolerance: float = 0.0) -> DecayReport:
    """Cumulative trapezoid of weight * excess against the applicable bound.

    weight "one": bound |x0 - x*|^2 / 2 (gradient flow). weight "t": the
    heavy-ball bound (alpha-1)^2 |x0 - x*|^2 / (2 (alpha-3)), alpha > 3.
    """
    ex = _excess(traj, inf_f)
    if xstar is None:
        xstar = traj.meta.get("xstar", 0.0)
    d0 = float(_dist(traj, xstar)[0])
    if weight == "one":
        w = np.ones_like(traj.t)
        bound = 0.5 * d0 ** 2
        details = {"bound": bound}
    elif weight == "t":
        alpha = traj.meta.get("alpha")
        if alpha is None or alpha <= 3:
            raise PreconditionError("t-weighted bound needs a heavy-ball "
                                    "trajectory with alpha > 3")
        w = traj.t.copy()
        bound = (alpha - 1.0) ** 2 * d0 ** 2 / (2.0 * (alpha - 3.0))
        details = {"bound": bound, "alpha": alpha,
                   "optimal_alpha5_constant": 4.0}
    else:
        raise PreconditionError(f"unknown weight {weight!r}")
    integrand = w * ex
    cum = np.concatenate([[0.0],
                          np.cumsum(0.5 * (integrand[1:] + integrand[:-1])
                                    * np.diff(traj.t))])
    details["integral"] = float(cum[-1])
    return _report(f"excess_integral[{weight}]", traj.t, cum,
                   np.full_like(cum, bound), tolerance, details)


def decay_products(traj: Trajectory, weight: str, inf_f: float = 0.0,
                   threshold: float = 1e-2, kind: str = "lim",
                   tail_fraction: float = 10.0) -> DecayReport:
    """Products weight(t) * excess against a lim/liminf-to-zero threshold.

    weight in {"t", "t*logt", "t*log2t", "t2"}. kind "lim": tail sup over the
    last time decade must fall below the threshold. kind "liminf": the running
    inf must dip below it at some sample; never fails, only inconclusive.
    """
    t = traj.t
    ex = _excess(traj, inf_f)
    pos = t > max(1.0, t[-1] / 1e6)
    t, ex = t[pos], ex[pos]
    if weight == "t":
        w = t
    elif weight == "t*logt":
        w = t * np.log(t)
    elif weight == "t*log2t":
        w = t * np.log(t) ** 2
    elif weight == "t2":
        w = t ** 2
    else:
        raise PreconditionError(f"unknown weight {weight!r}")
    prod = w * ex
    if len(t) < 4 or t[-1] < tail_fraction * t[0]:
        return DecayReport(name=f"decay_products[{weight},{kind}]", t=t,
                           lhs=prod, rhs=np.full_like(prod, threshold),
                           tolerance=0.0, verdict=INCONCLUSIVE,
                           worst_margin=math.inf,
                           details={"reason": "horizon too short"})
    if kind == "lim":
        tail = t >= t[-1] / tail_fraction
        sup = float(np.max(prod[tail]))
        verdict = PASS if sup <= threshold else FAIL
        return DecayReport(name=f"decay_products[{weight},lim]", t=t[tail],
                           lhs=prod[tail],
                           rhs=np.full(int(np.sum(tail)), threshold),
                           tolerance=0.0, verdict=verdict,
                           worst_margin=sup - threshold,
                           details={"tail_sup": sup, "threshold": threshold})
    if kind == "liminf":
        runinf = np.minimum.accumulate(prod)
        hit = float(np.min(runinf)) <= threshold
        verdict = PASS if hit else INCONCLUSIVE
        return DecayReport(name=f"decay_products[{weight},liminf]", t=t,
                           lhs=runinf, rhs=np.full_like(prod, threshold),
                           tolerance=0.0, verdict=verdict,
                           worst_margin=float(np.min(runinf)) - threshold,
                           details={"running_inf": float(np.min(runinf)),
                                    "threshold": threshold})
    raise PreconditionError(f"unknown kind {kind!r}")


def best_iterate_bound(traj: Trajectory, t: float, inf_f: float = 0.0,
                       xstar=None, tolerance: float = 0.0) -> DecayReport:
    """min over s in [t, t log t] of s * excess(s) <= |x0-x*|^2/(2 log log t)."""
    if t <= math.e:
        raise PreconditionError("best-iterate bound needs t > e")
    hi = t * math.log(t)
    if traj.t[-1] < hi or traj.t[0] > t:
        raise PreconditionError(
            f"trajectory must cover [{t:g}, {hi:g}] (has "
            f"[{traj.t[0]:g}, {traj.t[-1]:g}])")
    if xstar is None:
        xstar = traj.meta.get("xstar", 0.0)
    d0 = float(_dist(traj, xstar)[0])
    window = (traj.t >= t) & (traj.t <= hi)
    svals = traj.t[window]
    prods = svals * _excess(traj, inf_f)[window]
    best = float(np.min(prods))
    bound = d0 ** 2 / (2.0 * math.log(math.log(t)))
    return _report(f"best_iterate[t={t:g}]", np.array([t]),
                   np.array([best]), np.array([bound]), tolerance,
                   details={"window": (t, hi), "best": best, "bound": bound,
                            "argmin": float(svals[np.argmin(prods)])})


def path_length(traj: Trajectory) -> float:
    """Trapezoid of the speed: gnorm for gradient flow, |v| otherwise."""
    if traj.meta.get("dynamics") == "gradient_flow":
        speed = traj.gnorm
    elif traj.v is not None:
        v = np.asarray(traj.v, dtype=float)
        speed = np.abs(v) if v.ndim == 1 else np.linalg.norm(v, axis=-1)
    else:
        speed = traj.gnorm
    return float(np.trapezoid(speed, traj.t))


def self_contracting_check(traj: Trajectory, tolerance: float = 0.0,
                           max_exhaustive: int = 4000) -> DecayReport:
    """|x(t2) - x(t3)| <= |x(t1) - x(t3)| for all sampled t1 < t2 < t3.

    Equivalent exhaustive form: for each t3, the distance to x(t3) must be
    non-increasing over earlier samples. Reports a witness triple on failure.
    """
    x = np.asarray(traj.x, dtype=float)
    n = len(traj.t)
    if n < 3:
        return DecayReport(name="self_contracting", t=traj.t, lhs=np.zeros(0),
                           rhs=np.zeros(0), tolerance=tolerance, verdict=PASS,
                           worst_margin=0.0, details={"n": n})
    if n > max_exhaustive:
        idx = np.unique(np.linspace(0, n - 1, max_exhaustive).astype(int))
        x = x[idx]
        tsel = traj.t[idx]
    else:
        tsel = traj.t
    m = len(tsel)
    worst = -math.inf
    witness = None
    for k in range(2, m):
        if x.ndim == 1:
            d = np.abs(x[:k] - x[k])
        else:
            d = np.linalg.norm(x[:k] - x[k], axis=-1)
        inc = d[1:] - d[:-1]      # violation iff distance increases
        j = int(np.argmax(inc))
        if inc[j] > worst:
            worst = float(inc[j])
            witness = (float(tsel[j]), float(tsel[j + 1]), float(tsel[k]))
    verdict = PASS if worst <= tolerance else FAIL
    details = {"checked_samples": m}
    if verdict == FAIL:
        details["witness_triple"] = witness
    return DecayReport(name="self_contracting", t=traj.t, lhs=np.array([worst]),
                       rhs=np.array([0.0]), tolerance=tolerance,
                       verdict=verdict, worst_margin=worst, details=details)


# ---------------------------------------------------------------------------
# discrete time


def gd_sum_bound(traj: Trajectory, eta: Optional[float] = None,
                 lipschitz: Optional[float] = None, inf_f: float = 0.0,
                 xstar=None, tolerance: float = 0.0) -> DecayReport:
    """eta Σ excess <= |x0-x*|^2/2 + eta/(2(1 - L eta/2)) * excess_0."""
    if traj.meta.get("dynamics") != "gd":
        raise PreconditionError("gd_sum_bound needs a gradient descent "
                                "trajectory")
    meta_eta = traj.meta.get("eta")
    eta = meta_eta if eta is None else eta
    if meta_eta is not None and eta != meta_eta:
        raise PreconditionError(f"eta mismatch: given {eta}, trajectory ran "
                                f"with {meta_eta}")
    meta_L = traj.meta.get("lipschitz")
    lipschitz = meta_L if lipschitz is None else lipschitz
    if meta_L is not None and lipschitz != meta_L:
        raise PreconditionError("lipschitz mismatch with trajectory metadata")
    if lipschitz is None:
        raise PreconditionError("gd_sum_bound needs the Lipschitz constant")
    if not eta < 2.0 / lipschitz:
        raise PreconditionError("gd_sum_bound needs eta < 2/L")
    if xstar is None:
        xstar = traj.meta.get("xstar", 0.0)
    ex = _excess(traj, inf_f)
    d0 = float(_dist(traj, xstar)[0])
    partial = eta * np.cumsum(ex)
    bound = 0.5 * d0 ** 2 + eta / (2.0 * (1.0 - lipschitz * eta / 2.0)) * ex[0]
    n = np.arange(len(ex), dtype=float)
    counter = Trajectory(t=np.maximum(n, 1e-9), x=traj.x, f=traj.f,
                         gnorm=traj.gnorm, meta=traj.meta)
    # iterate counts are linear, so "the tail" is the last ~15% of iterates
    tail = decay_products(counter, "t", inf_f=inf_f, threshold=1e-6,
                          kind="lim", tail_fraction=1.2)
    loginf = decay_products(counter, "t*logt", inf_f=inf_f, threshold=1e-4,
                            kind="liminf")
    return _report("gd_sum_bound", traj.t, partial,
                   np.full_like(partial, bound), tolerance,
                   details={"bound": float(bound), "sum": float(partial[-1]),
                            "n_excess_tail": tail.summary(),
                            "n_logn_running_inf": loginf.summary()})


def sgd_bounds(replicas: list[Trajectory], inf_f: float = 0.0, xstar=None,
               as_tol_eps: float = 1e-3, as_tol_delta: float = 0.01) -> DecayReport:
    """Monte-Carlo mean partial sums against the multiplicative-noise bound.

    Bound: Σ E[excess] <= L(1+sigma^2)/2 E|X0-x*|^2 + 2(1+sigma^2) E[excess_0]
    at the step size eta = 1/(L(1+sigma^2)); for general admissible eta the
    form eta Σ E <= E|X0-x*|^2/2 + eta(1+s^2)/(1-L(1+s^2)eta/2) E[ex_0]
    is used. Also reports the almost-sure proxy: the fraction of replicas
    whose final excess exceeds as_tol_eps must be <= as_tol_delta.
    """
    if not replicas:
        raise PreconditionError("no replicas given")
    meta = replicas[0].meta
    keys = ("eta", "sigma", "noise_model", "objective", "lipschitz", "seed")
    for tr in replicas[1:]:
        if any(tr.meta.get(k) != meta.get(k) for k in keys):
            raise PreconditionError("heterogeneous replica configurations")
    eta = meta["eta"]
    sigma = meta["sigma"]
    L = meta.get("lipschitz")
    if L is None:
        raise PreconditionError("sgd_bounds needs the Lipschitz constant in "
                                "the trajectory metadata")
    if xstar is None:
        xstar = meta.get("xstar", 0.0)
    ex = np.stack([_excess(tr, inf_f) for tr in replicas])
    d0 = float(np.mean([_dist(tr, xstar)[0] ** 2 for tr in replicas]))
    sums = ex.sum(axis=1)
    mean_sum = float(np.mean(sums))
    stderr = float(np.std(sums, ddof=1) / math.sqrt(len(replicas))) \
        if len(replicas) > 1 else 0.0
    one = 1.0 + sigma ** 2
    bound = 0.5 * d0 / eta + one / (1.0 - L * one * eta / 2.0) * float(np.mean(ex[:, 0]))
    # mean E[f(X_n)] monotone within 3 standard errors
    mean_f = ex.mean(axis=0)
    se_f = ex.std(axis=0, ddof=1) / math.sqrt(len(replicas)) \
        if len(replicas) > 1 else np.zeros_like(mean_f)
    mono_viol = float(np.max(mean_f[1:] - mean_f[:-1]
                             - 3.0 * np.hypot(se_f[1:], se_f[:-1]))) \
        if len(mean_f) > 1 else 0.0
    frac_bad = float(np.mean(ex[:, -1] > as_tol_eps))
    verdict_parts = {
        "sum_bound_ok": mean_sum - 3.0 * stderr <= bound,
        "mean_monotone_ok": mono_viol <= 0.0,
        "as_proxy_ok": frac_bad <= as_tol_delta,
    }
    rep = _report("sgd_bounds", np.array([0.0]), np.array([mean_sum]),
                  np.array([bound + 3.0 * stderr]), 0.0,
                  details={"mean_sum": mean_sum, "stderr": stderr,
                           "bound": float(bound), "frac_final_above_eps": frac_bad,
                           "as_eps": as_tol_eps, "as_delta": as_tol_delta,
                           **verdict_parts})
    verdict = PASS if all(verdict_parts.values()) else FAIL
    return DecayReport(name=rep.name, t=rep.t, lhs=rep.lhs, rhs=rep.rhs,
                       tolerance=rep.tolerance, verdict=verdict,
                       worst_margin=rep.worst_margin, details=rep.details)


# ---------------------------------------------------------------------------
# heavy ball


def hb_lyapunov(traj: Trajectory, xstar, alpha: Optional[float] = None,
                fstar: float = 0.0,
                tolerance: float = 1e-6) -> DecayReport:
    """L = t^2 (f - f*) + 1/2 |(alpha-1)(x - x*) + t v|^2 non-increasing.

    details carry the post-bound series excess <= (alpha-1)^2 |x0-x*|^2/(2t^2)
    and the total-energy comparison t^2 (f + v^2/4) <= L0 + (alpha-1)^2/2 d^2.
    """
    if traj.v is None:
        raise PreconditionError("hb_lyapunov needs recorded velocities")
    meta_alpha = traj.meta.get("alpha")
    alpha = meta_alpha if alpha is None else alpha
    if meta_alpha is not None and alpha != meta_alpha:
        raise PreconditionError("alpha mismatch with trajectory metadata")
    if alpha < 3:
        raise PreconditionError("hb_lyapunov needs alpha >= 3")
    d = _dist(traj, xstar)
    x = np.asarray(traj.x, dtype=float)
    v = np.asarray(traj.v, dtype=float)
    if x.ndim == 1:
        cross = np.abs((alpha - 1.0) * (x - float(xstar)) + traj.t * v)
        vns = np.abs(v)
    else:
        cross = np.linalg.norm((alpha - 1.0) * (x - np.asarray(xstar))
                               + traj.t[:, None] * v, axis=-1)
        vns = np.linalg.norm(v, axis=-1)
    ex = traj.f - fstar
    L = traj.t ** 2 * ex + 0.5 * cross ** 2
    energy = traj.t ** 2 * (ex + vns ** 2 / 4.0)
    energy_rhs = L[0] + 0.5 * (alpha - 1.0) ** 2 * d ** 2
    pos = traj.t > 0
    post = _report("hb_excess<= (a-1)^2 d0^2/(2t^2)", traj.t[pos], ex[pos],
                   (alpha - 1.0) ** 2 * d[0] ** 2 / (2.0 * traj.t[pos] ** 2),
                   tolerance)
    en = _report("hb_total_energy", traj.t, energy, energy_rhs, tolerance)
    return _monotone_report(
        "hb_lyapunov", traj.t, L, tolerance,
        details={"L0": float(L[0]), "alpha": alpha,
                 "post_bound": post.summary(), "energy_bound": en.summary(),
                 "energy_ok": en.passed})


def hb_speed_bound(traj: Trajectory, obj=None,
                   tolerance: float = 1e-9) -> DecayReport:
    """Speed <= sqrt(2 f(x0)) everywhere (v0 = 0 required).

    With obj given (1-d decreasing, no minimizer), also checks
    f(x(t)) >= f(x0 + sqrt(2 f(x0)) t) - tolerance, recorded in details.
    """
    if traj.v is None:
        raise PreconditionError("hb_speed_bound needs velocities")
    v = np.asarray(traj.v, dtype=float)
    vns = np.abs(v) if v.ndim == 1 else np.linalg.norm(v, axis=-1)
    if vns[0] > 1e-9 * max(1.0, vns.max()):
        raise PreconditionError("hb_speed_bound needs zero initial velocity")
    cap = math.sqrt(2.0 * float(traj.f[0]))
    rep = _report("hb_speed<=sqrt(2 f0)", traj.t, vns,
                  np.full_like(vns, cap), tolerance)
    details = dict(rep.details)
    details["speed_cap"] = cap
    verdict = rep.verdict
    worst = rep.worst_margin
    if obj is not None:
        x0 = float(np.asarray(traj.x, dtype=float).flat[0])
        frontier = np.array([obj.value(x0 + cap * t) for t in traj.t])
        low = _report("hb_f_lower_frontier", traj.t, frontier - tolerance,
                      traj.f, 0.0)
        details["frontier"] = low.summary()
        if not low.passed:
            verdict = FAIL
            worst = max(worst, low.worst_margin)
    return DecayReport(name=rep.name, t=rep.t, lhs=rep.lhs, rhs=rep.rhs,
                       tolerance=tolerance, verdict=verdict,
                       worst_margin=worst, details=details)
