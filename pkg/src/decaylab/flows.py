"""The four dynamics: gradient flow, gradient descent, multiplicative-noise
SGD, and the heavy ball ODE with alpha/t friction (scheme + direct integrator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K


class FlowError(RuntimeError):
    pass


class DivergenceError(FlowError):
    """Raised when a simulation blows up or the step size underflows.

    Carries the partial trajectory in .trajectory when available.
    """

    def __init__(self, msg, trajectory=None):
        super().__init__(msg)
        self.trajectory = trajectory


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Quadratic:
    """f(x) = mu |x|^2 / 2."""

    mu: float

    def value_and_grad(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1 and x.size == 1:
            xv = float(x)
            return 0.5 * self.mu * xv * xv, self.mu * xv
        return 0.5 * self.mu * float(np.dot(x, x)), self.mu * x

    def value(self, x):
        return self.value_and_grad(x)[0]

    def grad(self, x):
        return self.value_and_grad(x)[1]

    def kernel_args(self):
        return (K.OBJ_QUADRATIC, self.mu, 0.0,
                np.empty(0), np.empty(0), np.empty(0), 0)

    @property
    def lipschitz(self):
        return self.mu


@dataclass(frozen=True)
class Monomial:
    """f(x) = coef |x|^power (1-d)."""

    coef: float
    power: float

    def value_and_grad(self, x):
        x = float(np.asarray(x, dtype=float))
        ax = abs(x)
        if ax == 0.0:
            return 0.0, 0.0
        return (self.coef * ax ** self.power,
                self.coef * self.power * math.copysign(ax ** (self.power - 1.0), x))

    def value(self, x):
        return self.value_and_grad(x)[0]

    def grad(self, x):
        return self.value_and_grad(x)[1]

    def kernel_args(self):
        return (K.OBJ_MONOMIAL, self.coef, self.power,
                np.empty(0), np.empty(0), np.empty(0), 0)


@dataclass(frozen=True)
class OscillatorSpec:
    """Damped oscillator f(x) = mu x^2/2 under alpha/t friction."""

    mu: float
    alpha: float
    x0: float

    def __post_init__(self):
        if self.mu <= 0 or self.alpha <= 0:
            raise PreconditionError("OscillatorSpec needs mu > 0 and alpha > 0")

    @property
    def t_transition(self) -> float:
        """Overdamped-to-underdamped switch: (alpha/2t)^2 = mu."""
        return self.alpha / (2.0 * math.sqrt(self.mu))

    @property
    def asymptotic_frequency(self) -> float:
        return math.sqrt(self.mu)

    def objective(self) -> Quadratic:
        return Quadratic(self.mu)

    # constant-friction reference quantities
    def omega(self, beta: float) -> float:
        return math.sqrt(self.mu - (beta / 2.0) ** 2)

    def lambdas(self, beta: float):
        root = math.sqrt((beta / 2.0) ** 2 - self.mu)
        return -beta / 2.0 + root, -beta / 2.0 - root


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped samples of one simulation run."""

    t: np.ndarray
    x: np.ndarray
    f: np.ndarray
    gnorm: np.ndarray
    v: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def excess(self, inf_f: float = 0.0) -> np.ndarray:
        return self.f - inf_f

    @property
    def xstar(self):
        return self.meta.get("xstar")


def geometric_schedule(t_end: float, t_first: float = 1e-3,
                       ratio: float = 1.05, t_start: float = 0.0,
                       include_start: bool = True) -> np.ndarray:
    """Geometric sample times: t_start, t_start+t_first, ... , t_end."""
    if t_end <= t_start:
        raise PreconditionError("t_end must exceed t_start")
    pts = [t_start] if include_start else []
    t = t_start + t_first
    while t < t_end:
        pts.append(t)
        t = t_start + (t - t_start) * ratio
    pts.append(t_end)
    return np.array(pts)


def _kernel_args_for(obj):
    if hasattr(obj, "kernel_args"):
        return obj.kernel_args()
    return None


def _dopri45_python(rhs, t0, y0, ts, rtol, atol):
    """Generic Dormand-Prince 4(5) for vector states with a Python callable."""
    A = [
        (0.2,),
        (3 / 40, 9 / 40),
        (44 / 45, -56 / 15, 32 / 9),
        (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
        (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
        (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
    ]
    C = (0.2, 0.3, 0.8, 8 / 9, 1.0, 1.0)
    E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

    y = np.array(y0, dtype=float)
    t = float(t0)
    out = np.empty((len(ts),) + y.shape)
    out[0] = y
    k1 = rhs(t, y)
    sc0 = atol + rtol * np.abs(y)
    d0 = np.linalg.norm(y / sc0)
    d1 = np.linalg.norm(k1 / sc0)
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    err_prev = 1.0
    for i in range(1, len(ts)):
        target = ts[i]
        while t < target:
            ht = min(h, target - t)
            clamped = ht < h
            ks = [k1]
            for row, c in zip(A[:-1], C[:-1]):
                yi = y + ht * sum(a * k for a, k in zip(row, ks))
                ks.append(rhs(t + c * ht, yi))
            yn = y + ht * sum(a * k for a, k in zip(A[-1], ks))
            k7 = rhs(t + ht, yn)
            ks.append(k7)
            e = ht * sum(a * k for a, k in zip(E, ks))
            sc = atol + rtol * np.maximum(np.abs(y), np.abs(yn))
            err = float(np.sqrt(np.mean((e / sc) ** 2)))
            if not np.isfinite(err):
                raise DivergenceError("non-finite state in gradient flow")
            if err <= 1.0:
                t += ht
                y = yn
                k1 = k7
                fac = min(10.0, max(0.2, 0.9 * max(err, 1e-16) ** -0.14
                                    * err_prev ** 0.08))
                h = max(h, ht * fac) if clamped else ht * fac
                err_prev = max(err, 1e-16)
            else:
                h = ht * max(0.2, 0.9 * err ** -0.2)
            if h < 1e-14 * max(1.0, abs(t)):
                raise DivergenceError("step-size underflow")
        out[i] = y
    return out


def integrate_gradient_flow(obj, x0, t_end: float = None, rtol: float = 1e-9,
                            atol: float = 1e-12, sample_schedule=None,
                            ratio: float = 1.05) -> Trajectory:
    """Adaptive RK 4(5) solve of x' = -grad f(x) sampled on a geometric grid."""
    if sample_schedule is None:
        if t_end is None or t_end <= 0:
            raise PreconditionError("t_end must be positive")
        sample_schedule = geometric_schedule(t_end, ratio=ratio)
    ts = np.asarray(sample_schedule, dtype=float)
    if np.any(np.diff(ts) <= 0):
        raise PreconditionError("sample schedule must be strictly increasing")

    meta = {"dynamics": "gradient_flow", "rtol": rtol, "atol": atol,
            "objective": getattr(obj, "label", type(obj).__name__),
            "x0": np.asarray(x0).tolist()}
    ka = _kernel_args_for(obj)
    if ka is not None and np.ndim(x0) == 0:
        kind, p0, p1, xs, ys, ds, left = ka
        xv, fv, gv, status, ngood = K.integrate_gradient_flow_1d(
            kind, p0, p1, xs, ys, ds, left, float(x0), ts, rtol, atol)
        if status != K.OK:
            partial = Trajectory(t=ts[:ngood], x=xv[:ngood], f=fv[:ngood],
                                 gnorm=gv[:ngood], meta=meta)
            reason = ("step-size underflow" if status == K.STEP_UNDERFLOW
                      else "non-finite state")
            raise DivergenceError(f"gradient flow failed: {reason} at "
                                  f"t={ts[max(ngood - 1, 0)]:g}", partial)
        traj = Trajectory(t=ts, x=xv, f=fv, gnorm=gv, meta=meta)
        _check_descent(traj, rtol, atol)
        return traj

    # generic vector path
    def rhs(t, y):
        return -np.asarray(obj.grad(y), dtype=float)

    states = _dopri45_python(rhs, ts[0], np.atleast_1d(np.asarray(x0, dtype=float)),
                             ts, rtol, atol)
    fv = np.array([obj.value(s) for s in states])
    gv = np.array([np.linalg.norm(np.atleast_1d(obj.grad(s))) for s in states])
    traj = Trajectory(t=ts, x=states, f=fv, gnorm=gv, meta=meta)
    _check_descent(traj, rtol, atol)
    return traj


def _check_descent(traj: Trajectory, rtol: float, atol: float) -> None:
    """Recorded objective must be non-increasing within 10x the solver tol."""
    slack = 10.0 * rtol * max(float(traj.f[0]), 1e-300) + 10.0 * atol
    rise = float(np.max(np.diff(traj.f))) if len(traj.f) > 1 else 0.0
    if rise > slack:
        raise DivergenceError(
            f"gradient flow objective increased by {rise:.3g} (tolerance "
            f"{slack:.3g}): objective gradient is inconsistent", traj)


def run_gd(obj, x0, eta: float, n_iter: int,
           lipschitz: Optional[float] = None,
           divergence_tol: float = 1e-9) -> Trajectory:
    """Plain gradient descent x_{n+1} = x_n - eta grad f(x_n)."""
    if eta <= 0:
        raise PreconditionError("step size must be positive")
    if lipschitz is not None and not eta < 2.0 / lipschitz:
        raise PreconditionError(
            f"step size {eta:g} violates eta < 2/L = {2.0 / lipschitz:g}")
    x = np.asarray(x0, dtype=float)
    scalar = x.ndim == 0
    ts = np.arange(n_iter + 1, dtype=float)
    xs = np.empty((n_iter + 1,) + x.shape)
    fs = np.empty(n_iter + 1)
    gs = np.empty(n_iter + 1)
    f0 = None
    for n in range(n_iter + 1):
        f, g = obj.value_and_grad(x if not scalar else float(x))
        xs[n] = x
        fs[n] = f
        gs[n] = np.linalg.norm(np.atleast_1d(g))
        if f0 is None:
            f0 = f
        if f > fs[max(n - 1, 0)] + divergence_tol * max(abs(f0), 1.0):
            raise DivergenceError(
                f"objective increased at iterate {n}: step size too large",
                Trajectory(t=ts[:n + 1], x=xs[:n + 1], f=fs[:n + 1],
                           gnorm=gs[:n + 1]))
        if n < n_iter:
            x = x - eta * np.asarray(g)
    meta = {"dynamics": "gd", "eta": eta, "lipschitz": lipschitz,
            "objective": getattr(obj, "label", type(obj).__name__),
            "x0": np.asarray(x0).tolist()}
    return Trajectory(t=ts, x=xs, f=fs, gnorm=gs, meta=meta)


def _noise_draws(seed: int, replica: int, n: int, model: str) -> np.ndarray:
    """Unit-variance zero-mean draws from a counter-based per-replica stream."""
    rng = np.random.Generator(np.random.Philox(key=[seed, replica]))
    if model == "rademacher":
        return rng.integers(0, 2, size=n) * 2.0 - 1.0
    if model == "gaussian":
        return rng.standard_normal(n)
    raise PreconditionError(f"unknown noise model {model!r}")


def run_sgd(obj, x0, eta: float, sigma: float, n_iter: int, seed: int,
            noise_model: str = "rademacher", replicas: int = 1,
            lipschitz: Optional[float] = None) -> list[Trajectory]:
    """Multiplicative-noise SGD: g_n = (1 + sigma z_n) grad f(x_n), z iid.

    Replica r is driven by the counter-based stream keyed on (seed, r), so
    results do not depend on execution order or thread count.
    """
    # the optimal choice eta = 1/(L(1+sigma^2)) sits at equality and keeps
    # every constant in the decay bound finite, so <= rather than <
    if lipschitz is not None and not eta <= 1.0 / (lipschitz * (1.0 + sigma ** 2)):
        raise PreconditionError(
            f"step size {eta:g} violates eta <= 1/(L(1+sigma^2)) = "
            f"{1.0 / (lipschitz * (1.0 + sigma ** 2)):g}")
    x0 = float(x0)
    base_meta = {"dynamics": "sgd", "eta": eta, "sigma": sigma, "seed": seed,
                 "noise_model": noise_model, "lipschitz": lipschitz,
                 "objective": getattr(obj, "label", type(obj).__name__),
                 "x0": x0, "replicas": replicas}
    ts = np.arange(n_iter + 1, dtype=float)

    # draw per-replica streams first (the reproducibility contract), then
    # run the recursion vectorized across replicas
    zs = np.empty((replicas, n_iter))
    for r in range(replicas):
        zs[r] = _noise_draws(seed, r, n_iter, noise_model)

    if isinstance(obj, Quadratic):
        xs = np.empty((replicas, n_iter + 1))
        xs[:, 0] = x0
        cur = np.full(replicas, x0)
        for n in range(n_iter):
            cur = cur - eta * (1.0 + sigma * zs[:, n]) * obj.mu * cur
            xs[:, n + 1] = cur
        fs = 0.5 * obj.mu * xs ** 2
        gs = np.abs(obj.mu * xs)
    else:
        xs = np.empty((replicas, n_iter + 1))
        fs = np.empty((replicas, n_iter + 1))
        gs = np.empty((replicas, n_iter + 1))
        for r in range(replicas):
            x = x0
            for n in range(n_iter + 1):
                f, g = obj.value_and_grad(x)
                xs[r, n] = x
                fs[r, n] = f
                gs[r, n] = abs(g)
                if n < n_iter:
                    x = x - eta * (1.0 + sigma * zs[r, n]) * g

    out = []
    for r in range(replicas):
        meta = dict(base_meta)
        meta["replica"] = r
        out.append(Trajectory(t=ts, x=xs[r], f=fs[r], gnorm=gs[r], meta=meta))
    return out


def run_heavy_ball_scheme(obj, x0, alpha: float, h: float, n_steps: int,
                          warn=None) -> Trajectory:
    """Momentum scheme iterates mapped onto ODE time t_n = n sqrt(h)."""
    if h <= 0:
        raise PreconditionError("h must be positive")
    if alpha < 3 and warn is not False:
        import warnings

        warnings.warn(f"alpha = {alpha:g} < 3: decay guarantees need alpha >= 3")
    ka = _kernel_args_for(obj)
    if ka is None:
        raise PreconditionError("scheme needs a 1-d kernel objective")
    kind, p0, p1, xs, ys, ds, left = ka
    iters, status, ngood = K.momentum_scheme_1d(
        kind, p0, p1, xs, ys, ds, left, float(x0), float(alpha), float(h),
        int(n_steps))
    sqrt_h = math.sqrt(h)
    meta = {"dynamics": "heavy_ball_scheme", "alpha": alpha, "h": h,
            "objective": getattr(obj, "label", type(obj).__name__),
            "x0": float(x0)}
    if status != K.OK:
        ts = np.arange(ngood) * sqrt_h
        part = iters[:ngood]
        raise DivergenceError(
            f"momentum scheme diverged at step {ngood}",
            Trajectory(t=ts, x=part, f=np.zeros(ngood), gnorm=np.zeros(ngood),
                       meta=meta))
    ts = np.arange(n_steps + 1) * sqrt_h
    vel = np.empty(n_steps + 1)
    vel[:-1] = np.diff(iters) / sqrt_h
    vel[-1] = vel[-2] if n_steps else 0.0
    if hasattr(obj, "value_and_grad") and hasattr(obj, "kernel_args"):
        fv, gv = _vectorized_value_grad(obj, iters)
    else:
        fv = np.array([obj.value(v) for v in iters])
        gv = np.array([abs(obj.grad(v)) for v in iters])
    return Trajectory(t=ts, x=iters, f=fv, gnorm=np.abs(gv), v=vel, meta=meta)


def _vectorized_value_grad(obj, x):
    if isinstance(obj, Quadratic):
        return 0.5 * obj.mu * x ** 2, obj.mu * x
    if hasattr(obj, "value_and_grad"):
        try:
            f, g = obj.value_and_grad(np.asarray(x))
            f = np.asarray(f, dtype=float)
            if f.shape == np.shape(x):
                return f, np.asarray(g, dtype=float)
        except Exception:
            pass
    f = np.array([obj.value(float(v)) for v in x])
    g = np.array([obj.grad(float(v)) for v in x])
    return f, g


def default_hb_start(obj, alpha: float, h: float = 0.0) -> float:
    """Opening time for the singular alpha/t friction term."""
    mu = getattr(obj, "mu", None)
    if mu is not None and mu > 0:
        return max(h, 1e-3) * (alpha / (2.0 * math.sqrt(mu)))
    return 1e-3


def integrate_heavy_ball_ode(obj, x0, alpha: float, t_end: float,
                             t_start: Optional[float] = None,
                             rtol: float = 1e-9, atol: float = 1e-12,
                             sample_schedule=None,
                             ratio: float = 1.05) -> Trajectory:
    """DP 4(5) solve of x' = v, v' = -(alpha/t) v - grad f(x), v(t_start) = 0."""
    if t_start is None:
        t_start = default_hb_start(obj, alpha)
    if t_start <= 0:
        raise PreconditionError("t_start must be positive (friction is "
                                "singular at t = 0)")
    if sample_schedule is None:
        sample_schedule = geometric_schedule(t_end, t_first=t_start,
                                             ratio=ratio, t_start=t_start,
                                             include_start=True)
        sample_schedule = sample_schedule[sample_schedule >= t_start]
        sample_schedule[0] = t_start
    ts = np.asarray(sample_schedule, dtype=float)
    if ts[0] < t_start:
        raise PreconditionError("schedule starts before t_start")

    ka = _kernel_args_for(obj)
    if ka is None:
        raise PreconditionError("heavy-ball integrator needs a 1-d kernel "
                                "objective")
    kind, p0, p1, xs, ys, ds, left = ka
    xv, vv, fv, gv, status, ngood = K.integrate_heavy_ball_1d(
        kind, p0, p1, xs, ys, ds, left, float(x0), 0.0, float(alpha), ts,
        rtol, atol)
    meta = {"dynamics": "heavy_ball_ode", "alpha": alpha, "rtol": rtol,
            "atol": atol, "t_start": float(ts[0]),
            "objective": getattr(obj, "label", type(obj).__name__),
            "x0": float(x0)}
    if status != K.OK:
        partial = Trajectory(t=ts[:ngood], x=xv[:ngood], f=fv[:ngood],
                             gnorm=gv[:ngood], v=vv[:ngood], meta=meta)
        reason = ("step-size underflow" if status == K.STEP_UNDERFLOW
                  else "non-finite state")
        raise DivergenceError(f"heavy-ball ODE failed: {reason}", partial)
    return Trajectory(t=ts, x=xv, f=fv, gnorm=gv, v=vv, meta=meta)


def classical_oscillator_solution(beta: float, mu: float, x0: float, t):
    """Constant-friction oscillator x'' = -beta x' - mu x, x(0)=x0, x'(0)=0.

    Returns (x, v) evaluated at t (scalar or array), covering underdamped,
    critically damped and overdamped regimes exactly.
    """
    if beta < 0 or mu <= 0:
        raise PreconditionError("needs beta >= 0 and mu > 0")
    t = np.asarray(t, dtype=float)
    disc = (beta / 2.0) ** 2 - mu
    if abs(disc) < 1e-14 * max(mu, 1.0):
        r = -beta / 2.0
        x = x0 * (1.0 - r * t) * np.exp(r * t)
        v = x0 * (-r ** 2 * t) * np.exp(r * t)
        return x, v
    if disc < 0:
        w = math.sqrt(-disc)
        decay = np.exp(-beta / 2.0 * t)
        x = x0 * decay * (np.cos(w * t) + (beta / (2.0 * w)) * np.sin(w * t))
        v = -x0 * decay * ((beta ** 2 / (4.0 * w) + w) * np.sin(w * t))
        return x, v
    root = math.sqrt(disc)
    lp = -beta / 2.0 + root
    lm = -beta / 2.0 - root
    c1 = -x0 * lm / (lp - lm)
    c2 = x0 * lp / (lp - lm)
    x = c1 * np.exp(lp * t) + c2 * np.exp(lm * t)
    v = c1 * lp * np.exp(lp * t) + c2 * lm * np.exp(lm * t)
    return x, v
