"""Hot inner loops: adaptive Dormand-Prince 4(5) steppers and the momentum scheme.

Kernels are compiled with numba when it is importable. Setting the environment
variable DECAYLAB_NO_NUMBA=1 (before import) selects the pure-Python/numpy
fallback: the same functions run interpreted, so results are identical.
`benchmarks/bench_kernels.py` times the two paths against each other.
"""

import os

import numpy as np

_flag = os.environ.get("DECAYLAB_NO_NUMBA", "").strip().lower()
NUMBA_DISABLED = _flag in ("1", "true", "yes", "on")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via DECAYLAB_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


# Objective encodings understood by the kernels.
OBJ_QUADRATIC = 0   # f(x) = p0*x^2/2
OBJ_TABLE = 1       # cubic-Hermite knot table (xs, ys, ds) + extensions
OBJ_MONOMIAL = 2    # f(x) = p0*|x|^p1

LEFT_SQUARE = 0     # f(x) = ys[0] + (x-xs[0])^2 for x < xs[0]
LEFT_LINEAR = 1     # first-slope linear continuation

# Kernel status codes.
OK = 0
STEP_UNDERFLOW = 1
NOT_FINITE = 2


@njit(cache=True)
def _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x):
    """Evaluate (f, f') for one of the encoded 1-d objectives."""
    if kind == OBJ_QUADRATIC:
        return 0.5 * p0 * x * x, p0 * x
    if kind == OBJ_MONOMIAL:
        ax = abs(x)
        if ax == 0.0:
            return 0.0, 0.0
        s = 1.0 if x > 0.0 else -1.0
        return p0 * ax ** p1, p0 * p1 * s * ax ** (p1 - 1.0)
    # knot table
    n = xs.shape[0]
    if x <= xs[0]:
        dx = x - xs[0]
        if left_mode == LEFT_SQUARE:
            return ys[0] + dx * dx, 2.0 * dx
        return ys[0] + ds[0] * dx, ds[0]
    if x >= xs[n - 1]:
        dx = x - xs[n - 1]
        return ys[n - 1] + ds[n - 1] * dx, ds[n - 1]
    j = np.searchsorted(xs, x) - 1
    h = xs[j + 1] - xs[j]
    s = (x - xs[j]) / h
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    val = h00 * ys[j] + h10 * h * ds[j] + h01 * ys[j + 1] + h11 * h * ds[j + 1]
    d00 = (6.0 * s2 - 6.0 * s) / h
    d10 = 3.0 * s2 - 4.0 * s + 1.0
    d01 = (-6.0 * s2 + 6.0 * s) / h
    d11 = 3.0 * s2 - 2.0 * s
    der = d00 * ys[j] + d10 * ds[j] + d01 * ys[j + 1] + d11 * ds[j + 1]
    return val, der


@njit(cache=True)
def _initial_step_gf(kind, p0, p1, xs, ys, ds, left_mode, x0, rtol, atol):
    f0, g0 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x0)
    sc = atol + rtol * abs(x0)
    d0 = abs(x0) / sc
    d1 = abs(g0) / sc
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    x1 = x0 - h0 * g0
    f1, g1 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x1)
    d2 = abs(g1 - g0) / sc / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    return min(100.0 * h0, h1)


@njit(cache=True)
def integrate_gradient_flow_1d(kind, p0, p1, xs, ys, ds, left_mode,
                               x0, ts, rtol, atol):
    """Adaptive DP 4(5) solve of x' = -f'(x), landing exactly on each ts[k].

    Returns (x, f, gnorm, status, n_good): arrays sampled at ts; on failure
    status != OK and samples from n_good on are unfilled.
    """
    n = ts.shape[0]
    xo = np.empty(n)
    fo = np.empty(n)
    go = np.empty(n)

    x = x0
    f, g = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x)
    xo[0] = x
    fo[0] = f
    go[0] = abs(g)

    h = _initial_step_gf(kind, p0, p1, xs, ys, ds, left_mode, x0, rtol, atol)
    k1 = -g
    err_prev = 1.0
    t = ts[0]
    for i in range(1, n):
        target = ts[i]
        while t < target:
            ht = h
            clamped = False
            if t + ht > target:
                ht = target - t
                clamped = True
            # Dormand-Prince stages (k1 carried over, FSAL)
            y2 = x + ht * (0.2 * k1)
            _, g2 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y2)
            k2 = -g2
            y3 = x + ht * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2)
            _, g3 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y3)
            k3 = -g3
            y4 = x + ht * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3)
            _, g4 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y4)
            k4 = -g4
            y5 = x + ht * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                           + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4)
            _, g5 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y5)
            k5 = -g5
            y6 = x + ht * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2
                           + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
                           - 5103.0 / 18656.0 * k5)
            _, g6 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y6)
            k6 = -g6
            xn = x + ht * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3
                           + 125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5
                           + 11.0 / 84.0 * k6)
            _, g7 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, xn)
            k7 = -g7
            # 5th-minus-4th order error estimate
            e = ht * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3
                      + 71.0 / 1920.0 * k4 - 17253.0 / 339200.0 * k5
                      + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7)
            sc = atol + rtol * max(abs(x), abs(xn))
            err = abs(e) / sc
            if not np.isfinite(err):
                return xo, fo, go, NOT_FINITE, i
            if err <= 1.0:
                t = t + ht
                x = xn
                k1 = k7
                fac = 0.9 * max(err, 1e-16) ** (-0.14) * err_prev ** 0.08
                if fac > 10.0:
                    fac = 10.0
                if fac < 0.2:
                    fac = 0.2
                if clamped:
                    # an output-point clamp must not shrink the working step
                    h = max(h, ht * fac)
                else:
                    h = ht * fac
                err_prev = max(err, 1e-16)
            else:
                fac = 0.9 * err ** (-0.2)
                if fac < 0.2:
                    fac = 0.2
                h = ht * fac
            if h < 1e-14 * max(1.0, abs(t)):
                return xo, fo, go, STEP_UNDERFLOW, i
        f, g = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x)
        xo[i] = x
        fo[i] = f
        go[i] = abs(g)
    return xo, fo, go, OK, n


@njit(cache=True)
def integrate_heavy_ball_1d(kind, p0, p1, xs, ys, ds, left_mode,
                            x0, v0, alpha, ts, rtol, atol):
    """DP 4(5) solve of x' = v, v' = -(alpha/t) v - f'(x) from t = ts[0] > 0.

    Returns (x, v, f, gnorm, status, n_good) sampled at ts.
    """
    n = ts.shape[0]
    xo = np.empty(n)
    vo = np.empty(n)
    fo = np.empty(n)
    go = np.empty(n)

    t = ts[0]
    x = x0
    v = v0
    f, g = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x)
    xo[0] = x
    vo[0] = v
    fo[0] = f
    go[0] = abs(g)

    # friction stiffness alpha/t sets the opening step scale
    h = min(1e-3, 0.1 * t / alpha)
    k1x = v
    k1v = -(alpha / t) * v - g
    err_prev = 1.0
    for i in range(1, n):
        target = ts[i]
        while t < target:
            ht = h
            clamped = False
            if t + ht > target:
                ht = target - t
                clamped = True

            y2x = x + ht * (0.2 * k1x)
            y2v = v + ht * (0.2 * k1v)
            t2 = t + 0.2 * ht
            _, g2 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y2x)
            k2x = y2v
            k2v = -(alpha / t2) * y2v - g2

            y3x = x + ht * (3.0 / 40.0 * k1x + 9.0 / 40.0 * k2x)
            y3v = v + ht * (3.0 / 40.0 * k1v + 9.0 / 40.0 * k2v)
            t3 = t + 0.3 * ht
            _, g3 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y3x)
            k3x = y3v
            k3v = -(alpha / t3) * y3v - g3

            y4x = x + ht * (44.0 / 45.0 * k1x - 56.0 / 15.0 * k2x + 32.0 / 9.0 * k3x)
            y4v = v + ht * (44.0 / 45.0 * k1v - 56.0 / 15.0 * k2v + 32.0 / 9.0 * k3v)
            t4 = t + 0.8 * ht
            _, g4 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y4x)
            k4x = y4v
            k4v = -(alpha / t4) * y4v - g4

            y5x = x + ht * (19372.0 / 6561.0 * k1x - 25360.0 / 2187.0 * k2x
                            + 64448.0 / 6561.0 * k3x - 212.0 / 729.0 * k4x)
            y5v = v + ht * (19372.0 / 6561.0 * k1v - 25360.0 / 2187.0 * k2v
                            + 64448.0 / 6561.0 * k3v - 212.0 / 729.0 * k4v)
            t5 = t + 8.0 / 9.0 * ht
            _, g5 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y5x)
            k5x = y5v
            k5v = -(alpha / t5) * y5v - g5

            y6x = x + ht * (9017.0 / 3168.0 * k1x - 355.0 / 33.0 * k2x
                            + 46732.0 / 5247.0 * k3x + 49.0 / 176.0 * k4x
                            - 5103.0 / 18656.0 * k5x)
            y6v = v + ht * (9017.0 / 3168.0 * k1v - 355.0 / 33.0 * k2v
                            + 46732.0 / 5247.0 * k3v + 49.0 / 176.0 * k4v
                            - 5103.0 / 18656.0 * k5v)
            t6 = t + ht
            _, g6 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y6x)
            k6x = y6v
            k6v = -(alpha / t6) * y6v - g6

            xn = x + ht * (35.0 / 384.0 * k1x + 500.0 / 1113.0 * k3x
                           + 125.0 / 192.0 * k4x - 2187.0 / 6784.0 * k5x
                           + 11.0 / 84.0 * k6x)
            vn = v + ht * (35.0 / 384.0 * k1v + 500.0 / 1113.0 * k3v
                           + 125.0 / 192.0 * k4v - 2187.0 / 6784.0 * k5v
                           + 11.0 / 84.0 * k6v)
            _, g7 = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, xn)
            k7x = vn
            k7v = -(alpha / t6) * vn - g7

            ex = ht * (71.0 / 57600.0 * k1x - 71.0 / 16695.0 * k3x
                       + 71.0 / 1920.0 * k4x - 17253.0 / 339200.0 * k5x
                       + 22.0 / 525.0 * k6x - 1.0 / 40.0 * k7x)
            ev = ht * (71.0 / 57600.0 * k1v - 71.0 / 16695.0 * k3v
                       + 71.0 / 1920.0 * k4v - 17253.0 / 339200.0 * k5v
                       + 22.0 / 525.0 * k6v - 1.0 / 40.0 * k7v)
            scx = atol + rtol * max(abs(x), abs(xn))
            scv = atol + rtol * max(abs(v), abs(vn))
            err = np.sqrt(0.5 * ((ex / scx) ** 2 + (ev / scv) ** 2))
            if not np.isfinite(err):
                return xo, vo, fo, go, NOT_FINITE, i
            if err <= 1.0:
                t = t + ht
                x = xn
                v = vn
                k1x = k7x
                k1v = k7v
                fac = 0.9 * max(err, 1e-16) ** (-0.14) * err_prev ** 0.08
                if fac > 10.0:
                    fac = 10.0
                if fac < 0.2:
                    fac = 0.2
                if clamped:
                    h = max(h, ht * fac)
                else:
                    h = ht * fac
                err_prev = max(err, 1e-16)
            else:
                fac = 0.9 * err ** (-0.2)
                if fac < 0.2:
                    fac = 0.2
                h = ht * fac
            if h < 1e-14 * max(1.0, abs(t)):
                return xo, vo, fo, go, STEP_UNDERFLOW, i
        f, g = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, x)
        xo[i] = x
        vo[i] = v
        fo[i] = f
        go[i] = abs(g)
    return xo, vo, fo, go, OK, n


@njit(cache=True)
def momentum_scheme_1d(kind, p0, p1, xs, ys, ds, left_mode,
                       x0, alpha, h, n_steps):
    """x_{n+1} = y_n - h f'(y_n), y_{n+1} = x_{n+1} + n/(n+alpha)(x_{n+1}-x_n).

    Returns the full iterate array (n_steps+1,) and a status code.
    """
    out = np.empty(n_steps + 1)
    out[0] = x0
    x_cur = x0
    y = x0
    for n in range(n_steps):
        _, gy = _obj_eval(kind, p0, p1, xs, ys, ds, left_mode, y)
        x_new = y - h * gy
        if not np.isfinite(x_new) or abs(x_new) > 1e100:
            return out, NOT_FINITE, n + 1
        y = x_new + (n / (n + alpha)) * (x_new - x_cur)
        x_cur = x_new
        out[n + 1] = x_new
    return out, OK, n_steps + 1


@njit(cache=True)
def momentum_scheme_modes(mus, u0s, alpha, h, n_steps):
    """Momentum scheme run independently per quadratic mode f_j = mu_j x^2/2.

    Returns the mode states at the final step, shape (len(mus),).
    """
    m = mus.shape[0]
    x_cur = u0s.copy()
    y = u0s.copy()
    for n in range(n_steps):
        c = n / (n + alpha)
        for j in range(m):
            x_new = y[j] - h * mus[j] * y[j]
            y[j] = x_new + c * (x_new - x_cur[j])
            x_cur[j] = x_new
    return x_cur
