#!/usr/bin/env python3
"""Time the jitted kernels against the DECAYLAB_NO_NUMBA fallback.

The fallback runs the identical functions interpreted, so this measures the
jit speedup alone. Run from the repo root:

    python benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import time

BENCH_BODY = r"""
import json, sys, time
import numpy as np
from decaylab import _kernels as K
from decaylab import flows

def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best

def bench_gf():
    sched = np.concatenate([[0.0], np.geomspace(1e-3, 1000.0, 2000)])
    flows.integrate_gradient_flow(flows.Monomial(1/64, 4), 2.0,
                                  sample_schedule=sched)

def bench_hb():
    flows.integrate_heavy_ball_ode(flows.Quadratic(1.0), 1.0, 5.0,
                                   t_end=300.0, t_start=2.5e-3)

def bench_scheme():
    flows.run_heavy_ball_scheme(flows.Quadratic(0.1), 1.0, 3.0, 0.003, 40000)

def bench_modes():
    mus = 1.0/np.geomspace(1.0, 1e4, 257)
    u0 = np.ones_like(mus)
    K.momentum_scheme_modes(mus, u0, 3.0, 1e-3, 3000)

CASES = {"gradient_flow_dp45": bench_gf, "heavy_ball_dp45": bench_hb,
         "momentum_scheme": bench_scheme, "spectral_modes": bench_modes}

repeat = int(sys.argv[1])
for fn in CASES.values():
    fn()   # warm the jit cache before timing
out = {name: timeit(fn, repeat) for name, fn in CASES.items()}
out["numba"] = K.NUMBA_ENABLED
json.dump(out, sys.stdout)
"""


def run_side(disable_numba: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["DECAYLAB_NO_NUMBA"] = "1"
    else:
        env.pop("DECAYLAB_NO_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", BENCH_BODY, str(repeat)],
                          env=env, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.exit(f"benchmark subprocess failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    t0 = time.time()
    jit = run_side(False, args.repeat)
    fallback = run_side(True, args.repeat)
    if not jit.pop("numba"):
        print("note: numba unavailable; both sides ran the fallback")
    fallback.pop("numba")

    width = max(map(len, jit))
    print(f"{'kernel':{width}s} {'numba':>12s} {'fallback':>12s} {'speedup':>9s}")
    for name, tj in jit.items():
        tf = fallback[name]
        print(f"{name:{width}s} {tj * 1e3:10.2f}ms {tf * 1e3:10.2f}ms "
              f"{tf / tj:8.1f}x")
    print(f"(best of {args.repeat}, total wall {time.time() - t0:.1f}s)")


if __name__ == "__main__":
    main()
