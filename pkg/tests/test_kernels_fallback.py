"""The DECAYLAB_NO_NUMBA fallback must produce the same numbers.

A subprocess imports the package with the flag set and re-runs a few kernel
paths; outputs are compared against the in-process (possibly jitted) results.
"""

import json
import os
import subprocess
import sys

import numpy as np

from decaylab import _kernels as K
from decaylab import flows

SCRIPT = r"""
import json, sys
import numpy as np
from decaylab import _kernels as K
from decaylab import flows

assert not K.NUMBA_ENABLED, "fallback flag was ignored"

traj = flows.integrate_gradient_flow(flows.Quadratic(0.5), 2.0, t_end=5.0)
sch = flows.run_heavy_ball_scheme(flows.Quadratic(1.0), 1.0, 3.0, 0.01, 400)
ode = flows.integrate_heavy_ball_ode(flows.Quadratic(1.0), 1.0, 3.0,
                                     t_end=5.0, t_start=1e-3)
u = K.momentum_scheme_modes(np.array([0.25, 0.5]), np.array([1.0, 2.0]),
                            3.0, 1e-3, 500)
json.dump({"gf_x": list(map(float, np.asarray(traj.x))),
           "sch_x": list(map(float, np.asarray(sch.x))),
           "ode_x": list(map(float, np.asarray(ode.x))),
           "modes": list(map(float, u))}, sys.stdout)
"""


def _fallback_outputs():
    env = dict(os.environ, DECAYLAB_NO_NUMBA="1")
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env,
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_fallback_matches_primary_path():
    got = _fallback_outputs()

    traj = flows.integrate_gradient_flow(flows.Quadratic(0.5), 2.0, t_end=5.0)
    sch = flows.run_heavy_ball_scheme(flows.Quadratic(1.0), 1.0, 3.0, 0.01,
                                      400)
    ode = flows.integrate_heavy_ball_ode(flows.Quadratic(1.0), 1.0, 3.0,
                                         t_end=5.0, t_start=1e-3)
    u = K.momentum_scheme_modes(np.array([0.25, 0.5]), np.array([1.0, 2.0]),
                                3.0, 1e-3, 500)

    assert np.allclose(got["gf_x"], np.asarray(traj.x), rtol=1e-13, atol=0)
    assert np.array_equal(got["sch_x"], np.asarray(sch.x))
    assert np.allclose(got["ode_x"], np.asarray(ode.x), rtol=1e-13, atol=0)
    assert np.array_equal(got["modes"], u)


def test_flag_selects_fallback():
    env = dict(os.environ, DECAYLAB_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from decaylab import _kernels as K; print(K.NUMBA_ENABLED)"],
        env=env, capture_output=True, text=True)
    assert proc.stdout.strip() == "False"
